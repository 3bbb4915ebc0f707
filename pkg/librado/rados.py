from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple
import logging

import numpy as np

from librado import settings
from librado.core import edge_vectors
from librado.exceptions import (
    DataError, DimensionError, EnumerationCapError, UsageError
)
from librado.streams import StreamTag, keyed_stream

logger = logging.getLogger(__name__)


class RadoMode(Enum):
    Full = 'full'
    PlainRandom = 'plain'
    ClassWise = 'classwise'
    Protected = 'protected'
    Singleton = 'singleton'


@dataclass(frozen=True)
class Provenance:
    """
    Where a rado set comes from. Protected sets keep the mode they were
    generated with in `base_mode`; `seed` is dropped when a set is persisted
    after protection (a commitment to it is kept instead). `scaling` is the
    serialized min-max transform applied to the examples, if any.
    """
    mode: RadoMode
    source_m: int
    seed: Optional[int] = None
    epsilon: Optional[float] = None
    r_e: Optional[float] = None
    base_mode: Optional[RadoMode] = None
    seed_commitment: Optional[str] = None
    scaling: Optional[dict] = None

    def serialize(self):
        doc = {'mode': self.mode.value, 'source_m': self.source_m}
        if self.base_mode is not None:
            doc['base_mode'] = self.base_mode.value
        if self.mode == RadoMode.Protected:
            doc['epsilon'] = self.epsilon
            doc['r_e'] = self.r_e
            doc['seed_commitment'] = self.seed_commitment
        elif self.seed is not None:
            doc['seed'] = self.seed
        if self.scaling is not None:
            doc['scaling'] = self.scaling
        return doc

    @staticmethod
    def deserialize(doc):
        base_mode = doc.get('base_mode')
        return Provenance(
            mode=RadoMode(doc['mode']),
            source_m=int(doc['source_m']),
            seed=doc.get('seed'),
            epsilon=doc.get('epsilon'),
            r_e=doc.get('r_e'),
            base_mode=RadoMode(base_mode) if base_mode else None,
            seed_commitment=doc.get('seed_commitment'),
            scaling=doc.get('scaling'),
        )


@dataclass(frozen=True, eq=False)
class RadoSet:
    rados: np.ndarray
    provenance: Provenance
    feature_names: Tuple[str, ...] = ()

    def __post_init__(self):
        rados = np.array(self.rados, dtype=np.float64, copy=True)
        if rados.ndim != 2 or rados.shape[0] < 1:
            raise DataError('a rado set needs at least one rado')
        if not np.all(np.isfinite(rados)):
            raise DataError('rado entries must be finite')
        if (
            self.provenance.mode == RadoMode.Full
            and rados.shape[0] != 2 ** self.provenance.source_m
        ):
            raise DataError(
                f'a full rado set over m={self.provenance.source_m} examples '
                f'has {2 ** self.provenance.source_m} rados, got '
                f'{rados.shape[0]}'
            )
        names = tuple(self.feature_names) or tuple(
            f'x{k}' for k in range(rados.shape[1])
        )
        if len(names) != rados.shape[1]:
            raise DimensionError(
                f'{len(names)} feature names for {rados.shape[1]} columns'
            )
        rados.setflags(write=False)
        object.__setattr__(self, 'rados', rados)
        object.__setattr__(self, 'feature_names', names)

    @property
    def n(self):
        return self.rados.shape[0]

    @property
    def d(self):
        return self.rados.shape[1]

    def with_rados(self, rados, **changes):
        provenance = replace(self.provenance, **changes)
        return RadoSet(rados, provenance, self.feature_names)


def rado_from_sigma(dataset, sigma):
    """pi_sigma = (1/2) * sum_i (sigma_i + y_i) * x_i"""
    sigma = np.asarray(sigma)
    if sigma.shape != (dataset.m,):
        raise DimensionError(
            f'sigma must have {dataset.m} entries, got shape {sigma.shape}'
        )
    if not np.all(np.isin(sigma, (-1, 1))):
        raise DataError('sigma entries must be -1 or +1')
    coefficients = 0.5 * (sigma + dataset.labels)
    return coefficients @ dataset.features


def subset_index(sigma, labels):
    """
    Position of the rado of sigma in the full enumeration: bit i is set iff
    sigma_i == y_i.
    """
    agree = np.asarray(sigma) == np.asarray(labels)
    return int(sum(1 << i for i in np.flatnonzero(agree)))


def _subset_sum_table(edges):
    # row r is the sum of edges over the bits of r, built by doubling
    table = np.zeros((1, edges.shape[1]))
    for edge in edges:
        table = np.vstack((table, table + edge))
    return table


def enumerate_rados(dataset, cap=None):
    """
    Returns all 2^m rados ordered by subset index (bit i set iff example i
    is in the summed subset).
    """
    cap = settings.enumeration_limit() if cap is None else cap
    if dataset.m > cap:
        raise EnumerationCapError(dataset.m, cap)
    table = _subset_sum_table(edge_vectors(dataset))
    return RadoSet(
        table,
        Provenance(RadoMode.Full, dataset.m),
        dataset.feature_names,
    )


def singleton_rados(dataset):
    """The rado set whose j-th rado is the edge vector e_j"""
    return RadoSet(
        edge_vectors(dataset),
        Provenance(RadoMode.Singleton, dataset.m),
        dataset.feature_names,
    )


def generate_rows(n, build, threads=None):
    threads = settings.threads() if threads is None else threads
    if threads <= 1 or n < 2:
        return np.array([build(j) for j in range(n)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(build, range(n))))


def sample_plain(dataset, n, seed=0, threads=None):
    """
    n rados, each computed from an independent uniform sigma in {-1, 1}^m.
    Rado j only depends on (seed, j).
    """
    if n < 1:
        raise UsageError(f'number of rados must be at least 1, got {n}')
    edges = edge_vectors(dataset)

    def build(j):
        stream = keyed_stream(seed, StreamTag.PlainRado, j)
        sigma = 2 * stream.integers(0, 2, size=dataset.m) - 1
        return edges[sigma == dataset.labels].sum(axis=0)

    return RadoSet(
        generate_rows(n, build, threads).reshape(n, dataset.d),
        Provenance(RadoMode.PlainRandom, dataset.m, seed=seed),
        dataset.feature_names,
    )


def sample_classwise(dataset, n, seed=0, threads=None):
    """
    n rados, each summing a random subset of a single class: pick the class
    uniformly, then keep each of its examples with probability 1/2.
    """
    if n < 1:
        raise UsageError(f'number of rados must be at least 1, got {n}')
    edges = edge_vectors(dataset)
    members = {
        label: dataset.class_indices(label) for label in (-1, 1)
    }
    for label, indices in members.items():
        if indices.size == 0:
            raise DataError(
                f'class-wise rados need both classes, class {label:+d} is '
                f'absent'
            )

    def build(j):
        stream = keyed_stream(seed, StreamTag.ClassWiseRado, j)
        label = (-1, 1)[int(stream.integers(0, 2))]
        indices = members[label]
        keep = stream.integers(0, 2, size=indices.size) == 1
        return edges[indices[keep]].sum(axis=0)

    return RadoSet(
        generate_rows(n, build, threads).reshape(n, dataset.d),
        Provenance(RadoMode.ClassWise, dataset.m, seed=seed),
        dataset.feature_names,
    )


def regularize_rados(rados, theta, a_e, omega_value):
    """
    Minkowski shift of every rado by -(a_e * Omega(theta) / ||theta||^2) *
    theta. The set is returned unchanged when theta = 0.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (rados.d,):
        raise DimensionError(
            f'theta has shape {theta.shape}, rados have {rados.d} columns'
        )
    squared_norm = float(theta @ theta)
    if squared_norm == 0:
        return rados
    shift = (a_e * omega_value / squared_norm) * theta
    return rados.with_rados(rados.rados - shift)
