from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from librado.exceptions import CouplingError, DataError, DimensionError


def _frozen_array(values, dtype=np.float64):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Labeled examples: an m x d feature matrix, labels in {-1, +1} and one
    name per feature. Arrays are copied and made read-only on construction.
    """
    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    label_tokens: Optional[Tuple[str, str]] = None

    def __post_init__(self):
        features = _frozen_array(self.features)
        labels = _frozen_array(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DimensionError('features must be an m x d matrix')
        m, d = features.shape
        if m < 1 or d < 1:
            raise DataError(
                f'dataset must have m >= 1 and d >= 1, got {m}x{d}'
            )
        if labels.shape != (m,):
            raise DimensionError(
                f'expected {m} labels, got shape {labels.shape}'
            )
        if not np.all(np.isin(labels, (-1, 1))):
            raise DataError('every label must be exactly -1 or +1')
        if not np.all(np.isfinite(features)):
            raise DataError('feature values must be finite')
        names = tuple(str(x) for x in self.feature_names)
        if len(names) != d:
            raise DimensionError(
                f'expected {d} feature names, got {len(names)}'
            )
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'feature_names', names)

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[indices], self.labels[indices],
            self.feature_names, self.label_tokens
        )

    def class_indices(self, label):
        return np.flatnonzero(self.labels == label)


def edge_vectors(dataset):
    """
    Returns the m x d matrix whose i-th row is the edge vector y_i * x_i
    """
    return dataset.labels[:, None] * dataset.features


@dataclass(frozen=True)
class IterationRecord:
    t: int
    feature: int
    alpha: float
    edge_r: float
    delta: float
    z_norm: float
    floored: int = 0

    def __post_init__(self):
        if not abs(self.edge_r) <= 1:
            raise ValueError(f'edge must lie in [-1, 1], got {self.edge_r}')
        if not self.z_norm > 0:
            raise ValueError(f'normalizer must be positive, got {self.z_norm}')

    def serialize(self):
        return {
            't': self.t,
            'feature': self.feature,
            'alpha': self.alpha,
            'edge_r': self.edge_r,
            'delta': self.delta,
            'z_norm': self.z_norm,
            'floored': self.floored,
        }

    @staticmethod
    def deserialize(doc):
        return IterationRecord(
            t=int(doc['t']),
            feature=int(doc['feature']),
            alpha=float(doc['alpha']),
            edge_r=float(doc['edge_r']),
            delta=float(doc['delta']),
            z_norm=float(doc['z_norm']),
            floored=int(doc.get('floored', 0)),
        )


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    Linear classifier h(x) = theta^T x together with the boosting history
    that produced it.

    `selected_iteration` is the iteration whose classifier `theta` is (it
    differs from `iterations_run` when the best-on-training classifier was
    kept). `scaling` records an optional min-max transform applied to the
    features before training.
    """
    theta: np.ndarray
    history: Tuple[IterationRecord, ...]
    regularizer: object
    iterations_run: int
    feature_names: Tuple[str, ...] = ()
    selected_iteration: Optional[int] = None
    config: dict = field(default_factory=dict)
    scaling: Optional[dict] = None

    def __post_init__(self):
        theta = _frozen_array(self.theta)
        if theta.ndim != 1:
            raise DimensionError('theta must be a vector')
        if not np.all(np.isfinite(theta)):
            raise ValueError('theta must be finite')
        history = tuple(self.history)
        if len(history) != self.iterations_run:
            raise ValueError(
                f'history has {len(history)} records but iterations_run is '
                f'{self.iterations_run}'
            )
        names = tuple(self.feature_names) or tuple(
            f'x{k}' for k in range(theta.shape[0])
        )
        if len(names) != theta.shape[0]:
            raise DimensionError(
                f'{len(names)} feature names for {theta.shape[0]} weights'
            )
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'history', history)
        object.__setattr__(self, 'feature_names', names)

    @property
    def d(self):
        return self.theta.shape[0]


def predict(model, x):
    """
    Returns (score, label) with score = theta^T x; a score of exactly 0 is
    labelled +1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.theta.shape:
        raise DimensionError(
            f'model has {model.d} features, input has shape {x.shape}'
        )
    score = float(model.theta @ x)
    return score, 1 if score >= 0 else -1


def predict_many(model, features):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.d:
        raise DimensionError(
            f'model has {model.d} features, input has shape {features.shape}'
        )
    scores = features @ model.theta
    return scores, np.where(scores >= 0, 1, -1)


def zero_one_error(model, dataset):
    """Percentage of misclassified examples"""
    _, labels = predict_many(model, dataset.features)
    return 100.0 * float(np.mean(labels != dataset.labels))


def support_percent(theta):
    theta = np.asarray(theta)
    return 100.0 * np.count_nonzero(theta) / theta.shape[0]


class GameKind(Enum):
    LogExp = 'log'
    SquareMeanVar = 'square'
    Relu = 'relu'
    Unhinged = 'unhinged'

    @property
    def differentiable(self):
        return self in (GameKind.LogExp, GameKind.SquareMeanVar)


@dataclass(frozen=True)
class GamePair:
    """
    An example/rado generator pair with its strengths mu_e and mu_r.

    LogExp needs mu_e == mu_r. SquareMeanVar needs mu_e == mu_r / 2^(m-1),
    which can only be checked once m is known (see check_coupling).
    """
    kind: GameKind
    mu_e: float = 1.0
    mu_r: float = 1.0

    def __post_init__(self):
        if not (self.mu_e > 0 and self.mu_r > 0):
            raise CouplingError('mu_e and mu_r must be positive')
        if self.kind == GameKind.LogExp and not np.isclose(
            self.mu_e, self.mu_r, rtol=1e-12, atol=0
        ):
            raise CouplingError(
                f'LogExp requires mu_e == mu_r, got {self.mu_e} and '
                f'{self.mu_r}'
            )

    @staticmethod
    def for_size(kind, m, mu_e=1.0):
        kind = GameKind(kind)
        if kind == GameKind.SquareMeanVar:
            return GamePair(kind, mu_e, mu_e * 2.0 ** (m - 1))
        return GamePair(kind, mu_e, mu_e)

    def check_coupling(self, m):
        if self.kind == GameKind.SquareMeanVar:
            expected = self.mu_r / 2.0 ** (m - 1)
            if not np.isclose(self.mu_e, expected, rtol=1e-12, atol=0):
                raise CouplingError(
                    f'SquareMeanVar at m={m} requires mu_e = mu_r/2^(m-1) = '
                    f'{expected}, got {self.mu_e}'
                )
