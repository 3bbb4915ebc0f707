"""
Differentially private rado release through the Laplace mechanism.
"""
from dataclasses import dataclass
import hashlib
import logging
import math

import numpy as np
from scipy.spatial.distance import cdist

from librado.core import edge_vectors
from librado.exceptions import UsageError
from librado.rados import Provenance, RadoMode, RadoSet, generate_rows
from librado.streams import StreamTag, keyed_stream

logger = logging.getLogger(__name__)

EXACT_DIAMETER_MAX_M = 10 ** 4


@dataclass(frozen=True)
class DpParams:
    """
    `epsilon` is the budget for the whole released set, `r_e` an upper
    bound on the l1 distance between any two edge vectors.
    """
    epsilon: float
    r_e: float
    seed: int = 0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise UsageError(f'epsilon must be positive, got {self.epsilon}')
        if not (self.r_e > 0 and math.isfinite(self.r_e)):
            raise UsageError(f'r_e must be positive, got {self.r_e}')
        if int(self.seed) < 0:
            raise UsageError(f'seed must be nonnegative, got {self.seed}')

    def noise_scale(self, n):
        return n * self.r_e / self.epsilon


def laplace_from_uniform(u, scale):
    """Inverse Laplace CDF at u + 1/2, for u in (-1/2, 1/2)"""
    u = np.asarray(u, dtype=np.float64)
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def _uniforms(stream, size):
    # numpy draws from [-1/2, 1/2); the endpoint has no finite inverse
    u = stream.uniform(-0.5, 0.5, size=size)
    at_endpoint = u == -0.5
    while np.any(at_endpoint):
        u[at_endpoint] = stream.uniform(
            -0.5, 0.5, size=int(np.count_nonzero(at_endpoint))
        )
        at_endpoint = u == -0.5
    return u


def laplace_sample(scale, stream):
    if not scale > 0:
        raise UsageError(f'laplace scale must be positive, got {scale}')
    return float(laplace_from_uniform(_uniforms(stream, 1)[0], scale))


def laplace_samples(scale, stream, size):
    if not scale > 0:
        raise UsageError(f'laplace scale must be positive, got {scale}')
    return laplace_from_uniform(_uniforms(stream, size), scale)


def edge_diameter_bound(dataset):
    """2 max_i ||y_i x_i||_1, an upper bound on the edge l1 diameter"""
    return 2.0 * float(np.max(np.sum(np.abs(edge_vectors(dataset)), axis=1)))


def exact_edge_diameter(dataset, block_size=1024):
    """Largest pairwise l1 distance between edge vectors, for m <= 10^4"""
    if dataset.m > EXACT_DIAMETER_MAX_M:
        raise UsageError(
            f'exact diameter is limited to m <= {EXACT_DIAMETER_MAX_M}, '
            f'got m={dataset.m}'
        )
    edges = edge_vectors(dataset)
    diameter = 0.0
    for start in range(0, dataset.m, block_size):
        block = edges[start:start + block_size]
        diameter = max(
            diameter, float(np.max(cdist(block, edges, 'cityblock')))
        )
    return diameter


def resolve_r_e(dataset, r_e=None):
    """
    The diameter bound to calibrate noise with: the cheap bound when none
    is given, otherwise `r_e` (with a warning when it is below the bound).
    """
    bound = edge_diameter_bound(dataset)
    if r_e is None:
        if bound == 0:
            raise UsageError('edge diameter is 0, supply r_e explicitly')
        return bound
    if r_e < bound:
        logger.warning(
            'r_e=%g is below the edge diameter bound %g; the privacy '
            'guarantee holds only if r_e bounds the true diameter',
            r_e, bound
        )
    return r_e


def seed_commitment(seed):
    """SHA-256 of the noise seed, stored instead of the seed itself"""
    return hashlib.sha256(f'librado:{int(seed)}'.encode('ascii')).hexdigest()


def laplace_noise(n, d, params, threads=None):
    """
    n x d matrix of Laplace(n r_e / epsilon) noise; entry (j, k) comes from
    its own stream keyed by (seed, j, k).
    """
    scale = params.noise_scale(n)

    def build(j):
        return [
            laplace_sample(
                scale, keyed_stream(params.seed, StreamTag.LaplaceNoise, j, k)
            )
            for k in range(d)
        ]

    return generate_rows(n, build, threads).reshape(n, d)


def dp_protect(rados, params, threads=None):
    """
    Adds Laplace noise of scale n r_e / epsilon to every coordinate of
    every rado, which makes the released set epsilon-differentially
    private with respect to a change of one example.
    """
    noise = laplace_noise(rados.n, rados.d, params, threads)
    source = rados.provenance
    base_mode = source.base_mode if source.mode == RadoMode.Protected \
        else source.mode
    provenance = Provenance(
        mode=RadoMode.Protected,
        source_m=source.source_m,
        epsilon=params.epsilon,
        r_e=params.r_e,
        base_mode=base_mode,
        seed_commitment=seed_commitment(params.seed),
        scaling=source.scaling,
    )
    return RadoSet(rados.rados + noise, provenance, rados.feature_names)


def dp_protect_edges(edges, params, feature_names=(), threads=None):
    """
    Protects a sample of edge vectors with the same keyed noise dp_protect
    would add to a rado set of the same size.
    """
    edges = np.asarray(edges, dtype=np.float64)
    singletons = RadoSet(
        edges, Provenance(RadoMode.Singleton, edges.shape[0]), feature_names
    )
    return dp_protect(singletons, params, threads)


def epsilon_a(epsilon, n, m):
    """
    Example-equivalent budget n log(1 + (exp(epsilon / n) - 1) / m).
    For reporting only, never for calibrating noise.
    """
    if not (epsilon > 0 and n > 0 and m > 0):
        raise UsageError('epsilon, n and m must all be positive')
    if m == 1:
        return float(epsilon)
    return n * math.log1p(math.expm1(epsilon / n) / m)
