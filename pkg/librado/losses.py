"""
Equivalent example and rado losses, and a brute-force oracle for the game
that makes them equivalent.

Subsets I of [m] are indexed by integers: bit i of the index is set iff i is
in I. This is the same order `librado.rados.enumerate_rados` uses.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, logsumexp, xlogy

from librado import BRUTE_FORCE_MAX_M
from librado.core import GameKind
from librado.exceptions import DataError, UsageError
from librado.streams import StreamTag, keyed_stream

# log of the largest finite double
LOG_MAX_FLOAT = float(np.log(np.finfo(np.float64).max))


class LossValue(float):
    """
    A loss value. When `log_domain` is set the float is the natural log of
    the loss, which overflows double precision.
    """
    def __new__(cls, value, log_domain=False):
        instance = super().__new__(cls, value)
        instance.log_domain = log_domain
        return instance

    @staticmethod
    def from_log(log_value):
        if log_value < LOG_MAX_FLOAT:
            return LossValue(np.exp(log_value))
        return LossValue(log_value, log_domain=True)

    @property
    def log(self):
        return float(self) if self.log_domain else float(np.log(self))

    def __repr__(self):
        if self.log_domain:
            return f'LossValue(log={float(self)!r})'
        return f'LossValue({float(self)!r})'


@dataclass(frozen=True, eq=False)
class GameEvaluation:
    l_e_star: float
    l_r_star: float
    p_star: np.ndarray
    q_star: np.ndarray
    lam: Optional[float] = None

    @property
    def gap(self):
        return self.l_e_star - self.l_r_star


def _check_size(m, limit=BRUTE_FORCE_MAX_M):
    if m > limit:
        raise UsageError(
            f'brute force over 2^{m} subsets refused: m must be <= {limit}'
        )


def subset_sums(z):
    """
    S_I = sum_{i in I} z_i for every subset, in subset-index order. Each
    sum is accumulated in increasing i, so the reduction order is fixed.
    """
    sums = np.zeros(1)
    for value in np.asarray(z, dtype=np.float64):
        sums = np.concatenate((sums, sums + value))
    return sums


def indicator_matrix(m):
    """
    G_m: the m x 2^m binary matrix whose column I indicates the members of
    subset I
    """
    columns = np.arange(2 ** m)
    return (columns[None, :] >> np.arange(m)[:, None]) & 1


def _size_from_sums(sums):
    size = sums.shape[0]
    m = size.bit_length() - 1
    if size < 1 or 2 ** m != size:
        raise DataError(
            f'subset sums must have a power of two length, got {size}'
        )
    return m


def example_loss(kind, z, mu=1.0):
    kind = GameKind(kind)
    scaled = -np.asarray(z, dtype=np.float64) / mu
    if kind == GameKind.LogExp:
        return float(np.sum(np.logaddexp(0.0, scaled)))
    if kind == GameKind.SquareMeanVar:
        return float(np.sum((1.0 + scaled) ** 2))
    if kind == GameKind.Relu:
        return sum(max(0.0, x) for x in scaled.tolist())
    return float(np.sum(scaled))


def rado_loss(kind, sums, mu_r=1.0):
    """
    Rado loss over the 2^m subset sums. Returns a LossValue; only the
    exponential loss can land in the log domain.
    """
    kind = GameKind(kind)
    sums = np.asarray(sums, dtype=np.float64)
    m = _size_from_sums(sums)
    if kind == GameKind.LogExp:
        return LossValue.from_log(float(logsumexp(-sums / mu_r)))
    if kind == GameKind.SquareMeanVar:
        spread = (2.0 ** (m - 1) / mu_r) * float(np.var(sums))
        return LossValue(-(float(np.mean(sums)) - spread))
    if kind == GameKind.Relu:
        return LossValue(max(0.0, float(np.max(-sums / mu_r))))
    return LossValue(float(np.mean(-sums / mu_r)))


def example_objective(pair, p, z):
    """L_e(p, z) = sum_i p_i z_i + mu_e * sum_i phi_e(p_i)"""
    p = np.asarray(p, dtype=np.float64)
    # same left-to-right order as subset_sums
    linear = sum((p * np.asarray(z, dtype=np.float64)).tolist())
    if pair.kind == GameKind.LogExp:
        entropy = xlogy(p, p) + xlogy(1.0 - p, 1.0 - p) - 1.0
        return linear + pair.mu_e * float(np.sum(entropy))
    if pair.kind == GameKind.SquareMeanVar:
        return linear + pair.mu_e * float(
            np.sum(0.5 * (1.0 - 2.0 * p * (1.0 - p)))
        )
    if pair.kind == GameKind.Relu:
        inside = np.all((p >= 0) & (p <= 1))
    else:
        inside = np.all(p == 0.5)
    return linear if inside else np.inf


def rado_objective(pair, q, z):
    """L_r(q, z) = sum_I q_I S_I + mu_r * sum_I phi_r(q_I)"""
    q = np.asarray(q, dtype=np.float64)
    sums = subset_sums(z)
    linear = float(q @ sums)
    if pair.kind == GameKind.LogExp:
        return linear + pair.mu_r * float(np.sum(xlogy(q, q) - q))
    if pair.kind == GameKind.SquareMeanVar:
        return linear + pair.mu_r * float(np.sum(0.5 * q ** 2))
    if pair.kind == GameKind.Relu:
        inside = np.all((q >= 0) & (q <= 1))
    else:
        inside = np.all((q >= 1.0 / sums.shape[0]) & (q <= 0.5))
    return linear if inside else np.inf


def brute_force_game(pair, z):
    """
    Solves both sides of the game for a fixed z: the example player over
    R^m and the rado player over the hyperplane sum_I q_I = 1, using the
    closed forms of each generator pair, then evaluates both objectives at
    the optima.
    """
    z = np.asarray(z, dtype=np.float64)
    m = z.shape[0]
    _check_size(m)
    pair.check_coupling(m)
    sums = subset_sums(z)
    size = sums.shape[0]
    lam = None

    if pair.kind == GameKind.LogExp:
        p_star = expit(-z / pair.mu_e)
        log_partition = float(logsumexp(-sums / pair.mu_r))
        q_star = np.exp(-sums / pair.mu_r - log_partition)
        lam = pair.mu_r * log_partition
    elif pair.kind == GameKind.SquareMeanVar:
        p_star = 0.5 * (1.0 - z / pair.mu_e)
        lam = pair.mu_r / size + 0.5 * float(np.sum(z))
        q_star = (lam - sums) / pair.mu_r
    elif pair.kind == GameKind.Relu:
        p_star = (z < 0).astype(np.float64)
        q_star = np.zeros(size)
        q_star[int(np.sum(2 ** np.flatnonzero(z < 0)))] = 1.0
    else:
        p_star = np.full(m, 0.5)
        q_star = np.full(size, 1.0 / size)

    return GameEvaluation(
        l_e_star=example_objective(pair, p_star, z),
        l_r_star=rado_objective(pair, q_star, z),
        p_star=p_star,
        q_star=q_star,
        lam=lam,
    )


def equivalence_gap_constancy(pair, trials, m, seed=0):
    """
    Mean and standard deviation of L*_e(z) - L*_r(z) over `trials`
    standard normal draws of z. Proportionate generators give a constant
    gap, so the deviation should vanish.
    """
    _check_size(m)
    if trials < 1:
        raise UsageError(f'trials must be at least 1, got {trials}')
    pair.check_coupling(m)
    stream = keyed_stream(seed, StreamTag.GapTrials, m)
    gaps = np.array([
        brute_force_game(pair, stream.standard_normal(m)).gap
        for _ in range(trials)
    ])
    return float(np.mean(gaps)), float(np.std(gaps))


def loss_identity_residual(kind, z, mu=1.0, relative=False):
    """
    Residual of the exact identity linking the example and rado loss of a
    pair:

    - LogExp: sum_I exp(-S_I/mu) = prod_i (1 + exp(-z_i/mu))
    - Relu: rado loss = example loss
    - Unhinged: rado loss = example loss / 2
    - SquareMeanVar (mu_e = 1, mu_r = 2^(m-1)):
      example loss = m + 4 * rado loss

    With `relative`, the residual is divided by the magnitude of the right
    hand side (when nonzero). The absolute LogExp residual is a LossValue,
    in the log domain when it overflows.
    """
    kind = GameKind(kind)
    z = np.asarray(z, dtype=np.float64)
    m = z.shape[0]
    _check_size(m)
    sums = subset_sums(z)
    if kind == GameKind.LogExp:
        log_lhs = float(logsumexp(-sums / mu))
        log_rhs = float(np.sum(np.logaddexp(0.0, -z / mu)))
        gap = abs(float(np.expm1(log_lhs - log_rhs)))
        if relative:
            return gap
        if gap == 0.0:
            return LossValue(0.0)
        # |lhs - rhs| = rhs * |expm1(log lhs - log rhs)|
        return LossValue.from_log(log_rhs + float(np.log(gap)))
    elif kind == GameKind.Relu:
        lhs, rhs = rado_loss(kind, sums, mu), example_loss(kind, z, mu)
    elif kind == GameKind.Unhinged:
        lhs, rhs = rado_loss(kind, sums, mu), example_loss(kind, z, mu) / 2
    else:
        lhs = example_loss(kind, z, 1.0)
        rhs = m + 4.0 * rado_loss(kind, sums, 2.0 ** (m - 1))
    residual = abs(float(lhs) - float(rhs))
    if relative and rhs != 0:
        return residual / abs(float(rhs))
    return residual


def example_log_loss(edges, theta):
    """Mean logistic loss (1/m) sum_i log(1 + exp(-theta^T e_i))"""
    margins = np.asarray(edges) @ np.asarray(theta, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, -margins)))
