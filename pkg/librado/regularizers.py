"""
Regularizers Omega(theta) used by rado boosting, SLOPE's normal-quantile
weights and the omega values under which the boosting guarantees hold.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple
import math

import numpy as np
from scipy.special import erfc

from librado.exceptions import DeadFeaturesError, DimensionError, UsageError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# rational approximation of the normal quantile, refined by one Halley step
_CENTRAL_NUMERATOR = (
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00,
)
_CENTRAL_DENOMINATOR = (
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01, 1.0,
)
_TAIL_NUMERATOR = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00,
)
_TAIL_DENOMINATOR = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00, 1.0,
)
_TAIL_SPLIT = 0.02425


class RegularizerKind(Enum):
    Lasso = 'lasso'
    Ridge = 'ridge'
    LInf = 'linf'
    Slope = 'slope'
    Combo = 'combo'


@dataclass(frozen=True)
class RegularizerSpec:
    """
    A regularizer Omega together with its strength omega.

    Ridge uses Omega(theta) = theta^T Gamma theta with a diagonal Gamma;
    `gamma_diag=None` stands for the identity. Combo is a nonnegative
    combination of other specs, stored in `components` as (weight, spec)
    pairs; the component strengths are ignored, only the outer omega
    applies.
    """
    kind: RegularizerKind
    omega: float = 0.0
    gamma_diag: Optional[Tuple[float, ...]] = None
    q: float = 0.1
    components: Tuple[Tuple[float, 'RegularizerSpec'], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'kind', RegularizerKind(self.kind))
        if not self.omega >= 0 or not math.isfinite(self.omega):
            raise UsageError(
                f'omega must be finite and >= 0, got {self.omega}'
            )
        if self.gamma_diag is not None:
            gamma = tuple(float(g) for g in self.gamma_diag)
            if not gamma or any(not g > 0 for g in gamma):
                raise UsageError('ridge gamma_diag entries must be positive')
            object.__setattr__(self, 'gamma_diag', gamma)
        if self.kind == RegularizerKind.Slope and not 0 < self.q < 1:
            raise UsageError(f'slope q must lie in (0, 1), got {self.q}')
        if self.kind == RegularizerKind.Combo:
            components = tuple(
                (float(weight), spec) for weight, spec in self.components
            )
            weights = [weight for weight, _ in components]
            if not weights or any(w < 0 for w in weights) or max(weights) <= 0:
                raise UsageError(
                    'combo weights must be >= 0 with at least one positive'
                )
            object.__setattr__(self, 'components', components)

    @property
    def label(self):
        """Short text form, as accepted by parse_regularizer"""
        if self.kind == RegularizerKind.Slope:
            return f'slope:{self.q:g}'
        if self.kind == RegularizerKind.Combo:
            return 'combo:' + '+'.join(
                f'{weight:g}*{spec.label}' for weight, spec in self.components
            )
        return self.kind.value

    def with_omega(self, omega):
        return RegularizerSpec(
            self.kind, omega, self.gamma_diag, self.q, self.components
        )

    def serialize(self):
        doc = {'kind': self.kind.value, 'omega': self.omega}
        if self.kind == RegularizerKind.Ridge and self.gamma_diag is not None:
            doc['gamma_diag'] = list(self.gamma_diag)
        if self.kind == RegularizerKind.Slope:
            doc['q'] = self.q
        if self.kind == RegularizerKind.Combo:
            doc['components'] = [
                {'weight': weight, 'spec': spec.serialize()}
                for weight, spec in self.components
            ]
        return doc

    @staticmethod
    def deserialize(doc):
        gamma = doc.get('gamma_diag')
        return RegularizerSpec(
            kind=RegularizerKind(doc['kind']),
            omega=float(doc.get('omega', 0.0)),
            gamma_diag=tuple(gamma) if gamma is not None else None,
            q=float(doc.get('q', 0.1)),
            components=tuple(
                (float(c['weight']), RegularizerSpec.deserialize(c['spec']))
                for c in doc.get('components', ())
            ),
        )


def parse_regularizer(text, omega=0.0):
    """
    Parses `lasso`, `ridge`, `linf`, `slope[:q]` or
    `combo:w*spec+w*spec...` (components may not be combos themselves).
    """
    text = str(text).strip().lower()
    head, _, tail = text.partition(':')
    try:
        kind = RegularizerKind(head)
    except ValueError:
        raise UsageError(f'unknown regularizer {text!r}')

    if kind == RegularizerKind.Slope:
        try:
            q = float(tail) if tail else 0.1
        except ValueError:
            raise UsageError(f'slope q must be a number, got {tail!r}')
        return RegularizerSpec(kind, omega, q=q)
    if kind == RegularizerKind.Combo:
        components = []
        for term in tail.split('+'):
            weight, star, inner = term.partition('*')
            if not star or inner.startswith('combo'):
                raise UsageError(f'malformed combo term {term!r}')
            try:
                weight = float(weight)
            except ValueError:
                raise UsageError(f'combo weight must be a number: {term!r}')
            components.append((weight, parse_regularizer(inner)))
        return RegularizerSpec(kind, omega, components=tuple(components))
    if tail:
        raise UsageError(f'{kind.value} takes no parameter, got {text!r}')
    return RegularizerSpec(kind, omega)


def normal_cdf(x):
    """Standard normal CDF Phi(x), via erfc so both tails keep precision"""
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / SQRT2)


def _polynomial(coefficients, x):
    result = np.zeros_like(x)
    for coefficient in coefficients:
        result = result * x + coefficient
    return result


def inverse_normal_cdf(p):
    """
    Phi^-1(p) for p in (0, 1), scalar or array.

    A rational approximation (relative error about 1e-9) is polished with
    one Halley step on Phi(x) - p. In the upper half the residual is taken
    as (1 - p) - Phi(-x) so that it does not cancel.
    """
    scalar = np.isscalar(p)
    p = np.asarray(p, dtype=np.float64)
    if np.any(~((p > 0) & (p < 1))):
        raise UsageError('inverse_normal_cdf needs 0 < p < 1')

    lower = np.minimum(p, 1.0 - p)

    tail = lower < _TAIL_SPLIT
    q = np.sqrt(-2.0 * np.log(np.where(tail, lower, 0.5)))
    tail_x = (
        _polynomial(_TAIL_NUMERATOR, q) / _polynomial(_TAIL_DENOMINATOR, q)
    )
    r = p - 0.5
    s = r * r
    central_x = (
        _polynomial(_CENTRAL_NUMERATOR, s) * r
        / _polynomial(_CENTRAL_DENOMINATOR, s)
    )
    # the tail formula gives the lower-tail quantile of `lower`
    x = np.where(tail, np.where(p < 0.5, tail_x, -tail_x), central_x)

    residual = np.where(
        p <= 0.5, normal_cdf(x) - p, (1.0 - p) - normal_cdf(-x)
    )
    u = residual * SQRT2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)

    return float(x) if scalar else x


@dataclass(frozen=True, eq=False)
class SlopeXis:
    """SLOPE weights xi_k = Phi^-1(1 - k q / (2d)), nonincreasing in k"""
    xis: np.ndarray

    def __post_init__(self):
        xis = np.array(self.xis, dtype=np.float64, copy=True)
        if xis.ndim != 1 or np.any(np.diff(xis) > 0) or np.any(xis <= 0):
            raise ValueError('slope weights must be positive, nonincreasing')
        xis.setflags(write=False)
        object.__setattr__(self, 'xis', xis)

    def __len__(self):
        return self.xis.shape[0]


@lru_cache(maxsize=64)
def slope_xis(d, q):
    if int(d) != d or d < 1:
        raise UsageError(f'slope needs d >= 1, got {d}')
    if not 0 < q < 1:
        raise UsageError(f'slope q must lie in (0, 1), got {q}')
    ks = np.arange(1, int(d) + 1, dtype=np.float64)
    return SlopeXis(inverse_normal_cdf(1.0 - ks * q / (2.0 * d)))


def omega_value(spec, theta):
    """Omega(theta), without the strength omega"""
    theta = np.asarray(theta, dtype=np.float64)
    magnitudes = np.abs(theta)
    if spec.kind == RegularizerKind.Lasso:
        return float(np.sum(magnitudes))
    if spec.kind == RegularizerKind.Ridge:
        gamma = _gamma_diag(spec, theta.shape[0])
        return float(np.sum(gamma * theta * theta))
    if spec.kind == RegularizerKind.LInf:
        return float(np.max(magnitudes)) if magnitudes.size else 0.0
    if spec.kind == RegularizerKind.Slope:
        xis = slope_xis(theta.shape[0], spec.q).xis
        return float(np.sort(magnitudes)[::-1] @ xis)
    return float(sum(
        weight * omega_value(component, theta)
        for weight, component in spec.components
    ))


def _gamma_diag(spec, d):
    if spec.gamma_diag is None:
        return np.ones(d)
    if len(spec.gamma_diag) != d:
        raise DimensionError(
            f'ridge gamma_diag has {len(spec.gamma_diag)} entries for '
            f'{d} features'
        )
    return np.asarray(spec.gamma_diag)


def _live_column_maxima(rados):
    maxima = np.max(np.abs(rados.rados), axis=0)
    live = maxima[maxima > 0]
    if live.size == 0:
        raise DeadFeaturesError('every rado feature is identically zero')
    return live


def admissible_omega(spec, rados, T, gamma_wl, a):
    """
    The omega under which the boosting guarantee of `spec.kind` holds.

    - Ridge: the strict upper bound 2a min_k max_j pi_jk^2 / (T lambda_Gamma)
      for 0 < a < 1/5; callers pick omega below it.
    - Lasso and LInf: a gamma_wl min_k max_j |pi_jk| for 0 < a < 3/11.
    - Slope: 1.

    Dead features (all-zero columns) are left out of the minimum.
    """
    kind = spec.kind if isinstance(spec, RegularizerSpec) else \
        RegularizerKind(spec)
    if kind == RegularizerKind.Slope:
        return 1.0
    if kind == RegularizerKind.Combo:
        raise UsageError('no admissible omega is known for combinations')
    if T < 1:
        raise UsageError(f'T must be at least 1, got {T}')
    if not 0 < gamma_wl <= 1:
        raise UsageError(f'gamma_wl must lie in (0, 1], got {gamma_wl}')

    maxima = _live_column_maxima(rados)
    if kind == RegularizerKind.Ridge:
        if not 0 < a < 0.2:
            raise UsageError(f'ridge needs 0 < a < 1/5, got a={a}')
        gamma = (
            spec.gamma_diag
            if isinstance(spec, RegularizerSpec) and spec.gamma_diag
            else (1.0,)
        )
        return 2.0 * a * float(np.min(maxima) ** 2) / (T * max(gamma))
    if not 0 < a < 3.0 / 11.0:
        raise UsageError(f'{kind.value} needs 0 < a < 3/11, got a={a}')
    return a * gamma_wl * float(np.min(maxima))


def slope_q_check(rados, gamma_wl, d=None, order=None):
    """
    Smallest q for which the SLOPE guarantee holds:
    2 max_k (1 - Phi((3 gamma_wl / 11) max_j |pi_jk|)) / (k / d).

    Features are ranked in column order unless `order` gives another
    ranking of the columns.
    """
    maxima = np.max(np.abs(rados.rados), axis=0)
    if order is not None:
        maxima = maxima[np.asarray(order)]
    d = maxima.shape[0] if d is None else d
    if d != maxima.shape[0]:
        raise DimensionError(f'd={d} but rados have {maxima.shape[0]} columns')
    ks = np.arange(1, d + 1, dtype=np.float64)
    upper_tail = normal_cdf(-(3.0 * gamma_wl / 11.0) * maxima)
    return float(2.0 * np.max(upper_tail / (ks / d)))


def slope_a_diagnostic(rados, gamma_wl, q):
    """
    The constant a of the SLOPE guarantee,
    min(3 gamma_wl / 11, Phi^-1(1 - q/(2d)) / min_k max_j |pi_jk|).
    Reported only; training never uses it.
    """
    maxima = _live_column_maxima(rados)
    xi_d = inverse_normal_cdf(1.0 - q / (2.0 * rados.d))
    return min(3.0 * gamma_wl / 11.0, xi_d / float(np.min(maxima)))


def dual_norm(kind, z):
    """
    Dual norm of the norm underlying `kind`: l1 and linf are dual to each
    other, and ridge is read as the l2 norm, which is self dual.
    """
    kind = kind.kind if isinstance(kind, RegularizerSpec) else \
        RegularizerKind(kind)
    z = np.abs(np.asarray(z, dtype=np.float64))
    if kind == RegularizerKind.Lasso:
        return float(np.max(z))
    if kind == RegularizerKind.LInf:
        return float(np.sum(z))
    if kind == RegularizerKind.Ridge:
        return float(np.sqrt(z @ z))
    raise UsageError(f'no dual norm available for {kind.value}')


def norm_value(kind, theta):
    """The plain norm paired with dual_norm (ridge read as l2)"""
    kind = RegularizerKind(kind)
    theta = np.abs(np.asarray(theta, dtype=np.float64))
    if kind == RegularizerKind.Lasso:
        return float(np.sum(theta))
    if kind == RegularizerKind.LInf:
        return float(np.max(theta))
    if kind == RegularizerKind.Ridge:
        return float(np.sqrt(theta @ theta))
    raise UsageError(f'no plain norm available for {kind.value}')


def loss_upper_bound(kind, gamma_wl, T, a, t_star=0):
    """
    Decay bound on the normalized regularized rado loss after T
    iterations: exp(-a g^2 T / 2) for ridge and slope, exp(-(a g T) g^2 / 2)
    for lasso and exp(-((T - T*) + a g T*) g^2 / 2) for linf.
    """
    kind = RegularizerKind(kind)
    g2 = gamma_wl * gamma_wl
    if kind in (RegularizerKind.Ridge, RegularizerKind.Slope):
        return math.exp(-a * g2 * T / 2.0)
    if kind == RegularizerKind.Lasso:
        return math.exp(-(a * gamma_wl * T) * g2 / 2.0)
    if kind == RegularizerKind.LInf:
        return math.exp(-((T - t_star) + a * gamma_wl * t_star) * g2 / 2.0)
    raise UsageError('no decay bound is known for combinations')
