"""
Boosting with rados: coordinate-wise AdaBoost over a rado set where the
regularizer enters through the weight update instead of through shifted
(Minkowski-summed) rados.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

import numpy as np
from scipy.special import logsumexp

from librado import DEFAULT_CLAMP_GAMMA, WEIGHT_FLOOR
from librado.core import IterationRecord, LinearModel
from librado.exceptions import DeadFeaturesError, InfiniteStepError, UsageError
from librado.losses import LossValue
from librado.rados import regularize_rados, singleton_rados
from librado.regularizers import (
    RegularizerKind, RegularizerSpec, omega_value
)

logger = logging.getLogger(__name__)

LOG_WEIGHT_FLOOR = math.log(WEIGHT_FLOOR)


class WeakLearnerMode(Enum):
    FirstAdmissible = 'first'
    PreferenceOrder = 'preference'


class Selection(Enum):
    Last = 'last'
    BestOnTraining = 'best'


@dataclass(frozen=True)
class BoostConfig:
    T: int
    regularizer: RegularizerSpec = field(
        default_factory=lambda: RegularizerSpec(RegularizerKind.Lasso)
    )
    clamp_gamma: float = DEFAULT_CLAMP_GAMMA
    wl_mode: WeakLearnerMode = WeakLearnerMode.PreferenceOrder
    select: Selection = Selection.Last
    seed: int = 0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise UsageError(f'T must be a positive integer, got {self.T}')
        if not 0 < self.clamp_gamma <= 1:
            raise UsageError(
                f'clamp gamma must lie in (0, 1], got {self.clamp_gamma}'
            )
        object.__setattr__(self, 'T', int(self.T))
        object.__setattr__(self, 'wl_mode', WeakLearnerMode(self.wl_mode))
        object.__setattr__(self, 'select', Selection(self.select))

    def serialize(self):
        return {
            'T': self.T,
            'regularizer': self.regularizer.serialize(),
            'clamp_gamma': self.clamp_gamma,
            'wl_mode': self.wl_mode.value,
            'select': self.select.value,
            'seed': self.seed,
        }

    @staticmethod
    def deserialize(doc):
        return BoostConfig(
            T=int(doc['T']),
            regularizer=RegularizerSpec.deserialize(doc['regularizer']),
            clamp_gamma=float(doc['clamp_gamma']),
            wl_mode=WeakLearnerMode(doc['wl_mode']),
            select=Selection(doc['select']),
            seed=int(doc.get('seed', 0)),
        )


@dataclass(frozen=True, eq=False)
class FeatureScale:
    """pi_star[k] = max_j |pi_jk|; features with pi_star = 0 are dead"""
    pi_star: np.ndarray

    @property
    def live(self):
        return self.pi_star > 0


def feature_scale(rados):
    pi_star = np.max(np.abs(rados.rados), axis=0)
    pi_star.setflags(write=False)
    return FeatureScale(pi_star)


def _all_edges(rados, w, scale):
    live = scale.live
    weighted = w @ rados.rados
    edges = np.zeros(rados.d)
    edges[live] = weighted[live] / scale.pi_star[live]
    return np.clip(edges, -1.0, 1.0)


def edge(rados, w, k, scale):
    """r = (1 / pi_star_k) sum_j w_j pi_jk, 0 for a dead feature"""
    if scale.pi_star[k] == 0:
        return 0.0
    value = float(np.asarray(w) @ rados.rados[:, k]) / scale.pi_star[k]
    return min(1.0, max(-1.0, value))


def alpha_update(r, pi_star_k):
    """alpha = log((1 + r) / (1 - r)) / (2 pi_star_k)"""
    if not abs(r) < 1:
        raise InfiniteStepError(r)
    return math.atanh(r) / pi_star_k


def clamp_edge_ridge(r, gamma):
    if not 0 < gamma <= 1:
        raise UsageError(f'clamp gamma must lie in (0, 1], got {gamma}')
    if abs(r) <= gamma:
        return r
    return math.copysign(gamma, r)


def select_feature(abs_r, delta, mode, live=None):
    """
    Index of the chosen feature: largest |r| for FirstAdmissible, largest
    |r| - delta for PreferenceOrder. Ties go to the lowest index and dead
    features are never chosen.
    """
    abs_r = np.asarray(abs_r, dtype=np.float64)
    if WeakLearnerMode(mode) == WeakLearnerMode.PreferenceOrder:
        scores = abs_r - np.asarray(delta, dtype=np.float64)
    else:
        scores = abs_r.copy()
    if live is not None:
        live = np.asarray(live, dtype=bool)
        if not live.any():
            raise DeadFeaturesError('no live feature left to select')
        scores = np.where(live, scores, -np.inf)
    return int(np.argmax(scores))


def _applied_edges(edges, config):
    if config.regularizer.kind != RegularizerKind.Ridge:
        return edges
    gamma = config.clamp_gamma
    return np.clip(edges, -gamma, gamma)


def _lookahead_deltas(theta, applied, scale, spec):
    deltas = np.zeros(theta.shape[0])
    if spec.omega == 0:
        return deltas
    current = omega_value(spec, theta)
    for k in np.flatnonzero(scale.live):
        # an infinite step is reported when the feature is actually used
        if abs(applied[k]) >= 1:
            continue
        stepped = theta.copy()
        stepped[k] += alpha_update(applied[k], scale.pi_star[k])
        deltas[k] = spec.omega * (omega_value(spec, stepped) - current)
    return deltas


def weak_learner(rados, w, config, theta, scale=None):
    """
    Picks one feature and returns (feature, r). For ridge the returned edge
    is clamped to [-clamp_gamma, clamp_gamma]; the selection itself always
    ranks the unclamped |r|.
    """
    scale = feature_scale(rados) if scale is None else scale
    if not scale.live.any():
        raise DeadFeaturesError('every rado feature is identically zero')
    edges = _all_edges(rados, np.asarray(w), scale)
    applied = _applied_edges(edges, config)
    if config.wl_mode == WeakLearnerMode.PreferenceOrder:
        deltas = _lookahead_deltas(
            np.asarray(theta, dtype=np.float64), applied, scale,
            config.regularizer
        )
    else:
        deltas = np.zeros(rados.d)
    k = select_feature(np.abs(edges), deltas, config.wl_mode, scale.live)
    return k, float(applied[k])


def _log_regularized_loss(margins, theta, spec):
    n = margins.shape[0]
    penalty = 0.0
    if spec.omega > 0 and np.any(theta):
        penalty = spec.omega * omega_value(spec, theta)
    return float(logsumexp(-margins + penalty)) - math.log(n)


def regularized_exp_rado_loss(rados, theta, spec):
    """
    (1/n) sum_j exp(-theta^T pi_j + omega Omega(theta)), evaluated in log
    space. The omega factor is dropped when theta = 0.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if not np.any(theta):
        return LossValue(1.0)
    margins = rados.rados @ theta
    return LossValue.from_log(_log_regularized_loss(margins, theta, spec))


def exp_rado_loss(rados, theta):
    return regularized_exp_rado_loss(
        rados, theta, RegularizerSpec(RegularizerKind.Lasso)
    )


def minkowski_exp_rado_loss(rados, theta, spec):
    """
    Same loss as regularized_exp_rado_loss, computed on the explicitly
    shifted rados pi_j - omega (Omega(theta) / ||theta||^2) theta.
    """
    theta = np.asarray(theta, dtype=np.float64)
    shifted = regularize_rados(
        rados, theta, spec.omega, omega_value(spec, theta)
    )
    margins = shifted.rados @ theta
    log_loss = float(logsumexp(-margins)) - math.log(rados.n)
    return LossValue.from_log(log_loss)


def _floor_weights(log_w):
    floored = log_w < LOG_WEIGHT_FLOOR
    count = int(np.count_nonzero(floored))
    if count:
        log_w = np.where(floored, LOG_WEIGHT_FLOOR, log_w)
        log_w = log_w - logsumexp(log_w)
    return log_w, count


def boost(rados, config):
    """
    Runs T rounds of regularized rado boosting from theta = 0 and uniform
    weights. Each round picks a feature, takes the step alpha on it, sets
    delta_t = omega (Omega(theta_t) - Omega(theta_{t-1})) and reweights
    w <- w exp(-alpha pi + delta) / Z.

    The product of the normalizers Z_t equals the regularized exp rado
    loss of theta_T as long as no weight had to be floored.
    """
    spec = config.regularizer
    scale = feature_scale(rados)
    dead = int(np.count_nonzero(~scale.live))
    if dead == rados.d:
        raise DeadFeaturesError('every rado feature is identically zero')
    if dead:
        logger.info('%d of %d features are dead and never selected',
                    dead, rados.d)

    n = rados.n
    theta = np.zeros(rados.d)
    log_w = np.full(n, -math.log(n))
    margins = np.zeros(n)
    penalty = 0.0
    history = []
    best = None

    for t in range(1, config.T + 1):
        k, r = weak_learner(rados, np.exp(log_w), config, theta, scale)
        try:
            alpha = alpha_update(r, scale.pi_star[k])
        except InfiniteStepError as error:
            raise InfiniteStepError(error.edge, iteration=t) from error

        theta[k] += alpha
        column = rados.rados[:, k]
        margins += alpha * column
        previous, penalty = penalty, (
            spec.omega * omega_value(spec, theta) if spec.omega > 0 else 0.0
        )
        delta = penalty - previous

        log_unnormalized = log_w - alpha * column + delta
        log_z = float(logsumexp(log_unnormalized))
        log_w, floored = _floor_weights(log_unnormalized - log_z)
        if floored:
            logger.warning(
                'iteration %d: %d weights below %g were floored',
                t, floored, WEIGHT_FLOOR
            )

        history.append(IterationRecord(
            t=t, feature=k, alpha=alpha, edge_r=r, delta=delta,
            z_norm=math.exp(log_z), floored=floored,
        ))
        logger.debug('iteration %d: feature %d, r=%.6g, alpha=%.6g',
                     t, k, r, alpha)

        if config.select == Selection.BestOnTraining:
            loss = _log_regularized_loss(margins, theta, spec)
            if best is None or loss < best[0]:
                best = (loss, t, theta.copy())

    selected, selected_theta = config.T, theta
    if best is not None:
        _, selected, selected_theta = best

    return LinearModel(
        theta=selected_theta,
        history=tuple(history),
        regularizer=spec,
        iterations_run=config.T,
        feature_names=rados.feature_names,
        selected_iteration=selected,
        config=config.serialize(),
        scaling=rados.provenance.scaling,
    )


def baseline_example_boost(dataset, config):
    """boost over the singleton rados, i.e. AdaBoost on the examples"""
    return boost(singleton_rados(dataset), config)


def replay_theta(model, iterations=None):
    """theta after `iterations` rounds of the model's history"""
    iterations = model.iterations_run if iterations is None else iterations
    theta = np.zeros(model.d)
    for record in model.history[:iterations]:
        theta[record.feature] += record.alpha
    return theta


def linf_t_star(model):
    """
    Number of iterations that updated a feature attaining the l_inf norm
    of the selected classifier (summed over all such features).
    """
    iterations = model.selected_iteration or model.iterations_run
    theta = replay_theta(model, iterations)
    top = np.max(np.abs(theta))
    if top == 0:
        return 0
    attaining = set(np.flatnonzero(np.abs(theta) == top).tolist())
    return sum(
        1 for record in model.history[:iterations]
        if record.feature in attaining
    )
