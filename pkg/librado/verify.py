from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from librado.core import GameKind, GamePair
from librado.helpers import format_scientific
from librado.losses import (
    brute_force_game, equivalence_gap_constancy, indicator_matrix,
    loss_identity_residual
)
from librado.streams import StreamTag, keyed_stream

logger = logging.getLogger(__name__)

GAP_TOLERANCE = 1e-8
COUPLING_TOLERANCE = 1e-8
RESIDUAL_TOLERANCE = {
    GameKind.LogExp: 1e-10,
    GameKind.SquareMeanVar: 1e-10,
    GameKind.Relu: 1e-12,
    GameKind.Unhinged: 1e-12,
}


@dataclass(frozen=True)
class PairReport:
    """
    Outcome of checking one example/rado pair at one size m: the spread of
    the optimal-value gap, the worst residual of the loss identity (relative
    for LogExp) and, for differentiable pairs, the worst distance between
    p* and G_m q*.
    """
    kind: GameKind
    m: int
    trials: int
    gap_mean: float
    gap_std: float
    max_residual: float
    max_coupling: Optional[float] = None

    @property
    def passed(self):
        coupling_ok = self.max_coupling is None or \
            self.max_coupling < COUPLING_TOLERANCE
        return (
            self.gap_std < GAP_TOLERANCE
            and self.max_residual < RESIDUAL_TOLERANCE[self.kind]
            and coupling_ok
        )

    def lines(self):
        lines = [
            f'pair {self.kind.value} m={self.m} trials={self.trials}',
            f'  gap mean {format_scientific(self.gap_mean)} '
            f'std {format_scientific(self.gap_std, 1)}',
            f'  max residual {format_scientific(self.max_residual, 1)}',
        ]
        if self.max_coupling is not None:
            lines.append(
                f'  max |p* - G q*| {format_scientific(self.max_coupling, 1)}'
            )
        lines.append(f'  {"ok" if self.passed else "FAILED"}')
        return lines


def verify_pair(kind, m, trials, seed=0):
    kind = GameKind(kind)
    pair = GamePair.for_size(kind, m)
    gap_mean, gap_std = equivalence_gap_constancy(pair, trials, m, seed)

    stream = keyed_stream(seed, StreamTag.GapTrials, m, 1)
    draws = [stream.standard_normal(m) for _ in range(trials)]
    max_residual = max(
        loss_identity_residual(
            kind, z, relative=kind == GameKind.LogExp
        )
        for z in draws
    )

    max_coupling = None
    if kind.differentiable:
        indicators = indicator_matrix(m)
        max_coupling = 0.0
        for z in draws:
            game = brute_force_game(pair, z)
            distance = np.max(np.abs(game.p_star - indicators @ game.q_star))
            max_coupling = max(max_coupling, float(distance))

    report = PairReport(
        kind, m, trials, gap_mean, gap_std, max_residual, max_coupling
    )
    if not report.passed:
        logger.error('pair %s failed verification at m=%d', kind.value, m)
    return report


def verify(pair='all', m=6, trials=100, seed=0):
    kinds = list(GameKind) if pair == 'all' else [GameKind(pair)]
    return [verify_pair(kind, m, trials, seed) for kind in kinds]
