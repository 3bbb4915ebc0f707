import math

import numpy as np
import pytest

from librado.core import GameKind, GamePair
from librado.exceptions import CouplingError, UsageError
from librado.losses import (
    LossValue, brute_force_game, equivalence_gap_constancy, example_loss,
    example_objective, indicator_matrix, loss_identity_residual, rado_loss,
    rado_objective, subset_sums
)

ALL_KINDS = list(GameKind)
DIFFERENTIABLE = [GameKind.LogExp, GameKind.SquareMeanVar]


@pytest.mark.parametrize(
    ('kind', 'z', 'expected'),
    [
        (GameKind.LogExp, (0.0, 0.0), 2 * math.log(2)),
        (GameKind.Relu, (1.0, -2.0, 3.0), 2.0),
        (GameKind.Unhinged, (1.0, -2.0, 3.0), -2.0),
        (GameKind.SquareMeanVar, (1.0,), 0.0),
    ]
)
def test_example_loss(kind, z, expected):
    assert example_loss(kind, z, 1.0) == pytest.approx(expected, abs=1e-12)


def test_subset_sums_order():
    np.testing.assert_array_equal(
        subset_sums((1.0, 2.0, 4.0)), [0, 1, 2, 3, 4, 5, 6, 7]
    )


def test_indicator_matrix():
    np.testing.assert_array_equal(
        indicator_matrix(2), [[0, 1, 0, 1], [0, 0, 1, 1]]
    )


def test_rado_loss_of_unhinged_example():
    sums = subset_sums((1.0, -2.0, 3.0))
    assert rado_loss(GameKind.Unhinged, sums) == pytest.approx(-1.0)


def test_rado_loss_goes_to_log_domain():
    sums = subset_sums(np.full(3, -400.0))
    loss = rado_loss(GameKind.LogExp, sums)
    assert loss.log_domain
    assert loss.log == pytest.approx(1200.0, rel=1e-9)


def test_loss_value_plain():
    value = LossValue.from_log(0.0)
    assert not value.log_domain
    assert value == 1.0 and value.log == 0.0


def test_log_exp_game_m1():
    game = brute_force_game(GamePair(GameKind.LogExp), np.zeros(1))
    np.testing.assert_allclose(game.p_star, [0.5])
    np.testing.assert_allclose(game.q_star, [0.5, 0.5])
    assert game.gap == pytest.approx(0.0, abs=1e-12)


def test_log_exp_game_m2():
    game = brute_force_game(GamePair(GameKind.LogExp), np.zeros(2))
    assert game.l_e_star == pytest.approx(2 * (-math.log(2) - 1), abs=1e-9)
    assert game.l_r_star == pytest.approx(-2 * math.log(2) - 1, abs=1e-9)
    assert game.gap == pytest.approx(-1.0, abs=1e-9)


def test_unhinged_game():
    pair = GamePair(GameKind.Unhinged)
    game = brute_force_game(pair, np.array([0.3, -1.2, 2.0]))
    np.testing.assert_array_equal(game.p_star, [0.5] * 3)
    np.testing.assert_array_equal(game.q_star, [1 / 8] * 8)


def test_brute_force_refuses_large_m():
    with pytest.raises(UsageError):
        brute_force_game(GamePair(GameKind.Relu), np.zeros(13))


def test_square_game_checks_coupling():
    with pytest.raises(CouplingError):
        brute_force_game(
            GamePair(GameKind.SquareMeanVar, 1.0, 1.0), np.zeros(3)
        )


def test_single_trial_has_no_spread():
    _, std = equivalence_gap_constancy(
        GamePair(GameKind.LogExp), 1, 4, seed=0
    )
    assert std == 0.0


@pytest.mark.parametrize('kind', ALL_KINDS)
@pytest.mark.parametrize('m', range(1, 9))
def test_gap_is_constant(kind, m):
    pair = GamePair.for_size(kind, m)
    _, std = equivalence_gap_constancy(pair, 100, m, seed=m)
    assert std < 1e-8


@pytest.mark.parametrize('m', range(1, 9))
def test_relu_gap_is_exactly_zero(m):
    mean, std = equivalence_gap_constancy(
        GamePair(GameKind.Relu), 100, m, seed=1
    )
    assert mean == 0.0
    assert std < 1e-12


@pytest.mark.parametrize('kind', DIFFERENTIABLE)
@pytest.mark.parametrize('m', range(1, 9))
def test_example_optimum_is_rado_marginal(kind, m):
    pair = GamePair.for_size(kind, m)
    stream = np.random.default_rng(100 + m)
    indicators = indicator_matrix(m)
    for _ in range(20):
        game = brute_force_game(pair, stream.standard_normal(m))
        assert np.sum(game.q_star) == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(game.p_star - indicators @ game.q_star)) < 1e-8


@pytest.mark.parametrize('m', range(1, 13))
def test_log_exp_product_identity(m):
    stream = np.random.default_rng(m)
    for _ in range(5):
        z = stream.standard_normal(m) * 3
        residual = loss_identity_residual(
            GameKind.LogExp, z, mu=0.7, relative=True
        )
        assert residual < 1e-10


def test_log_exp_identity_beyond_double_range():
    # both sides are about exp(720)
    z = np.full(12, -60.0)
    residual = loss_identity_residual(GameKind.LogExp, z)
    assert isinstance(residual, LossValue)
    assert not math.isnan(residual)
    log_rhs = 12 * np.logaddexp(0.0, 60.0)
    assert residual == 0.0 or residual.log < log_rhs + math.log(1e-10)
    relative = loss_identity_residual(GameKind.LogExp, z, relative=True)
    assert relative < 1e-10


@pytest.mark.parametrize(
    ('kind', 'tolerance'),
    [
        (GameKind.Relu, 1e-12),
        (GameKind.Unhinged, 1e-12),
        (GameKind.SquareMeanVar, 1e-10),
    ]
)
@pytest.mark.parametrize('m', (1, 3, 6, 9))
def test_loss_identities(kind, tolerance, m):
    stream = np.random.default_rng(10 * m)
    for _ in range(10):
        z = stream.standard_normal(m)
        assert loss_identity_residual(kind, z) < tolerance


@pytest.mark.parametrize(
    ('kind', 'z'),
    [
        (GameKind.LogExp, (0.0, 0.0)),
        (GameKind.SquareMeanVar, (0.37,)),
        (GameKind.Unhinged, (1.0, -2.0, 3.0)),
    ]
)
def test_identity_examples(kind, z):
    assert loss_identity_residual(kind, np.array(z)) < 1e-12


def test_log_exp_optimal_values_are_monotone_in_losses():
    mu = 0.8
    pair = GamePair(GameKind.LogExp, mu, mu)
    stream = np.random.default_rng(21)

    def offsets(z):
        game = brute_force_game(pair, z)
        c_e = -game.l_e_star - mu * example_loss(GameKind.LogExp, z, mu)
        log_rado = rado_loss(GameKind.LogExp, subset_sums(z), mu).log
        c_r = -game.l_r_star - mu * log_rado
        return c_e, c_r

    c_e, c_r = offsets(stream.standard_normal(5))
    for _ in range(50):
        other_e, other_r = offsets(stream.standard_normal(5))
        assert other_e == pytest.approx(c_e, abs=1e-8)
        assert other_r == pytest.approx(c_r, abs=1e-8)


def test_objectives_are_infinite_outside_domains():
    z = np.array([0.5, -0.5])
    unhinged = GamePair(GameKind.Unhinged)
    assert example_objective(unhinged, [0.2, 0.5], z) == np.inf
    assert rado_objective(unhinged, [0.1, 0.3, 0.3, 0.3], z) == np.inf
    relu = GamePair(GameKind.Relu)
    assert example_objective(relu, [1.5, 0.0], z) == np.inf
