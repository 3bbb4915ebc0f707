import logging
import math

import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import kstest

from librado.core import edge_vectors
from librado.exceptions import UsageError
from librado.losses import example_log_loss
from librado.privacy import (
    DpParams, dp_protect, dp_protect_edges, edge_diameter_bound, epsilon_a,
    exact_edge_diameter, laplace_from_uniform, laplace_noise, laplace_sample,
    laplace_samples, resolve_r_e, seed_commitment
)
from librado.rados import RadoMode, enumerate_rados, sample_plain
from librado.regularizers import RegularizerKind, dual_norm, norm_value
from librado.streams import StreamTag, keyed_stream
from librado.tests.utils import make_dataset, make_rados


@pytest.fixture
def draws():
    stream = keyed_stream(0, StreamTag.LaplaceNoise, 0)
    return laplace_samples(1.0, stream, 10 ** 5)


def test_laplace_at_the_median():
    assert laplace_from_uniform(0.0, 3.0) == 0.0


def test_laplace_is_antisymmetric():
    u = np.array([0.1, 0.25, 0.49])
    np.testing.assert_allclose(
        laplace_from_uniform(-u, 2.0), -laplace_from_uniform(u, 2.0)
    )


def test_laplace_moments(draws):
    assert abs(np.mean(draws)) < 0.02
    assert abs(np.var(draws) - 2.0) < 0.1


def test_laplace_matches_distribution(draws):
    assert kstest(draws, 'laplace').statistic < 0.01


def test_laplace_sample_needs_positive_scale():
    with pytest.raises(UsageError):
        laplace_sample(0.0, keyed_stream(0, StreamTag.LaplaceNoise))


@pytest.mark.parametrize(
    ('epsilon', 'r_e'), [(0.0, 1.0), (-1.0, 1.0), (math.inf, 1.0), (1, 0)]
)
def test_dp_params_rejects(epsilon, r_e):
    with pytest.raises(UsageError):
        DpParams(epsilon, r_e)


def test_noise_scale():
    assert DpParams(0.1, 10.0).noise_scale(100) == pytest.approx(10 ** 4)


def test_diameter_of_two_points(two_points):
    assert edge_diameter_bound(two_points) == 8.0
    assert exact_edge_diameter(two_points) == 8.0


def test_diameter_bound_dominates(small_dataset):
    assert edge_diameter_bound(small_dataset) >= \
        exact_edge_diameter(small_dataset, block_size=3)


def test_exact_diameter_is_limited():
    dataset = make_dataset(np.ones((10 ** 4 + 1, 1)), [1] * (10 ** 4 + 1))
    with pytest.raises(UsageError):
        exact_edge_diameter(dataset)


def test_resolve_r_e(small_dataset, caplog):
    bound = edge_diameter_bound(small_dataset)
    assert resolve_r_e(small_dataset) == bound
    with caplog.at_level(logging.WARNING, logger='librado.privacy'):
        assert resolve_r_e(small_dataset, bound / 2) == bound / 2
    assert 'below the edge diameter bound' in caplog.text


def test_resolve_r_e_of_zero_data():
    dataset = make_dataset(np.zeros((3, 2)), [1, -1, 1])
    with pytest.raises(UsageError):
        resolve_r_e(dataset)


def test_dp_protect_records_provenance(small_dataset):
    rados = sample_plain(small_dataset, 20, seed=3)
    protected = dp_protect(rados, DpParams(0.5, 4.0, seed=9))
    provenance = protected.provenance
    assert provenance.mode == RadoMode.Protected
    assert provenance.base_mode == RadoMode.PlainRandom
    assert provenance.seed is None
    assert provenance.epsilon == 0.5 and provenance.r_e == 4.0
    assert provenance.seed_commitment == seed_commitment(9)
    assert protected.feature_names == rados.feature_names


def test_dp_protect_is_deterministic():
    rados = make_rados(np.arange(30.0).reshape(10, 3))
    params = DpParams(1.0, 2.0, seed=4)
    first = dp_protect(rados, params, threads=1)
    second = dp_protect(rados, params, threads=4)
    other = dp_protect(rados, DpParams(1.0, 2.0, seed=5))
    np.testing.assert_array_equal(first.rados, second.rados)
    assert not np.array_equal(first.rados, other.rados)


def test_dp_protect_with_huge_budget():
    rados = make_rados(np.arange(40.0).reshape(20, 2))
    protected = dp_protect(rados, DpParams(1e12, 1.0))
    assert np.max(np.abs(protected.rados - rados.rados)) < 1e-6


def test_noise_is_keyed_per_entry():
    params = DpParams(1.0, 1.0, seed=2)
    small = laplace_noise(3, 2, params)
    stream = keyed_stream(2, StreamTag.LaplaceNoise, 1, 1)
    assert small[1, 1] == laplace_sample(params.noise_scale(3), stream)


def test_protected_edges_match_protected_rados(small_dataset):
    edges = edge_vectors(small_dataset)
    params = DpParams(2.0, 3.0, seed=1)
    protected = dp_protect_edges(edges, params)
    expected = edges + laplace_noise(edges.shape[0], edges.shape[1], params)
    np.testing.assert_array_equal(protected.rados, expected)
    assert protected.provenance.base_mode == RadoMode.Singleton


def test_seed_commitment_hides_the_seed():
    commitment = seed_commitment(12345)
    assert len(commitment) == 64
    assert '12345' not in commitment
    assert commitment != seed_commitment(12346)


def test_epsilon_a_example():
    assert epsilon_a(1.0, 100, 1000) == pytest.approx(1.00501e-3, abs=1e-6)


def test_epsilon_a_single_example():
    assert epsilon_a(0.7, 10, 1) == 0.7


@pytest.mark.parametrize('epsilon', (1e-6, 0.1, 1.0, 10.0))
@pytest.mark.parametrize('m', (2, 10, 1000))
def test_epsilon_a_is_below_epsilon(epsilon, m):
    assert 0 < epsilon_a(epsilon, 50, m) < epsilon


def test_epsilon_a_rejects():
    with pytest.raises(UsageError):
        epsilon_a(0.0, 10, 10)


@pytest.mark.parametrize(
    'kind', (RegularizerKind.Lasso, RegularizerKind.Ridge)
)
def test_protected_loss_bound(kind):
    stream = np.random.default_rng(41)
    for trial in range(20):
        m = int(stream.integers(1, 9))
        features = stream.normal(size=(m, 3))
        labels = np.where(stream.uniform(size=m) < 0.5, -1, 1)
        dataset = make_dataset(features, labels)
        theta = stream.normal(size=3)
        params = DpParams(
            float(stream.uniform(0.5, 5.0)), edge_diameter_bound(dataset),
            seed=trial
        )
        rados = enumerate_rados(dataset)
        protected = dp_protect(rados, params)
        noise = laplace_noise(rados.n, rados.d, params)

        log_lhs = logsumexp(-protected.rados @ theta) - math.log(rados.n)
        worst = max(dual_norm(kind, z) for z in noise)
        log_rhs = m * example_log_loss(edge_vectors(dataset), theta) + \
            worst * norm_value(kind, theta)
        assert log_lhs <= log_rhs + 1e-9
