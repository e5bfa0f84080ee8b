import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptnet.errors import ConfigurationError, DomainError
from adaptnet.models import (FadingSpec, NodeProfile, RandomWalk, Sinusoidal, Static,
                             alpha_from_fading, bessel_j0, generate_measurement,
                             next_weight)

mpmath.mp.dps = 50


def j0_series_oracle(x, terms=60):
    """Truncated power series of J0 accumulated at 50 significant digits."""
    x = mpmath.mpf(x)
    total = mpmath.mpf(0)
    term = mpmath.mpf(1)
    for k in range(terms):
        total += term
        term *= -(x * x) / (4 * (k + 1) ** 2)
    return total


# ---------------------------------------------------------------- bessel_j0

def test_j0_at_zero():
    assert bessel_j0(0.0) == 1.0


def test_j0_first_root():
    root = mpmath.findroot(j0_series_oracle, 2.4)
    assert abs(float(root) - 2.404825557695773) < 1e-14
    assert abs(bessel_j0(2.404825557695773)) < 1e-9


def test_j0_small_argument_is_one():
    assert abs(bessel_j0(2 * math.pi * 10 * 1e-6) - 1.0) < 1e-8


@given(st.floats(-10, 10))
@settings(max_examples=300)
def test_j0_matches_series_oracle(x):
    assert abs(bessel_j0(x) - float(j0_series_oracle(x))) <= 1e-10


def test_j0_dense_grid_to_fifty():
    xs = np.linspace(-50, 50, 4001)
    err = max(abs(bessel_j0(x) - float(mpmath.besselj(0, x))) for x in xs)
    assert err <= 1e-10


def test_j0_is_even():
    for x in (0.3, 7.7, 12.5, 31.0):
        assert bessel_j0(-x) == bessel_j0(x)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_j0_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        bessel_j0(bad)


# ---------------------------------------------------------------- fading

def test_alpha_without_doppler_is_one():
    assert alpha_from_fading(FadingSpec(0.0, 1e-6)) == 1.0


def test_alpha_at_66_hz():
    x = 2 * math.pi * 66 * 1e-6
    expected = 1 - x * x / 4 + x ** 4 / 64
    eps = 1 - alpha_from_fading(FadingSpec(66, 1e-6))
    assert eps == pytest.approx(4.3e-8, rel=0.01)
    assert alpha_from_fading(FadingSpec(66, 1e-6)) == pytest.approx(expected, abs=1e-15)


def test_alpha_at_10_hz_close_to_stationary():
    assert 1 - alpha_from_fading(FadingSpec(10, 1e-6)) < 1e-8


def test_fading_alpha_within_unit_interval():
    for fd in (0, 10, 66, 128, 500, 5000):
        for ts in (1e-6, 1e-4, 1e-3):
            assert -1 <= FadingSpec(fd, ts).alpha <= 1


def test_fading_rejects_bad_values():
    with pytest.raises(ConfigurationError):
        FadingSpec(-1.0, 1e-6)
    with pytest.raises(ConfigurationError):
        FadingSpec(10.0, 0.0)


# ---------------------------------------------------------------- profiles

def test_profile_rejects_non_pd():
    with pytest.raises(ConfigurationError):
        NodeProfile(0.01, 0.01, np.diag([1.0, -1.0]))
    with pytest.raises(ConfigurationError):
        NodeProfile(0.01, 0.01, np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ConfigurationError):
        NodeProfile(-0.1, 0.01, np.eye(2))
    with pytest.raises(ConfigurationError):
        NodeProfile(0.1, -0.01, np.eye(2))


def test_profile_factor_squares_to_covariance():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    p = NodeProfile(0.01, 0.01, a @ a.T + np.eye(4))
    assert np.allclose(p.factor @ p.factor.T, p.regressor_cov, atol=1e-12)
    assert np.allclose((p.eigvecs * p.eigvals) @ p.eigvecs.T, p.regressor_cov, atol=1e-10)


# ---------------------------------------------------------------- weight processes

@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_random_walk_alpha_one_is_identity(seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(4)
    proc = RandomWalk(1.0, np.zeros(4))
    assert proc.eta_cov_scale == 0.0
    assert np.array_equal(next_weight(proc, w, 5, rng), w)


def test_random_walk_eta_covariance():
    rng = np.random.default_rng(11)
    proc = RandomWalk(0.5, np.zeros(3))
    w_prev = np.array([1.0, -2.0, 0.5])
    draws = np.array([next_weight(proc, w_prev, 1, rng) for _ in range(100_000)])
    cov = np.cov((draws - 0.5 * w_prev).T)
    assert np.all(np.abs(cov - 0.75 * np.eye(3)) <= 0.02 * 0.75)


def test_random_walk_validation():
    with pytest.raises(ConfigurationError):
        RandomWalk(0.0, np.ones(2))
    with pytest.raises(ConfigurationError):
        RandomWalk(1.2, np.ones(2))
    assert RandomWalk(0.3, np.ones(2)).eta_cov_scale == 1 - 0.3 ** 2


def test_static_returns_previous():
    w = np.arange(3.0)
    assert next_weight(Static(np.ones(3)), w, 10, np.random.default_rng(0)) is w


def test_sinusoid_at_zero():
    w = next_weight(Sinusoidal(math.pi / 3000), np.zeros(8), 0, np.random.default_rng(0))
    assert np.allclose(w, 0.5 * np.array([1, 0, 0, 1, -1, 0, 0, -1]), atol=1e-15)


@given(st.integers(0, 100_000))
def test_sinusoid_rotation_consistency(i):
    proc = Sinusoidal(math.pi / 3000)
    assert np.max(np.abs(proc.rotate(proc.at(i)) - proc.at(i + 1))) <= 1e-12


@given(st.integers(0, 100_000))
def test_sinusoid_norm_constant(i):
    # four (cos, sin) pairs of amplitude 1/2 -> squared norm 4 * 1/4
    assert float(np.sum(Sinusoidal().at(i) ** 2)) == pytest.approx(1.0, abs=1e-14)


def test_next_weight_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        next_weight(Static(np.ones(3)), np.ones(4), 0, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        next_weight(Sinusoidal(), np.ones(4), 0, np.random.default_rng(0))


def test_fading_random_walk_scales_w0_by_path_loss():
    proc = RandomWalk.from_fading(FadingSpec(66, 1e-6, path_loss=0.5), np.ones(4))
    assert np.array_equal(proc.w0, 0.5 * np.ones(4))
    assert proc.alpha == alpha_from_fading(FadingSpec(66, 1e-6))


# ---------------------------------------------------------------- measurements

def test_noiseless_zero_weight_measurement():
    p = NodeProfile(0.01, 0.0, np.eye(3))
    m = generate_measurement(p, np.zeros(3), np.random.default_rng(1))
    assert m.d == 0.0 and m.v == 0.0


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50)
def test_measurement_is_consistent(seed):
    rng = np.random.default_rng(seed)
    p = NodeProfile(0.01, 0.3, np.diag([1.0, 2.0, 0.5]))
    w = rng.standard_normal(3)
    m = generate_measurement(p, w, rng)
    assert m.d == float(m.u @ w + m.v)


def test_regressor_covariance_identity():
    rng = np.random.default_rng(5)
    p = NodeProfile(0.01, 0.01, np.eye(4))
    u = np.array([generate_measurement(p, np.zeros(4), rng).u for _ in range(100_000)])
    cov = u.T @ u / len(u)
    assert np.all(np.abs(cov - np.eye(4)) <= 0.02)


def test_noise_variance():
    rng = np.random.default_rng(6)
    p = NodeProfile(0.01, 0.01, np.eye(1))
    v = np.array([generate_measurement(p, np.zeros(1), rng).v for _ in range(100_000)])
    assert np.var(v) == pytest.approx(0.01, rel=0.05)


def test_measurement_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        generate_measurement(NodeProfile(0.01, 0.01, np.eye(2)), np.ones(3),
                             np.random.default_rng(0))
