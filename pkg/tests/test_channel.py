import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfsg.channel import (draw_channel, draw_small_scale, estimation_stats, make_pilot_book,
                          mmse_estimate, training_observation)
from cfsg.errors import ConfigurationError, ValidationError
from cfsg.geometry import NetworkRealization


def test_orthogonal_pilots_gram_identity():
    book = make_pilot_book(10, 10, "orthogonal")
    assert np.array_equal(book.gram, np.eye(10))
    assert np.allclose(book.gram.sum(axis=0), 1.0)


def test_round_robin_reuse():
    g = make_pilot_book(10, 20, "round-robin").gram
    assert g[0, 10] == 1 and g[0, 1] == 0


def test_orthogonal_falls_back_to_reuse_when_short():
    g = make_pilot_book(5, 12, "orthogonal").gram
    assert g[0, 5] == 1 and g[0, 10] == 1 and g[0, 1] == 0


@given(st.integers(1, 12), st.integers(1, 40))
def test_gram_properties(tau, K):
    g = make_pilot_book(tau, K, "round-robin").gram
    assert np.allclose(g, g.T)
    assert np.allclose(np.diag(g), 1.0)
    assert np.all((g >= 0) & (g <= 1 + 1e-12))


def test_explicit_pilot_matrix_validated():
    with pytest.raises(ValidationError):
        make_pilot_book(2, 2, np.array([[1.0, 1.0], [0.0, 1.0]]))
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)) + 1j)
    book = make_pilot_book(4, 3, q[:, :3])
    assert np.allclose(book.gram, np.eye(3), atol=1e-12)


def test_unknown_policy():
    with pytest.raises(ConfigurationError):
        make_pilot_book(4, 4, "random")


def test_small_scale_statistics():
    g = draw_small_scale(100, 100, 100, np.random.default_rng(1))
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.01)
    assert g.real.var() == pytest.approx(0.5, abs=0.01)
    assert g.imag.var() == pytest.approx(0.5, abs=0.01)


def test_distinct_links_uncorrelated():
    g = draw_small_scale(2, 1, 2, np.random.default_rng(2), n_draws=20_000)
    x, y = g[:, 0, 0, 0], g[:, 1, 0, 1]
    prod = x * np.conj(y)
    assert abs(prod.mean()) < 3 * prod.std() / math.sqrt(prod.size) * 1.5


def test_noise_free_orthogonal_observation_is_channel():
    rng = np.random.default_rng(3)
    l = np.array([[0.3, 0.7], [1.0, 0.2]])
    book = make_pilot_book(2, 2)
    g = draw_small_scale(2, 4, 2, rng)
    y = training_observation(g, l, book, math.inf, rng)
    assert np.allclose(y, g * np.sqrt(l)[:, None, :])


def test_noise_free_shared_pilot_sums_channels():
    rng = np.random.default_rng(4)
    l = np.array([[0.5, 0.25]])
    book = make_pilot_book(1, 2)
    g = draw_small_scale(1, 3, 2, rng)
    h = g * np.sqrt(l)[:, None, :]
    y = training_observation(g, l, book, math.inf, rng)
    assert np.allclose(y[..., 0], h[..., 0] + h[..., 1])


def test_observation_covariance_matches_d():
    rng = np.random.default_rng(5)
    l = np.array([[0.4, 0.9, 0.1]])
    book = make_pilot_book(2, 3, "round-robin")
    rho = 2.0
    g = draw_small_scale(1, 2, 3, rng, n_draws=40_000)
    y = training_observation(g, l, book, rho, rng)
    d, _, _ = estimation_stats(l, book, rho)
    cov = np.einsum("dmnk,dmpk->knp", y, np.conj(y)) / y.shape[0]
    for k in range(3):
        assert np.allclose(cov[k], d[0, k] * np.eye(2), atol=0.02 * d[0, k])


def test_perfect_csi_limit():
    real = NetworkRealization.from_path_loss(np.array([[0.5, 1.0], [0.2, 0.3]]))
    book = make_pilot_book(2, 2)
    draw = draw_channel(real, 3, book, math.inf, np.random.default_rng(6))
    assert np.allclose(draw.h_hat, draw.h)
    assert np.allclose(draw.sigma2_err, 0.0)


def test_estimate_variance_and_orthogonality():
    real = NetworkRealization.from_path_loss(np.array([[0.6, 0.3, 0.8]]))
    book = make_pilot_book(2, 3, "round-robin")
    draw = draw_channel(real, 2, book, 5.0, np.random.default_rng(7), n_draws=10_000)
    emp = np.mean(np.abs(draw.h_hat) ** 2, axis=(0, 2))
    assert np.allclose(emp, draw.sigma2[0], rtol=0.03)
    e = draw.error
    prod = (draw.h_hat * np.conj(e))[:, 0, 0, 0]
    se = prod.std() / math.sqrt(prod.size)
    assert abs(prod.mean()) < 3 * se * 1.5
    assert np.allclose(draw.sigma2 + draw.sigma2_err, real.path_loss)


def test_mmse_estimate_is_linear_scaling():
    l = np.array([[0.5, 0.5]])
    book = make_pilot_book(1, 2)
    y = np.ones((1, 2, 2), dtype=complex)
    h_hat, d, sigma2, _ = mmse_estimate(y, l, book, 10.0)
    assert np.allclose(h_hat, (l / d)[:, None, :] * y)


@given(st.floats(0.01, 1.0), st.floats(0.01, 100), st.floats(1.01, 10))
def test_estimate_improves_with_training_power(l, rho, factor):
    book = make_pilot_book(2, 2)
    L = np.array([[l, 0.5]])
    _, s1, _ = estimation_stats(L, book, rho)
    _, s2, _ = estimation_stats(L, book, rho * factor)
    assert s2[0, 0] > s1[0, 0]


@given(st.lists(st.floats(0.01, 1.0), min_size=6, max_size=6), st.floats(0.1, 100))
def test_pilot_sharing_degrades_estimates(ls, rho):
    L = np.array(ls).reshape(3, 2)
    _, alone, _ = estimation_stats(L, make_pilot_book(2, 2), rho)
    _, shared, _ = estimation_stats(L, make_pilot_book(1, 2), rho)
    assert np.all(shared < alone)


@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4), st.integers(1, 4), st.floats(0.1, 1e3))
def test_estimation_identities(ls, tau, rho):
    L = np.array(ls).reshape(2, 2)
    _, sigma2, err = estimation_stats(L, make_pilot_book(tau, 2, "round-robin"), rho)
    assert np.allclose(sigma2 + err, L)
    assert np.all((sigma2 > 0) & (sigma2 <= L))


def test_estimate_entries_are_complex_gaussian():
    real = NetworkRealization.from_path_loss(np.array([[0.6, 0.3]]))
    draw = draw_channel(real, 1, make_pilot_book(1, 2), 4.0, np.random.default_rng(8), n_draws=100_000)
    x = draw.h_hat[:, 0, 0, 0]
    s2 = draw.sigma2[0, 0]
    assert abs(x.mean()) < 0.01
    assert np.mean(np.abs(x) ** 2) == pytest.approx(s2, rel=0.02)
    # CN(0, s): E|x|^4 = 2 s^2, E[x^2] = 0
    assert np.mean(np.abs(x) ** 4) == pytest.approx(2 * s2**2, rel=0.04)
    assert abs(np.mean(x**2)) < 0.01
