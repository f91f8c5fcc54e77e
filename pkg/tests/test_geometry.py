import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from cfsg.config import SystemConfig
from cfsg.errors import ConfigurationError, DivergentMomentError
from cfsg.geometry import (AreaSpec, NetworkRealization, pairwise_distances, path_loss,
                           path_loss_spatial_moment, sample_fixed, sample_ppp, torus_distance)

UNIT = AreaSpec(1.0, True)
coord = st.floats(0.0, 1.0, allow_nan=False, exclude_max=True)
point = st.tuples(coord, coord)


def test_mean_ap_count_matches_density():
    assert SystemConfig(lambda_ap=40).mean_aps == pytest.approx(40.0)


def test_poisson_count_mean_and_variance():
    cfg = SystemConfig(lambda_ap=40, K=1, min_aps=0)
    rng = np.random.default_rng(1)
    counts = np.array([sample_ppp(cfg, rng=rng).M for _ in range(100_000)])
    n = counts.size
    assert abs(counts.mean() - 40) < 3 * math.sqrt(40 / n)
    # Poisson: variance equals the mean; Var(s^2) ~ (mu4 - sigma^4)/n with mu4 = lam(1 + 3 lam)
    assert abs(counts.var(ddof=1) - 40) < 3 * math.sqrt((40 * 121 - 1600) / n)


def test_positions_uniform_on_square():
    rng = np.random.default_rng(2)
    pts = np.vstack([sample_ppp(SystemConfig(lambda_ap=200), rng=rng).ap_positions for _ in range(50)])
    assert pts.min() >= 0 and pts.max() < 1
    hist, _ = np.histogram(pts[:, 0], bins=10, range=(0, 1))
    expected = pts.shape[0] / 10
    chi2 = ((hist - expected) ** 2 / expected).sum()
    assert chi2 < 27.9  # 99.9% quantile, 9 dof


def test_zero_side_rejected():
    with pytest.raises(ConfigurationError):
        AreaSpec(0.0)


def test_min_aps_rejection_counted():
    cfg = SystemConfig(lambda_ap=0.5, K=1, min_aps=1)
    reals = [sample_ppp(cfg, seed=s) for s in range(200)]
    assert all(r.M >= 1 for r in reals)
    assert sum(r.resampled for r in reals) > 0


def test_same_seed_same_realization():
    cfg = SystemConfig()
    a, b = sample_ppp(cfg, seed=7), sample_ppp(cfg, seed=7)
    assert np.array_equal(a.ap_positions, b.ap_positions)
    assert np.array_equal(a.path_loss, b.path_loss)


@pytest.mark.parametrize("p, q, expected", [
    ((0.05, 0.5), (0.95, 0.5), 0.10),
    ((0.3, 0.3), (0.3, 0.3), 0.0),
    ((0.0, 0.0), (0.5, 0.5), math.sqrt(0.5)),
])
def test_torus_distance_examples(p, q, expected):
    assert torus_distance(p, q, UNIT) == pytest.approx(expected, abs=1e-12)


def test_unwrapped_distance_is_euclidean():
    flat = AreaSpec(1.0, wrap=False)
    assert torus_distance((0.05, 0.5), (0.95, 0.5), flat) == pytest.approx(0.9)


@given(point, point)
def test_torus_distance_symmetric_and_bounded(p, q):
    d = torus_distance(p, q, UNIT)
    assert d == pytest.approx(torus_distance(q, p, UNIT))
    assert 0 <= d <= math.sqrt(2) / 2 + 1e-12
    assert d <= math.dist(p, q) + 1e-12


@given(point, point, point)
def test_torus_triangle_inequality(p, q, r):
    assert torus_distance(p, r, UNIT) <= torus_distance(p, q, UNIT) + torus_distance(q, r, UNIT) + 1e-12


@given(point, point, st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_torus_translation_invariant(p, q, shift):
    moved = [((c + s) % 1.0) for c, s in zip(p, shift)], [((c + s) % 1.0) for c, s in zip(q, shift)]
    assert torus_distance(*moved, UNIT) == pytest.approx(torus_distance(p, q, UNIT), abs=1e-9)


def test_pairwise_matches_scalar():
    rng = np.random.default_rng(3)
    a, b = rng.uniform(size=(6, 2)), rng.uniform(size=(4, 2))
    D = pairwise_distances(a, b, UNIT)
    for i in range(6):
        for j in range(4):
            assert D[i, j] == pytest.approx(torus_distance(a[i], b[j], UNIT))


@pytest.mark.parametrize("r, alpha, expected", [(0.5, 3.5, 1.0), (1.0, 2.5, 1.0), (1.0, 4.5, 1.0),
                                                (2.0, 3.5, 2 ** -3.5)])
def test_path_loss_examples(r, alpha, expected):
    assert path_loss(r, alpha) == pytest.approx(expected, rel=1e-12)


@given(st.floats(1e-3, 50), st.floats(1e-3, 50), st.floats(2.01, 6))
def test_path_loss_bounded_and_non_increasing(r1, r2, alpha):
    lo, hi = sorted((r1, r2))
    assert 0 < path_loss(hi, alpha) <= path_loss(lo, alpha) <= 1


def test_path_loss_rejects_small_exponent():
    with pytest.raises(ConfigurationError):
        path_loss(2.0, 2.0)


@pytest.mark.parametrize("v, alpha, expected", [(1, 3.5, 3.5 * math.pi / 1.5), (2, 3.5, 7 * math.pi / 5)])
def test_spatial_moment_examples(v, alpha, expected):
    assert path_loss_spatial_moment(v, alpha) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("v", [1, 2, 3])
@pytest.mark.parametrize("alpha", [2.5, 3.5, 4.5])
def test_spatial_moment_matches_quadrature(v, alpha):
    inner, _ = integrate.quad(lambda r: 2 * math.pi * r, 0, 1)
    outer, _ = integrate.quad(lambda r: 2 * math.pi * r ** (1 - v * alpha), 1, math.inf, epsabs=0, epsrel=1e-12)
    assert path_loss_spatial_moment(v, alpha) == pytest.approx(inner + outer, rel=1e-8)


def test_spatial_moment_diverges():
    with pytest.raises(DivergentMomentError):
        path_loss_spatial_moment(1, 2.0)


def test_realization_from_path_loss_roundtrip():
    l = np.array([[1.0, 0.5], [0.1, 1.0]])
    real = NetworkRealization.from_path_loss(l, alpha=3.0)
    assert real.M == 2 and real.K == 2
    assert np.allclose(path_loss(real.distances, 3.0), l)


def test_sample_fixed_has_exact_count():
    real = sample_fixed(SystemConfig(), 20, np.random.default_rng(0))
    assert real.M == 20 and real.path_loss.shape == (20, 10)
