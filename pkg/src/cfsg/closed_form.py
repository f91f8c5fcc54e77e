"""Analytical expressions: deterministic-equivalent SINR, coverage and rate bounds.

All SINRs and thresholds are linear unless a name says ``_db``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

from .channel import PilotBook, estimation_stats
from .errors import ConfigurationError

__all__ = [
    "BOLTZMANN",
    "DegenerateBoundWarning",
    "CoveragePoint",
    "RateReport",
    "noise_power",
    "normalize_power",
    "db_to_linear",
    "linear_to_db",
    "de_sinr",
    "de_moments",
    "eta",
    "bound_bracket",
    "coverage_lower_bound",
    "coverage_binomial_sum",
    "mean_field_sinr",
    "rate_lower_bound",
]

BOLTZMANN = 1.381e-23  # J/K


class DegenerateBoundWarning(RuntimeWarning):
    """A bound's denominator went non-positive and the result was clamped."""


def noise_power(W_c: float = 20e6, NF_dB: float = 9.0, T0: float = 290.0) -> float:
    """Thermal noise power in watts, ``W_c * k_B * T0 * NF``."""
    if W_c <= 0 or T0 <= 0:
        raise ConfigurationError("bandwidth and noise temperature must be positive")
    return W_c * BOLTZMANN * T0 * 10.0 ** (NF_dB / 10.0)


def normalize_power(p_watts: float, noise: float) -> float:
    if p_watts <= 0 or noise <= 0:
        raise ConfigurationError("powers must be positive")
    return p_watts / noise


def db_to_linear(x_db):
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def _check_alpha(alpha):
    if not alpha > 2:
        raise ConfigurationError(f"path-loss exponent must exceed 2, got {alpha!r}")


def de_sinr(realization, config, book: PilotBook) -> np.ndarray:
    """Deterministic-equivalent SINR of every user on a fixed topology.

    ``gamma_k = W / ((1/M) sum_i sum_m d_mi l_mi^-2 (l_mk + W/rho_d) - 1)``
    with ``W = M N``. ``d_mi`` is the observation variance used when AP m
    estimates user i, so ``d_mi l_mi^-2`` is the precoder scale ``c_mi``.
    Users whose denominator is non-positive get ``inf`` and a warning.
    """
    l = realization.path_loss
    M = l.shape[0]
    if M < 1:
        raise ConfigurationError("de_sinr needs at least one AP")
    W = M * config.N
    _, sigma2, _ = estimation_stats(l, book, config.rho_tr)
    s = (1.0 / sigma2).sum(axis=1)  # sum_i c_mi per AP
    denom = (s @ l + W / config.rho_d * s.sum()) / M - 1.0
    out = np.full(denom.shape, np.inf)
    ok = denom > 0
    out[ok] = W / denom[ok]
    if not ok.all():
        warnings.warn(f"DE SINR denominator <= 0 for users {np.flatnonzero(~ok).tolist()}",
                      DegenerateBoundWarning, stacklevel=2)
    return out


def de_moments(realization, config, book: PilotBook, k: int = 0) -> dict:
    """Deterministic equivalents of the three moments behind the statistical SINR.

    Returns the unnormalised quantities: ``desired`` (mean of
    ``h_k^H C_k h_hat_k``, equal to W), ``variance`` = ``tr(D_k L_k^-1 - I)``,
    ``interference[i]`` = ``tr(D_i L_i^-2 L_k)`` (zero at ``i == k``), and
    ``mu_bar``.
    """
    l = realization.path_loss
    M = l.shape[0]
    N = config.N
    W = M * N
    d, sigma2, _ = estimation_stats(l, book, config.rho_tr)
    c = 1.0 / sigma2
    interference = N * (c * l[:, [k]]).sum(axis=0)
    interference[k] = 0.0
    return {
        "W": W,
        "desired": float(W),
        "variance": float(N * (d[:, k] / l[:, k] - 1.0).sum()),
        "interference": interference,
        "mu_bar": W / (N * c.sum()),
    }


def eta(W_tilde: float) -> float:
    """``W (W!)^(-1/W)`` through log-gamma, so non-integer ``W`` is allowed."""
    if not W_tilde > 0:
        raise ConfigurationError(f"W_tilde must be positive, got {W_tilde!r}")
    return W_tilde * math.exp(-math.lgamma(W_tilde + 1.0) / W_tilde)


def bound_bracket(config, book: PilotBook, w: float, user: int = 0) -> float:
    """Bracketed term shared by the coverage and rate bounds.

    ``(K/(alpha pi rho_d)) (S (alpha rho_d + w(alpha-2))
    + ((alpha-2) rho_d + w(alpha-1))/(tau_tr rho_tr)) - 1`` where ``S`` is
    the pilot-contamination sum of ``user``. ``w`` is the mean antenna count
    for coverage and N for the rate bound.
    """
    a = config.alpha
    _check_alpha(a)
    rd = config.rho_d
    S = book.contamination(user)
    noise = 0.0 if math.isinf(config.rho_tr) else ((a - 2) * rd + w * (a - 1)) / (book.tau_tr * config.rho_tr)
    return config.K / (a * math.pi * rd) * (S * (a * rd + w * (a - 2)) + noise) - 1.0


def mean_antennas(config) -> float:
    return config.lambda_ap * config.area.area() * config.N


@dataclass(frozen=True)
class CoveragePoint:
    threshold: float
    p_cov: float
    form: str = "product"
    clamped: bool = False


def coverage_lower_bound(T, config, book: PilotBook, user: int = 0, form: str = "product") -> CoveragePoint:
    """Lower bound on the probability that the typical user's SINR exceeds ``T`` (linear).

    ``form="product"`` evaluates ``1 - (1 - exp(-eta T X))**W`` for real W;
    ``form="binomial-sum"`` evaluates the equivalent alternating sum and
    requires an integer ``W <= 60``.
    """
    T = float(T)
    if T < 0 or math.isnan(T):
        raise ConfigurationError(f"threshold must be non-negative, got {T!r}")
    w = mean_antennas(config)
    X = bound_bracket(config, book, w, user)
    if form == "binomial-sum":
        return CoveragePoint(T, coverage_binomial_sum(T, w, X), form, False)
    if form != "product":
        raise ConfigurationError(f"unknown coverage form {form!r}")
    if X < 0:
        warnings.warn("coverage bracket is negative; bound clamped to 1", DegenerateBoundWarning, stacklevel=2)
        return CoveragePoint(T, 1.0, form, True)
    y = eta(w) * T * X
    if y == 0:
        return CoveragePoint(T, 1.0, form)
    if math.isinf(y):
        return CoveragePoint(T, 0.0, form)
    # 1 - (1 - e^-y)^w, evaluated without cancellation at both ends
    log1mexp = math.log(-math.expm1(-y)) if y < math.log(2) else math.log1p(-math.exp(-y))
    p = -math.expm1(w * log1mexp)
    return CoveragePoint(T, min(1.0, max(0.0, p)), form)


def coverage_binomial_sum(T: float, w: float, X: float) -> float:
    """``sum_{n=1}^{w} C(w, n) (-1)^(n+1) exp(-n eta T X)`` in extended precision."""
    n_max = int(round(w))
    if abs(w - n_max) > 1e-12 or n_max < 1 or n_max > 60:
        raise ConfigurationError(f"binomial-sum form needs an integer W in [1, 60], got {w!r}")
    e = eta(n_max)
    with mpmath.workdps(60):
        x = mpmath.exp(-mpmath.mpf(e) * mpmath.mpf(T) * mpmath.mpf(X))
        total = mpmath.fsum(mpmath.binomial(n_max, n) * (-1) ** (n + 1) * x**n for n in range(1, n_max + 1))
        return float(total)


def mean_field_sinr(config, book: PilotBook, user: int = 0) -> float:
    """Inverse of the PPP-averaged inverse SINR: ``lambda_AP N / X_N``."""
    X = bound_bracket(config, book, config.N, user)
    if X <= 0:
        warnings.warn("mean-field SINR bracket is non-positive; reporting inf", DegenerateBoundWarning, stacklevel=2)
        return math.inf
    return config.lambda_ap * config.N / X


@dataclass(frozen=True)
class RateReport:
    gamma_check: float
    se: float
    throughput: float | None = None
    bandwidth: float | None = None


def rate_lower_bound(config, book: PilotBook, bandwidth: float | None = None, user: int = 0) -> RateReport:
    """Spectral-efficiency lower bound ``(1 - tau_tr/tau_c) log2(1 + gamma_check)`` in b/s/Hz.

    ``throughput`` is ``se * bandwidth`` (bits/s) when a bandwidth is given.
    """
    if config.tau_tr > config.tau_c:
        raise ConfigurationError(f"tau_tr={config.tau_tr} exceeds tau_c={config.tau_c}")
    g = mean_field_sinr(config, book, user)
    prelog = 1.0 - config.tau_tr / config.tau_c
    se = 0.0 if prelog == 0 else prelog * math.log2(1.0 + g)
    return RateReport(g, se, None if bandwidth is None else se * bandwidth, bandwidth)
