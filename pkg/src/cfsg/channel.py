"""Uplink pilot training and per-AP MMSE channel estimation.

Array layout: fading and channel tensors are ``(..., M, N, K)`` with an
optional leading batch axis for independent channel draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError

__all__ = [
    "PilotBook",
    "ChannelDraw",
    "make_pilot_book",
    "draw_small_scale",
    "training_observation",
    "estimation_stats",
    "mmse_estimate",
    "draw_channel",
]

POLICIES = ("orthogonal", "round-robin")


@dataclass(frozen=True)
class PilotBook:
    """Unit-norm pilot sequences ``psi_k`` stored as the columns of ``sequences``.

    ``inner[i, k] = psi_i^H psi_k`` and ``gram = |inner|**2``.
    """

    sequences: np.ndarray

    @property
    def tau_tr(self) -> int:
        return int(self.sequences.shape[0])

    @property
    def K(self) -> int:
        return int(self.sequences.shape[1])

    @property
    def inner(self) -> np.ndarray:
        s = self.sequences
        return s.conj().T @ s

    @property
    def gram(self) -> np.ndarray:
        return np.abs(self.inner) ** 2

    def contamination(self, k: int = 0) -> float:
        """``sum_j |psi_j^H psi_k|^2`` for user ``k`` (1 when k's pilot is unshared)."""
        return float(self.gram[:, k].sum())


def make_pilot_book(tau_tr: int, K: int, policy="orthogonal") -> PilotBook:
    """Build the pilot book for ``K`` users with ``tau_tr`` training samples.

    ``policy`` is ``"orthogonal"`` (distinct standard-basis pilots while
    ``K <= tau_tr``, falling back to reuse beyond that), ``"round-robin"``
    (user ``k`` gets basis vector ``k mod tau_tr``) or an explicit
    ``tau_tr x K`` matrix whose columns must have unit norm.
    """
    if tau_tr < 1:
        raise ConfigurationError(f"tau_tr must be >= 1, got {tau_tr!r}")
    if not isinstance(policy, str):
        seq = np.asarray(policy, dtype=complex)
        if seq.shape != (tau_tr, K):
            raise ValidationError(f"pilot matrix must have shape ({tau_tr}, {K}), got {seq.shape}")
        norms = np.sum(np.abs(seq) ** 2, axis=0)
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-9):
            raise ValidationError(f"pilot columns must have unit norm, got {norms}")
        return PilotBook(seq)
    if policy not in POLICIES:
        raise ConfigurationError(f"unknown pilot policy {policy!r}; expected one of {POLICIES}")
    seq = np.zeros((tau_tr, K), dtype=complex)
    seq[np.arange(K) % tau_tr, np.arange(K)] = 1.0
    return PilotBook(seq)


def draw_small_scale(M: int, N: int, K: int, rng: np.random.Generator, n_draws: int | None = None):
    """I.i.d. CN(0, 1) fading, shape ``(M, N, K)`` or ``(n_draws, M, N, K)``."""
    shape = (M, N, K) if n_draws is None else (n_draws, M, N, K)
    return _cn(rng, shape)


def _cn(rng, shape):
    z = rng.standard_normal(shape + (2,))
    z *= math.sqrt(0.5)
    return z.view(np.complex128)[..., 0]


def training_observation(g, path_loss, book: PilotBook, rho_tr: float, rng):
    """Projected pilot observation at every AP for every user.

    ``y_mk = h_mk + sum_{i != k} h_mi psi_i^H psi_k + n_m psi_k / sqrt(tau_tr rho_tr)``
    with ``h_mi = sqrt(l_mi) g_mi`` and ``n_m`` an ``N x tau_tr`` CN(0, 1)
    matrix. ``rho_tr = inf`` drops the noise.
    """
    h = np.sqrt(path_loss)[:, None, :] * g
    y = h @ book.inner
    if math.isfinite(rho_tr):
        n = _cn(rng, g.shape[:-1] + (book.tau_tr,))
        y = y + (n @ book.sequences) / math.sqrt(book.tau_tr * rho_tr)
    return y


def estimation_stats(path_loss, book: PilotBook, rho_tr: float):
    """Return ``(d, sigma2, sigma2_err)``, each ``(M, K)``.

    ``d[m, k] = sum_i |psi_i^H psi_k|^2 l_mi + 1/(tau_tr rho_tr)`` is the
    per-entry variance of the projected observation used to estimate user k
    at AP m; ``sigma2 = l^2/d`` and ``sigma2_err = l (1 - l/d)``.
    """
    l = np.asarray(path_loss, dtype=float)
    noise = 0.0 if math.isinf(rho_tr) else 1.0 / (book.tau_tr * rho_tr)
    d = l @ book.gram + noise
    sigma2 = l**2 / d
    return d, sigma2, l * (1.0 - l / d)


@dataclass
class ChannelDraw:
    """True channels, MMSE estimates and their per-link statistics for one topology."""

    g: np.ndarray
    h: np.ndarray
    h_hat: np.ndarray
    d: np.ndarray
    sigma2: np.ndarray
    sigma2_err: np.ndarray

    @property
    def error(self) -> np.ndarray:
        return self.h - self.h_hat


def mmse_estimate(y, path_loss, book: PilotBook, rho_tr: float):
    """Linear MMSE estimate ``h_hat_mk = (l_mk / d_mk) y_mk`` plus statistics."""
    d, sigma2, sigma2_err = estimation_stats(path_loss, book, rho_tr)
    h_hat = (path_loss / d)[:, None, :] * y
    return h_hat, d, sigma2, sigma2_err


def draw_channel(realization, N: int, book: PilotBook, rho_tr: float, rng, n_draws=None) -> ChannelDraw:
    """Fading, training and estimation in one call."""
    l = realization.path_loss
    M, K = l.shape
    if book.K != K:
        raise ConfigurationError(f"pilot book has {book.K} users, realization has {K}")
    g = draw_small_scale(M, N, K, rng, n_draws)
    y = training_observation(g, l, book, rho_tr, rng)
    h_hat, d, s2, s2e = mmse_estimate(y, l, book, rho_tr)
    h = np.sqrt(l)[:, None, :] * g
    return ChannelDraw(g, h, h_hat, d, s2, s2e)
