"""PPP access-point deployments on a (wrapped) square and the bounded path-loss model.

Lengths are in km and densities in APs/km^2. The path loss
``l(r) = min(1, r**-alpha)`` takes ``r`` in km, so the bounded branch is
``r <= 1 km``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergentMomentError

__all__ = [
    "AreaSpec",
    "NetworkRealization",
    "sample_ppp",
    "torus_distance",
    "pairwise_distances",
    "path_loss",
    "path_loss_spatial_moment",
]


@dataclass(frozen=True)
class AreaSpec:
    """Square simulation window ``[0, side_km)^2``, optionally wrapped into a torus."""

    side_km: float = 1.0
    wrap: bool = True

    def __post_init__(self):
        if not (self.side_km > 0 and math.isfinite(self.side_km)):
            raise ConfigurationError(f"side_km must be positive, got {self.side_km!r}")

    def area(self) -> float:
        return self.side_km**2


@dataclass(frozen=True)
class NetworkRealization:
    """One PPP draw of the AP layout together with the K user positions.

    ``distances`` and ``path_loss`` are ``(M, K)`` arrays indexed ``[m, k]``.
    ``resampled`` counts how many empty (M below the required minimum) draws
    were rejected before this one was accepted.
    """

    ap_positions: np.ndarray
    user_positions: np.ndarray
    distances: np.ndarray
    path_loss: np.ndarray
    alpha: float
    area: AreaSpec
    resampled: int = 0

    @property
    def ap_count(self) -> int:
        return int(self.ap_positions.shape[0])

    M = ap_count

    @property
    def K(self) -> int:
        return int(self.user_positions.shape[0])

    @classmethod
    def from_positions(cls, ap_positions, user_positions, alpha, area=AreaSpec(), resampled=0):
        """Build a realization from explicit coordinates (km)."""
        ap = np.asarray(ap_positions, dtype=float).reshape(-1, 2)
        us = np.asarray(user_positions, dtype=float).reshape(-1, 2)
        r = pairwise_distances(ap, us, area)
        return cls(ap, us, r, path_loss(r, alpha), float(alpha), area, resampled)

    @classmethod
    def from_path_loss(cls, l, alpha=3.5, area=AreaSpec()):
        """Synthetic realization with prescribed ``l_mk``; positions are placeholders.

        Distances are back-computed through the unbounded branch, so entries
        equal to 1 map to ``r = 1``.
        """
        l = np.asarray(l, dtype=float)
        if l.ndim != 2 or np.any(l <= 0) or np.any(l > 1):
            raise ConfigurationError("path loss entries must lie in (0, 1]")
        M, K = l.shape
        r = l ** (-1.0 / alpha)
        return cls(np.zeros((M, 2)), np.zeros((K, 2)), r, l.copy(), float(alpha), area)


def torus_distance(p, q, area: AreaSpec) -> float:
    """Shortest distance between ``p`` and ``q`` over the 9 periodic images of ``q``."""
    d = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    if area.wrap:
        d = np.minimum(d, area.side_km - d)
    return float(math.hypot(d[0], d[1]))


def pairwise_distances(a: np.ndarray, b: np.ndarray, area: AreaSpec) -> np.ndarray:
    """``(len(a), len(b))`` matrix of (torus) distances."""
    d = np.abs(a[:, None, :] - b[None, :, :])
    if area.wrap:
        d = np.minimum(d, area.side_km - d)
    return np.hypot(d[..., 0], d[..., 1])


def _check_alpha(alpha):
    if not alpha > 2:
        raise ConfigurationError(f"path-loss exponent must exceed 2, got {alpha!r}")


def path_loss(r, alpha):
    """Bounded single-slope path loss ``min(1, r**-alpha)``; scalar in, scalar out."""
    _check_alpha(alpha)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(r <= 1.0, 1.0, np.power(np.maximum(r, 1.0), -alpha))
    return float(out) if out.ndim == 0 else out


def path_loss_spatial_moment(v: int, alpha: float) -> float:
    """Plane integral of ``l(r)**v``: ``2*pi*(int_0^1 y dy + int_1^inf y**(1 - v*alpha) dy)``.

    Closed form ``v*alpha*pi / (v*alpha - 2)``. This is the unnormalised
    integral used by the analytical bounds, not a probability-weighted mean.
    """
    if v * alpha <= 2:
        raise DivergentMomentError(f"moment diverges for v*alpha = {v * alpha!r} <= 2")
    va = v * alpha
    return va * math.pi / (va - 2.0)


def sample_ppp(config, seed=None, rng: np.random.Generator | None = None) -> NetworkRealization:
    """Draw AP positions from a homogeneous PPP and K uniform users on ``config.area``.

    Either ``seed`` or ``rng`` must be given. Draws with fewer than
    ``config.min_aps`` points are rejected and redrawn; the number of
    rejections is stored on the result.
    """
    if not config.lambda_ap > 0:
        raise ConfigurationError(f"lambda_ap must be positive, got {config.lambda_ap!r}")
    _check_alpha(config.alpha)
    if rng is None:
        rng = np.random.default_rng(seed)
    area = config.area
    mean = config.lambda_ap * area.area()
    rejected = 0
    while True:
        M = int(rng.poisson(mean))
        if M >= config.min_aps:
            break
        rejected += 1
    ap = rng.uniform(0.0, area.side_km, size=(M, 2))
    users = rng.uniform(0.0, area.side_km, size=(config.K, 2))
    return NetworkRealization.from_positions(ap, users, config.alpha, area, rejected)


def sample_fixed(config, M: int, rng: np.random.Generator) -> NetworkRealization:
    """Binomial point process: exactly ``M`` uniform APs (a PPP conditioned on its count)."""
    ap = rng.uniform(0.0, config.area.side_km, size=(M, 2))
    users = rng.uniform(0.0, config.area.side_km, size=(config.K, 2))
    return NetworkRealization.from_positions(ap, users, config.alpha, config.area)
