"""Conjugate beamforming downlink: Monte Carlo statistical SINR, coverage, small-cell baseline."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import seeds
from .channel import PilotBook, draw_channel, estimation_stats, make_pilot_book, _cn
from .closed_form import db_to_linear, de_sinr
from .errors import ConfigurationError
from .geometry import sample_ppp

__all__ = [
    "SinrReport",
    "ScReport",
    "CoverageCurve",
    "precoder",
    "normalization_mu",
    "empirical_mu",
    "statistical_sinr",
    "coverage_mc",
    "typical_user_sinr",
    "sc_association",
    "sc_baseline_sinr",
    "sc_exact_sinr",
    "cf_prelog",
    "sc_prelog",
]

MIN_DRAWS = 100


def precoder(draw) -> np.ndarray:
    """Scaled conjugate beamformer ``f_mk = h_hat_mk / sigma2_mk``."""
    if np.any(draw.sigma2 <= 0):
        raise ConfigurationError("estimate variance must be positive for channel inversion")
    return draw.h_hat * (1.0 / draw.sigma2)[..., None, :]


def normalization_mu(realization, config, book: PilotBook) -> float:
    """``mu_bar = ((1/W) sum_i tr C_i)^-1`` with ``C_i = diag(1/sigma2_mi I_N)``."""
    _, sigma2, _ = estimation_stats(realization.path_loss, book, config.rho_tr)
    return realization.path_loss.shape[0] / float((1.0 / sigma2).sum())


def empirical_mu(draw) -> float:
    """``W / E[sum_i h_hat_i^H C_i^2 h_hat_i]`` averaged over the draws in ``draw``."""
    f = precoder(draw)
    M, N = f.shape[-3], f.shape[-2]
    power = np.sum(np.abs(f) ** 2, axis=(-3, -2, -1))
    return M * N / float(np.mean(power))


@dataclass
class SinrReport:
    """Monte Carlo statistical SINR next to its deterministic equivalent.

    Moment arrays are per user ``k``: ``mean_gain[k]`` estimates
    ``E[h_k^H C_k h_hat_k]``, ``var_gain[k]`` its variance and
    ``cross[k, i]`` estimates ``E|h_k^H C_i h_hat_i|^2`` (diagonal unused).
    """

    gamma: np.ndarray
    gamma_de: np.ndarray
    mean_gain: np.ndarray
    var_gain: np.ndarray
    cross: np.ndarray
    mu: float
    n_channel_draws: int
    stderr: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def interference(self) -> np.ndarray:
        c = self.cross.copy()
        np.fill_diagonal(c, 0.0)
        return c.sum(axis=1)


def statistical_sinr(realization, config, book: PilotBook, n_draws: int, rng,
                     mu: str = "de", chunk: int = 1000) -> SinrReport:
    """Estimate the use-and-forget SINR of every user from ``n_draws`` channel draws.

    The topology is held fixed. ``mu="de"`` uses the deterministic
    normalization ``mu_bar``; ``mu="empirical"`` replaces it with the sample
    estimate from the same draws.
    """
    notes = []
    if n_draws < MIN_DRAWS:
        notes.append(f"n_draws={n_draws} below {MIN_DRAWS}; moment estimates are unreliable")
    if n_draws < 2:
        raise ConfigurationError("need at least 2 channel draws to estimate a variance")
    l = realization.path_loss
    M, K = l.shape
    N = config.N
    gains = np.empty((n_draws, K), dtype=complex)
    cross_sum = np.zeros((K, K))
    cross_sq = np.zeros((K, K))
    intf_sum = np.zeros(K)
    intf_sq = np.zeros(K)
    power_sum = 0.0
    off = ~np.eye(K, dtype=bool)
    done = 0
    while done < n_draws:
        n = min(chunk, n_draws - done)
        draw = draw_channel(realization, N, book, config.rho_tr, rng, n_draws=n)
        f = precoder(draw).reshape(n, M * N, K)
        h = draw.h.reshape(n, M * N, K)
        b = np.conj(h).transpose(0, 2, 1) @ f  # b[d, k, i] = h_k^H C_i h_hat_i
        gains[done:done + n] = np.diagonal(b, axis1=1, axis2=2)
        p = np.abs(b) ** 2
        cross_sum += p.sum(axis=0)
        cross_sq += (p**2).sum(axis=0)
        it = np.where(off, p, 0.0).sum(axis=2)
        intf_sum += it.sum(axis=0)
        intf_sq += (it**2).sum(axis=0)
        power_sum += float(np.sum(np.abs(f) ** 2))
        done += n

    mean_gain = gains.mean(axis=0)
    dev = np.abs(gains - mean_gain) ** 2
    var_gain = dev.sum(axis=0) / (n_draws - 1)
    cross = cross_sum / n_draws
    intf = intf_sum / n_draws
    if mu == "de":
        mu_val = normalization_mu(realization, config, book)
    elif mu == "empirical":
        mu_val = M * N / (power_sum / n_draws)
    else:
        raise ConfigurationError(f"unknown mu mode {mu!r}")
    gamma = np.abs(mean_gain) ** 2 / (var_gain + intf + 1.0 / (mu_val * config.rho_d))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gamma_de = de_sinr(realization, config, book)
    sq = math.sqrt(n_draws)
    stderr = {
        "mean_gain": np.sqrt(var_gain / n_draws),
        "var_gain": dev.std(axis=0, ddof=1) / sq,
        "cross": np.sqrt(np.maximum(cross_sq / n_draws - cross**2, 0.0) * n_draws / (n_draws - 1)) / sq,
        "interference": np.sqrt(np.maximum(intf_sq / n_draws - intf**2, 0.0) * n_draws / (n_draws - 1)) / sq,
    }
    return SinrReport(gamma, gamma_de, mean_gain, var_gain, cross, mu_val, n_draws, stderr, notes)


def cf_prelog(config) -> float:
    return 1.0 - config.tau_tr / config.tau_c


def sc_prelog(config) -> float:
    return 1.0 - (config.tau_tr + config.tau_d) / config.tau_c


def pilot_book_for(config) -> PilotBook:
    return make_pilot_book(config.tau_tr, config.K, config.pilot_assignment)


def typical_user_sinr(config, topology: int, source: str = "de", book: PilotBook | None = None,
                      user: int = 0) -> float:
    """SINR of ``user`` on topology number ``topology`` of the config's seed tree."""
    book = book or pilot_book_for(config)
    real = sample_ppp(config, rng=seeds.stream(config.seed, topology, seeds.GEOMETRY))
    if source == "de":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return float(de_sinr(real, config, book)[user])
    if source == "statistical":
        rng = seeds.stream(config.seed, topology, seeds.CF_CHANNEL)
        return float(statistical_sinr(real, config, book, config.mc.n_channel_draws, rng).gamma[user])
    raise ConfigurationError(f"unknown SINR source {source!r}")


@dataclass
class CoverageCurve:
    thresholds_db: np.ndarray
    p_cov: np.ndarray
    stderr: np.ndarray
    samples: np.ndarray


def coverage_from_samples(samples, thresholds_db) -> CoverageCurve:
    """Empirical CCDF ``P(SINR > T)`` of ``samples`` at each threshold (dB)."""
    samples = np.asarray(samples, dtype=float)
    t = np.asarray(thresholds_db, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ConfigurationError("thresholds must be sorted")
    with np.errstate(over="ignore"):
        lin = db_to_linear(t)
    p = (samples[None, :] > lin[:, None]).mean(axis=1)
    return CoverageCurve(t, p, proportion_stderr(p, samples.size), samples)


def proportion_stderr(p, n):
    """Binomial standard error with a half-count continuity correction.

    The plug-in ``sqrt(p(1-p)/n)`` is zero at ``p`` = 0 or 1; shifting the
    count by 1/2 keeps it positive at roughly the resolution ``1/n``.
    """
    q = (np.asarray(p) * n + 0.5) / (n + 1.0)
    return np.sqrt(q * (1 - q) / n)


def coverage_mc(config, thresholds_db, source: str = "de", n_topologies: int | None = None,
                threads: int | None = None) -> CoverageCurve:
    """Fraction of topologies in which the typical user's SINR exceeds each threshold."""
    n = n_topologies or config.mc.n_topologies
    book = pilot_book_for(config)
    samples = seeds.parallel_map(lambda t: typical_user_sinr(config, t, source, book), range(n), threads)
    return coverage_from_samples(samples, thresholds_db)


# Small-cell baseline -------------------------------------------------------

def sc_association(realization) -> np.ndarray:
    """Serving AP per user; ``-1`` when no AP is left.

    Links are granted in order of increasing distance (ties by user, then AP
    index), so a contested AP goes to its nearer user and the other user
    falls back to its nearest still-free AP.
    """
    r = realization.distances
    M, K = r.shape
    serving = np.full(K, -1, dtype=int)
    taken = np.zeros(M, dtype=bool)
    m_idx, k_idx = np.meshgrid(np.arange(M), np.arange(K), indexing="ij")
    order = np.lexsort((m_idx.ravel(), k_idx.ravel(), r.ravel()))
    left = min(M, K)
    for flat in order:
        m, k = divmod(int(flat), K)
        if serving[k] < 0 and not taken[m]:
            serving[k] = m
            taken[m] = True
            left -= 1
            if left == 0:
                break
    return serving


@dataclass
class ScReport:
    sinr: np.ndarray
    rate: np.ndarray
    serving: np.ndarray
    prelog: float
    rho_sc: float
    n_channel_draws: int
    label: str = "baseline, reduced fidelity"


def _sc_setup(realization, config, book):
    serving = sc_association(realization)
    l = realization.path_loss
    M, K = l.shape
    d, sigma2, _ = estimation_stats(l, book, config.rho_tr)
    served = np.flatnonzero(serving >= 0)
    s = serving[served]
    return serving, served, s, d[s, served], sigma2[s, served], config.rho_d * M / K


def sc_baseline_sinr(realization, config, book: PilotBook, n_draws: int, rng,
                     users=None, chunk: int = 2000) -> ScReport:
    """Monte Carlo SINR of the nearest-AP small-cell baseline.

    Each user is served by one AP (see :func:`sc_association`) that
    conjugate-beamforms its own MMSE estimate with per-antenna power
    ``rho_sc = (M/K) rho_d``; the other serving APs interfere through their
    true channels. The SINR uses the same mean/variance bounding as the
    cell-free statistical SINR restricted to the serving AP. Only the users
    in ``users`` (default all) are evaluated; the others report ``nan``.
    Unserved users get SINR 0.
    """
    if n_draws < 2:
        raise ConfigurationError("need at least 2 channel draws")
    l = realization.path_loss
    M, K = l.shape
    N = config.N
    users = np.arange(K) if users is None else np.asarray(users, dtype=int)
    serving, served, s, d_s, sig_s, rho_sc = _sc_setup(realization, config, book)
    J = served.size
    inner = book.inner
    noise = 0.0 if math.isinf(config.rho_tr) else 1.0 / (book.tau_tr * config.rho_tr)
    # Pilot observation at AP s(j): explicit terms for the evaluated users, the
    # remaining users and the receiver noise lumped into one Gaussian.
    coef = inner[np.ix_(users, served)]                  # (U, J)
    l_su = l[np.ix_(s, users)]                           # (J, U)
    mask = np.ones((J, K), dtype=bool)
    mask[:, users] = False
    rest_var = (np.abs(inner[:, served].T) ** 2 * l[s, :] * mask).sum(axis=1) + noise
    scale = l[s, served] / d_s

    U = users.size
    sums_b = np.zeros((J, U), dtype=complex)
    sums_p = np.zeros((J, U))
    sums_p2 = np.zeros((J, U))
    done = 0
    while done < n_draws:
        n = min(chunk, n_draws - done)
        h = _cn(rng, (n, J, U, N)) * np.sqrt(l_su)[None, :, :, None]
        rest = _cn(rng, (n, J, N)) * np.sqrt(rest_var)[None, :, None]
        y = np.einsum("djun,uj->djn", h, coef) + rest
        h_hat = y * scale[None, :, None]
        b = np.einsum("djun,djn->dju", np.conj(h), h_hat)
        sums_b += b.sum(axis=0)
        p = np.abs(b) ** 2
        sums_p += p.sum(axis=0)
        sums_p2 += (p**2).sum(axis=0)
        done += n

    mean_b = sums_b / n_draws
    second = sums_p / n_draws
    sinr = np.full(K, np.nan)
    pos = {int(j): t for t, j in enumerate(served)}
    for ui, u in enumerate(users):
        if serving[u] < 0:
            sinr[u] = 0.0
            continue
        ju = pos[int(u)]
        var = (second[ju, ui] - abs(mean_b[ju, ui]) ** 2) * n_draws / (n_draws - 1)
        others = np.arange(J) != ju
        intf = float((second[others, ui] / sig_s[others]).sum())
        sinr[u] = (abs(mean_b[ju, ui]) ** 2 / sig_s[ju]) / (var / sig_s[ju] + intf + 1.0 / rho_sc)
    pre = sc_prelog(config)
    return ScReport(sinr, pre * np.log2(1.0 + sinr), serving, pre, rho_sc, n_draws)


def sc_exact_sinr(realization, config, book: PilotBook) -> np.ndarray:
    """Small-cell SINR with the Gaussian moments evaluated in closed form (test oracle)."""
    l = realization.path_loss
    M, K = l.shape
    N = config.N
    serving, served, s, d_s, sig_s, rho_sc = _sc_setup(realization, config, book)
    inner = book.inner
    out = np.zeros(K)
    for ju, u in enumerate(served):
        m = s[ju]
        desired = (N * sig_s[ju]) ** 2
        var = N * l[m, u] * sig_s[ju]
        intf = 0.0
        for jj, j in enumerate(served):
            if jj == ju:
                continue
            a = s[jj]
            rho = l[a, j] / d_s[jj] * l[a, u] * inner[u, j]
            intf += (N * l[a, u] * sig_s[jj] + N**2 * abs(rho) ** 2) / sig_s[jj]
        out[u] = (desired / sig_s[ju]) / (var / sig_s[ju] + intf + 1.0 / rho_sc)
    return out
