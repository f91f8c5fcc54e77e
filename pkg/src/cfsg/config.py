"""System parameters and the flat ``key = value`` configuration format.

Unspecified keys take the reference defaults: K = 10 users,
N = 5 antennas per AP, 40 APs/km^2 on a wrapped 1 km x 1 km square,
alpha = 3.5, 100 mW pilot / 200 mW downlink power over 20 MHz with a 9 dB
noise figure at 290 K, and 200-sample coherence blocks (200 kHz x 1 ms)
with 10 training samples.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .closed_form import noise_power, normalize_power
from .errors import ConfigurationError
from .geometry import AreaSpec

__all__ = ["MonteCarlo", "SystemConfig", "load_config", "parse_config", "dump_config"]

_NOISE = noise_power(20e6, 9.0, 290.0)


@dataclass(frozen=True)
class MonteCarlo:
    n_topologies: int = 1000
    n_channel_draws: int = 1000


@dataclass(frozen=True)
class SystemConfig:
    lambda_ap: float = 40.0
    area: AreaSpec = AreaSpec(1.0, True)
    N: int = 5
    K: int = 10
    alpha: float = 3.5
    tau_tr: int = 10
    tau_c: int = 200
    tau_d: int = 10
    rho_tr: float = normalize_power(0.1, _NOISE)
    rho_d: float = normalize_power(0.2, _NOISE)
    pilot_assignment: str = "orthogonal"
    seed: int = 0
    mc: MonteCarlo = field(default_factory=MonteCarlo)
    bandwidth_hz: float = 20e6
    min_aps: int = 1

    def __post_init__(self):
        if self.K < 1 or self.N < 1:
            raise ConfigurationError("K and N must be >= 1")
        if not self.alpha > 2:
            raise ConfigurationError(f"alpha must exceed 2, got {self.alpha!r}")
        if not self.lambda_ap > 0:
            raise ConfigurationError(f"lambda_ap must be positive, got {self.lambda_ap!r}")
        if self.tau_tr < 1 or self.tau_tr > self.tau_c:
            raise ConfigurationError(f"need 1 <= tau_tr <= tau_c, got tau_tr={self.tau_tr}, tau_c={self.tau_c}")
        if self.tau_d < 0 or self.tau_tr + self.tau_d > self.tau_c:
            raise ConfigurationError("tau_tr + tau_d must not exceed tau_c")
        if not (self.rho_tr > 0 and self.rho_d > 0):
            raise ConfigurationError("normalized powers must be positive")
        if self.pilot_assignment not in ("orthogonal", "round-robin"):
            raise ConfigurationError(f"unknown pilot_assignment {self.pilot_assignment!r}")
        if self.mc.n_topologies < 1 or self.mc.n_channel_draws < 1:
            raise ConfigurationError("Monte Carlo replicate counts must be >= 1")
        if self.min_aps < 0:
            raise ConfigurationError("min_aps must be >= 0")

    @property
    def mean_aps(self) -> float:
        return self.lambda_ap * self.area.area()

    def replace(self, **changes) -> "SystemConfig":
        """Copy with changes; ``side_km``, ``wrap``, ``n_topologies`` and ``n_channel_draws`` are accepted."""
        area = {k: changes.pop(k) for k in ("side_km", "wrap") if k in changes}
        mc = {k: changes.pop(k) for k in ("n_topologies", "n_channel_draws") if k in changes}
        if area:
            changes["area"] = dataclasses.replace(self.area, **area)
        if mc:
            changes["mc"] = dataclasses.replace(self.mc, **mc)
        return dataclasses.replace(self, **changes)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _int(s):
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"not an integer: {s!r}")
    return int(f)


_KEYS = {
    "lambda_ap": float, "side_km": float, "wrap": _bool,
    "N": _int, "K": _int, "alpha": float,
    "tau_tr": _int, "tau_c": _int, "tau_d": _int,
    "B_c_kHz": float, "T_c_ms": float,
    "p_tr_mW": float, "p_d_mW": float, "rho_tr": float, "rho_d": float,
    "bandwidth_MHz": float, "noise_figure_dB": float, "T0_K": float,
    "pilot_assignment": str, "seed": _int,
    "n_topologies": _int, "n_channel_draws": _int, "min_aps": _int,
}


def parse_config(text: str, source: str = "<config>") -> SystemConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`SystemConfig`."""
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = lineno
    try:
        return _build(raw)
    except ConfigurationError as exc:
        keys = [k for k in lines if k in str(exc)]
        where = f"{source}:{lines[keys[0]]}: " if keys else f"{source}: "
        raise ConfigurationError(where + str(exc)) from None


def _build(raw: dict) -> SystemConfig:
    bw = raw.pop("bandwidth_MHz", 20.0) * 1e6
    noise = noise_power(bw, raw.pop("noise_figure_dB", 9.0), raw.pop("T0_K", 290.0))
    for phys, norm in (("p_tr_mW", "rho_tr"), ("p_d_mW", "rho_d")):
        if phys in raw and norm in raw:
            raise ConfigurationError(f"give either {phys} or {norm}, not both")
        if norm not in raw:
            raw[norm] = normalize_power(raw.pop(phys, 100.0 if norm == "rho_tr" else 200.0) * 1e-3, noise)
    if "B_c_kHz" in raw or "T_c_ms" in raw:
        if "tau_c" in raw:
            raise ConfigurationError("give either tau_c or B_c_kHz/T_c_ms, not both")
        tau_c = raw.pop("B_c_kHz", 200.0) * raw.pop("T_c_ms", 1.0)
        if not float(tau_c).is_integer():
            raise ConfigurationError(f"B_c_kHz * T_c_ms must be a whole number of samples, got {tau_c}")
        raw["tau_c"] = int(tau_c)
    area = AreaSpec(raw.pop("side_km", 1.0), raw.pop("wrap", True))
    mc = MonteCarlo(raw.pop("n_topologies", 1000), raw.pop("n_channel_draws", 1000))
    return SystemConfig(area=area, mc=mc, bandwidth_hz=bw, **raw)


def load_config(path) -> SystemConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def dump_config(cfg: SystemConfig) -> str:
    """Resolved config in the same format; ``parse_config(dump_config(c)) == c``."""
    items = [
        ("lambda_ap", repr(cfg.lambda_ap)), ("side_km", repr(cfg.area.side_km)),
        ("wrap", str(cfg.area.wrap).lower()), ("N", cfg.N), ("K", cfg.K),
        ("alpha", repr(cfg.alpha)), ("tau_tr", cfg.tau_tr), ("tau_c", cfg.tau_c),
        ("tau_d", cfg.tau_d), ("rho_tr", repr(cfg.rho_tr)), ("rho_d", repr(cfg.rho_d)),
        ("bandwidth_MHz", repr(cfg.bandwidth_hz / 1e6)),
        ("pilot_assignment", cfg.pilot_assignment), ("seed", cfg.seed),
        ("n_topologies", cfg.mc.n_topologies), ("n_channel_draws", cfg.mc.n_channel_draws),
        ("min_aps", cfg.min_aps),
    ]
    return "".join(f"{k} = {v}\n" for k, v in items)
