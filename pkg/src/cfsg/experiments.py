"""Parameter sweeps, figure reproduction and the CSV / JSON / SVG outputs.

A sweep file uses the same ``key = value`` format as the system config::

    parameter = T              # T, lambda_ap, K, tau_tr or alpha
    values = -10:20:2.5        # comma list or inclusive start:stop:step
    metrics = coverage_analytical, coverage_mc
    threshold_db = 0           # coverage threshold when T is not swept
    sinr_source = de           # de | statistical (cell-free MC SINR)
    n_topologies = 1000
    n_channel_draws = 1000
    max_seconds = 600          # optional wall-clock budget
    config.lambda_ap = 80      # overrides applied to the system config

Coverage metrics are probabilities. Rate metrics are per-user throughput in
Mbit/s (spectral efficiency times the configured bandwidth).
"""
from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, seeds
from .closed_form import coverage_lower_bound, db_to_linear, de_sinr, rate_lower_bound
from .config import _KEYS as CONFIG_KEYS, SystemConfig, dump_config, parse_config
from .downlink import (cf_prelog, pilot_book_for, proportion_stderr, sc_baseline_sinr, sc_prelog,
                       statistical_sinr)
from .errors import ConfigurationError
from .geometry import sample_ppp
from .svg import line_plot

__all__ = [
    "PARAMETERS", "METRICS", "FIGURES", "SweepSpec", "Row", "SweepResult",
    "parse_sweep", "load_sweep", "dump_sweep", "apply_overrides",
    "run_sweep", "write_outputs", "reproduce_figure", "embedded_inputs",
]

PARAMETERS = ("T", "lambda_ap", "K", "tau_tr", "alpha")
METRICS = ("coverage_analytical", "coverage_mc", "rate_analytical", "rate_mc", "sc_rate_mc", "sc_coverage_mc")
MAX_TOPOLOGIES = 100_000
MAX_DRAWS = 100_000

_INT_PARAMS = ("K", "tau_tr")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, which metrics to report and how many replicates to use."""

    parameter: str
    values: tuple
    metrics: tuple
    n_topologies: int = 1000
    n_channel_draws: int = 1000
    threshold_db: float = 0.0
    sinr_source: str = "de"
    max_seconds: float | None = None
    overrides: tuple = ()

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ConfigurationError(f"unknown swept parameter {self.parameter!r}; expected one of {PARAMETERS}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigurationError("sweep values must be non-empty")
        if any(not math.isfinite(v) for v in vals):
            raise ConfigurationError("sweep values must be finite")
        steps = np.diff(vals)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigurationError("sweep values must be strictly monotone")
        if self.parameter in _INT_PARAMS:
            if any(not v.is_integer() for v in vals):
                raise ConfigurationError(f"{self.parameter} values must be integers")
            vals = tuple(int(v) for v in vals)
        object.__setattr__(self, "values", vals)
        if not self.metrics:
            raise ConfigurationError("at least one metric is required")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ConfigurationError(f"unknown metric(s) {bad}; expected a subset of {METRICS}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigurationError("duplicate metrics")
        if not 1 <= self.n_topologies <= MAX_TOPOLOGIES:
            raise ConfigurationError(f"n_topologies must be in [1, {MAX_TOPOLOGIES}]")
        if not 2 <= self.n_channel_draws <= MAX_DRAWS:
            raise ConfigurationError(f"n_channel_draws must be in [2, {MAX_DRAWS}]")
        if self.sinr_source not in ("de", "statistical"):
            raise ConfigurationError(f"unknown sinr_source {self.sinr_source!r}")
        if self.max_seconds is not None and not self.max_seconds > 0:
            raise ConfigurationError("max_seconds must be positive")
        for key, _ in self.overrides:
            if key not in CONFIG_KEYS or key == "seed":
                raise ConfigurationError(f"cannot override config key {key!r}")

    def with_replicates(self, n_topologies: int, n_channel_draws: int) -> "SweepSpec":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(n_topologies=n_topologies, n_channel_draws=n_channel_draws)
        return SweepSpec(**d)


def _values(text: str) -> list:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise ValueError("range must be start:stop:step with a non-zero step")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ValueError("empty range")
        return [round(start + i * step, 12) for i in range(n)]
    return [float(v) for v in text.split(",") if v.strip()]


def _names(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


_SWEEP_KEYS = {
    "parameter": str, "values": _values, "metrics": _names,
    "n_topologies": int, "n_channel_draws": int, "threshold_db": float,
    "sinr_source": str, "max_seconds": float,
}


def parse_sweep(text: str, source: str = "<sweep>") -> SweepSpec:
    """Parse a sweep file (see the module docstring)."""
    raw, overrides = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key.startswith("config."):
            overrides.append((key[len("config."):], value))
            continue
        if key not in _SWEEP_KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = _SWEEP_KEYS[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    for req in ("parameter", "values", "metrics"):
        if req not in raw:
            raise ConfigurationError(f"{source}: missing required key {req!r}")
    try:
        return SweepSpec(overrides=tuple(overrides), **raw)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    return parse_sweep(path.read_text(encoding="utf-8"), str(path))


def dump_sweep(spec: SweepSpec) -> str:
    lines = [
        f"parameter = {spec.parameter}",
        "values = " + ", ".join(repr(v) for v in spec.values),
        "metrics = " + ", ".join(spec.metrics),
        f"threshold_db = {spec.threshold_db!r}",
        f"sinr_source = {spec.sinr_source}",
        f"n_topologies = {spec.n_topologies}",
        f"n_channel_draws = {spec.n_channel_draws}",
    ]
    if spec.max_seconds is not None:
        lines.append(f"max_seconds = {spec.max_seconds!r}")
    lines += [f"config.{k} = {v}" for k, v in spec.overrides]
    return "\n".join(lines) + "\n"


# keys that replace a resolved key of the dumped config
_SUPERSEDES = {
    "p_tr_mW": ("rho_tr",), "p_d_mW": ("rho_d",),
    "B_c_kHz": ("tau_c",), "T_c_ms": ("tau_c",),
    "bandwidth_MHz": ("rho_tr", "rho_d"), "noise_figure_dB": ("rho_tr", "rho_d"), "T0_K": ("rho_tr", "rho_d"),
}


def apply_overrides(config: SystemConfig, overrides) -> SystemConfig:
    """Re-parse ``config`` with ``(key, value)`` text overrides applied on top."""
    if not overrides:
        return config
    base = dict(line.split(" = ", 1) for line in dump_config(config).splitlines())
    for key, value in overrides:
        for k in _SUPERSEDES.get(key, ()):
            base.pop(k, None)
        base[key] = value
    return parse_config("".join(f"{k} = {v}\n" for k, v in base.items()), "<overrides>")


@dataclass(frozen=True)
class Row:
    param: float
    metric: str
    mean: float
    stderr: float


@dataclass
class SweepResult:
    """Rows of ``(param, metric, mean, stderr)`` plus provenance metadata."""

    spec: SweepSpec
    config: SystemConfig
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    truncated: bool = False

    def column(self, metric: str):
        """``(params, means, stderrs)`` arrays for one metric."""
        sel = [r for r in self.rows if r.metric == metric]
        return (np.array([r.param for r in sel], dtype=float), np.array([r.mean for r in sel]),
                np.array([r.stderr for r in sel]))

    def to_csv(self) -> str:
        head = [f"# cfsg sweep, master seed {self.config.seed}"]
        head += [f"# config: {line}" for line in dump_config(self.config).splitlines()]
        head += [f"# sweep: {line}" for line in dump_sweep(self.spec).splitlines()]
        if self.truncated:
            head.append("# truncated: wall-clock budget exceeded")
        body = ["param,metric,mean,stderr"]
        body += [f"{_fmt(r.param, 6)},{r.metric},{_fmt(r.mean, 9)},{_fmt(r.stderr, 9)}" for r in self.rows]
        return "\n".join(head + body) + "\n"


def _fmt(x: float, places: int) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{places}f}"
    return "0." + "0" * places if s.lstrip("-") == "0." + "0" * places else s


def embedded_inputs(csv_text: str) -> tuple[str, str]:
    """Config and sweep file texts embedded in a CSV written by :func:`run_sweep`."""
    cfg, sweep = [], []
    for line in csv_text.splitlines():
        if line.startswith("# config: "):
            cfg.append(line[len("# config: "):])
        elif line.startswith("# sweep: "):
            sweep.append(line[len("# sweep: "):])
    if not cfg or not sweep:
        raise ConfigurationError("no embedded config/sweep found")
    return "\n".join(cfg) + "\n", "\n".join(sweep) + "\n"


def _point_config(config: SystemConfig, parameter: str, value) -> SystemConfig:
    if parameter == "T":
        return config
    return config.replace(**{parameter: value})


def _topology(cfg, book, t, spec, need_cf, need_sc):
    real = sample_ppp(cfg, rng=seeds.stream(cfg.seed, t, seeds.GEOMETRY))
    cf = sc = math.nan
    if need_cf:
        if spec.sinr_source == "de":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cf = float(de_sinr(real, cfg, book)[0])
        else:
            rng = seeds.stream(cfg.seed, t, seeds.CF_CHANNEL)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cf = float(statistical_sinr(real, cfg, book, spec.n_channel_draws, rng).gamma[0])
    if need_sc:
        rng = seeds.stream(cfg.seed, t, seeds.SC_CHANNEL)
        sc = float(sc_baseline_sinr(real, cfg, book, spec.n_channel_draws, rng, users=[0]).sinr[0])
    return cf, sc


def _samples(cfg, spec, threads):
    need_cf = any(m in spec.metrics for m in ("coverage_mc", "rate_mc"))
    need_sc = any(m in spec.metrics for m in ("sc_coverage_mc", "sc_rate_mc"))
    if not (need_cf or need_sc):
        return None, None
    book = pilot_book_for(cfg)
    out = seeds.parallel_map(lambda t: _topology(cfg, book, t, spec, need_cf, need_sc),
                             range(spec.n_topologies), threads)
    arr = np.array(out, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def _coverage(samples, T_lin):
    p = float(np.mean(samples > T_lin))
    return p, float(proportion_stderr(p, samples.size))


def _rate(samples, prelog, bandwidth):
    r = prelog * np.log2(1.0 + samples) * bandwidth / 1e6
    se = float(r.std(ddof=1) / math.sqrt(r.size)) if r.size > 1 else 0.0
    return float(r.mean()), se


def _rows_for(value, cfg, spec, T_db, cf, sc):
    T_lin = float(db_to_linear(T_db))
    book = pilot_book_for(cfg)
    rows = []
    for metric in spec.metrics:
        if metric == "coverage_analytical":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mean, se = coverage_lower_bound(T_lin, cfg, book).p_cov, 0.0
        elif metric == "rate_analytical":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mean, se = rate_lower_bound(cfg, book).se * cfg.bandwidth_hz / 1e6, 0.0
        elif metric == "coverage_mc":
            mean, se = _coverage(cf, T_lin)
        elif metric == "sc_coverage_mc":
            mean, se = _coverage(sc, T_lin)
        elif metric == "rate_mc":
            mean, se = _rate(cf, cf_prelog(cfg), cfg.bandwidth_hz)
        else:
            mean, se = _rate(sc, sc_prelog(cfg), cfg.bandwidth_hz)
        rows.append(Row(float(value), metric, float(mean), float(se)))
    return rows


def run_sweep(config: SystemConfig, spec: SweepSpec, out_dir=None, threads: int | None = None,
              name: str = "sweep", svg: bool = True) -> SweepResult:
    """Evaluate every requested metric at every swept value.

    Monte Carlo metrics use topologies ``0 .. n_topologies-1`` of the
    config's seed tree at every swept value (common random numbers), so the
    CSV depends only on the seed, not on ``threads``. When ``max_seconds``
    is exceeded the remaining values are skipped and ``truncated`` is set.
    Files are written to ``out_dir`` when given (see :func:`write_outputs`).
    """
    config = apply_overrides(config, spec.overrides)
    config = config.replace(n_topologies=spec.n_topologies, n_channel_draws=spec.n_channel_draws)
    result = SweepResult(spec, config)
    start = time.perf_counter()
    if spec.parameter == "T":
        cf, sc = _samples(config, spec, threads)
        for v in spec.values:
            result.rows += _rows_for(v, config, spec, v, cf, sc)
    else:
        for i, v in enumerate(spec.values):
            if spec.max_seconds is not None and i and time.perf_counter() - start > spec.max_seconds:
                result.truncated = True
                break
            cfg = _point_config(config, spec.parameter, v)
            cf, sc = _samples(cfg, spec, threads)
            result.rows += _rows_for(v, cfg, spec, spec.threshold_db, cf, sc)
    result.metadata = {
        "name": name,
        "version": __version__,
        "seed": config.seed,
        "config": dump_config(config),
        "sweep": dump_sweep(spec),
        "wall_time_s": round(time.perf_counter() - start, 3),
        "threads": seeds.default_threads() if threads is None else int(threads),
        "truncated": result.truncated,
        "units": {"coverage": "probability", "rate": "Mbit/s per user (spectral efficiency x bandwidth)"},
        "bandwidth_hz": config.bandwidth_hz,
        "typical_user": 0,
        "cf_sinr_source": spec.sinr_source,
        "sc_baseline": "nearest free AP, reduced fidelity",
    }
    if out_dir is not None:
        write_outputs(result, out_dir, name, svg=svg)
    return result


_LABELS = {"T": "SINR threshold T (dB)", "lambda_ap": "AP density (APs/km^2)", "K": "number of users K",
           "tau_tr": "training length", "alpha": "path-loss exponent"}


def _svg_for(results: dict, title: str) -> str:
    series, dashed = {}, set()
    ylabel = ""
    for label, res in results.items():
        for metric in res.spec.metrics:
            x, y, _ = res.column(metric)
            name = f"{label} {metric}".strip()
            series[name] = (x, y)
            if "analytical" in metric:
                dashed.add(name)
            ylabel = "coverage probability" if "coverage" in metric else "per-user rate (Mbit/s)"
    first = next(iter(results.values()))
    meta = f"seed {first.config.seed}; version {__version__}"
    return line_plot(series, title, _LABELS[first.spec.parameter], ylabel, meta, dashed)


def write_outputs(result: SweepResult, out_dir, name: str, svg: bool = True) -> dict:
    """Write ``name.csv``, ``name.json``, ``name.config``, ``name.sweep`` and optionally ``name.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{name}.csv", "json": out / f"{name}.json",
        "config": out / f"{name}.config", "sweep": out / f"{name}.sweep",
    }
    paths["csv"].write_bytes(result.to_csv().encode("utf-8"))
    paths["json"].write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["config"].write_bytes(dump_config(result.config).encode("utf-8"))
    paths["sweep"].write_bytes(dump_sweep(result.spec).encode("utf-8"))
    if svg:
        paths["svg"] = out / f"{name}.svg"
        paths["svg"].write_bytes(_svg_for({"": result}, name).encode("utf-8"))
    return paths


# Figures -------------------------------------------------------------------

FIGURES = {
    "fig1": ("Coverage vs SINR threshold", ("fig1_lambda20", "fig1_lambda40", "fig1_lambda80")),
    "fig2": ("Coverage vs AP density", ("fig2_T-5", "fig2_T0", "fig2_T5")),
    "fig3": ("Rate vs number of users (lambda_AP = 80)", ("fig3_tau5", "fig3_tau10", "fig3_tau20")),
    "fig4": ("Rate vs AP density", ("fig4_tau5", "fig4_tau10", "fig4_tau20")),
    "fig5a": ("Rate vs path-loss exponent (lambda_AP = 60)", ("fig5a_lambda60",)),
    "fig5b": ("Rate vs path-loss exponent (lambda_AP = 120)", ("fig5b_lambda120",)),
}
SCALES = {"desk": (1000, 1000), "paper": (10_000, 10_000)}


def figure_sweep(series: str) -> SweepSpec:
    """The shipped sweep definition of one figure series."""
    text = resources.files("cfsg").joinpath("sweeps", f"{series}.sweep").read_text(encoding="utf-8")
    return parse_sweep(text, f"sweeps/{series}.sweep")


def reproduce_figure(name: str, scale: str = "desk", out_dir=None, config: SystemConfig | None = None,
                     threads: int | None = None, n_topologies: int | None = None) -> dict:
    """Run every series of figure ``name``; returns ``{series: SweepResult}``.

    ``scale`` fixes the replicates (desk: 10^3 topologies x 10^3 draws,
    paper: 10^4 x 10^4); ``n_topologies`` lowers the topology count further.
    With ``out_dir``, each series gets its own CSV/JSON sidecar and the
    figure a combined ``name.svg``.
    """
    if name not in FIGURES:
        raise ConfigurationError(f"unknown figure {name!r}; expected one of {sorted(FIGURES)}")
    if scale not in SCALES:
        raise ConfigurationError(f"unknown scale {scale!r}; expected desk or paper")
    title, series = FIGURES[name]
    n_top, n_draw = SCALES[scale]
    if n_topologies is not None:
        n_top = min(n_top, n_topologies)
    config = config or SystemConfig()
    results = {}
    for s in series:
        spec = figure_sweep(s).with_replicates(n_top, n_draw)
        results[s] = run_sweep(config, spec, out_dir, threads, name=s, svg=False)
    if out_dir is not None:
        (Path(out_dir) / f"{name}.svg").write_bytes(_svg_for(results, title).encode("utf-8"))
    return results
