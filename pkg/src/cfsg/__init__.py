"""Cell-free massive MIMO with Poisson-deployed access points.

Monte Carlo simulation of pilot-contaminated MMSE estimation and conjugate
beamforming, next to closed-form deterministic-equivalent SINR, a coverage
lower bound and a mean-field rate bound, with a small-cell baseline.
"""
__version__ = "0.1.0"

from .channel import PilotBook, draw_channel, estimation_stats, make_pilot_book, mmse_estimate
from .closed_form import (coverage_lower_bound, de_sinr, mean_field_sinr, noise_power,
                          normalize_power, rate_lower_bound)
from .config import SystemConfig, dump_config, load_config, parse_config
from .downlink import coverage_mc, sc_baseline_sinr, statistical_sinr
from .errors import ConfigurationError, DivergentMomentError, ValidationError
from .geometry import AreaSpec, NetworkRealization, path_loss, path_loss_spatial_moment, sample_ppp, torus_distance

__all__ = [
    "__version__", "AreaSpec", "NetworkRealization", "PilotBook", "SystemConfig",
    "ConfigurationError", "DivergentMomentError", "ValidationError",
    "torus_distance", "path_loss", "path_loss_spatial_moment", "sample_ppp",
    "make_pilot_book", "draw_channel", "estimation_stats", "mmse_estimate",
    "de_sinr", "coverage_lower_bound", "mean_field_sinr", "rate_lower_bound",
    "noise_power", "normalize_power", "statistical_sinr", "coverage_mc", "sc_baseline_sinr",
    "load_config", "parse_config", "dump_config",
]
