import math

import pytest

from cfsg.closed_form import noise_power
from cfsg.config import SystemConfig, dump_config, load_config, parse_config
from cfsg.errors import ConfigurationError


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("")
    cfg = load_config(p)
    assert (cfg.K, cfg.N, cfg.lambda_ap, cfg.alpha, cfg.tau_tr, cfg.tau_c) == (10, 5, 40.0, 3.5, 10, 200)
    assert cfg == SystemConfig()


def test_small_exponent_rejected_with_key_and_line():
    with pytest.raises(ConfigurationError, match=r"cfg:2:.*alpha"):
        parse_config("# comment\nalpha = 1.5\n", "cfg")


def test_physical_power_conversion():
    cfg = parse_config("p_d_mW = 200")
    assert cfg.rho_d == pytest.approx(0.2 / noise_power(), rel=1e-12)
    assert cfg.rho_d == pytest.approx(3.14e11, rel=2e-3)


def test_coherence_from_bandwidth_and_time():
    assert parse_config("B_c_kHz = 100\nT_c_ms = 2").tau_c == 200


@pytest.mark.parametrize("text, key", [("foo = 1", "foo"), ("K = ten", "K"), ("K = 2.5", "K"),
                                       ("p_d_mW = 1\nrho_d = 1", "rho_d")])
def test_bad_input_names_key(text, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(text)


def test_dump_roundtrip():
    cfg = parse_config("lambda_ap = 80\nK = 20\npilot_assignment = round-robin\nseed = 9\nwrap = false")
    assert parse_config(dump_config(cfg)) == cfg


def test_infinite_training_power_allowed():
    assert math.isinf(parse_config("rho_tr = inf").rho_tr)
