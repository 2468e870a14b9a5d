import pytest

from corrdrift.bench import ExperimentConfig
from corrdrift.config import (ConfigError, config_from_mapping, parse_config,
                              serialize_config)


def write(tmp_path, text):
    path = tmp_path / "experiment.toml"
    path.write_text(text)
    return path


def test_minimal_config_gets_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, 'model = "ex1"\nbasis = "hermite"\n'))
    assert cfg.n_paths == 100
    assert cfg.horizon == 100.0
    assert cfg.dt == 0.1
    assert cfg.replicates == 25
    assert cfg.kappa == 2.0
    assert cfg.mise_grid == 500
    assert cfg.gate == "empirical"
    assert cfg.p == 12.0
    assert cfg.rho_list == (0.0,)


def test_rho_out_of_range_message(tmp_path):
    path = write(tmp_path, 'correlation = { kind = "toeplitz", rho = 1.5 }\n')
    with pytest.raises(ConfigError, match=r"rho must lie in \(-1,1\)"):
        parse_config(path)
    with pytest.raises(ConfigError, match=r"rho must lie in \(-1,1\)"):
        config_from_mapping({"rho_list": [0.0, -1.0]})


def test_round_trip_through_serialize_parse(tmp_path):
    cfg = ExperimentConfig(model="ex4", basis="cosine", n_paths=64,
                           horizon=50.0, dt=0.05, replicates=200,
                           rho_list=(0.0, 0.5, 0.9), kappa=2.0, m_max=18,
                           seed=42, mise_grid=800, gate="theoretical", p=14.0,
                           x0=0.25, interval=(-1.0, 1.25))
    text = serialize_config(cfg)
    assert parse_config(write(tmp_path, text)) == cfg


def test_round_trip_tridiagonal(tmp_path):
    cfg = config_from_mapping({"correlation": {"kind": "tridiagonal", "a": 0.25}})
    assert cfg.corr_a == 0.25
    assert parse_config(write(tmp_path, serialize_config(cfg))) == cfg


def test_correlation_rho_single_value():
    cfg = config_from_mapping({"correlation": {"kind": "toeplitz", "rho": 0.5}})
    assert cfg.rho_list == (0.5,)
    # explicit rho_list wins over the inline rho
    cfg = config_from_mapping({"correlation": {"kind": "toeplitz", "rho": 0.5},
                               "rho_list": [0.0, 0.9]})
    assert cfg.rho_list == (0.0, 0.9)


def test_identity_kind_forces_rho_zero():
    cfg = config_from_mapping({"correlation": {"kind": "identity"},
                               "rho_list": [0.5]})
    assert cfg.rho_list == (0.0,)


@pytest.mark.parametrize("mapping,fragment", [
    ({"model": "ex7"}, "model must be one of"),
    ({"basis": "spline"}, "basis must be"),
    ({"n_paths": -3}, "n_paths must be positive"),
    ({"horizon": 0}, "horizon must be positive"),
    ({"replicates": 0.5}, "replicates must be positive"),
    ({"kappa": -1.0}, "kappa must be nonnegative"),
    ({"seed": -1}, "seed must be a nonnegative integer"),
    ({"gate": "loose"}, "gate must be"),
    ({"p": 6}, "p must be at least 12"),
    ({"m_max": 0}, "m_max must be a positive integer"),
    ({"interval": [2.0, 1.0]}, "interval must be a pair"),
    ({"correlation": {"kind": "block"}}, "correlation.kind must be"),
    ({"correlation": {"kind": "tridiagonal", "a": 1.5}}, "correlation.a"),
    ({"rho_list": []}, "rho_list must be a non-empty list"),
    ({"frobnicate": 1}, "unknown config key"),
])
def test_validation_messages(mapping, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_mapping(mapping)


def test_invalid_toml_reports_path(tmp_path):
    path = write(tmp_path, "model = [unclosed\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        parse_config(path)


def test_n_and_t_aliases(tmp_path):
    cfg = parse_config(write(tmp_path, "N = 64\nT = 25.0\n"))
    assert cfg.n_paths == 64
    assert cfg.horizon == 25.0
    with pytest.raises(ConfigError, match="synonyms"):
        config_from_mapping({"N": 10, "n_paths": 20})
