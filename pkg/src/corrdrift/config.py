"""TOML experiment configuration: parsing, validation, serialization.

The file is flat key/value with one optional inline table::

    model = "ex1"
    basis = "hermite"
    n_paths = 100
    horizon = 100.0
    correlation = { kind = "toeplitz", rho = 0.5 }
    rho_list = [0.0, 0.5, 0.9]     # sweep for bench; overrides correlation.rho

Unknown keys and out-of-range values raise :class:`ConfigError` naming the
offending key.  Defaults: N=100, T=100, dt=0.1, 25 replicates, kappa=2,
MISE grid 500, empirical gate with p=12, independent paths (rho = [0]).
"""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bench import ExperimentConfig
from .models import MODEL_IDS

__all__ = ["ConfigError", "parse_config", "config_from_mapping", "serialize_config"]

_KNOWN_KEYS = {"model", "basis", "n_paths", "horizon", "dt", "replicates",
               "kappa", "m_max", "seed", "mise_grid", "gate", "p", "x0",
               "interval", "rho_list", "correlation"}
_ALIASES = {"N": "n_paths", "T": "horizon"}
_CORR_KINDS = ("identity", "toeplitz", "tridiagonal")


class ConfigError(ValueError):
    pass


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _check_rho(rho) -> float:
    _require(isinstance(rho, (int, float)) and abs(rho) < 1.0,
             "rho must lie in (-1,1)")
    return float(rho)


def config_from_mapping(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    for alias, key in _ALIASES.items():
        if alias in raw:
            _require(key not in raw, f"{alias} and {key} are synonyms; give one")
            raw[key] = raw.pop(alias)
    unknown = set(raw) - _KNOWN_KEYS
    _require(not unknown, f"unknown config key(s): {', '.join(sorted(unknown))}")

    model = raw.get("model", "ex1")
    _require(model in MODEL_IDS, f"model must be one of {', '.join(MODEL_IDS)}")
    basis = raw.get("basis", "hermite")
    _require(basis in ("hermite", "cosine"), "basis must be 'hermite' or 'cosine'")

    def _positive(key, default, cast):
        value = raw.get(key, default)
        ok_type = (isinstance(value, int) if cast is int
                   else isinstance(value, (int, float)))
        _require(ok_type and not isinstance(value, bool) and value > 0,
                 f"{key} must be positive"
                 + (" integer" if cast is int else ""))
        return cast(value)

    n_paths = _positive("n_paths", 100, int)
    horizon = _positive("horizon", 100.0, float)
    dt = _positive("dt", 0.1, float)
    replicates = _positive("replicates", 25, int)
    mise_grid = _positive("mise_grid", 500, int)
    kappa = raw.get("kappa", 2.0)
    _require(isinstance(kappa, (int, float)) and kappa >= 0,
             "kappa must be nonnegative")
    seed = raw.get("seed", 1)
    _require(isinstance(seed, int) and seed >= 0, "seed must be a nonnegative integer")
    gate = raw.get("gate", "empirical")
    _require(gate in ("empirical", "theoretical"),
             "gate must be 'empirical' or 'theoretical'")
    p = raw.get("p", 12.0)
    _require(isinstance(p, (int, float)) and p >= 12.0, "p must be at least 12")

    m_max = raw.get("m_max")
    if m_max is not None:
        _require(isinstance(m_max, int) and m_max >= 1,
                 "m_max must be a positive integer")
    x0 = raw.get("x0")
    if x0 is not None:
        _require(isinstance(x0, (int, float)), "x0 must be a number")
        x0 = float(x0)
    interval = raw.get("interval")
    if interval is not None:
        _require(isinstance(interval, (list, tuple)) and len(interval) == 2
                 and all(isinstance(v, (int, float)) for v in interval)
                 and interval[0] < interval[1],
                 "interval must be a pair [a, b] with a < b")
        interval = (float(interval[0]), float(interval[1]))

    corr_table = raw.get("correlation", {})
    _require(isinstance(corr_table, dict), "correlation must be a table")
    kind = corr_table.get("kind", "toeplitz")
    _require(kind in _CORR_KINDS,
             f"correlation.kind must be one of {', '.join(_CORR_KINDS)}")
    corr_a = None
    rho_list = raw.get("rho_list")
    if rho_list is not None:
        _require(isinstance(rho_list, (list, tuple)) and len(rho_list) >= 1,
                 "rho_list must be a non-empty list")
        rho_list = tuple(_check_rho(r) for r in rho_list)
    if kind == "identity":
        rho_list = (0.0,)
    elif kind == "toeplitz":
        if rho_list is None:
            rho = corr_table.get("rho", 0.0)
            rho_list = (_check_rho(rho),)
    else:  # tridiagonal
        corr_a = corr_table.get("a", 0.5)
        _require(isinstance(corr_a, (int, float)) and 0.0 <= corr_a <= 1.0,
                 "correlation.a must lie in [0,1]")
        corr_a = float(corr_a)
        rho_list = (0.0,)

    return ExperimentConfig(
        model=model, basis=basis, n_paths=n_paths, horizon=horizon, dt=dt,
        replicates=replicates, correlation_kind=kind, rho_list=rho_list,
        corr_a=corr_a, kappa=float(kappa), m_max=m_max, seed=seed,
        mise_grid=mise_grid, gate=gate, p=float(p), x0=x0, interval=interval)


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_mapping(raw)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, float):
        text = repr(value)
        return text if any(c in text for c in ".einf") else text + ".0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Emit TOML that :func:`parse_config` maps back to an equal config."""
    lines = [
        f"model = {_toml_value(cfg.model)}",
        f"basis = {_toml_value(cfg.basis)}",
        f"n_paths = {cfg.n_paths}",
        f"horizon = {_toml_value(cfg.horizon)}",
        f"dt = {_toml_value(cfg.dt)}",
        f"replicates = {cfg.replicates}",
        f"kappa = {_toml_value(cfg.kappa)}",
        f"seed = {cfg.seed}",
        f"mise_grid = {cfg.mise_grid}",
        f"gate = {_toml_value(cfg.gate)}",
        f"p = {_toml_value(cfg.p)}",
    ]
    if cfg.m_max is not None:
        lines.append(f"m_max = {cfg.m_max}")
    if cfg.x0 is not None:
        lines.append(f"x0 = {_toml_value(cfg.x0)}")
    if cfg.interval is not None:
        lines.append(f"interval = {_toml_value(list(cfg.interval))}")
    lines.append(f"rho_list = {_toml_value(list(cfg.rho_list))}")
    if cfg.correlation_kind == "tridiagonal":
        lines.append(f'correlation = {{ kind = "tridiagonal", a = {_toml_value(cfg.corr_a)} }}')
    else:
        lines.append(f'correlation = {{ kind = {_toml_value(cfg.correlation_kind)} }}')
    return "\n".join(lines) + "\n"
