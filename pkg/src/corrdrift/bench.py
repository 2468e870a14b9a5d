"""Monte-Carlo experiment harness: MISE studies, the parametric-rate check
and the dependence-statistics table.

A study is described by an :class:`ExperimentConfig` (one model, one basis,
a list of correlation strengths).  Replicates draw fresh correlated
Brownian drivers from per-replicate seeds, so studies are deterministic
given the config and embarrassingly parallel over replicates; failed
replicates are counted and excluded from the aggregates instead of
aborting the study.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import correlation as corr
from .bases import BasisSpec, cosine_basis, hermite_basis
from .estimator import GateSpec, SingularGram
from .models import ModelSpec, get_model
from .selection import EmptyCollection, SelectionResult, select
from .simulate import SimulationExploded, simulate_ensemble

__all__ = ["ExperimentConfig", "BenchRow", "ReplicateOutcome", "RateCheck",
           "mise", "run_study", "replicate_outcomes", "aggregate_outcomes",
           "parametric_rate_check", "tab0_stats", "basis_for", "correlation_for"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte-Carlo study."""

    model: str = "ex1"
    basis: str = "hermite"
    n_paths: int = 100
    horizon: float = 100.0
    dt: float = 0.1
    replicates: int = 25
    correlation_kind: str = "toeplitz"
    rho_list: tuple[float, ...] = (0.0,)
    corr_a: float | None = None          # tridiagonal coupling parameter
    kappa: float = 2.0
    m_max: int | None = None
    seed: int = 1
    mise_grid: int = 500
    gate: str = "empirical"
    p: float = 12.0
    x0: float | None = None
    interval: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        for name in ("n_paths", "horizon", "dt", "mise_grid"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def resolved_m_max(self) -> int:
        """Defaults: 20 for cosine, 10 for Hermite (15 for model ex5)."""
        if self.m_max is not None:
            return self.m_max
        if self.basis == "cosine":
            return 20
        return 15 if self.model == "ex5" else 10

    def model_spec(self) -> ModelSpec:
        return get_model(self.model, x0=self.x0, interval=self.interval)

    def gate_spec(self) -> GateSpec:
        return GateSpec(kind=self.gate, p=self.p)


@dataclass(frozen=True)
class BenchRow:
    example: str
    basis: str
    rho: float
    mean_mise_x100: float
    std_mise_x100: float
    mean_dim: float
    std_dim: float
    n_failed: int = 0


@dataclass(frozen=True)
class ReplicateOutcome:
    replicate: int
    mise: float | None
    m_hat: int | None
    penalty_at_m_hat: float | None
    selection: SelectionResult | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


class RateCheck(NamedTuple):
    mc_mse: float
    formula_mse: float


def basis_for(cfg: ExperimentConfig, model: ModelSpec | None = None) -> BasisSpec:
    model = model or cfg.model_spec()
    m_max = cfg.resolved_m_max()
    if cfg.basis == "cosine":
        a, b = model.interval
        return cosine_basis(a, b, m_max=m_max)
    if cfg.basis == "hermite":
        return hermite_basis(m_max=m_max)
    raise ValueError(f"unknown basis {cfg.basis!r}")


def correlation_for(cfg: ExperimentConfig, rho: float) -> corr.CorrelationMatrix:
    if cfg.correlation_kind == "identity":
        return corr.identity(cfg.n_paths)
    if cfg.correlation_kind == "toeplitz":
        if rho == 0.0:
            return corr.identity(cfg.n_paths)
        return corr.toeplitz(cfg.n_paths, rho)
    if cfg.correlation_kind == "tridiagonal":
        return corr.tridiagonal_factor(cfg.n_paths, cfg.corr_a)
    raise ValueError(f"unknown correlation kind {cfg.correlation_kind!r}")


def mise(estimate, model: ModelSpec, grid_n: int = 500) -> float:
    """Trapezoid approximation of ``int_I (b_hat - b)^2 dx`` on the model's
    display interval; ``estimate`` is any callable, e.g. a DriftEstimate."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    a, b = model.interval
    x = np.linspace(a, b, grid_n)
    gap = np.asarray(estimate(x), dtype=float) - model.drift(x)
    return float(np.trapezoid(gap * gap, x))


def _one_replicate(cfg: ExperimentConfig, rho: float, replicate: int,
                   model: ModelSpec, basis: BasisSpec,
                   R: corr.CorrelationMatrix) -> ReplicateOutcome:
    try:
        ens = simulate_ensemble(model, cfg.n_paths, cfg.horizon, cfg.dt, R,
                                seed=cfg.seed, replicate=replicate)
        result = select(ens, basis, cfg.resolved_m_max(), sigma=model.diffusion,
                        kappa=cfg.kappa, gate=cfg.gate_spec())
    except (SimulationExploded, SingularGram, EmptyCollection,
            corr.NotPositiveDefinite) as exc:
        return ReplicateOutcome(replicate, None, None, None, None,
                                error=f"{type(exc).__name__}: {exc}")
    return ReplicateOutcome(
        replicate=replicate,
        mise=mise(result.estimate, model, cfg.mise_grid),
        m_hat=result.m_hat,
        penalty_at_m_hat=result.penalties[result.m_hat],
        selection=result)


def replicate_outcomes(cfg: ExperimentConfig, rho: float,
                       threads: int = 1) -> list[ReplicateOutcome]:
    """All replicate results for one correlation strength, in replicate order."""
    model = cfg.model_spec()
    basis = basis_for(cfg, model)
    R = correlation_for(cfg, rho)
    reps = range(cfg.replicates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda r: _one_replicate(cfg, rho, r, model, basis, R), reps))
    return [_one_replicate(cfg, rho, r, model, basis, R) for r in reps]


def aggregate_outcomes(cfg: ExperimentConfig, rho: float,
                       outcomes: list[ReplicateOutcome]) -> BenchRow:
    mises = np.array([o.mise for o in outcomes if not o.failed])
    dims = np.array([o.m_hat for o in outcomes if not o.failed], dtype=float)
    n_failed = sum(o.failed for o in outcomes)

    def _std(x: np.ndarray) -> float:
        return float(np.std(x, ddof=1)) if x.size > 1 else 0.0

    return BenchRow(example=cfg.model, basis=cfg.basis, rho=rho,
                    mean_mise_x100=float(100.0 * mises.mean()) if mises.size else np.nan,
                    std_mise_x100=100.0 * _std(mises),
                    mean_dim=float(dims.mean()) if dims.size else np.nan,
                    std_dim=_std(dims), n_failed=n_failed)


def run_study(cfg: ExperimentConfig, threads: int = 1) -> list[BenchRow]:
    """One aggregated row per correlation strength in ``cfg.rho_list``."""
    return [aggregate_outcomes(cfg, rho,
                               replicate_outcomes(cfg, rho, threads=threads))
            for rho in cfg.rho_list]


def parametric_rate_check(n_paths: int, horizon: float,
                          R: corr.CorrelationMatrix, mu: float = 0.0,
                          sigma_const: float = 1.0, replicates: int = 10_000,
                          seed: int = 1) -> RateCheck:
    """Monte-Carlo mean squared error of the geometric-model log-trend
    estimator versus its closed form.

    The estimator averages the terminal log-returns, so its error is
    ``(sigma/(NT)) * sum_i B^i_T`` and the exact MSE equals
    ``(sigma^2/(NT)) * (1 + (1/N) sum_{i != k} R[i, k])``.
    """
    if sigma_const <= 0:
        raise ValueError("sigma_const must be positive")
    theta = mu - 0.5 * sigma_const ** 2
    factor = corr.cholesky(R)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_paths, replicates))
    endpoints = np.sqrt(horizon) * (factor.matrix @ z)
    log_terminal = theta * horizon + sigma_const * endpoints
    theta_hat = log_terminal.mean(axis=0) / horizon
    mc_mse = float(np.mean((theta_hat - theta) ** 2))
    signed_offdiag = (float(R.entries.sum()) - n_paths) / n_paths
    formula = sigma_const ** 2 / (n_paths * horizon) * (1.0 + signed_offdiag)
    return RateCheck(mc_mse=mc_mse, formula_mse=formula)


def tab0_stats(n: int, rho_list) -> list[tuple[float, float, float]]:
    """Rows ``(rho, abs_sum, op_norm)`` for the Toeplitz family at size n."""
    rows = []
    for rho in rho_list:
        R = corr.identity(n) if rho == 0.0 else corr.toeplitz(n, rho)
        stats = corr.dependence_stats(R)
        rows.append((float(rho), stats.abs_sum, stats.op_norm))
    return rows
