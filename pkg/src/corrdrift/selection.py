"""Data-driven dimension selection by penalized least squares.

The selected dimension minimizes ``-||b_hat_m||_N^2 + pen(m)`` over the
collection of dimensions passing a stability gate.  Two penalties are
available: the data-driven one built from the sigma-weighted Gram matrix
(the default; needs no knowledge of the correlation matrix) and a
theoretical one proportional to ``1 + (1/N) sum_{i != k} |R[i, k]|`` for
experiments where the correlation matrix is treated as known.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .bases import BasisSpec
from .correlation import CorrelationMatrix, dependence_stats
from .estimator import (DriftEstimate, GateSpec, GramMatrices, NestedDesign,
                        SingularGram)
from .simulate import PathEnsemble

__all__ = ["SelectionResult", "EmptyCollection", "penalty_empirical",
           "penalty_theoretical", "admissible_models", "select"]

DEFAULT_KAPPA = 2.0


class EmptyCollection(RuntimeError):
    """No dimension passed the stability gate."""


@dataclass(frozen=True)
class SelectionResult:
    m_hat: int
    criterion_values: dict[int, float]
    penalties: dict[int, float]
    norms_sq: dict[int, float]
    admissible: tuple[int, ...]
    estimate: DriftEstimate


def penalty_empirical(m: int, grams: GramMatrices, n_paths: int, horizon: float,
                      kappa: float = DEFAULT_KAPPA) -> float:
    """``kappa * (m/(NT)) * ||Psi_hat^-1 Psi_hat_sigma||_op``.

    The operator norm of the (nonsymmetric) product is its largest
    singular value.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if grams.psi_hat_sigma is None:
        raise ValueError("penalty_empirical needs the sigma-weighted Gram matrix")
    try:
        factor = scipy.linalg.cho_factor(grams.psi_hat, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularGram(f"Gram matrix at m={m} is singular") from exc
    product = scipy.linalg.cho_solve(factor, grams.psi_hat_sigma)
    op_norm = float(np.linalg.norm(product, 2))
    return kappa * m / (n_paths * horizon) * op_norm


def penalty_theoretical(m: int, n_paths: int, horizon: float,
                        correlation: CorrelationMatrix,
                        kappa: float = DEFAULT_KAPPA) -> float:
    """``kappa * (m/(NT)) * (1 + (1/N) sum_{i != k} |R[i, k]|)``."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    dep = dependence_stats(correlation).abs_sum  # diagonal contributes the 1
    return kappa * m / (n_paths * horizon) * dep


def _collection_gate_ok(design: NestedDesign, m: int, gate: GateSpec) -> bool:
    nt = design.n_paths * design.horizon
    inv_norm = design.inv_op_norm(m)
    if not np.isfinite(inv_norm):
        return False
    if gate.kind == "empirical":
        return m * inv_norm ** 0.25 <= nt
    d_t = 1.0 / (512.0 * design.basis.c_phi_sq ** 2 * design.horizon
                 * (1.0 + gate.p / 2.0))
    stat = (design.basis.c_phi_sq * m * max(inv_norm, 1.0)) ** 2
    return stat <= d_t * nt / np.log(nt)


def _admissible(design: NestedDesign, m_max: int, gate: GateSpec) -> list[int]:
    return [m for m in range(1, m_max + 1)
            if _collection_gate_ok(design, m, gate)]


def _check_m_max(ens: PathEnsemble, m_max: int) -> None:
    limit = int(ens.n_paths * ens.horizon) + 1
    if m_max > limit:
        raise ValueError(f"m_max={m_max} exceeds the observation budget "
                         f"[NT]+1 = {limit}")


def admissible_models(ens: PathEnsemble, basis: BasisSpec, m_max: int,
                      gate: GateSpec = GateSpec()) -> list[int]:
    """Dimensions 1..m_max passing the collection gate for this sample."""
    _check_m_max(ens, m_max)
    design = NestedDesign(ens, basis, m_max)
    return _admissible(design, m_max, gate)


def select(ens: PathEnsemble, basis: BasisSpec, m_max: int,
           sigma: Callable | None = None, kappa: float = DEFAULT_KAPPA,
           gate: GateSpec = GateSpec(), penalty: str = "empirical",
           correlation: CorrelationMatrix | None = None) -> SelectionResult:
    """Fit every admissible dimension and return the criterion minimizer.

    Ties break toward the smaller dimension.  The fits entering the
    criterion are the plain (untruncated) least squares estimators; the
    gate acts through the admissible collection.
    """
    if penalty not in ("empirical", "theoretical"):
        raise ValueError(f"unknown penalty kind {penalty!r}")
    if penalty == "empirical" and sigma is None:
        raise ValueError("the data-driven penalty requires the diffusion "
                         "coefficient sigma")
    if penalty == "theoretical" and correlation is None:
        raise ValueError("the theoretical penalty requires the correlation matrix")
    _check_m_max(ens, m_max)
    design = NestedDesign(ens, basis, m_max, sigma=sigma)
    admissible = _admissible(design, m_max, gate)
    if not admissible:
        raise EmptyCollection(f"no dimension m <= {m_max} passes the gate")

    norms_sq: dict[int, float] = {}
    penalties: dict[int, float] = {}
    criterion: dict[int, float] = {}
    thetas: dict[int, np.ndarray] = {}
    for m in admissible:
        theta = design.solve(m)
        thetas[m] = theta
        norms_sq[m] = design.norm_sq(theta)
        if penalty == "empirical":
            penalties[m] = penalty_empirical(m, design.gram_matrices(m),
                                             design.n_paths, design.horizon, kappa)
        else:
            penalties[m] = penalty_theoretical(m, design.n_paths, design.horizon,
                                               correlation, kappa)
        criterion[m] = -norms_sq[m] + penalties[m]

    m_hat = min(admissible, key=lambda m: (criterion[m], m))
    estimate = DriftEstimate(basis, m_hat, thetas[m_hat], truncated=False,
                             diagnostics={"lambda_min": design.lambda_min(m_hat),
                                          "inv_op_norm": design.inv_op_norm(m_hat)})
    return SelectionResult(m_hat=m_hat, criterion_values=criterion,
                           penalties=penalties, norms_sq=norms_sq,
                           admissible=tuple(admissible), estimate=estimate)
