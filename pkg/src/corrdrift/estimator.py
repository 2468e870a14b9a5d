"""Projection least squares drift estimation at a fixed dimension.

The estimator solves ``Psi_hat theta = X_hat`` where both sides are
left-point Riemann/Ito sums over the observed paths:

* ``Psi_hat[j, l] = (1/(NT)) sum_i sum_k phi_j(X^i_k) phi_l(X^i_k) dt``
* ``X_hat[j]     = (1/(NT)) sum_i sum_k phi_j(X^i_k) (X^i_{k+1} - X^i_k)``

Using the same left-point rule for both keeps the least squares identity
``gamma_N(b_hat) = -||b_hat||_N^2`` exact up to solver roundoff.

A stability gate decides whether the fit is trusted; when the gate fails
the estimate is truncated to the zero function.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from . import bases
from .bases import BasisSpec
from .simulate import PathEnsemble

__all__ = ["GateSpec", "GramMatrices", "DriftEstimate", "SingularGram",
           "NestedDesign", "empirical_gram", "empirical_target", "fit_fixed_m",
           "empirical_norm_sq", "empirical_norm_sq_fn", "noise_vector"]


class SingularGram(np.linalg.LinAlgError):
    """The empirical Gram matrix could not be factorized."""


@dataclass(frozen=True)
class GateSpec:
    """Stability gate applied before a fit is trusted.

    ``empirical`` uses ``m * ||Psi_hat^-1||^(1/4) <= NT``; ``theoretical``
    uses ``L(m) * max(||Psi_hat^-1||, 1) <= NT / (256 T (1 + p/2) log(NT))``
    with ``p >= 12``.  ``threshold_override`` replaces the right-hand side
    (0 forces truncation), mainly for tests.
    """

    kind: str = "empirical"
    p: float = 12.0
    threshold_override: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("empirical", "theoretical"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "theoretical" and self.p < 12.0:
            raise ValueError("theoretical gate requires p >= 12")

    def evaluate(self, basis: BasisSpec, m: int, inv_op_norm: float,
                 n_paths: int, horizon: float) -> tuple[bool, float, float]:
        """Return (passed, statistic, threshold)."""
        nt = n_paths * horizon
        if self.kind == "empirical":
            stat = m * inv_op_norm ** 0.25
            threshold = nt
        else:
            c_t = 1.0 / (256.0 * horizon * (1.0 + self.p / 2.0))
            stat = bases.l_of_m(basis, m) * max(inv_op_norm, 1.0)
            threshold = c_t * nt / np.log(nt)
        if self.threshold_override is not None:
            threshold = self.threshold_override
        return bool(stat <= threshold), float(stat), float(threshold)


@dataclass(frozen=True)
class GramMatrices:
    """Empirical Gram ``Psi_hat`` (and sigma-weighted variant) at dimension m."""

    m: int
    psi_hat: np.ndarray
    psi_hat_sigma: np.ndarray | None
    lambda_min: float
    inv_op_norm: float


@dataclass(frozen=True)
class DriftEstimate:
    """Coefficients of the fitted drift on the first m basis functions."""

    basis: BasisSpec
    m: int
    theta: np.ndarray
    truncated: bool
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        """Evaluate ``sum_j theta_j phi_j`` at the points x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bases.design_matrix(self.basis, self.m, x) @ self.theta


class NestedDesign:
    """Shared left-point design for all dimensions up to ``m_max``.

    Evaluating the basis once at the maximal dimension makes the Gram
    matrices of nested models exact leading principal blocks of each other
    and keeps repeated fits (as in model selection) cheap.
    """

    def __init__(self, ens: PathEnsemble, basis: BasisSpec, m_max: int,
                 sigma: Callable | None = None):
        if m_max > basis.m_max:
            raise IndexError(f"m_max={m_max} exceeds basis m_max={basis.m_max}")
        states = np.ascontiguousarray(ens.values[:, :-1]).reshape(-1)
        dx = np.ascontiguousarray(np.diff(ens.values, axis=1)).reshape(-1)
        self.basis = basis
        self.m_max = m_max
        self.n_paths = ens.n_paths
        self.horizon = ens.horizon
        n_samples = states.size
        phi = bases.design_matrix(basis, m_max, states)
        self._gram_full = (phi.T @ phi) / n_samples
        self._target_full = phi.T @ dx / (ens.n_paths * ens.horizon)
        if sigma is not None:
            weighted = phi * (np.asarray(sigma(states), dtype=float) ** 2)[:, None]
            gs = (weighted.T @ phi) / n_samples
            self._gram_sigma_full = 0.5 * (gs + gs.T)
        else:
            self._gram_sigma_full = None
        self._lambda_min: dict[int, float] = {}

    def gram(self, m: int) -> np.ndarray:
        return self._gram_full[:m, :m]

    def gram_sigma(self, m: int) -> np.ndarray | None:
        if self._gram_sigma_full is None:
            return None
        return self._gram_sigma_full[:m, :m]

    def target(self, m: int) -> np.ndarray:
        return self._target_full[:m]

    def lambda_min(self, m: int) -> float:
        if m not in self._lambda_min:
            self._lambda_min[m] = float(np.linalg.eigvalsh(self.gram(m))[0])
        return self._lambda_min[m]

    def inv_op_norm(self, m: int) -> float:
        lam = self.lambda_min(m)
        return 1.0 / lam if lam > 0 else np.inf

    def gram_matrices(self, m: int) -> GramMatrices:
        return GramMatrices(m=m, psi_hat=np.array(self.gram(m)),
                            psi_hat_sigma=(None if self._gram_sigma_full is None
                                           else np.array(self.gram_sigma(m))),
                            lambda_min=self.lambda_min(m),
                            inv_op_norm=self.inv_op_norm(m))

    def solve(self, m: int) -> np.ndarray:
        """Least squares coefficients at dimension m via Cholesky."""
        try:
            factor = scipy.linalg.cho_factor(self.gram(m), lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise SingularGram(f"Gram matrix at m={m} is singular") from exc
        return scipy.linalg.cho_solve(factor, self.target(m))

    def norm_sq(self, theta: np.ndarray) -> float:
        """Squared empirical norm ``theta' Psi_hat theta``."""
        m = theta.size
        return float(theta @ self.gram(m) @ theta)

    def fit(self, m: int, gate: GateSpec) -> DriftEstimate:
        inv_norm = self.inv_op_norm(m)
        passed, stat, threshold = gate.evaluate(self.basis, m, inv_norm,
                                                self.n_paths, self.horizon)
        lam = self.lambda_min(m)
        diagnostics = {
            "lambda_min": lam,
            "inv_op_norm": inv_norm,
            "condition": (float(np.linalg.eigvalsh(self.gram(m))[-1] / lam)
                          if lam > 0 else np.inf),
            "gate_kind": gate.kind,
            "gate_stat": stat,
            "gate_threshold": threshold,
        }
        if not passed:
            return DriftEstimate(self.basis, m, np.zeros(m), truncated=True,
                                 diagnostics=diagnostics)
        try:
            theta = self.solve(m)
        except SingularGram:
            warnings.warn(f"Gram factorization failed at m={m} despite the gate; "
                          "returning the truncated (zero) estimate",
                          RuntimeWarning, stacklevel=2)
            diagnostics["singular"] = True
            return DriftEstimate(self.basis, m, np.zeros(m), truncated=True,
                                 diagnostics=diagnostics)
        return DriftEstimate(self.basis, m, theta, truncated=False,
                             diagnostics=diagnostics)


def empirical_gram(ens: PathEnsemble, basis: BasisSpec, m: int,
                   sigma: Callable | None = None) -> GramMatrices:
    """Empirical Gram matrix (and sigma^2-weighted variant when given)."""
    return NestedDesign(ens, basis, m, sigma=sigma).gram_matrices(m)


def empirical_target(ens: PathEnsemble, basis: BasisSpec, m: int) -> np.ndarray:
    """Left-point Ito sums of the basis functions against path increments."""
    return np.array(NestedDesign(ens, basis, m).target(m))


def fit_fixed_m(ens: PathEnsemble, basis: BasisSpec, m: int,
                sigma: Callable | None = None,
                gate: GateSpec = GateSpec()) -> DriftEstimate:
    """Fit the drift on ``span{phi_1..phi_m}``, truncating if the gate fails."""
    return NestedDesign(ens, basis, m, sigma=sigma).fit(m, gate)


def empirical_norm_sq(ens: PathEnsemble, basis: BasisSpec,
                      theta: np.ndarray) -> float:
    """``||sum_j theta_j phi_j||_N^2``, computed as ``theta' Psi_hat theta``."""
    theta = np.asarray(theta, dtype=float)
    return NestedDesign(ens, basis, theta.size).norm_sq(theta)


def empirical_norm_sq_fn(ens: PathEnsemble, f: Callable) -> float:
    """Squared empirical norm of an arbitrary function (left-point time average)."""
    states = ens.values[:, :-1].reshape(-1)
    return float(np.mean(np.asarray(f(states), dtype=float) ** 2))


def noise_vector(ens: PathEnsemble, basis: BasisSpec, m: int,
                 sigma: Callable) -> np.ndarray:
    """Ito sums ``(1/(NT)) sum_i int sigma(X) phi_j(X) dB`` against the
    stored driving increments; used for Monte-Carlo variance diagnostics."""
    if ens.increments is None:
        raise ValueError("ensemble carries no driving increments")
    states = ens.values[:, :-1].reshape(-1)
    db = ens.increments.reshape(-1)
    phi = bases.design_matrix(basis, m, states)
    weights = np.asarray(sigma(states), dtype=float) * db
    return phi.T @ weights / (ens.n_paths * ens.horizon)
