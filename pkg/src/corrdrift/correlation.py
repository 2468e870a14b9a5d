"""Correlation matrices for the driving Brownian motions.

A correlation matrix here is symmetric with unit diagonal and entries in
[-1, 1]; it fixes the cross-covariance ``E(B^i_s B^k_t) = R[i, k] * min(s, t)``
of the N Brownian drivers.  Matrices are stored dense (desk scale, N up to
a few thousand) so that every constructor feeds the same downstream code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = ["CorrelationMatrix", "CholeskyFactor", "NotPositiveDefinite",
           "DependenceStats", "identity", "toeplitz", "block_diagonal",
           "tridiagonal_factor", "custom", "equicorrelated", "cholesky",
           "dependence_stats", "is_identity"]

_PIVOT_TOL = 1e-10
_SYM_TOL = 1e-12


class NotPositiveDefinite(ValueError):
    """Raised when a Cholesky pivot falls below tolerance."""


class DependenceStats(NamedTuple):
    abs_sum: float
    op_norm: float


@dataclass(frozen=True)
class CorrelationMatrix:
    entries: np.ndarray
    descriptor: str = "custom"

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.all(np.isfinite(entries)):
            raise ValueError("correlation matrix entries must be finite")
        if np.abs(entries - entries.T).max() > _SYM_TOL:
            raise ValueError("correlation matrix must be symmetric")
        if np.abs(np.diag(entries) - 1.0).max() > _SYM_TOL:
            raise ValueError("correlation matrix must have unit diagonal")
        if np.abs(entries).max() > 1.0 + _SYM_TOL:
            raise ValueError("correlation entries must lie in [-1, 1]")
        entries = np.ascontiguousarray(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular C with ``C @ C.T`` reproducing the source matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=float))
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def identity(n: int) -> CorrelationMatrix:
    return CorrelationMatrix(np.eye(n), descriptor="identity")


def toeplitz(n: int, rho: float) -> CorrelationMatrix:
    """AR(1)-type matrix with entries ``rho ** |i - k|``; strictly PD for |rho| < 1."""
    if not abs(rho) < 1.0:
        raise ValueError("rho must lie in (-1,1)")
    if rho == 0.0:
        return CorrelationMatrix(np.eye(n), descriptor="toeplitz(rho=0)")
    first = rho ** np.arange(n, dtype=float)
    return CorrelationMatrix(scipy.linalg.toeplitz(first),
                             descriptor=f"toeplitz(rho={rho})")


def block_diagonal(blocks: list[CorrelationMatrix]) -> CorrelationMatrix:
    """Assemble independent groups; the spectrum is the union of block spectra."""
    if not blocks:
        raise ValueError("at least one block required")
    dense = scipy.linalg.block_diag(*[blk.entries for blk in blocks])
    return CorrelationMatrix(dense, descriptor=f"block_diagonal({len(blocks)} blocks)")


def tridiagonal_factor(n: int, a: float) -> CorrelationMatrix:
    """Neighbour coupling from the single-factor scheme
    ``dB^i = sqrt(a) dW^i + sqrt(1-a) dW^{i+1}``: off-diagonals ``sqrt(a(1-a))``.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0,1]")
    off = np.sqrt(a * (1.0 - a))
    entries = np.eye(n) + off * (np.eye(n, k=1) + np.eye(n, k=-1))
    return CorrelationMatrix(entries, descriptor=f"tridiagonal(a={a})")


def equicorrelated(n: int, rho: float) -> CorrelationMatrix:
    """Constant off-diagonal correlation; PSD requires rho >= -1/(n-1)."""
    entries = np.full((n, n), float(rho))
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(entries, descriptor=f"equicorrelated(rho={rho})")


def custom(entries: np.ndarray) -> CorrelationMatrix:
    return CorrelationMatrix(np.asarray(entries, dtype=float), descriptor="custom")


def is_identity(corr: CorrelationMatrix) -> bool:
    """True when the matrix is exactly the identity (no allocation)."""
    return (np.count_nonzero(corr.entries) == corr.n
            and bool(np.all(np.diag(corr.entries) == 1.0)))


def cholesky(corr: CorrelationMatrix) -> CholeskyFactor:
    """Lower Cholesky factor; rejects matrices with pivots below 1e-10."""
    if corr.descriptor == "identity" and is_identity(corr):
        return CholeskyFactor(np.eye(corr.n))
    try:
        factor = scipy.linalg.cholesky(corr.entries, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"correlation matrix {corr.descriptor!r} is not positive definite") from exc
    pivots = np.diag(factor) ** 2
    if pivots.min() < _PIVOT_TOL:
        raise NotPositiveDefinite(
            f"correlation matrix {corr.descriptor!r} has a Cholesky pivot below "
            f"{_PIVOT_TOL:g}")
    return CholeskyFactor(factor)


def dependence_stats(corr: CorrelationMatrix) -> DependenceStats:
    """Scalar summaries of dependence strength.

    ``abs_sum`` is ``(1/n) * sum_{i,k} |R[i,k]|`` (diagonal included, so the
    independent case gives exactly 1); ``op_norm`` is the largest absolute
    eigenvalue.
    """
    n = corr.n
    abs_sum = float(np.abs(corr.entries).sum()) / n
    eigvals = np.linalg.eigvalsh(corr.entries)
    op_norm = float(np.abs(eigvals).max())
    return DependenceStats(abs_sum=abs_sum, op_norm=op_norm)
