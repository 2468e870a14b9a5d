"""Orthonormal function systems used as nested projection spaces.

Two families are supported:

* ``cosine`` on a compact interval ``[a, b]``: the constant function
  ``(b - a)^{-1/2}`` followed by normalized cosines, all vanishing
  outside ``[a, b]``.
* ``hermite`` on the real line: normalized Hermite functions, evaluated
  by a stable three-term recurrence (no factorials, no raw polynomial
  growth).

Indices are 1-based throughout, so ``S_m = span{phi_1, ..., phi_m}`` and
``S_{m'}`` is a prefix of ``S_m`` for ``m' < m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BasisSpec", "cosine_basis", "hermite_basis", "evaluate", "evaluate_all",
           "design_matrix", "l_of_m"]

_PI_QUARTER = np.pi ** (-0.25)


@dataclass(frozen=True)
class BasisSpec:
    """An orthonormal family restricted to its first ``m_max`` members.

    ``support`` is required for the cosine family and ignored for
    Hermite (whose natural domain is the whole real line).
    """

    family: str
    m_max: int
    support: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.family not in ("cosine", "hermite"):
            raise ValueError(f"unknown basis family {self.family!r}")
        if self.m_max < 1:
            raise ValueError("m_max must be a positive integer")
        if self.family == "cosine":
            if self.support is None:
                raise ValueError("cosine basis requires a support interval")
            a, b = self.support
            if not b > a:
                raise ValueError("support must satisfy b > a")

    @property
    def c_phi_sq(self) -> float:
        """Constant (>= 1) with ``L(m) <= c_phi_sq * m`` for all m.

        Cosine: the squared sums peak at the interval endpoints with value
        ``(2m - 1)/(b - a) <= 2m/(b - a)``.  Hermite: every function is
        bounded by ``pi**-0.25``, so the sum is at most ``m / sqrt(pi)``.
        """
        if self.family == "cosine":
            a, b = self.support
            return max(1.0, 2.0 / (b - a))
        return 1.0


def cosine_basis(a: float, b: float, m_max: int = 20) -> BasisSpec:
    return BasisSpec(family="cosine", m_max=m_max, support=(float(a), float(b)))


def hermite_basis(m_max: int = 10) -> BasisSpec:
    return BasisSpec(family="hermite", m_max=m_max)


def _cosine_columns(spec: BasisSpec, m: int, x: np.ndarray) -> np.ndarray:
    a, b = spec.support
    width = b - a
    inside = (x >= a) & (x <= b)
    out = np.zeros((x.size, m))
    out[:, 0] = inside / np.sqrt(width)
    if m > 1:
        # phi_j carries frequency j - 1, so the spaces are the full nested
        # cosine family {1, cos(pi u), cos(2 pi u), ...}.
        u = (x[inside] - a) / width
        freq = np.arange(1, m)
        out[inside, 1:] = np.sqrt(2.0 / width) * np.cos(np.pi * np.outer(u, freq))
    return out


def _hermite_columns(m: int, x: np.ndarray) -> np.ndarray:
    # Normalized recurrence seeded by pi**-1/4 * exp(-x^2/2); each column
    # stays bounded by pi**-1/4 so no overflow occurs for any m.
    out = np.empty((x.size, m))
    out[:, 0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if m > 1:
        out[:, 1] = x * np.sqrt(2.0) * out[:, 0]
    for n in range(1, m - 1):
        out[:, n + 1] = (x * np.sqrt(2.0 / (n + 1)) * out[:, n]
                         - np.sqrt(n / (n + 1.0)) * out[:, n - 1])
    return out


def design_matrix(spec: BasisSpec, m: int, x: np.ndarray) -> np.ndarray:
    """Evaluate ``phi_1..phi_m`` at each point of ``x``; shape (len(x), m)."""
    if not 1 <= m <= spec.m_max:
        raise IndexError(f"dimension m={m} outside 1..{spec.m_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if spec.family == "cosine":
        return _cosine_columns(spec, m, x)
    return _hermite_columns(m, x)


def evaluate_all(spec: BasisSpec, m: int, x: float) -> np.ndarray:
    """Vector ``(phi_1(x), ..., phi_m(x))`` for a scalar ``x``."""
    return design_matrix(spec, m, np.asarray([x], dtype=float))[0]


def evaluate(spec: BasisSpec, j: int, x: float) -> float:
    """Value of the j-th basis function (1-based index)."""
    if not 1 <= j <= spec.m_max:
        raise IndexError(f"basis index j={j} outside 1..{spec.m_max}")
    return float(evaluate_all(spec, j, x)[j - 1])


def _default_grid(spec: BasisSpec, grid_n: int) -> np.ndarray:
    if spec.family == "cosine":
        a, b = spec.support
    else:
        a, b = -12.0, 12.0
    return np.linspace(a, b, grid_n)


def l_of_m(spec: BasisSpec, m: int, grid_n: int = 4096) -> float:
    """``max(1, sup_x sum_j phi_j(x)^2)`` approximated on a uniform grid.

    The grid covers the support for the cosine family (where the true
    supremum sits at an endpoint, so the grid value is exact) and
    ``[-12, 12]`` for Hermite.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    grid = _default_grid(spec, grid_n)
    squares = design_matrix(spec, m, grid) ** 2
    return max(1.0, float(squares.sum(axis=1).max()))
