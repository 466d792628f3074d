"""Distances between univariate densities, approximated on a common grid.

The densities are callables evaluated on the grid; the integrals use the
composite trapezoid rule.  ``support_grid`` builds the default grid, 4096
points over the union of the supports padded by 1% of its width, so that
reported numbers are reproducible from the inputs alone.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

__all__ = ["DEFAULT_POINTS", "support_grid", "hellinger", "l1_distance", "sup_distance",
           "InequalityCheck", "check_hellinger_l1"]

DEFAULT_POINTS = 4096

Density = Callable[[np.ndarray], np.ndarray]


def support_grid(*supports: tuple[float, float], n: int = DEFAULT_POINTS, pad: float = 0.01) -> np.ndarray:
    """Equispaced grid over the union of the ``(lo, hi)`` intervals, padded on both sides."""
    if not supports:
        raise ValueError("need at least one support interval")
    lo = min(s[0] for s in supports)
    hi = max(s[1] for s in supports)
    if not hi > lo:
        raise ValueError("supports must have positive total width")
    margin = pad * (hi - lo)
    return np.linspace(lo - margin, hi + margin, n)


def _values(p: Density, q: Density, grid):
    grid = np.asarray(grid, dtype=float)
    return grid, np.asarray(p(grid), dtype=float), np.asarray(q(grid), dtype=float)


def hellinger(p: Density, q: Density, grid) -> float:
    """H(p, q) = sqrt(1/2 int (sqrt p - sqrt q)^2)."""
    grid, a, b = _values(p, q, grid)
    integrand = (np.sqrt(np.maximum(a, 0.0)) - np.sqrt(np.maximum(b, 0.0))) ** 2
    return float(np.sqrt(0.5 * np.trapezoid(integrand, grid)))


def l1_distance(p: Density, q: Density, grid) -> float:
    grid, a, b = _values(p, q, grid)
    return float(np.trapezoid(np.abs(a - b), grid))


def sup_distance(p: Density, q: Density, grid) -> float:
    _, a, b = _values(p, q, grid)
    return float(np.max(np.abs(a - b)))


class InequalityCheck(NamedTuple):
    l1: float
    h2: float
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_hellinger_l1(p: Density, q: Density, grid, tol: float = 1e-3) -> InequalityCheck:
    """Check L1^2 / 4 <= H^2 <= L1 up to an additive ``tol``."""
    l1 = l1_distance(p, q, grid)
    h2 = hellinger(p, q, grid) ** 2
    return InequalityCheck(l1, h2, 0.25 * l1**2 <= h2 + tol, h2 <= l1 + tol)
