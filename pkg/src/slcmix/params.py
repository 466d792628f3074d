"""Estimates of (pi, u1, u2), Gaussian kernel density estimates, and the inversion formula.

Two estimators of the mixing parameters are provided:

* ``gaussian_em``: EM for an equal-variance two-component Gaussian mixture.
* ``symmetry_md``: minimizes the relative asymmetry of the component density
  recovered from a kernel estimate of the mixture by the inversion formula.
  At the true parameters the recovered component is symmetric about 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .mixture import MixtureParams

__all__ = [
    "DegenerateFitError",
    "GaussianMixtureFit",
    "KDE",
    "GridDensity",
    "silverman_bandwidth",
    "kde_fit",
    "gaussian_em",
    "symmetry_md",
    "estimate_params",
    "inversion_density",
    "inversion_component",
]

_SQRT2PI = np.sqrt(2.0 * np.pi)


class DegenerateFitError(RuntimeError):
    """No separation found: the two estimated locations coincide."""


# ---------------------------------------------------------------------------
# kernel density estimation


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=float)
    sd = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        spread = sd
    return 0.9 * spread * x.size ** (-0.2)


@dataclass(frozen=True)
class KDE:
    """Gaussian kernel density estimate."""

    data: np.ndarray
    bandwidth: float

    def pdf(self, x, chunk: int = 2048):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.size)
        h = self.bandwidth
        for start in range(0, flat.size, chunk):
            block = flat[start:start + chunk]
            u = (block[:, None] - self.data[None, :]) / h
            out[start:start + chunk] = np.exp(-0.5 * u * u).sum(axis=1)
        out /= self.data.size * h * _SQRT2PI
        return out.reshape(x.shape) if x.ndim else float(out[0])

    __call__ = pdf

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Smoothed bootstrap: a uniformly chosen data point plus N(0, h^2) noise."""
        pick = rng.integers(0, self.data.size, n)
        return self.data[pick] + self.bandwidth * rng.standard_normal(n)

    def grid(self, n: int = 1024) -> np.ndarray:
        lo = self.data.min() - 4 * self.bandwidth
        hi = self.data.max() + 4 * self.bandwidth
        return np.linspace(lo, hi, n)


def kde_fit(samples, bandwidth: float | None = None) -> KDE:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples for a kernel estimate")
    if np.ptp(x) == 0:
        raise ValueError("zero-variance data")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    return KDE(x, h)


@dataclass(frozen=True)
class GridDensity:
    """Density tabulated on an increasing grid, linearly interpolated, zero outside."""

    x: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.x, self.values, left=0.0, right=0.0)

    pdf = __call__

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.x))

    def normalized(self) -> "GridDensity":
        return GridDensity(self.x, self.values / self.integral())


# ---------------------------------------------------------------------------
# inversion formula


def _oriented(params: MixtureParams):
    """(pi, u1, u2) relabelled so that pi < 1/2, as the series requires."""
    if params.pi >= 0.5:
        return 1.0 - params.pi, params.u2, params.u1
    return params.pi, params.u1, params.u2


def inversion_density(g, params: MixtureParams, K: int = 50):
    """Component estimate from a mixture density ``g`` by the truncated series.

    f(x) = 1/(1 - pi) sum_{k=0}^K (-pi/(1 - pi))^k g(x + u2 + k (u2 - u1)),
    after relabelling so that pi < 1/2.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    pi, u1, u2 = _oriented(params)
    ratio = -pi / (1.0 - pi)
    delta = u2 - u1
    coef = ratio ** np.arange(K + 1) / (1.0 - pi)

    def fbar(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for k in range(K + 1):
            total = total + coef[k] * g(x + u2 + k * delta)
        return total

    return fbar


def _component_grid(samples, params, bandwidth, n=1024):
    x = np.asarray(samples, dtype=float)
    reach = max(abs(x.min() - params.u1), abs(x.min() - params.u2),
                abs(x.max() - params.u1), abs(x.max() - params.u2))
    r = reach + 4.0 * bandwidth
    return _mirrored(np.linspace(-r, r, n))


def _mirrored(grid):
    """Make an (almost) symmetric grid exactly symmetric about 0."""
    half = grid[grid.size // 2:]
    return np.concatenate((-half[::-1], half)) if grid.size % 2 == 0 else np.concatenate((-half[:0:-1], half))


def inversion_component(samples, params: MixtureParams, K: int = 50,
                        bandwidth: float | None = None, g=None, grid=None) -> GridDensity:
    """Symmetrized, nonnegative inversion estimate of the component on a grid.

    ``g`` defaults to the Gaussian kernel estimate of ``samples``; the grid
    is symmetric about 0 (1024 points reaching 4 bandwidths past the data).
    """
    if abs(params.pi - 0.5) < 0.05:
        warnings.warn("pi is close to 1/2; the inversion series converges slowly",
                      RuntimeWarning, stacklevel=2)
    if g is None:
        g = kde_fit(samples, bandwidth)
    if grid is None:
        h = g.bandwidth if isinstance(g, KDE) else 0.0
        grid = _component_grid(samples, params, h)
    grid = np.asarray(grid, dtype=float)
    if not np.allclose(grid, -grid[::-1], rtol=0, atol=1e-12 * np.abs(grid).max()):
        raise ValueError("the grid must be symmetric about 0")
    grid = _mirrored(grid)
    fbar = inversion_density(g, params, K)(grid)
    sym = np.maximum(0.5 * (fbar + fbar[::-1]), 0.0)
    return GridDensity(grid, sym)


# ---------------------------------------------------------------------------
# Gaussian mixture EM


@dataclass(frozen=True)
class GaussianMixtureFit:
    params: MixtureParams
    variance: float
    loglik: float
    iterations: int

    def component_pdf(self, x):
        return np.exp(-0.5 * np.asarray(x) ** 2 / self.variance) / np.sqrt(2 * np.pi * self.variance)


def _gauss_loglik(x, pi, m1, m2, var):
    l1 = np.log(pi) - 0.5 * (x - m1) ** 2 / var
    l2 = np.log1p(-pi) - 0.5 * (x - m2) ** 2 / var
    top = np.maximum(l1, l2)
    ll = top + np.log(np.exp(l1 - top) + np.exp(l2 - top)) - 0.5 * np.log(2 * np.pi * var)
    return ll, l1, l2


_SCREEN_TOL = 1e-6


def _gauss_em_run(x, pi, m1, m2, var, tol, max_iter):
    old = -np.inf
    floor = 1e-6 * np.var(x)
    it = 0
    for it in range(1, max_iter + 1):
        ll, l1, l2 = _gauss_loglik(x, pi, m1, m2, var)
        total = ll.sum()
        r = 1.0 / (1.0 + np.exp(l2 - l1))
        s1 = r.sum()
        s2 = x.size - s1
        if s1 < 1e-8 or s2 < 1e-8:
            break
        pi = min(max(s1 / x.size, 1e-10), 1 - 1e-10)
        m1 = float(np.dot(r, x) / s1)
        m2 = float(np.dot(1 - r, x) / s2)
        var = max(float((np.dot(r, (x - m1) ** 2) + np.dot(1 - r, (x - m2) ** 2)) / x.size), floor)
        if abs(total - old) <= tol * abs(total):
            break
        old = total
    ll = float(_gauss_loglik(x, pi, m1, m2, var)[0].sum())
    return pi, m1, m2, var, ll, it


def gaussian_em(samples, tol: float = 1e-10, max_iter: int = 1000) -> GaussianMixtureFit:
    """Equal-variance two-component Gaussian mixture by EM.

    Deterministic multi-start (quantile splits at 20%, 50%, 80%); the best
    log-likelihood wins.  Labels are swapped so that u1 < u2.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateFitError("no separation found: constant data")
    xs = np.sort(x)
    best = None
    for q in (0.2, 0.5, 0.8):
        cut = max(1, min(x.size - 1, int(round(q * x.size))))
        lo, hi = xs[:cut], xs[cut:]
        var0 = (np.sum((lo - lo.mean()) ** 2) + np.sum((hi - hi.mean()) ** 2)) / x.size
        var0 = max(var0, 1e-3 * np.var(x))
        run = _gauss_em_run(x, cut / x.size, lo.mean(), hi.mean(), var0, max(tol, _SCREEN_TOL), max_iter)
        if best is None or run[4] > best[4]:
            best = run
    # only the winning start is run to full precision
    pi, m1, m2, var, ll, it = best
    if tol < _SCREEN_TOL:
        pi, m1, m2, var, ll, more = _gauss_em_run(x, pi, m1, m2, var, tol, max_iter)
        it += more
    if abs(m1 - m2) <= 1e-8:
        raise DegenerateFitError("no separation found")
    if m1 > m2:
        pi, m1, m2 = 1.0 - pi, m2, m1
    return GaussianMixtureFit(MixtureParams(pi, m1, m2), var, ll, it)


# ---------------------------------------------------------------------------
# symmetry-based minimum distance


class _TabulatedKDE:
    def __init__(self, kde: KDE, n: int = 4096):
        self.x = kde.grid(n)
        self.values = kde.pdf(self.x)

    def __call__(self, t):
        return np.interp(t, self.x, self.values, left=0.0, right=0.0)


def _asymmetry(g_tab, grid, pi, u1, u2, K):
    """Relative asymmetry int (f - f(-.))^2 / int (f^2 + f(-.)^2) of the inverted density."""
    if not (0.0 < pi < 1.0) or not u1 < u2 or abs(pi - 0.5) < 0.02:
        return np.inf
    fbar = inversion_density(g_tab, MixtureParams(pi, u1, u2), K)(grid)
    mirror = fbar[::-1]
    denom = np.sum(fbar**2 + mirror**2)
    if denom <= 0:
        return np.inf
    return float(np.sum((fbar - mirror) ** 2) / denom)


def symmetry_md(samples, K: int = 50, n_grid: int = 256, bandwidth: float | None = None):
    """Grid search plus Nelder-Mead refinement of the asymmetry criterion."""
    x = np.asarray(samples, dtype=float).ravel()
    kde = kde_fit(x, bandwidth)
    g_tab = _TabulatedKDE(kde)
    lo, hi = np.percentile(x, [2, 98])
    r = max(abs(x.max() - lo), abs(x.min() - hi)) + 4 * kde.bandwidth
    grid = np.linspace(-r, r, n_grid)
    spots = np.linspace(lo, hi, 21)
    pis = np.r_[np.linspace(0.05, 0.45, 9), np.linspace(0.55, 0.95, 9)]
    best = (np.inf, None)
    for i, a in enumerate(spots):
        for b in spots[i + 1:]:
            for p in pis:
                k_eff = min(K, int(np.ceil((x.max() - x.min() + 8 * kde.bandwidth) / (b - a))) + 1)
                val = _asymmetry(g_tab, grid, p, a, b, k_eff)
                if val < best[0]:
                    best = (val, (p, a, b))

    def crit(theta):
        return _asymmetry(g_tab, grid, theta[0], theta[1], theta[2], K)

    p0, a0, b0 = best[1]
    step = spots[1] - spots[0]
    simplex = np.array([[p0, a0, b0], [p0 + 0.05, a0, b0], [p0, a0 + step, b0], [p0, a0, b0 + step]])
    res = minimize(crit, best[1], method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-4, "fatol": 1e-10, "maxiter": 400})
    p, a, b = res.x if res.fun <= best[0] else best[1]
    if abs(b - a) <= 1e-8:
        raise DegenerateFitError("no separation found")
    return MixtureParams(float(p), float(a), float(b))


def estimate_params(samples, method: str = "gaussian_em") -> MixtureParams:
    """Estimate (pi, u1, u2) with u1 < u2; raises DegenerateFitError on coincident locations."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise ValueError("need at least 10 samples to estimate mixing parameters")
    if method == "gaussian_em":
        return gaussian_em(x).params
    if method == "symmetry_md":
        return symmetry_md(x)
    raise ValueError(f"unknown method {method!r}")
