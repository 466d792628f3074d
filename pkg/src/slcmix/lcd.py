"""Weighted log-concave density estimation on [0, inf) with the mode at 0.

The estimator maximizes

    sum_i w_i * phi(z_i) - int_0^{z_m} exp(phi(t)) dt

over concave, nonincreasing, piecewise-linear ``phi`` whose knots are a subset
of the data points.  The additive Lagrange term makes the maximizer a
probability density.  The optimizer is an active-set method: Newton steps on
the node values for a fixed knot set, knot deletion when a step would break
concavity, and knot insertion driven by hinge directional derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ConvergenceError",
    "JValue",
    "WeightedPoints",
    "PiecewiseLogDensity",
    "CharacterizationReport",
    "j_eval",
    "integral_exp",
    "eval_log_density",
    "eval_cdf",
    "objective",
    "hinge_derivatives",
    "fit_weighted_mode_mle",
    "characterization_report",
    "sample",
]

# Below this |s - r| the closed forms lose digits to cancellation (J_{0,2}
# divides by y**3), so a Taylor series is used instead.
J_SERIES_CUTOFF = 0.1
_J_TERMS = 14
_FACT = np.cumprod(np.r_[1.0, np.arange(1, _J_TERMS)])
_K = np.arange(_J_TERMS)
_SERIES = np.stack([1.0 / (_FACT * (_K + 1)), 1.0 / (_FACT * (_K + 2)), 1.0 / (_FACT * (_K + 3))])


class ConvergenceError(RuntimeError):
    """Raised when the active-set iteration exhausts its budget."""


class JValue(NamedTuple):
    """J(r, s) = int_0^1 exp((1-t) r + t s) dt and its first two s-derivatives."""

    value: np.ndarray | float
    d_ds: np.ndarray | float
    d2_ds2: np.ndarray | float


def _j_at_zero(y):
    """Return (J00, J01, J02) at (0, y) for an array y."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < J_SERIES_CUTOFF
    series = (np.where(small, y, 0.0)[..., None] ** _K) @ _SERIES.T
    yb = np.where(small, 1.0, y)
    with np.errstate(over="ignore"):
        e = np.exp(yb)
        em1 = np.expm1(yb)
        c0 = em1 / yb
        c1 = (yb * e - em1) / yb**2
        c2 = (yb**2 * e - 2.0 * yb * e + 2.0 * em1) / yb**3
    return (np.where(small, series[..., 0], c0), np.where(small, series[..., 1], c1),
            np.where(small, series[..., 2], c2))


def _j_parts(r, s):
    """Vectorized J, dJ/ds, d2J/ds2 at (r, s), overflow-safe for large |s - r|."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    y = s - r
    # anchor the exponent at the larger end; for s > r mirror t -> 1 - t
    b0, b1, b2 = _j_at_zero(-np.abs(y))
    em = np.exp(np.maximum(r, s))
    neg = y <= 0
    return (em * b0, em * np.where(neg, b1, b0 - b1),
            em * np.where(neg, b2, b0 - 2.0 * b1 + b2))


def j_eval(r, s) -> JValue:
    """Evaluate J(r, s) with its first and second partial derivatives in ``s``.

    Accepts scalars or arrays (broadcast together).
    """
    v, d1, d2 = _j_parts(r, s)
    if v.ndim == 0:
        return JValue(float(v), float(d1), float(d2))
    return JValue(v, d1, d2)


@dataclass(frozen=True)
class WeightedPoints:
    """Distinct nonnegative points with positive weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.ndim != 1 or p.shape != w.shape:
            raise ValueError("points and weights must be 1-d arrays of equal length")
        if p.size and (p[0] < 0 or np.any(np.diff(p) <= 0)):
            raise ValueError("points must be nonnegative and strictly increasing")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if p.size and abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_raw(cls, points, weights=None) -> "WeightedPoints":
        """Sort, merge duplicates by summing weights, and normalize."""
        points = np.asarray(points, dtype=float).ravel()
        if weights is None:
            weights = np.ones_like(points)
        weights = np.asarray(weights, dtype=float).ravel()
        if points.shape != weights.shape:
            raise ValueError("points and weights must have equal length")
        if np.any(points < 0) or not np.all(np.isfinite(points)):
            raise ValueError("points must be finite and nonnegative")
        keep = weights > 0
        uniq, inv = np.unique(points[keep], return_inverse=True)
        merged = np.bincount(inv, weights=weights[keep], minlength=uniq.size)
        total = merged.sum()
        if uniq.size == 0 or total <= 0:
            return cls(np.empty(0), np.empty(0))
        return cls(uniq, merged / total)

    def __len__(self):
        return self.points.size


@dataclass(frozen=True)
class PiecewiseLogDensity:
    """Log-density linear between ``knots`` and -inf outside [0, knots[-1]].

    ``knots[0]`` is 0; ``logvals[j]`` is the log-density at ``knots[j]``.
    """

    knots: np.ndarray
    logvals: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float)
        phi = np.asarray(self.logvals, dtype=float)
        if t.ndim != 1 or t.shape != phi.shape or t.size < 2:
            raise ValueError("need at least two knots with matching log-values")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("knots must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(phi)):
            raise ValueError("log-values must be finite")
        object.__setattr__(self, "knots", t)
        object.__setattr__(self, "logvals", phi)

    @property
    def support_end(self) -> float:
        return float(self.knots[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.logvals) / np.diff(self.knots)

    def is_concave(self, atol=1e-9) -> bool:
        s = self.slopes
        return bool(np.all(np.diff(s) <= atol * (1.0 + np.abs(s[1:]))))

    def is_nonincreasing(self, atol=1e-12) -> bool:
        return bool(np.all(self.slopes <= atol))

    def segment_masses(self) -> np.ndarray:
        h = np.diff(self.knots)
        return h * _j_parts(self.logvals[:-1], self.logvals[1:])[0]

    def integral(self) -> float:
        return float(self.segment_masses().sum())

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.knots, self.logvals)
        out = np.where((x < 0) | (x > self.knots[-1]), -np.inf, out)
        return out if out.ndim else float(out)

    def density(self, x):
        return np.exp(self.log_density(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        t, phi = self.knots, self.logvals
        cum = np.r_[0.0, np.cumsum(self.segment_masses())]
        xc = np.clip(x, 0.0, t[-1])
        j = np.clip(np.searchsorted(t, xc, side="right") - 1, 0, t.size - 2)
        phix = np.interp(xc, t, phi)
        part = (xc - t[j]) * _j_parts(phi[j], phix)[0]
        out = np.clip(cum[j] + part, 0.0, 1.0)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Inverse-cdf draws: pick a segment by mass, then invert within it."""
        t, phi = self.knots, self.logvals
        masses = self.segment_masses()
        seg = np.searchsorted(np.cumsum(masses) / masses.sum(), rng.random(n), side="right")
        seg = np.minimum(seg, masses.size - 1)
        u = rng.random(n)
        h = np.diff(t)[seg]
        bh = (phi[seg + 1] - phi[seg])
        flat = np.abs(bh) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(flat, u, np.log1p(u * np.expm1(bh)) / np.where(flat, 1.0, bh))
        return t[seg] + h * np.clip(frac, 0.0, 1.0)


def integral_exp(d: PiecewiseLogDensity) -> float:
    """Exact integral of exp(phi) over the support."""
    return d.integral()


def eval_log_density(d: PiecewiseLogDensity, x):
    return d.log_density(x)


def eval_cdf(d: PiecewiseLogDensity, x):
    return d.cdf(x)


def sample(d: PiecewiseLogDensity, rng: np.random.Generator, n: int) -> np.ndarray:
    return d.sample(rng, n)


def objective(d: PiecewiseLogDensity, data: WeightedPoints) -> float:
    """Penalized weighted log-likelihood sum_i w_i phi(z_i) - int exp(phi)."""
    vals = d.log_density(data.points)
    if np.any(np.isinf(vals)):
        return -np.inf
    return float(np.dot(data.weights, vals) - d.integral())


# ---------------------------------------------------------------------------
# hinge moments: H(z) = int (x - z)_+ dmu(x)


def _empirical_hinge(data: WeightedPoints, z):
    x, w = data.points, data.weights
    tail_w = np.append(np.cumsum(w[::-1])[::-1], 0.0)
    tail_wx = np.append(np.cumsum((w * x)[::-1])[::-1], 0.0)
    k = np.searchsorted(x, z, side="right")
    return tail_wx[k] - z * tail_w[k]


def _fitted_hinge(t, phi, z):
    """int_z^{t_m} (x - z) exp(phi(x)) dx, exact per segment."""
    h = np.diff(t)
    j0, j1, _ = _j_parts(phi[:-1], phi[1:])
    seg_mass = h * j0
    tail_m = np.append(np.cumsum(seg_mass[::-1])[::-1], 0.0)
    incr = h * tail_m[1:] + h**2 * j1
    tail_q = np.append(np.cumsum(incr[::-1])[::-1], 0.0)
    nseg = h.size
    zc = np.clip(z, 0.0, t[-1])
    j = np.clip(np.searchsorted(t, zc, side="right") - 1, 0, nseg - 1)
    hr = t[j + 1] - zc
    phiz = np.interp(zc, t, phi)
    within = hr**2 * _j_parts(phiz, phi[j + 1])[1]
    return within + tail_q[j + 1] + hr * tail_m[j + 1]


def hinge_derivatives(d: PiecewiseLogDensity, data: WeightedPoints, z) -> np.ndarray:
    """Directional derivatives of the objective along phi -> phi - eps (x - z)_+.

    Nonpositive at every z in [0, z_m] exactly when ``d`` is the maximizer.
    """
    z = np.asarray(z, dtype=float)
    return _fitted_hinge(d.knots, d.logvals, z) - _empirical_hinge(data, z)


# ---------------------------------------------------------------------------
# active-set solver
#
# State: nodes 0 = tau_0 < tau_1 < ... < tau_K < tau_{K+1} = z_m with the
# interior nodes drawn from the data, node values u_j = phi(tau_j), and a
# flag ``free0``.  When it is off, u_0 is tied to u_1 (flat first piece) and
# the free vector is v = u[1:]; when on, v = u and the slope on the first
# piece is only required to be <= 0.  The tie costs nothing when the
# smallest point is positive, but a point at 0 can need the kink there.


class _Problem:
    def __init__(self, data: WeightedPoints):
        self.x = data.points
        self.w = data.weights
        self.end = float(self.x[-1])
        self.candidates = self.x[(self.x > 0) & (self.x < self.end)]

    @staticmethod
    def node_values(v, free0):
        return v if free0 else np.concatenate((v[:1], v))

    @staticmethod
    def reduce(gu, free0):
        if free0:
            return gu
        g = gu[1:].copy()
        g[0] += gu[0]
        return g

    def linear_term(self, nodes, free0):
        """Gradient of sum_i w_i phi(z_i) with respect to v (it is linear in v)."""
        k1 = nodes.size - 1
        j = np.clip(np.searchsorted(nodes, self.x, side="right") - 1, 0, k1 - 1)
        lam = (self.x - nodes[j]) / (nodes[j + 1] - nodes[j])
        gu = (np.bincount(j, self.w * (1.0 - lam), minlength=k1 + 1)
              + np.bincount(j + 1, self.w * lam, minlength=k1 + 1))
        return self.reduce(gu, free0)

    def integral_parts(self, nodes, v, free0, hessian=True):
        u = self.node_values(v, free0)
        h = np.diff(nodes)
        j0, j1, j2 = _j_parts(u[:-1], u[1:])
        total = float(np.dot(h, j0))
        gl = h * (j0 - j1)
        gr = h * j1
        grad = self.reduce(np.append(gl, 0.0) + np.concatenate(([0.0], gr)), free0)
        if not hessian:
            return total, grad, None
        k2 = u.size
        hu = np.zeros((k2, k2))
        idx = np.arange(k2 - 1)
        hu[idx, idx] += h * (j0 - 2.0 * j1 + j2)
        hu[idx + 1, idx + 1] += h * j2
        off = h * (j1 - j2)
        hu[idx, idx + 1] += off
        hu[idx + 1, idx] += off
        if not free0:
            hess = hu[1:, 1:].copy()
            hess[0, :] += hu[0, 1:]
            hess[:, 0] += hu[1:, 0]
            hess[0, 0] += hu[0, 0]
            hu = hess
        return total, grad, hu

    @classmethod
    def bends(cls, nodes, v, free0):
        """Slope decreases, >= 0 iff feasible; with ``free0`` the first entry is -slope_0."""
        s = np.diff(cls.node_values(v, free0)) / np.diff(nodes)
        b = s[:-1] - s[1:]
        return np.concatenate(([-s[0]], b)) if free0 else b


def _initial_state(prob: _Problem, init: PiecewiseLogDensity | None):
    if init is not None and init.support_end == prob.end:
        interior = init.knots[1:-1]
        if interior.size == 0 or np.all(np.isin(interior, prob.candidates)):
            nodes = init.knots.copy()
            free0 = bool(init.slopes[0] < 0)
            v = init.logvals.copy() if free0 else init.logvals[1:].copy()
            if np.all(_Problem.bends(nodes, v, free0) >= 0):
                return nodes, v, free0
    # half-normal matched to the weighted second moment
    sigma2 = max(float(np.dot(prob.w, prob.x**2)), 1e-300)
    cand = prob.candidates
    if cand.size:
        qs = np.quantile(cand, np.linspace(0.1, 0.9, 8))
        pick = np.unique(cand[np.clip(np.searchsorted(cand, qs), 0, cand.size - 1)])
    else:
        pick = cand
    nodes = np.concatenate(([0.0], pick, [prob.end]))
    v = -nodes[1:] ** 2 / (2.0 * sigma2)
    v = v - v.max()
    total = prob.integral_parts(nodes, v, False, hessian=False)[0]
    return nodes, v - np.log(total), False


def fit_weighted_mode_mle(data: WeightedPoints, tol: float = 1e-7, max_iter: int = 500,
                          init: PiecewiseLogDensity | None = None) -> PiecewiseLogDensity:
    """Weighted log-concave MLE on [0, inf) with mode at 0.

    Parameters
    ----------
    data : WeightedPoints
        Distinct points with normalized weights.
    tol : float
        Bound on the final hinge directional derivatives and on the gradient
        of the active subproblem.
    max_iter : int
        Budget of Newton steps.
    init : PiecewiseLogDensity, optional
        Warm start; used only if it is feasible for ``data`` (same support
        end, knots among the data points, concave).

    Returns
    -------
    PiecewiseLogDensity
        Knots are 0, the active data points, and max(points).  The first
        piece is flat unless a point sits at 0.
    """
    if len(data) == 0:
        raise ValueError("cannot fit a density to zero points")
    if tol <= 0:
        raise ValueError("tol must be positive")
    prob = _Problem(data)
    if prob.end <= 0:
        raise ValueError("all points are at zero; no density has this support")
    if len(data) == 1:
        return PiecewiseLogDensity(np.array([0.0, prob.end]),
                                   np.full(2, -np.log(prob.end)))

    nodes, v, free0 = _initial_state(prob, init)
    inner_tol = 1e-3 * tol
    lin = prob.linear_term(nodes, free0)
    single_add = False
    just_added = np.empty(0)

    def value(vv):
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.dot(lin, vv)) - prob.integral_parts(nodes, vv, free0, hessian=False)[0]

    for _ in range(max_iter):
        total, igrad, ihess = prob.integral_parts(nodes, v, free0)
        grad = lin - igrad
        if np.max(np.abs(grad)) <= inner_tol:
            d = PiecewiseLogDensity(nodes, prob.node_values(v, free0))
            free = prob.candidates[~np.isin(prob.candidates, nodes)]
            if not free0:
                free = np.concatenate(([0.0], free))
            if free.size == 0:
                break
            deriv = hinge_derivatives(d, data, free)
            if deriv.max() <= tol:
                break
            if single_add:
                add = free[[int(np.argmax(deriv))]]
            else:
                gap = np.searchsorted(nodes, free)
                order = np.lexsort((-deriv, gap))
                first = np.concatenate(([True], gap[order][1:] != gap[order][:-1]))
                best = order[first]
                add = free[best[deriv[best] > tol]]
            just_added = add
            u = prob.node_values(v, free0)
            if add[0] == 0.0:
                # release the tie; the origin kink starts at zero bend
                free0 = True
                add = add[1:]
            new_nodes = np.union1d(nodes, add)
            u = np.interp(new_nodes, nodes, u)
            nodes = new_nodes
            v = u if free0 else u[1:]
            lin = prob.linear_term(nodes, free0)
            continue

        try:
            step = np.linalg.solve(ihess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(ihess, grad, rcond=None)[0]
        b0 = prob.bends(nodes, v, free0)
        b1 = prob.bends(nodes, v + step, free0)
        t_max = 1.0
        if np.any(b1 < 0):
            neg = b1 < 0
            ratios = np.maximum(b0[neg], 0.0) / (b0[neg] - b1[neg])
            t_max = float(ratios.min())
        t = min(1.0, t_max)
        base = float(np.dot(lin, v)) - total
        slope = float(np.dot(grad, step))
        # a Newton decrement this small is below float resolution of the
        # objective; the quadratic model is exact there, so skip the search
        # written so that a non-finite trial value also counts as failure
        # a step blocked at (nearly) zero length is still taken: it drops the knot
        if t > 1e-12:
            while slope > 1e-14 and t > 1e-12 and not value(v + t * step) >= base + 1e-4 * t * slope:
                t *= 0.5
            if t <= 1e-12:
                # no ascent along the Newton direction: numerical floor reached
                t = 0.0
        v = v + t * step
        if t_max < 1.0 and t == t_max:
            bends = prob.bends(nodes, v, free0)
            u = prob.node_values(v, free0)
            scale = 1.0 + np.abs(np.diff(u) / np.diff(nodes)).max()
            drop = bends <= max(1e-14 * scale, bends.min())
            owners = np.concatenate(([0.0], nodes[1:-1])) if free0 else nodes[1:-1]
            if np.any(np.isin(owners[drop], just_added)) and t_max <= 1e-12:
                single_add = True
            if free0:
                tie, drop = bool(drop[0]), drop[1:]
            else:
                tie = False
            keep = np.concatenate(([True], ~drop, [True]))
            nodes = nodes[keep]
            u = u[keep]
            if tie:
                free0 = False
            v = u if free0 else u[1:]
            lin = prob.linear_term(nodes, free0)
        elif t == 0.0:
            break
        just_added = np.empty(0)
    else:
        d = PiecewiseLogDensity(nodes, prob.node_values(v, free0))
        raise ConvergenceError(
            f"active-set iteration did not converge in {max_iter} steps "
            f"(max hinge derivative {_max_violation(d, data):.3g})")

    u = prob.node_values(v, free0)
    u = u - np.log(PiecewiseLogDensity(nodes, u).integral())
    return PiecewiseLogDensity(nodes, u)


def _max_violation(d, data):
    z = np.r_[0.0, data.points]
    return float(np.max(hinge_derivatives(d, data, z)))


class CharacterizationReport(NamedTuple):
    max_inequality_violation: float
    max_knot_equality_gap: float


def characterization_report(d: PiecewiseLogDensity, data: WeightedPoints,
                            n_grid: int = 512) -> CharacterizationReport:
    """Optimality certificate for a fitted density.

    Compares the hinge moments ``int (x - z)_+ dF`` of the fitted and the
    weighted empirical distributions, equivalently the integrated tail cdfs
    ``int_z^{z_m} (1 - F)``.  At the maximizer the fitted moment never exceeds
    the empirical one on [0, z_m], with equality at the interior knots.
    """
    grid = np.linspace(0.0, data.points[-1], n_grid)
    z = np.union1d(grid, data.points)
    diff = hinge_derivatives(d, data, z)
    violation = max(float(diff.max()), 0.0)
    interior = d.knots[1:-1]
    if interior.size:
        s = d.slopes
        bent = interior[(s[:-1] - s[1:]) > 1e-12 * (1.0 + np.abs(s[:-1]))]
        gap = float(np.max(np.abs(hinge_derivatives(d, data, bent)))) if bent.size else 0.0
    else:
        gap = 0.0
    return CharacterizationReport(violation, gap)
