"""Bootstrap tests of H0: u1 = u2 (no mixing).

``lr_test`` is the likelihood ratio of the symmetric log-concave mixture fit
against the symmetric log-concave fit centred at the median, calibrated by
resampling from the null fit.  ``nsbs_test``, ``nsbskde_test`` and
``lrskde_test`` are the comparison procedures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .em import em_fit
from .lcd import ConvergenceError, PiecewiseLogDensity, WeightedPoints, fit_weighted_mode_mle
from .mixture import SymmetricDensity, ZeroDensityError
from .params import DegenerateFitError, estimate_params, kde_fit
from .rng import Seed, substream

__all__ = ["TestReport", "NullFit", "fit_null", "lr_statistic", "critical_value", "p_value",
           "lr_test", "nsbs_test", "nsbskde_test", "lrskde_test", "TESTS", "MAX_RETRIES"]

MAX_RETRIES = 10
_FAILURES = (DegenerateFitError, ConvergenceError, ZeroDensityError, ValueError, FloatingPointError)


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    bootstrap_stats: np.ndarray
    critical_value: float
    p_value: float
    reject: bool
    method: str
    seed: object = field(default=None)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "bootstrap_stats": [float(b) for b in self.bootstrap_stats],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class NullFit:
    """Symmetric log-concave density centred at the sample median."""

    center: float
    component: SymmetricDensity

    def pdf(self, x):
        return self.component.pdf(np.asarray(x, dtype=float) - self.center)

    __call__ = pdf

    def log_pdf(self, x):
        return self.component.log_pdf(np.asarray(x, dtype=float) - self.center)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.center + self.component.sample(rng, n)


def fit_null(samples) -> NullFit:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    m = float(np.median(x))
    half = fit_weighted_mode_mle(WeightedPoints.from_raw(np.abs(x - m)))
    return NullFit(m, SymmetricDensity(half))


def critical_value(boot, alpha: float) -> float:
    """Order statistic of rank ceil((1 - alpha)(B + 1)); +inf when that exceeds B."""
    boot = np.sort(np.asarray(boot, dtype=float))
    rank = math.ceil(round((1.0 - alpha) * (boot.size + 1), 9))
    return float(boot[rank - 1]) if rank <= boot.size else math.inf


def p_value(statistic: float, boot) -> float:
    boot = np.asarray(boot, dtype=float)
    return float((1 + np.sum(boot >= statistic)) / (boot.size + 1))


def lr_statistic(samples, param_method: str = "gaussian_em") -> float:
    """log of prod g_hat(X_i) / prod g0_hat(X_i)."""
    x = np.asarray(samples, dtype=float).ravel()
    null = fit_null(x)
    params = estimate_params(x, param_method)
    full = em_fit(x, params)
    return float(full.loglik - np.sum(null.log_pdf(x)))


def _bootstrap(statistic: Callable, draw: Callable, B: int, seed: Seed) -> np.ndarray:
    out = np.empty(B)
    for b in range(B):
        value = -math.inf
        for attempt in range(MAX_RETRIES + 1):
            rng = substream(seed, b, attempt)
            try:
                value = statistic(draw(rng))
                break
            except _FAILURES:
                continue
        out[b] = value
    return out


def _report(stat, boot, alpha, method, seed):
    crit = critical_value(boot, alpha)
    return TestReport(float(stat), boot, crit, p_value(stat, boot), bool(stat > crit), method, seed)


def _checked(B, alpha):
    if B < 1:
        raise ValueError("B must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")


def _safe(statistic, x):
    try:
        return statistic(x)
    except _FAILURES:
        return -math.inf


def lr_test(samples, B: int = 49, alpha: float = 0.1, seed: Seed = 0,
            param_method: str = "gaussian_em") -> TestReport:
    _checked(B, alpha)
    x = np.asarray(samples, dtype=float).ravel()
    null = fit_null(x)

    def stat(y):
        return lr_statistic(y, param_method)

    observed = _safe(stat, x)
    boot = _bootstrap(stat, lambda rng: null.sample(rng, x.size), B, seed)
    return _report(observed, boot, alpha, "lr", seed)


def _spacing(param_method):
    def stat(y):
        p = estimate_params(y, param_method)
        return p.u2 - p.u1
    return stat


def nsbs_test(samples, B: int = 49, alpha: float = 0.1, seed: Seed = 0,
              param_method: str = "gaussian_em") -> TestReport:
    """Spacing u2 - u1 calibrated by resampling m +/- |X_i - m| with replacement."""
    _checked(B, alpha)
    x = np.asarray(samples, dtype=float).ravel()
    m = float(np.median(x))
    pool = np.abs(x - m)
    pool = np.r_[pool, -pool]

    def draw(rng):
        return m + pool[rng.integers(0, pool.size, x.size)]

    stat = _spacing(param_method)
    boot = _bootstrap(stat, draw, B, seed)
    return _report(_safe(stat, x), boot, alpha, "nsbs", seed)


def reflected(samples):
    x = np.asarray(samples, dtype=float).ravel()
    m = float(np.median(x))
    d = np.abs(x - m)
    return np.r_[m + d, m - d]


def nsbskde_test(samples, B: int = 49, alpha: float = 0.1, seed: Seed = 0,
                 param_method: str = "gaussian_em") -> TestReport:
    """As ``nsbs_test`` but drawing from a kernel estimate of the reflected sample."""
    _checked(B, alpha)
    x = np.asarray(samples, dtype=float).ravel()
    kde = kde_fit(reflected(x))
    stat = _spacing(param_method)
    boot = _bootstrap(stat, lambda rng: kde.sample(rng, x.size), B, seed)
    return _report(_safe(stat, x), boot, alpha, "nsbskde", seed)


def lrskde_statistic(samples) -> float:
    """log likelihood of the data under its own kernel estimate minus under the reflected one."""
    x = np.asarray(samples, dtype=float).ravel()
    full = kde_fit(x)
    null = kde_fit(reflected(x))
    return float(np.sum(np.log(full.pdf(x))) - np.sum(np.log(null.pdf(x))))


def lrskde_test(samples, B: int = 49, alpha: float = 0.1, seed: Seed = 0) -> TestReport:
    _checked(B, alpha)
    x = np.asarray(samples, dtype=float).ravel()
    null = kde_fit(reflected(x))
    boot = _bootstrap(lrskde_statistic, lambda rng: null.sample(rng, x.size), B, seed)
    return _report(_safe(lrskde_statistic, x), boot, alpha, "lrskde", seed)


TESTS = {"lr": lr_test, "nsbs": nsbs_test, "nsbskde": nsbskde_test, "lrskde": lrskde_test}
