"""EM fitting of the symmetric log-concave component with the mixing parameters held fixed."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .lcd import PiecewiseLogDensity, WeightedPoints, fit_weighted_mode_mle, hinge_derivatives
from .mixture import (MixtureParams, SymmetricDensity, WeightedFold, fold, log_likelihood,
                      mixture_density)

__all__ = ["MixtureFit", "gaussian_variance", "initialize_component", "e_step", "em_fit",
           "hinge_condition"]

log = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class MixtureFit:
    params: MixtureParams
    component: SymmetricDensity
    loglik_trace: np.ndarray
    posteriors: np.ndarray
    iterations: int
    converged: bool
    mstep_data: WeightedPoints

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])

    def density(self, x):
        """Fitted mixture density."""
        return mixture_density(self.params, self.component, x)

    def posterior(self, x):
        from .mixture import posterior
        return posterior(self.params, self.component, x)


def gaussian_variance(samples, params: MixtureParams) -> float:
    """Moment estimate of the component variance; 1 when it comes out negative.

    Total variance minus the between-component part pi (1 - pi) (u2 - u1)^2.
    """
    x = np.asarray(samples, dtype=float)
    v = float(np.mean((x - x.mean()) ** 2) - params.pi * (1 - params.pi) * params.spacing**2)
    return v if v > 0 else 1.0


def initialize_component(samples, params: MixtureParams, n_knots: int = 64) -> SymmetricDensity:
    """Centered Gaussian start with the moment variance, discretized on [0, 4 sd]."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    var = gaussian_variance(x, params)
    t = np.linspace(0.0, 4.0 * np.sqrt(var), n_knots)
    phi = np.log(2.0) - 0.5 * np.log(2 * np.pi * var) - t**2 / (2 * var)
    half = PiecewiseLogDensity(t, phi)
    return SymmetricDensity(PiecewiseLogDensity(t, phi - np.log(half.integral())))


def e_step(samples, params: MixtureParams, f: SymmetricDensity) -> np.ndarray:
    """Posterior weights of the first component.

    Observations outside the support of both shifted components are given to
    the nearer centre; the following M-step extends the support to cover them.
    """
    x = np.asarray(samples, dtype=float)
    a = params.pi * f.pdf(x - params.u1)
    b = (1.0 - params.pi) * f.pdf(x - params.u2)
    total = a + b
    lost = total <= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(lost, 0.0, a / np.where(lost, 1.0, total))
    if lost.any():
        nearer = np.abs(x - params.u1) <= np.abs(x - params.u2)
        p = np.where(lost, nearer.astype(float), p)
    return p


def em_fit(samples, params: MixtureParams, tol: float = 1e-10, max_iter: int = 200,
           lcd_tol: float = 1e-7) -> MixtureFit:
    """Alternate posterior weighting and the weighted mode-constrained MLE.

    Stops when the relative increase of the log-likelihood drops below
    ``tol``; ``converged`` is False if ``max_iter`` is reached first.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    folded = fold(x, params)
    f = initialize_component(x, params)
    half = None
    trace = []
    converged = False
    data = None
    it = 0
    for it in range(1, max_iter + 1):
        p = e_step(x, params, f)
        data = WeightedFold(folded, p).to_points(WEIGHT_FLOOR)
        half = fit_weighted_mode_mle(data, tol=lcd_tol, init=half)
        f = SymmetricDensity(half)
        trace.append(log_likelihood(params, f, x))
        if len(trace) >= 2:
            gain = trace[-1] - trace[-2]
            if gain < -1e-9:
                log.warning("log-likelihood decreased by %.3g", -gain)
            if abs(gain) <= tol * abs(trace[-2]):
                converged = True
                break
    post = e_step(x, params, f)
    return MixtureFit(params, f, np.asarray(trace), post, it, converged, data)


def hinge_condition(fit: MixtureFit, samples, z=None) -> np.ndarray:
    """Directional derivatives of the fixed-parameter criterion along hinges.

    The perturbation is Delta(x) = -(|x| - z)_+; at a maximizer every value is
    nonpositive.  Posteriors are recomputed from the fitted component.
    """
    p = e_step(samples, fit.params, fit.component)
    data = WeightedFold(fold(samples, fit.params), p).to_points()
    if z is None:
        z = np.linspace(0.0, data.points[-1], 64)
    return hinge_derivatives(fit.component.half, data, z)
