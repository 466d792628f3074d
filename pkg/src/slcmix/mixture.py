"""Two-component location mixtures with a shared zero-symmetric component."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lcd import PiecewiseLogDensity, WeightedPoints

__all__ = [
    "MixtureParams",
    "SymmetricDensity",
    "FoldedSample",
    "WeightedFold",
    "ZeroDensityError",
    "fold",
    "mixture_density",
    "log_likelihood",
    "posterior",
    "weighted_fold",
]


class ZeroDensityError(ValueError):
    """The mixture density vanishes at an observation, so its posterior is undefined."""


@dataclass(frozen=True)
class MixtureParams:
    """Mixing weight ``pi`` of the component centred at ``u1``, and the two shifts.

    ``full_model=True`` enforces the identifiability conditions of a fitted
    mixture (u1 < u2 and pi away from 1/2); intermediate estimates skip it.
    """

    pi: float
    u1: float
    u2: float
    full_model: bool = False

    def __post_init__(self):
        if not 0.0 < self.pi < 1.0:
            raise ValueError(f"pi must lie in (0, 1), got {self.pi}")
        if self.u1 > self.u2:
            raise ValueError("u1 must not exceed u2")
        if self.full_model:
            if not self.u1 < self.u2:
                raise ValueError("a full-model fit needs u1 < u2")
            if abs(self.pi - 0.5) <= 1e-6:
                raise ValueError("pi = 1/2 is not identifiable")

    @property
    def spacing(self) -> float:
        return self.u2 - self.u1

    def shifted(self, c: float) -> "MixtureParams":
        return MixtureParams(self.pi, self.u1 + c, self.u2 + c, self.full_model)


@dataclass(frozen=True)
class SymmetricDensity:
    """f(x) = exp(half(|x|)) / 2 for a density ``half`` on [0, inf)."""

    half: PiecewiseLogDensity

    def log_pdf(self, x):
        return self.half.log_density(np.abs(x)) - np.log(2.0)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def __call__(self, x):
        return self.pdf(x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        half = 0.5 * self.half.cdf(np.abs(x))
        return np.where(x >= 0, 0.5 + half, 0.5 - half)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        mag = self.half.sample(rng, n)
        return np.where(rng.random(n) < 0.5, -mag, mag)

    @property
    def support_end(self) -> float:
        return self.half.support_end


@dataclass(frozen=True)
class FoldedSample:
    """The 2n values |X_i - u1| (even slots) and |X_i - u2| (odd slots), 0-based."""

    z: np.ndarray
    source: np.ndarray

    @property
    def n(self) -> int:
        return self.z.size // 2

    @property
    def first(self) -> np.ndarray:
        return self.z[0::2]

    @property
    def second(self) -> np.ndarray:
        return self.z[1::2]


@dataclass(frozen=True)
class WeightedFold:
    """A folded sample with the posterior weight p_i of each pair."""

    folded: FoldedSample
    p: np.ndarray

    @property
    def slot_weights(self) -> np.ndarray:
        n = self.folded.n
        w = np.empty(2 * n)
        w[0::2] = self.p / n
        w[1::2] = (1.0 - self.p) / n
        return w

    def to_points(self, floor: float = 0.0) -> WeightedPoints:
        """Merge the 2n slots into distinct points; clamp p to [floor, 1 - floor]."""
        p = np.clip(self.p, floor, 1.0 - floor)
        return WeightedPoints.from_raw(self.folded.z, WeightedFold(self.folded, p).slot_weights)


def fold(samples, params: MixtureParams) -> FoldedSample:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("need at least one sample")
    z = np.empty(2 * x.size)
    z[0::2] = np.abs(x - params.u1)
    z[1::2] = np.abs(x - params.u2)
    return FoldedSample(z, np.repeat(np.arange(x.size), 2))


def _component_terms(params, f, x):
    x = np.asarray(x, dtype=float)
    a = params.pi * f.pdf(x - params.u1)
    b = (1.0 - params.pi) * f.pdf(x - params.u2)
    return a, b


def mixture_density(params: MixtureParams, f: SymmetricDensity, x):
    a, b = _component_terms(params, f, x)
    return a + b


def log_likelihood(params: MixtureParams, f: SymmetricDensity, samples) -> float:
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(mixture_density(params, f, samples))))


def posterior(params: MixtureParams, f: SymmetricDensity, x):
    """Probability that ``x`` came from the component centred at ``u1``.

    Raises
    ------
    ZeroDensityError
        If the mixture density is zero at any requested point.
    """
    a, b = _component_terms(params, f, x)
    total = a + b
    if np.any(total <= 0):
        raise ZeroDensityError("mixture density is zero at an observation")
    out = a / total
    return out if np.ndim(out) else float(out)


def weighted_fold(samples, params: MixtureParams, f: SymmetricDensity) -> WeightedFold:
    return WeightedFold(fold(samples, params), np.atleast_1d(posterior(params, f, samples)))
