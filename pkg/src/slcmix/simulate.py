"""Monte Carlo harness: scenario generation, power study and clustering study.

Replication ``r`` of a study with master seed ``s`` draws its data from
``substream(s, r)``; the bootstrap of test number ``k`` (counting from 1) uses the
seed ``[s, r, k]``.  Each replication therefore depends only on
``(s, r)``, and serial and parallel runs agree exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np
from scipy import stats

from .cluster import METHODS as CLUSTER_METHODS
from .cluster import classify, misclassification_count
from .hypotest import TESTS
from .metrics import hellinger, l1_distance, support_grid
from .mixture import SymmetricDensity
from .params import GridDensity, estimate_params
from .rng import child_seed, substream

__all__ = ["COMPONENTS", "Scenario", "generate", "generate_labeled", "component_density",
           "component_support", "power_replicate", "power_study", "cluster_replicate",
           "cluster_study", "POWER_COLUMNS", "CLUSTER_COLUMNS"]

COMPONENTS = ("normal", "laplace", "uniform")

# truncation points for the unbounded components (tail mass below 1e-16)
_TRUE_SUPPORT = {"normal": 8.5, "laplace": 37.0, "uniform": 1.0}
_GAUSS_WIDTH = 8.5


@dataclass(frozen=True)
class Scenario:
    """Two-shift mixture pi f(x - u1) + (1 - pi) f(x - u2) with a standard component."""

    component: str
    pi: float
    u1: float
    u2: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ValueError(f"component must be one of {COMPONENTS}")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")
        if self.n < 1:
            raise ValueError("n must be positive")


def _draw_component(name: str, rng: np.random.Generator, n: int) -> np.ndarray:
    if name == "normal":
        return rng.standard_normal(n)
    if name == "laplace":
        return rng.laplace(0.0, 1.0, n)
    return rng.uniform(-1.0, 1.0, n)


def generate_labeled(scenario: Scenario, rng: np.random.Generator | None = None):
    """Samples and their true labels (1 for the shift u1, drawn with probability pi)."""
    if rng is None:
        rng = substream(scenario.seed)
    first = rng.random(scenario.n) < scenario.pi
    noise = _draw_component(scenario.component, rng, scenario.n)
    x = np.where(first, scenario.u1, scenario.u2) + noise
    return x, np.where(first, 1, 2)


def generate(scenario: Scenario, rng: np.random.Generator | None = None) -> np.ndarray:
    return generate_labeled(scenario, rng)[0]


def component_density(name: str):
    """Density of the standard component as a callable."""
    dist = {"normal": stats.norm(), "laplace": stats.laplace(), "uniform": stats.uniform(-1.0, 2.0)}[name]
    return dist.pdf


def component_support(f) -> tuple[float, float]:
    """Interval carrying a fitted or true component density for grid construction."""
    if isinstance(f, SymmetricDensity):
        return -f.support_end, f.support_end
    if isinstance(f, GridDensity):
        return float(f.x[0]), float(f.x[-1])
    if hasattr(f, "variance"):
        r = _GAUSS_WIDTH * math.sqrt(f.variance)
        return -r, r
    raise TypeError(f"no known support for {type(f).__name__}")


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------------------
# power


POWER_COLUMNS = ("component", "pi", "delta", "n", "reps", "bootstrap", "alpha", "seed")


def power_replicate(r: int, scenario: Scenario, methods: Sequence[str], B: int, alpha: float,
                    seed: int) -> dict[str, bool]:
    x = generate(scenario, substream(seed, r))
    out = {}
    for k, name in enumerate(methods):
        out[name] = TESTS[name](x, B=B, alpha=alpha, seed=child_seed(seed, r, k + 1)).reject
    return out


def power_study(component: str, pi: float, delta: float, n: int, reps: int, B: int = 49,
                alpha: float = 0.1, seed: int = 0, methods: Sequence[str] = tuple(TESTS),
                workers: int = 1) -> dict:
    """Rejection rates of the chosen tests over ``reps`` replications, u1 = 0 and u2 = delta."""
    for m in methods:
        if m not in TESTS:
            raise ValueError(f"unknown test {m!r}")
    scenario = Scenario(component, pi, 0.0, delta, n, seed)
    task = partial(power_replicate, scenario=scenario, methods=tuple(methods), B=B, alpha=alpha, seed=seed)
    rows = _map(task, list(range(reps)), workers)
    summary = {"component": component, "pi": pi, "delta": delta, "n": n, "reps": reps,
               "bootstrap": B, "alpha": alpha, "seed": seed}
    for m in methods:
        summary[m] = sum(row[m] for row in rows) / reps
    return summary


# ---------------------------------------------------------------------------
# clustering


CLUSTER_COLUMNS = ("component", "pi", "delta", "n", "reps", "seed", "param_method")


def cluster_replicate(r: int, scenario: Scenario, methods: Sequence[str], seed: int,
                      param_method: str) -> dict:
    """Misclassifications and component distances to the truth for one replication.

    The parameter estimate is shared by every method except ``g``.
    """
    x, truth = generate_labeled(scenario, substream(seed, r))
    shared = None
    if any(m != "g" for m in methods):
        shared = estimate_params(x, param_method)
    f0 = component_density(scenario.component)
    t0 = _TRUE_SUPPORT[scenario.component]
    out = {}
    for name in methods:
        res = classify(x, name, param_method=param_method, params=None if name == "g" else shared)
        grid = support_grid((-t0, t0), component_support(res.component))
        out[name] = {"miss": misclassification_count(res.labels, truth),
                     "l1": l1_distance(res.component, f0, grid),
                     "hellinger": hellinger(res.component, f0, grid)}
    return out


def cluster_study(component: str, pi: float, delta: float, n: int, reps: int, seed: int = 0,
                  methods: Sequence[str] = CLUSTER_METHODS, param_method: str = "gaussian_em",
                  workers: int = 1, details: bool = False) -> dict:
    """Mean misclassification counts per method; ``details`` keeps the per-replication records."""
    for m in methods:
        if m not in CLUSTER_METHODS:
            raise ValueError(f"unknown clustering method {m!r}")
    scenario = Scenario(component, pi, 0.0, delta, n, seed)
    task = partial(cluster_replicate, scenario=scenario, methods=tuple(methods), seed=seed,
                   param_method=param_method)
    rows = _map(task, list(range(reps)), workers)
    summary = {"component": component, "pi": pi, "delta": delta, "n": n, "reps": reps,
               "seed": seed, "param_method": param_method}
    for m in methods:
        summary[m] = float(np.mean([row[m]["miss"] for row in rows]))
    if details:
        summary["replications"] = rows
    return summary
