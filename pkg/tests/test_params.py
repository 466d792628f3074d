import math
import warnings

import numpy as np
import pytest

from slcmix.mixture import MixtureParams
from slcmix.params import (KDE, DegenerateFitError, GridDensity, estimate_params, gaussian_em,
                           inversion_component, inversion_density, kde_fit, silverman_bandwidth)


def normal_mixture(n, seed, pi=1 / 3, u=(0.0, 4.0)):
    rng = np.random.default_rng(seed)
    first = rng.random(n) < pi
    return np.where(first, u[0], u[1]) + rng.standard_normal(n)


def uniform_pdf(t):
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) <= 1.0, 0.5, 0.0)


@pytest.mark.parametrize("method", ["gaussian_em", "symmetry_md"])
def test_estimates_near_truth(method):
    p = estimate_params(normal_mixture(2000, 12), method)
    assert abs(p.u1) <= 0.3 and abs(p.u2 - 4.0) <= 0.3 and abs(p.pi - 1 / 3) <= 0.08
    assert p.u1 < p.u2


@pytest.mark.parametrize("method,atol", [("gaussian_em", 1e-6), ("symmetry_md", 2e-3)])
def test_translation_equivariance(method, atol):
    x = normal_mixture(400, 4)
    a = estimate_params(x, method)
    b = estimate_params(x + 7.25, method)
    assert b.u1 == pytest.approx(a.u1 + 7.25, abs=atol)
    assert b.u2 == pytest.approx(a.u2 + 7.25, abs=atol)
    assert b.pi == pytest.approx(a.pi, abs=atol)


@pytest.mark.parametrize("method", ["gaussian_em", "symmetry_md"])
def test_symmetric_truth_still_returns(method):
    p = estimate_params(normal_mixture(400, 2, pi=0.5, u=(0.0, 3.0)), method)
    assert p.u1 < p.u2 and 0 < p.pi < 1


def test_gaussian_em_labels_ordered_and_recovers_variance():
    fit = gaussian_em(normal_mixture(3000, 6, pi=0.75, u=(2.0, -2.0)))
    assert fit.params.u1 < fit.params.u2
    assert fit.params.pi == pytest.approx(0.25, abs=0.03)
    assert fit.variance == pytest.approx(1.0, abs=0.1)


def test_estimator_errors():
    with pytest.raises(ValueError):
        estimate_params(np.arange(5.0))
    with pytest.raises(ValueError):
        estimate_params(np.arange(20.0), "moments")
    with pytest.raises(DegenerateFitError):
        gaussian_em(np.full(30, 2.0))


def test_inversion_single_term():
    g = kde_fit(normal_mixture(300, 1))
    params = MixtureParams(1e-9, 0.0, 3.0)
    x = np.linspace(-2, 2, 11)
    np.testing.assert_allclose(inversion_density(g, params, K=0)(x), g(x + 3.0) / (1 - 1e-9), rtol=1e-15)


def test_inversion_recovers_true_component():
    pi, u1, u2 = 0.2, 0.0, 1.0

    def g(t):
        return pi * uniform_pdf(t - u1) + (1 - pi) * uniform_pdf(t - u2)

    # grid off the jump points of the uniform terms
    x = np.linspace(-1.5, 1.5, 1001) + 1e-4
    fbar = inversion_density(g, MixtureParams(pi, u1, u2), K=50)(x)
    bound = (pi / (1 - pi)) ** 51 / (1 - 2 * pi) * 0.5
    assert np.max(np.abs(fbar - uniform_pdf(x))) <= max(bound, 1e-6)


def test_inversion_swap_rule():
    pi, u1, u2 = 0.7, 0.0, 1.0

    def g(t):
        return pi * uniform_pdf(t - u1) + (1 - pi) * uniform_pdf(t - u2)

    x = np.linspace(-1.5, 1.5, 1001) + 1e-4
    fbar = inversion_density(g, MixtureParams(pi, u1, u2), K=60)(x)
    assert np.max(np.abs(fbar - uniform_pdf(x))) <= 1e-6


def test_inversion_component_symmetric_nonnegative():
    x = normal_mixture(500, 3, pi=0.2, u=(0.0, 2.0))
    f = inversion_component(x, MixtureParams(0.2, 0.0, 2.0))
    np.testing.assert_array_equal(f.values, f.values[::-1])
    np.testing.assert_array_equal(f.x, -f.x[::-1])
    assert np.all(f.values >= 0) and f.x.size == 1024


def test_inversion_warns_near_half():
    x = normal_mixture(200, 3)
    with pytest.warns(RuntimeWarning):
        inversion_component(x, MixtureParams(0.48, 0.0, 4.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        inversion_component(x, MixtureParams(0.3, 0.0, 4.0))


def test_kde_standard_normal():
    x = np.random.default_rng(0).standard_normal(100_000)
    kde = kde_fit(x)
    assert kde(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=0.02)
    sd = np.std(x, ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    assert kde.bandwidth == pytest.approx(0.9 * min(sd, iqr / 1.34) * 100_000 ** -0.2)


def test_kde_integrates_to_one_and_samples_deterministically():
    kde = kde_fit(normal_mixture(300, 9))
    grid = np.linspace(-10, 14, 20_001)
    assert np.trapezoid(kde(grid), grid) == pytest.approx(1.0, abs=1e-4)
    a = kde.sample(np.random.default_rng(4), 50)
    np.testing.assert_array_equal(a, kde.sample(np.random.default_rng(4), 50))


def test_kde_errors():
    with pytest.raises(ValueError):
        kde_fit(np.ones(10))
    with pytest.raises(ValueError):
        kde_fit(np.arange(10.0), bandwidth=0.0)
    assert isinstance(kde_fit(np.arange(10.0), 0.5), KDE)
    assert silverman_bandwidth(np.r_[np.zeros(50), 1.0, 2.0]) > 0


def test_grid_density():
    d = GridDensity(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 0.0]))
    assert d(0.5) == 1.0 and d(-1.0) == 0.0 and d(3.0) == 0.0
    assert d.normalized().integral() == pytest.approx(1.0)
