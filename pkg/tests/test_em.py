import math

import numpy as np
import pytest
from scipy import stats

from slcmix.em import e_step, em_fit, gaussian_variance, hinge_condition, initialize_component
from slcmix.lcd import fit_weighted_mode_mle
from slcmix.metrics import l1_distance, support_grid
from slcmix.mixture import MixtureParams, WeightedFold, fold, posterior


def normal_mixture(n, seed, pi=1 / 3, u=(0.0, 4.0)):
    rng = np.random.default_rng(seed)
    first = rng.random(n) < pi
    return np.where(first, u[0], u[1]) + rng.standard_normal(n)


TRUE = MixtureParams(1 / 3, 0.0, 4.0)


@pytest.fixture(scope="module")
def figure_fit():
    x = normal_mixture(500, 1)
    return x, em_fit(x, TRUE)


def test_moment_variance_examples():
    x = np.array([-math.sqrt(2.0), math.sqrt(2.0)])
    assert gaussian_variance(x, MixtureParams(0.2, 0.0, 1.0)) == pytest.approx(1.84)
    assert gaussian_variance(np.array([0.0, 0.1]), MixtureParams(0.2, 0.0, 5.0)) == 1.0


def test_initial_component():
    x = np.array([-math.sqrt(2.0), math.sqrt(2.0)])
    f = initialize_component(x, MixtureParams(0.2, 0.0, 1.0))
    assert f.half.knots.size == 64
    assert f.half.support_end == pytest.approx(4.0 * math.sqrt(1.84))
    assert f.half.integral() == pytest.approx(1.0, abs=1e-12)
    assert f.half.is_concave() and f.half.is_nonincreasing()


def test_component_close_to_standard_normal(figure_fit):
    x, fit = figure_fit
    f = fit.component
    grid = support_grid((-8.5, 8.5), (-f.support_end, f.support_end))
    assert l1_distance(f, stats.norm.pdf, grid) <= 0.25
    assert fit.converged


def test_trace_is_monotone(figure_fit):
    _, fit = figure_fit
    assert np.all(np.diff(fit.loglik_trace) >= -1e-9)


def test_final_support_and_shape(figure_fit):
    x, fit = figure_fit
    half = fit.component.half
    assert half.support_end == fold(x, TRUE).z.max()
    assert half.integral() == pytest.approx(1.0, abs=1e-8)
    assert half.is_concave() and half.is_nonincreasing()
    assert fit.posteriors.shape == x.shape
    np.testing.assert_allclose(fit.posteriors, posterior(TRUE, fit.component, x), atol=0)


def test_hinge_condition_at_fixed_point(figure_fit):
    x, fit = figure_fit
    assert hinge_condition(fit, x).max() <= 1e-5


def test_one_more_step_is_a_fixed_point():
    x = normal_mixture(500, 1)
    fit = em_fit(x, TRUE, tol=1e-12, lcd_tol=1e-10)
    f = fit.component
    p = e_step(x, TRUE, f)
    again = fit_weighted_mode_mle(WeightedFold(fold(x, TRUE), p).to_points(1e-12), tol=1e-10, init=f.half)
    t = np.union1d(again.knots, f.half.knots)
    assert np.max(np.abs(again.density(t) - f.half.density(t))) <= 10 * 1e-8


def test_translation_equivariance(figure_fit):
    x, fit = figure_fit
    moved = em_fit(x + 12.5, TRUE.shifted(12.5))
    np.testing.assert_allclose(moved.component.half.knots, fit.component.half.knots, atol=1e-9)
    np.testing.assert_allclose(moved.component.half.logvals, fit.component.half.logvals, atol=1e-6)
    np.testing.assert_allclose(moved.posteriors, fit.posteriors, atol=1e-7)


def test_two_observations_at_the_centres():
    # the likelihood is unbounded here: EM concentrates each point on its own centre
    params = MixtureParams(0.3, 0.0, 2.0)
    x = np.array([0.0, 2.0])
    fit = em_fit(x, params)
    f = fit.component
    np.testing.assert_allclose(fit.posteriors, posterior(params, f, x))
    p1, p2 = fit.posteriors
    # closed form for the two-point fold: f(0) = a, f(2) = b
    a, b = f(0.0), f(2.0)
    assert p1 == pytest.approx(0.3 * a / (0.3 * a + 0.7 * b))
    assert p2 == pytest.approx(0.3 * b / (0.3 * b + 0.7 * a))
    assert np.all(np.diff(fit.loglik_trace) >= -1e-9)


def test_support_escape_is_handled():
    # a wide start followed by data far out on one side
    x = np.r_[normal_mixture(200, 3), 12.0]
    fit = em_fit(x, TRUE)
    assert np.isfinite(fit.loglik)
    assert fit.component.support_end == fold(x, TRUE).z.max()


def test_input_checks():
    with pytest.raises(ValueError):
        em_fit(np.array([1.0]), TRUE)
