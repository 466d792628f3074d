"""Two-shift mixtures pi f(x - u1) + (1 - pi) f(x - u2) with f symmetric and log-concave."""

from .cluster import ClusterResult, classify, misclassification_count
from .em import MixtureFit, em_fit, hinge_condition
from .hypotest import TestReport, fit_null, lr_test, lrskde_test, nsbs_test, nsbskde_test
from .lcd import (ConvergenceError, PiecewiseLogDensity, WeightedPoints, characterization_report,
                  fit_weighted_mode_mle, j_eval)
from .metrics import hellinger, l1_distance, sup_distance, support_grid
from .mixture import MixtureParams, SymmetricDensity, ZeroDensityError, log_likelihood, posterior
from .params import DegenerateFitError, estimate_params, gaussian_em, inversion_component, kde_fit
from .simulate import Scenario, generate

__version__ = "0.1.0"
