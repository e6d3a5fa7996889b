"""Inequality measures and their confidence intervals from grouped income data."""

__version__ = "0.1.0"

from .errors import (DomainError, FitError, InequalityError, IntervalError,
                     NumericalError, ValidationError)
from .measures import (MeasureSet, atkinson_hat, gini_hat, measure_set, qri_hat,
                       sample_qri, theil_hat)
from .distributions import RefDistribution, TrueMeasures, true_measures
from .grouped import GroupedData, group_sample, parse_grouped, read_grouped, serialize
from .density_fit import (GldParams, LiDensity, est_cdf, est_density, est_quantile,
                          fit, fit_gld, fit_li)
from .intervals import (IntervalResult, QriVariance, bootstrap_ci, diff_ci,
                        point_estimates, qri_variance, wald_qri_ci)
from .sim import CoverageRow, SimConfig, centered_estimates, run_coverage
