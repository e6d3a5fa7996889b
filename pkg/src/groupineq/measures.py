"""Sample estimators of the Gini, Theil, Atkinson and quantile ratio indices.

The three moment-type estimators accept a 1-D vector of incomes, or a 2-D
array in which every row is an independent sample (the bootstrap engine
relies on this to evaluate hundreds of replicates in one call).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_EPSILON = 0.5
DEFAULT_J = 100


@dataclass(frozen=True)
class MeasureSet:
    gini: float
    theil: float
    atkinson: float
    qri: float
    epsilon: float = DEFAULT_EPSILON
    J: int = DEFAULT_J

    def as_dict(self):
        return {"gini": self.gini, "theil": self.theil,
                "atkinson": self.atkinson, "qri": self.qri}


def _incomes(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise DomainError("at least one income is required")
    if not np.all(x > 0):
        raise DomainError("incomes must be strictly positive")
    return x


def _result(value):
    return float(value) if np.ndim(value) == 0 else value


def gini_hat(x):
    """Gini index of a sample, ``2 sum(i x_(i)) / (n sum x) - (n + 1) / n``.

    Parameters
    ----------
    x : array-like
        Positive incomes; a 2-D array is treated as one sample per row.

    Returns
    -------
    float or ndarray
    """
    x = np.sort(_incomes(x), axis=-1)
    n = x.shape[-1]
    i = np.arange(1, n + 1)
    g = 2.0 * np.sum(i * x, axis=-1) / (n * np.sum(x, axis=-1)) - (n + 1.0) / n
    # rounding can leave -1e-17 for equal incomes
    return _result(np.maximum(g, 0.0))


def theil_hat(x):
    """Theil index ``mean((x / xbar) log(x / xbar))``."""
    x = _incomes(x)
    r = x / np.mean(x, axis=-1, keepdims=True)
    return _result(np.maximum(np.mean(r * np.log(r), axis=-1), 0.0))


def atkinson_hat(x, epsilon=DEFAULT_EPSILON):
    """Atkinson index with inequality aversion ``epsilon``.

    Uses the power mean of order ``1 - epsilon``, or the geometric mean when
    ``epsilon == 1``.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    x = _incomes(x)
    xbar = np.mean(x, axis=-1)
    if epsilon == 1:
        ede = np.exp(np.mean(np.log(x), axis=-1))
    else:
        k = 1.0 - epsilon
        ede = np.mean((x / xbar[..., None]) ** k, axis=-1) ** (1.0 / k) * xbar
    return _result(np.clip(1.0 - ede / xbar, 0.0, 1.0))


def qri_grid(J=DEFAULT_J):
    """Midpoint grid ``p_j = (j - 1/2) / J`` used by the QRI estimator."""
    if J < 1:
        raise DomainError(f"J must be a positive integer, got {J}")
    return (np.arange(1, J + 1) - 0.5) / J


def qri_probabilities(J=DEFAULT_J):
    """Lower and upper probabilities ``p_j / 2`` and ``1 - p_j / 2``."""
    p = qri_grid(J)
    return p / 2.0, 1.0 - p / 2.0


def qri_from_quantiles(lower, upper):
    """QRI from symmetric quantile pairs stacked along the first axis."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not (np.all(lower > 0) and np.all(upper > 0)):
        raise DomainError("quantiles must be strictly positive for the QRI")
    return _result(np.mean(1.0 - lower / upper, axis=0))


def qri_hat(q, J=DEFAULT_J):
    """Quantile ratio index ``mean_j(1 - q(p_j/2) / q(1 - p_j/2))``.

    Parameters
    ----------
    q : callable
        Vectorised quantile evaluator mapping probabilities to incomes.
        Either a sample quantile function (see :func:`sample_quantile_function`)
        or the quantile function of a fitted distribution.
    J : int
        Number of grid points.
    """
    lo, hi = qri_probabilities(J)
    return qri_from_quantiles(q(lo), q(hi))


def sample_quantiles(x, p):
    """Sample quantiles by linear interpolation of order statistics.

    The ``p``-quantile sits at 1-based position ``1 + (n - 1) p``.  For a 2-D
    ``x`` the result has shape ``(len(p), rows)``.
    """
    return np.quantile(np.asarray(x, dtype=float), p, axis=-1, method="linear")


def sample_quantile_function(x):
    xs = np.sort(np.asarray(x, dtype=float))
    return lambda p: sample_quantiles(xs, p)


def sample_qri(x, J=DEFAULT_J):
    """QRI of raw samples; rows of a 2-D array are separate samples."""
    x = _incomes(x)
    lo, hi = qri_probabilities(J)
    return qri_from_quantiles(sample_quantiles(x, lo), sample_quantiles(x, hi))


def measure_set(x, epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    """All four estimators on one raw sample."""
    return MeasureSet(gini_hat(x), theil_hat(x), atkinson_hat(x, epsilon),
                      sample_qri(x, J), epsilon, J)
