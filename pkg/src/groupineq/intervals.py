"""Confidence intervals for inequality measures from a fitted distribution.

Percentile-bootstrap intervals resample by inverse transform from the
fitted quantile function.  For the QRI there is also a Wald interval whose
variance comes from the delta method applied to the symmetric quantile
ratios, with quantiles and densities read off the fit.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
import math
import os

import numpy as np
from scipy import special

from .errors import DomainError, IntervalError, NumericalError, InequalityError
from .measures import (DEFAULT_EPSILON, DEFAULT_J, atkinson_hat, gini_hat,
                       qri_from_quantiles, qri_probabilities, sample_quantiles,
                       theil_hat)

MEASURES = ("gini", "theil", "atkinson", "qri")
BOOTSTRAP = "bootstrap"
WALD = "wald"

DEFAULT_B = 500
DEFAULT_LEVEL = 0.95
N_EVAL = 10_000
FLOOR_FRACTION = 1e-6
_CHUNK = 64

CSV_FIELDS = ("measure", "method", "point", "lower", "upper", "level", "B", "seed")


@dataclass(frozen=True)
class IntervalResult:
    measure: str
    point: float
    lower: float
    upper: float
    level: float
    method: str
    replicates: int = 0
    seed: int = None
    clamp_rate: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise IntervalError(f"{self.measure}: lower bound exceeds upper bound")

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value):
        return self.lower <= value <= self.upper

    def as_row(self):
        d = asdict(self)
        d["B"] = d.pop("replicates")
        return {k: d[k] for k in CSV_FIELDS}


@dataclass(frozen=True)
class QriVariance:
    var: float
    J: int
    n: int
    probabilities: np.ndarray = field(repr=False)
    quantiles: np.ndarray = field(repr=False)
    densities: np.ndarray = field(repr=False)

    @property
    def se(self):
        return math.sqrt(self.var)


def normal_quantile(p):
    return float(special.ndtri(p))


def _check_level(level):
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")


def _measures(measures):
    ms = tuple(m.lower() for m in measures)
    bad = [m for m in ms if m not in MEASURES]
    if bad:
        raise DomainError(f"unknown measure(s): {', '.join(bad)}")
    return ms


def income_floor(e):
    """Smallest income a draw may take: ``1e-6`` times the fitted median."""
    median = float(e.quantile(0.5))
    if not median > 0:
        raise IntervalError(f"fitted median {median:g} is not positive")
    return FLOOR_FRACTION * median


def clamped_quantile(e):
    """Quantile function of ``e`` with values below :func:`income_floor` raised."""
    floor = income_floor(e)
    return lambda p: np.maximum(e.quantile(p), floor)


def _estimate(y, measure, epsilon, J):
    if measure == "gini":
        return gini_hat(y)
    if measure == "theil":
        return theil_hat(y)
    if measure == "atkinson":
        return atkinson_hat(y, epsilon)
    lo, hi = qri_probabilities(J)
    return qri_from_quantiles(sample_quantiles(y, lo), sample_quantiles(y, hi))


def point_estimates(e, measures=MEASURES, epsilon=DEFAULT_EPSILON, J=DEFAULT_J,
                    n_eval=N_EVAL):
    """Plug-in values of the measures for a fitted distribution.

    Gini, Theil and Atkinson are evaluated on the deterministic sample
    ``Q((i - 1/2) / n_eval)``; the QRI uses the fitted quantiles directly.
    """
    q = clamped_quantile(e)
    out = {}
    grid = None
    for m in _measures(measures):
        if m == "qri":
            lo, hi = qri_probabilities(J)
            out[m] = float(qri_from_quantiles(q(lo), q(hi)))
        else:
            if grid is None:
                grid = np.asarray(q((np.arange(1, n_eval + 1) - 0.5) / n_eval))
            out[m] = float(_estimate(grid, m, epsilon, J))
    return out


def substream(seed, *path):
    """Generator for the substream identified by ``(seed, *path)``.

    Streams depend only on the tuple, never on scheduling, so replicate
    ``b`` draws the same numbers whichever worker runs it.
    """
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    return np.random.default_rng(np.random.SeedSequence([int(v) for v in base + path]))


def _uniforms(rng, n):
    u = rng.random(n)
    return np.where(u > 0, u, np.nextafter(0.0, 1.0))


def replicate_estimates(e, n, B, seed, measures=MEASURES, epsilon=DEFAULT_EPSILON,
                        J=DEFAULT_J, workers=1, stream=()):
    """Estimates of each measure on ``B`` inverse-transform resamples of size ``n``.

    Returns ``(estimates, clamp_rate)`` where ``estimates`` maps measure name to
    an array of length ``B`` in replicate order.
    """
    ms = _measures(measures)
    q = clamped_quantile(e)
    floor = income_floor(e)

    def chunk(start):
        stop = min(start + _CHUNK, B)
        u = np.stack([_uniforms(substream(seed, *stream, b), n) for b in range(start, stop)])
        raw = np.asarray(e.quantile(u))
        y = np.maximum(raw, floor)
        try:
            est = {m: np.atleast_1d(_estimate(y, m, epsilon, J)) for m in ms}
        except InequalityError as exc:
            raise IntervalError(
                f"bootstrap replicates {start}-{stop - 1} failed: {exc}") from exc
        return est, int(np.count_nonzero(raw < floor))

    starts = range(0, B, _CHUNK)
    workers = _workers(workers)
    if workers > 1 and B > _CHUNK:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    estimates = {m: np.concatenate([p[0][m] for p in parts]) for m in ms}
    clamped = sum(p[1] for p in parts)
    return estimates, clamped / float(B * n)


def _workers(workers):
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def percentile_interval(values, level):
    """``(alpha/2, 1 - alpha/2)`` empirical quantiles of replicate values."""
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(np.asarray(values, dtype=float), [a, 1.0 - a], method="linear")
    return float(lo), float(hi)


def _seed(seed):
    return seed if seed is not None else int(np.random.SeedSequence().entropy % 2 ** 63)


def bootstrap_ci(e, n, B=DEFAULT_B, level=DEFAULT_LEVEL, measures=MEASURES, seed=None,
                 epsilon=DEFAULT_EPSILON, J=DEFAULT_J, workers=1):
    """Percentile-bootstrap intervals for each requested measure.

    Each of the ``B`` replicates draws ``n`` uniforms from its own substream,
    maps them through the fitted quantile function (raising values below the
    income floor to it) and evaluates the measures.  The interval bounds are
    the ``alpha/2`` and ``1 - alpha/2`` quantiles of the replicate values.
    """
    if n < 2:
        raise DomainError(f"bootstrap sample size must be at least 2, got {n}")
    if B < 2:
        raise DomainError(f"need at least 2 bootstrap replicates, got {B}")
    _check_level(level)
    seed = _seed(seed)
    ms = _measures(measures)
    points = point_estimates(e, ms, epsilon, J)
    reps, rate = replicate_estimates(e, n, B, seed, ms, epsilon, J, workers)
    out = []
    for m in ms:
        lo, hi = percentile_interval(reps[m], level)
        out.append(IntervalResult(m, points[m], lo, hi, level, BOOTSTRAP, B, seed, rate))
    return out


def qri_variance(e, n, J=DEFAULT_J):
    """Delta-method variance of the QRI estimator under the fitted ``e``.

    The quantile estimators at probabilities ``a <= b`` have covariance
    ``a (1 - b) / (n f(x_a) f(x_b))``; the QRI is ``1 - mean_j(x_l / x_u)``,
    whose gradient is ``-1 / (J x_u)`` in each lower quantile and
    ``x_l / (J x_u^2)`` in each upper quantile.
    """
    if n < 2:
        raise DomainError(f"sample size must be at least 2, got {n}")
    lo, hi = qri_probabilities(J)
    probs = np.concatenate([lo, hi])
    x = np.asarray(clamped_quantile(e)(probs), dtype=float)
    dens = np.asarray(e.density_at(probs), dtype=float)
    if not np.all(np.isfinite(dens) & (dens > 0)):
        raise NumericalError("estimated density is not positive on the QRI grid")
    xl, xu = x[:J], x[J:]
    grad = np.concatenate([-1.0 / (J * xu), xl / (J * xu ** 2)])
    w = grad / dens
    a = np.minimum.outer(probs, probs)
    b = np.maximum.outer(probs, probs)
    var = float(w @ (a * (1.0 - b)) @ w) / n
    return QriVariance(max(var, 0.0), J, n, probs, x, dens)


def _symmetric(point, half):
    # round the half-width to a multiple of the ulp of the bounds so both
    # point - half and point + half are exact and the interval is symmetric
    u = math.ulp(2.0 * (abs(point) + half))
    half = round(half / u) * u
    return point - half, point + half


def wald_qri_ci(e, n, level=DEFAULT_LEVEL, J=DEFAULT_J):
    """``I_hat -/+ z_{1 - alpha/2} sqrt(Var(I_hat))``."""
    _check_level(level)
    point = point_estimates(e, ("qri",), J=J)["qri"]
    half = normal_quantile(1.0 - (1.0 - level) / 2.0) * qri_variance(e, n, J).se
    return IntervalResult("qri", point, *_symmetric(point, half), level, WALD)


def diff_ci(e1, n1, e2, n2, method=BOOTSTRAP, level=DEFAULT_LEVEL, B=DEFAULT_B,
            seed=None, measures=("qri",), epsilon=DEFAULT_EPSILON, J=DEFAULT_J,
            workers=1):
    """Intervals for the difference (second minus first) of independent samples.

    The bootstrap resamples both fits independently in every replicate and
    takes percentiles of the replicate differences.  The Wald interval (QRI
    only) adds the two variances.
    """
    _check_level(level)
    ms = _measures(measures)
    if method == WALD:
        if ms != ("qri",):
            raise DomainError("the Wald difference interval exists for the QRI only")
        p1 = point_estimates(e1, ms, J=J)["qri"]
        p2 = point_estimates(e2, ms, J=J)["qri"]
        var = qri_variance(e1, n1, J).var + qri_variance(e2, n2, J).var
        half = normal_quantile(1.0 - (1.0 - level) / 2.0) * math.sqrt(var)
        d = p2 - p1
        return [IntervalResult("qri", d, *_symmetric(d, half), level, WALD)]
    if method != BOOTSTRAP:
        raise DomainError(f"unknown interval method {method!r}")
    if min(n1, n2) < 2 or B < 2:
        raise DomainError("sample sizes and B must be at least 2")
    seed = _seed(seed)
    p1 = point_estimates(e1, ms, epsilon, J)
    p2 = point_estimates(e2, ms, epsilon, J)
    r1, c1 = replicate_estimates(e1, n1, B, seed, ms, epsilon, J, workers, stream=(1,))
    r2, c2 = replicate_estimates(e2, n2, B, seed, ms, epsilon, J, workers, stream=(2,))
    out = []
    for m in ms:
        lo, hi = percentile_interval(r2[m] - r1[m], level)
        out.append(IntervalResult(m, p2[m] - p1[m], lo, hi, level, BOOTSTRAP, B, seed,
                                  max(c1, c2)))
    return out


def wald_diff_variance(e1, n1, e2, n2, J=DEFAULT_J):
    return qri_variance(e1, n1, J).var + qri_variance(e2, n2, J).var
