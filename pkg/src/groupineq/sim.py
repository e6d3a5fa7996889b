"""Monte-Carlo coverage study for the grouped-data interval procedures.

One replicate draws a raw sample from a reference distribution, bins it at
its quintiles or deciles, refits a density, builds the intervals and scores
them against the population values.  Replicates use independent substreams
of the master seed, so results do not depend on how they are scheduled.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import os

import numpy as np

from .density_fit import LI, fit
from .distributions import RefDistribution, true_measures
from .errors import DomainError, InequalityError
from .grouped import group_sample
from .intervals import (BOOTSTRAP, MEASURES, WALD, bootstrap_ci, clamped_quantile,
                        point_estimates, substream, wald_qri_ci)
from .measures import (DEFAULT_EPSILON, DEFAULT_J, atkinson_hat, gini_hat,
                       sample_qri)

DESK_REPS = 300
DESK_B = 300

COVERAGE_FIELDS = ("dist", "n", "scheme", "fit", "measure", "method", "coverage",
                   "avg_width", "failures", "reps", "B", "seed")
CENTERED_FIELDS = ("sigma", "measure", "centered_estimate")
CENTERED_MEASURES = ("gini", "atkinson", "qri")


@dataclass(frozen=True)
class SimConfig:
    dist: RefDistribution
    n: int
    scheme: str = "quintiles"
    fit_method: str = LI
    reps: int = DESK_REPS
    B: int = DESK_B
    level: float = 0.95
    seed: int = 0
    measures: tuple = MEASURES
    epsilon: float = DEFAULT_EPSILON
    J: int = DEFAULT_J

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("reps must be at least 1")
        if self.B < 2:
            raise DomainError("B must be at least 2")
        if self.n < 2:
            raise DomainError("n must be at least 2")

    def cells(self):
        """(measure, method) pairs scored by the study."""
        out = [(m, BOOTSTRAP) for m in self.measures]
        if "qri" in self.measures:
            out.append(("qri", WALD))
        return out


@dataclass
class CellStats:
    hits: int = 0
    successes: int = 0
    failures: int = 0
    width_sum: float = 0.0

    @property
    def coverage(self):
        return self.hits / self.successes if self.successes else float("nan")

    @property
    def avg_width(self):
        return self.width_sum / self.successes if self.successes else float("nan")


@dataclass
class CoverageRow:
    config: SimConfig
    truths: dict
    cells: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.cells[key]

    def rows(self):
        c = self.config
        for (m, method), s in self.cells.items():
            yield {"dist": c.dist.to_spec(), "n": c.n, "scheme": c.scheme,
                   "fit": c.fit_method, "measure": m, "method": method,
                   "coverage": s.coverage, "avg_width": s.avg_width,
                   "failures": s.failures, "reps": c.reps, "B": c.B, "seed": c.seed}


@lru_cache(maxsize=64)
def _truths(dist, epsilon, J):
    return true_measures(dist, epsilon, J).as_dict()


def run_replicate(c, r):
    """Score one replicate; returns ``{(measure, method): (hit, width) | None}``."""
    truths = _truths(c.dist, c.epsilon, c.J)
    out = dict.fromkeys(c.cells())
    try:
        x = c.dist.sample(c.n, substream(c.seed, r, 0))
        g = group_sample(x, c.scheme, with_means=(c.fit_method == LI))
        e = fit(g, c.fit_method)
    except InequalityError:
        return out
    try:
        for res in bootstrap_ci(e, c.n, c.B, c.level, c.measures, (c.seed, r, 1),
                                c.epsilon, c.J):
            out[(res.measure, BOOTSTRAP)] = (res.contains(truths[res.measure]), res.width)
    except InequalityError:
        pass
    if ("qri", WALD) in out:
        try:
            res = wald_qri_ci(e, c.n, c.level, c.J)
            out[("qri", WALD)] = (res.contains(truths["qri"]), res.width)
        except InequalityError:
            pass
    return out


def _run_block(args):
    c, block = args
    return [run_replicate(c, r) for r in block]


def _workers(workers):
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def run_coverage(c, workers=1):
    """Empirical coverage and mean width of every interval over ``c.reps`` replicates.

    Replicates whose grouping, fitting or interval construction fails are
    counted per cell and left out of that cell's coverage.
    """
    truths = _truths(c.dist, c.epsilon, c.J)
    workers = _workers(workers)
    if workers > 1 and c.reps > 1:
        blocks = [list(range(c.reps))[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            results = [res for part in pool.map(_run_block, [(c, b) for b in blocks])
                       for res in part]
    else:
        results = [run_replicate(c, r) for r in range(c.reps)]
    row = CoverageRow(c, truths, {cell: CellStats() for cell in c.cells()})
    for res in results:
        for cell, outcome in res.items():
            s = row.cells[cell]
            if outcome is None:
                s.failures += 1
            else:
                s.successes += 1
                s.hits += bool(outcome[0])
                s.width_sum += outcome[1]
    return row


def bootstrap_sample_estimates(e, n, rng, epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    """Measures on one inverse-transform sample of size ``n`` from the fit."""
    u = rng.random(n)
    y = np.asarray(clamped_quantile(e)(np.where(u > 0, u, np.nextafter(0.0, 1.0))))
    return {"gini": gini_hat(y), "atkinson": atkinson_hat(y, epsilon),
            "qri": sample_qri(y, J)}


def plugin_estimates(e, n, rng, dist, epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    return point_estimates(e, CENTERED_MEASURES, epsilon, J)


def centered_estimates(sigmas=(0.5, 1.0, 1.5, 2.0), n=250, reps=DESK_REPS,
                       fit_method=LI, seed=0, scheme="quintiles", estimator=None,
                       epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    """Estimates minus population values for lognormal incomes of growing spread.

    For each ``sigma`` and replicate: draw ``n`` incomes from
    Lognormal(0, sigma), bin them, fit, and evaluate ``estimator`` (by
    default the plug-in values of the fit; :func:`bootstrap_sample_estimates`
    gives the one-resample variant).  Theil is left out.
    ``estimator(e, n, rng, dist)`` may also be a stub that tests the harness.

    Returns
    -------
    list of dict
        Long-format rows ``{"sigma", "measure", "centered_estimate"}``;
        replicates that fail to fit are skipped.
    """
    if estimator is None:
        def estimator(e, n, rng, dist):
            return plugin_estimates(e, n, rng, dist, epsilon, J)
    rows = []
    for k, sigma in enumerate(sigmas):
        dist = RefDistribution("lognormal", (0.0, sigma))
        truths = _truths(dist, epsilon, J)
        for r in range(reps):
            try:
                x = dist.sample(n, substream(seed, k, r, 0))
                e = fit(group_sample(x, scheme, with_means=(fit_method == LI)), fit_method)
                est = estimator(e, n, substream(seed, k, r, 1), dist)
            except InequalityError:
                continue
            for m in CENTERED_MEASURES:
                rows.append({"sigma": sigma, "measure": m,
                             "centered_estimate": float(est[m]) - truths[m]})
    return rows
