"""Grouped (binned) income data: validation, parsing, serialisation, binning."""

import csv
from dataclasses import dataclass, field
import io
import math

import numpy as np

from .errors import DomainError, ValidationError
from .measures import sample_quantiles

BINS_CSV = "bins"
PERCENTILE_TABLE = "percentile-table"

SCHEMES = {"quintiles": 5, "deciles": 10}


@dataclass(frozen=True)
class GroupedData:
    """Bins ``[a_{j-1}, a_j)`` with counts and, optionally, per-bin means.

    ``boundaries`` has ``J + 1`` entries; the last may be ``inf``.
    """

    boundaries: tuple
    counts: tuple
    means: tuple = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.boundaries)
        c = tuple(self.counts)
        object.__setattr__(self, "boundaries", b)
        if len(b) < 3:
            raise ValidationError("grouped data needs at least two bins")
        if len(c) != len(b) - 1:
            raise ValidationError(
                f"{len(b)} boundaries need {len(b) - 1} counts, got {len(c)}")
        if not all(math.isfinite(v) for v in b[:-1]) or math.isnan(b[-1]) or b[-1] == -math.inf:
            raise ValidationError("only the final upper boundary may be infinite")
        for j in range(1, len(b)):
            if not b[j] > b[j - 1]:
                raise ValidationError(
                    f"boundaries must be strictly increasing (bin {j}: "
                    f"{b[j - 1]:g} >= {b[j]:g})")
        ints = []
        for j, v in enumerate(c, 1):
            if float(v) != int(v):
                raise ValidationError(f"bin {j}: count {v!r} is not an integer")
            if int(v) < 0:
                raise ValidationError(f"bin {j}: negative count {v}")
            ints.append(int(v))
        if sum(ints) < 1:
            raise ValidationError("total count must be at least 1")
        object.__setattr__(self, "counts", tuple(ints))
        if self.means is not None:
            m = tuple(float(v) for v in self.means)
            if len(m) != len(ints):
                raise ValidationError(f"expected {len(ints)} means, got {len(m)}")
            for j, mj in enumerate(m, 1):
                lo, hi = b[j - 1], b[j]
                if ints[j - 1] == 0 and math.isnan(mj):
                    continue
                if math.isinf(hi):
                    if not mj > lo:
                        raise ValidationError(
                            f"bin {j}: mean {mj:g} must exceed the open bin's "
                            f"lower bound {lo:g}")
                elif not lo <= mj <= hi:
                    raise ValidationError(
                        f"bin {j}: mean {mj:g} outside [{lo:g}, {hi:g}]")
            object.__setattr__(self, "means", m)

    @property
    def J(self):
        return len(self.counts)

    @property
    def n(self):
        return sum(self.counts)

    @property
    def has_means(self):
        return self.means is not None

    @property
    def unbounded(self):
        return math.isinf(self.boundaries[-1])

    @property
    def rel_freqs(self):
        c = np.array(self.counts, dtype=float)
        return c / c.sum()

    @property
    def cum_freqs(self):
        """``F_0 = 0, ..., F_J = 1``."""
        f = np.concatenate([[0.0], np.cumsum(self.rel_freqs)])
        f[-1] = 1.0
        return f

    def with_top(self, top):
        """Copy with the final upper boundary replaced by ``top``."""
        b = list(self.boundaries)
        b[-1] = float(top)
        return GroupedData(tuple(b), self.counts, self.means, self.label)

    def to_csv(self):
        return serialize(self)


def _number(text, row, column):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ValidationError(
            f"row {row}: malformed number {text!r} in column {column!r}") from None


def _rows(text):
    if hasattr(text, "read"):
        text = text.read()
    reader = csv.DictReader(io.StringIO(text.lstrip("﻿")))
    if reader.fieldnames is None:
        raise ValidationError("empty input")
    reader.fieldnames = [h.strip().lower() for h in reader.fieldnames]
    rows = [r for r in reader if any((v or "").strip() for v in r.values())]
    return reader.fieldnames, rows


def _parse_bins(text, label):
    header, rows = _rows(text)
    missing = {"lower", "upper", "count"} - set(header)
    if missing:
        raise ValidationError(f"missing column(s): {', '.join(sorted(missing))}")
    with_means = "mean" in header
    lowers, uppers, counts, means = [], [], [], []
    for i, r in enumerate(rows, 2):
        lowers.append(_number(r["lower"], i, "lower"))
        uppers.append(_number(r["upper"], i, "upper"))
        c = _number(r["count"], i, "count")
        if c < 0:
            raise ValidationError(f"row {i}: negative count {c:g}")
        if c != int(c):
            raise ValidationError(f"row {i}: count {c:g} is not an integer")
        counts.append(int(c))
        if with_means:
            m = (r.get("mean") or "").strip()
            means.append(_number(m, i, "mean") if m else math.nan)
        if not uppers[-1] > lowers[-1]:
            raise ValidationError(f"row {i}: upper {uppers[-1]:g} <= lower {lowers[-1]:g}")
        if len(lowers) > 1 and lowers[-1] != uppers[-2]:
            raise ValidationError(
                f"row {i}: lower {lowers[-1]:g} does not continue from the "
                f"previous upper {uppers[-2]:g}")
        if with_means and not math.isnan(means[-1]) and not (
                lowers[-1] <= means[-1] <= uppers[-1]) :
            raise ValidationError(
                f"row {i}: mean {means[-1]:g} outside [{lowers[-1]:g}, {uppers[-1]:g}]")
    if with_means and all(math.isnan(m) for m in means):
        means = None
    if not lowers:
        raise ValidationError("no data rows")
    try:
        return GroupedData(tuple(lowers) + (uppers[-1],), tuple(counts),
                           tuple(means) if with_means and means else None, label)
    except ValidationError as exc:
        raise ValidationError(f"invalid grouped data: {exc}") from None


def _parse_percentiles(text, lower_bound, top_value, total_n, label):
    if total_n is None:
        raise ValidationError("a percentile table needs the total sample size (total_n)")
    total_n = int(total_n)
    header, rows = _rows(text)
    missing = {"percentile", "value"} - set(header)
    if missing:
        raise ValidationError(f"missing column(s): {', '.join(sorted(missing))}")
    pcts, values = [], []
    for i, r in enumerate(rows, 2):
        p = _number(r["percentile"], i, "percentile")
        v = _number(r["value"], i, "value")
        if not 0 < p < 100:
            raise ValidationError(f"row {i}: percentile {p:g} outside (0, 100)")
        if pcts and not p > pcts[-1]:
            raise ValidationError(f"row {i}: percentiles must be strictly increasing")
        if values and not v > values[-1]:
            raise ValidationError(f"row {i}: values must be strictly increasing")
        pcts.append(p)
        values.append(v)
    if not pcts:
        raise ValidationError("no data rows")
    # bin shares follow the listed percentiles; equal for deciles/quintiles
    shares = np.diff(np.concatenate([[0.0], pcts, [100.0]])) / 100.0
    counts = _apportion(total_n, shares)
    boundaries = (float(lower_bound),) + tuple(values) + (float(top_value),)
    try:
        return GroupedData(boundaries, tuple(counts), None, label)
    except ValidationError as exc:
        raise ValidationError(f"invalid grouped data: {exc}") from None


def _apportion(total, shares):
    """Integer counts summing to ``total`` (largest-remainder rounding)."""
    raw = np.asarray(shares) * total
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return [int(c) for c in counts]


def parse_grouped(text, format=BINS_CSV, lower_bound=0.0, top_value=math.inf,
                  total_n=None, label=""):
    """Parse grouped income data.

    Parameters
    ----------
    text : str or file-like
        CSV text. ``bins`` expects ``lower,upper,count[,mean]`` (``inf`` allowed
        as the last upper bound); ``percentile-table`` expects
        ``percentile,value``.
    format : {"bins", "percentile-table"}
    lower_bound, top_value : float
        Outer boundaries for a percentile table.
    total_n : int
        Total sample size behind a percentile table, split evenly over bins.

    Raises
    ------
    ValidationError
        On malformed numbers or violated invariants; the message names the
        offending row.
    """
    fmt = format.lower().replace("_", "-")
    if fmt in (BINS_CSV, "binscsv", "bins-csv"):
        return _parse_bins(text, label)
    if fmt in (PERCENTILE_TABLE, "percentiletable", "percentiles"):
        return _parse_percentiles(text, lower_bound, top_value, total_n, label)
    raise ValidationError(f"unknown grouped-data format {format!r}")


def serialize(g):
    """Render ``g`` as BinsCSV text (``repr`` precision, so it round-trips)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["lower", "upper", "count", "mean"] if g.has_means
               else ["lower", "upper", "count"])
    b = g.boundaries
    for j, c in enumerate(g.counts):
        row = [repr(b[j]), "inf" if math.isinf(b[j + 1]) else repr(b[j + 1]), str(c)]
        if g.has_means:
            row.append("" if math.isnan(g.means[j]) else repr(g.means[j]))
        w.writerow(row)
    return out.getvalue()


def read_grouped(path, **kwargs):
    with open(path, encoding="utf-8") as fh:
        return parse_grouped(fh.read(), **kwargs)


def group_sample(x, scheme="quintiles", with_means=False, lower_bound=0.0):
    """Bin a raw sample at its own quintiles or deciles.

    Interior boundaries are the sample quantiles at ``k / B``; the first
    boundary is ``lower_bound`` and the last is ``inf``.

    Raises
    ------
    DomainError
        If an observation is not positive.
    ValidationError
        If tied observations collapse two boundaries.
    """
    nbins = SCHEMES[scheme.lower()] if isinstance(scheme, str) else int(scheme)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("expected a 1-D sample")
    if not np.all(x > lower_bound):
        raise DomainError("incomes must be positive (above the lower bound)")
    if x.size < nbins:
        raise DomainError(f"need at least {nbins} observations, got {x.size}")
    inner = sample_quantiles(x, np.arange(1, nbins) / nbins)
    bounds = np.concatenate([[lower_bound], inner, [np.inf]])
    if np.any(np.diff(bounds) <= 0):
        raise ValidationError("degenerate boundaries: tied observations collapse bins")
    idx = np.searchsorted(inner, x, side="right")
    counts = np.bincount(idx, minlength=nbins)
    means = None
    if with_means:
        if np.any(counts == 0):
            raise ValidationError("empty bin: cannot form bin means")
        means = tuple(np.bincount(idx, weights=x, minlength=nbins) / counts)
    return GroupedData(tuple(bounds), tuple(counts), means)
