"""Reconstruct an income distribution from grouped data.

Two reconstructions are available:

* ``gld``: a generalized lambda distribution (FKML parameterization) whose
  quantile function is matched, in least squares, to the interior bin
  boundaries at their cumulative relative frequencies;
* ``li``: a piecewise-linear density fixed by each bin's frequency and mean,
  with an exponential density on an open-ended last bin.

Both return objects with the same surface: ``quantile(p)``, ``density_at(p)``
(density at the ``p``-th quantile), ``pdf(x)`` and ``cdf(x)``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from .errors import DomainError, FitError, NumericalError

GLD = "gld"
LI = "li"

_LIMIT_TOL = 1e-8
_BETA_DEGENERATE = 1e-12
_NM_XATOL = 1e-10
_NM_MAXITER = 2000


def _probabilities(p):
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise DomainError("probabilities must lie strictly inside (0, 1)")
    return p


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def _boxcox(t, lam):
    # (t^lam - 1) / lam, with log t as lam -> 0
    if abs(lam) < _LIMIT_TOL:
        return np.log(t)
    return np.expm1(lam * np.log(t)) / lam


def gld_quantile(p, lam, eta, alpha, beta):
    """FKML quantile ``lam + ((p^a - 1)/a - ((1-p)^b - 1)/b) / eta``."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return lam + (_boxcox(p, alpha) - _boxcox(1.0 - p, beta)) / eta


@dataclass(frozen=True)
class GldParams:
    """Fitted FKML generalized lambda distribution.

    ``residual`` is the least-squares matching error at the optimum (NaN when
    the parameters were supplied directly).
    """

    lam: float
    eta: float
    alpha: float
    beta: float
    residual: float = field(default=math.nan, compare=False)

    method = GLD

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"GLD scale parameter eta must be positive, got {self.eta}")

    def quantile(self, p):
        p = _probabilities(p)
        return _out(gld_quantile(p, self.lam, self.eta, self.alpha, self.beta))

    def quantile_density(self, p):
        """Derivative ``Q'(p) = (p^(a-1) + (1-p)^(b-1)) / eta``."""
        p = _probabilities(p)
        with np.errstate(over="ignore"):
            return _out((p ** (self.alpha - 1.0) + (1.0 - p) ** (self.beta - 1.0)) / self.eta)

    def density_at(self, p):
        with np.errstate(divide="ignore"):
            return _out(1.0 / np.asarray(self.quantile_density(p)))

    def cdf(self, x):
        """Distribution function by bisection on the monotone quantile."""
        x = np.asarray(x, dtype=float)
        lo = np.zeros_like(x)
        hi = np.ones_like(x)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = gld_quantile(mid, self.lam, self.eta, self.alpha, self.beta) <= x
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return _out(np.clip(0.5 * (lo + hi), 0.0, 1.0))

    def pdf(self, x):
        return self.density_at(np.clip(self.cdf(x), 1e-300, 1.0 - 1e-16))

    def support(self):
        lower = self.lam - 1.0 / (self.eta * self.alpha) if self.alpha > 0 else -math.inf
        upper = self.lam + 1.0 / (self.eta * self.beta) if self.beta > 0 else math.inf
        return lower, upper

    def to_dict(self):
        return {"method": GLD,
                "params": {"lambda": self.lam, "eta": self.eta,
                           "alpha": self.alpha, "beta": self.beta},
                "residual": self.residual}


def _matching_points(g):
    probs = g.cum_freqs[1:-1]
    values = np.asarray(g.boundaries[1:-1])
    keep = (probs > 0) & (probs < 1)
    # zero-count bins repeat a probability; keep the first boundary of each run
    _, first = np.unique(probs[keep], return_index=True)
    return probs[keep][first], values[keep][first]


def fit_gld(g):
    """Percentile-matching fit of a GLD to grouped data.

    Minimises ``sum_k (Q(F_k) - a_k)^2`` over the interior boundaries ``a_k``
    and their cumulative relative frequencies ``F_k``.  The scale parameter
    is optimised on the log scale; Nelder-Mead is restarted from eight fixed
    starting points and the smallest residual wins.  Bin means are ignored.

    Raises
    ------
    FitError
        With fewer than four usable interior boundaries, or when no restart
        converges.
    """
    probs, values = _matching_points(g)
    if probs.size < 4:
        raise FitError(
            f"GLD matching needs at least 4 interior boundaries, got {probs.size}")
    spread = values[-1] - values[0]
    scale = spread if spread > 0 else 1.0
    v = values / scale

    def objective(theta):
        lam, nu, a, b = theta
        r = gld_quantile(probs, lam, math.exp(nu), a, b) - v
        s = float(np.dot(r, r))
        return s if math.isfinite(s) else 1e300

    lam0 = float(np.median(v))
    eta0 = 2.0 / (v[-1] - v[0])
    starts = [(lam0, math.log(e), a, b)
              for e in (eta0, 10.0 * eta0)
              for a in (0.1, 0.5) for b in (0.1, 0.5)]
    best, converged = None, False
    tiny = 1e-24 * float(np.dot(v, v))
    for x0 in starts:
        res = optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"xatol": _NM_XATOL, "fatol": math.inf, "maxiter": _NM_MAXITER,
                     "maxfev": 4 * _NM_MAXITER})
        if not np.all(np.isfinite(res.x)) or res.fun >= 1e300:
            continue
        converged = converged or bool(res.success) or res.fun <= tiny
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise FitError("GLD matching failed from every starting point")
    residual = best.fun * scale ** 2
    if not converged:
        raise FitError("GLD matching did not converge from any starting point",
                       residual=residual)
    lam, nu, a, b = best.x
    return GldParams(float(lam * scale), float(math.exp(nu) / scale), float(a), float(b),
                     float(residual))


class LiDensity:
    """Piecewise-linear density with an optional exponential tail.

    Bin ``j`` (0-based) carries density ``alphas[j] + betas[j] * x`` on
    ``[a_j, a_{j+1})``.  When the last bin is open, its density is
    ``tail_eta / tail_lambda * exp(-(x - a_{J-1}) / tail_lambda)`` and its
    ``alphas``/``betas`` entries are NaN.
    """

    method = LI

    def __init__(self, boundaries, rel_freqs, alphas, betas, tail_eta=None,
                 tail_lambda=None):
        def frozen(v):
            a = np.array(v, dtype=float)
            a.setflags(write=False)
            return a

        self.boundaries = frozen(boundaries)
        self.rel_freqs = frozen(rel_freqs)
        self.alphas = frozen(alphas)
        self.betas = frozen(betas)
        self.tail_eta = None if tail_eta is None else float(tail_eta)
        self.tail_lambda = None if tail_lambda is None else float(tail_lambda)
        cf = np.concatenate([[0.0], np.cumsum(self.rel_freqs)])
        cf[-1] = 1.0
        self.cum_freqs = frozen(cf)
        if self.has_tail and not self.tail_lambda > 0:
            raise DomainError("exponential tail scale must be positive")

    @property
    def has_tail(self):
        return self.tail_lambda is not None

    @property
    def J(self):
        return self.rel_freqs.size

    def _bin_of_probability(self, p):
        j = np.searchsorted(self.cum_freqs, p, side="right") - 1
        return np.clip(j, 0, self.J - 1)

    def quantile(self, p):
        """Inverse of the piecewise CDF.

        In a linear bin this solves ``F_{j-1} + int_a^x h = p``; the root is
        written as ``a + 2d / (h(a) + sqrt(h(a)^2 + 2 beta d))`` with
        ``d = p - F_{j-1}``, which equals the textbook
        ``(-alpha + sqrt(2 beta p + C)) / beta`` but stays exact as beta -> 0,
        where it reduces to linear inversion.
        """
        p = _probabilities(p)
        j = self._bin_of_probability(p)
        a = self.boundaries[j]
        d = p - self.cum_freqs[j]
        last = self.J - 1
        with np.errstate(invalid="ignore", divide="ignore"):
            alpha = self.alphas[j]
            beta = self.betas[j]
            h0 = alpha + beta * a
            root = np.sqrt(np.maximum(h0 * h0 + 2.0 * beta * d, 0.0))
            denom = h0 + root
            x = np.where(denom > 0, a + 2.0 * d / denom, a)
            if self.has_tail:
                tail = a - self.tail_lambda * np.log1p(-d / self.tail_eta)
                x = np.where(j == last, tail, x)
        return _out(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        b = self.boundaries
        j = np.clip(np.searchsorted(b, x, side="right") - 1, 0, self.J - 1)
        inside = (x >= b[0]) & (x < b[-1])
        with np.errstate(invalid="ignore", over="ignore"):
            dens = self.alphas[j] + self.betas[j] * x
            if self.has_tail:
                tail = (self.tail_eta / self.tail_lambda
                        * np.exp(-(x - b[-2]) / self.tail_lambda))
                dens = np.where(j == self.J - 1, tail, dens)
        return _out(np.where(inside, np.maximum(dens, 0.0), 0.0))

    def density_at(self, p):
        """Density at the ``p``-th quantile."""
        return self.pdf(self.quantile(p))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        b = self.boundaries
        j = np.clip(np.searchsorted(b, x, side="right") - 1, 0, self.J - 1)
        a = b[j]
        t = x - a
        with np.errstate(invalid="ignore", over="ignore"):
            c = self.cum_freqs[j] + t * (self.alphas[j] + 0.5 * self.betas[j] * (x + a))
            if self.has_tail:
                tail = self.cum_freqs[-2] + self.tail_eta * -np.expm1(-t / self.tail_lambda)
                c = np.where(j == self.J - 1, tail, c)
        c = np.minimum(c, self.cum_freqs[j + 1])
        c = np.where(x < b[0], 0.0, np.where(x >= b[-1], 1.0, c))
        return _out(np.clip(c, 0.0, 1.0))

    def bin_masses(self):
        """Probability mass of each bin, integrated analytically."""
        b = self.boundaries
        lo, hi = b[:-1], b[1:]
        with np.errstate(invalid="ignore"):
            mass = (hi - lo) * (self.alphas + 0.5 * self.betas * (hi + lo))
        if self.has_tail:
            mass[-1] = self.tail_eta
        return mass

    def to_dict(self):
        b = [None if math.isinf(v) else float(v) for v in self.boundaries]
        nan_none = lambda v: None if math.isnan(v) else float(v)  # noqa: E731
        return {"method": LI,
                "boundaries": b,
                "rel_freqs": [float(v) for v in self.rel_freqs],
                "alphas": [nan_none(v) for v in self.alphas],
                "betas": [nan_none(v) for v in self.betas],
                "tail": ({"eta": self.tail_eta, "lambda": self.tail_lambda}
                         if self.has_tail else None),
                "residual": None}


def linear_bin(freq, lower, upper, mean):
    """Coefficients ``(alpha, beta)`` of the linear density of one bin.

    The slope is ``12 f (mean - mid) / w^3``.  When the mean sits more than
    ``w / 6`` from the midpoint that line turns negative at an edge, so the
    slope is clamped to ``2 f / w^2`` in magnitude (zero density at one edge);
    the intercept always restores the bin mass ``f``.
    """
    w = upper - lower
    mid = 0.5 * (lower + upper)
    if freq == 0:
        return 0.0, 0.0
    beta = freq * 12.0 * (mean - mid) / w ** 3
    bound = 2.0 * freq / w ** 2
    beta = max(-bound, min(bound, beta))
    if abs(beta) < _BETA_DEGENERATE * freq / w ** 2:
        beta = 0.0
    # intercept relative to the midpoint keeps the mass exact
    alpha = freq / w - beta * mid
    return alpha, beta


def fit_li(g, bounded_last=False):
    """Linear-interpolation density for grouped data with bin means.

    The last bin gets the exponential tail even when a finite top boundary
    was supplied (that boundary only matters to the GLD and to data without
    means); pass ``bounded_last=True`` to give it a linear density instead.

    Raises
    ------
    FitError
        If the means are missing, or the open last bin's mean does not exceed
        its lower bound.
    """
    if not g.has_means:
        raise FitError("the linear interpolation method needs bin means")
    b = np.array(g.boundaries)
    if not bounded_last:
        b[-1] = math.inf
    f = g.rel_freqs
    J = g.J
    open_last = math.isinf(b[-1])
    alphas = np.full(J, np.nan)
    betas = np.full(J, np.nan)
    bounded = J - 1 if open_last else J
    for j in range(bounded):
        m = g.means[j]
        if math.isnan(m):
            if f[j] > 0:
                raise FitError(f"bin {j + 1} has observations but no mean")
            m = 0.5 * (b[j] + b[j + 1])
        alphas[j], betas[j] = linear_bin(f[j], b[j], b[j + 1], m)
    tail_eta = tail_lambda = None
    if open_last:
        tail_eta = f[-1]
        tail_lambda = g.means[-1] - b[-2]
        if not tail_lambda > 0:
            raise FitError(
                f"open last bin needs a mean above {b[-2]:g}, got {g.means[-1]:g}")
    return LiDensity(b, f, alphas, betas, tail_eta, tail_lambda)


def fit(g, method, bounded_last=False):
    """Fit ``g`` with ``method`` in {"gld", "li"}."""
    method = method.lower()
    if method == GLD:
        return fit_gld(g)
    if method == LI:
        return fit_li(g, bounded_last)
    raise DomainError(f"unknown fitting method {method!r}")


def model_from_dict(doc):
    """Rebuild a fitted model from :meth:`to_dict` output."""
    method = doc["method"].lower()
    if method == GLD:
        p = doc["params"]
        res = doc.get("residual")
        return GldParams(p["lambda"], p["eta"], p["alpha"], p["beta"],
                         math.nan if res is None else res)
    if method == LI:
        nan = lambda v: math.nan if v is None else v  # noqa: E731
        b = [math.inf if v is None else v for v in doc["boundaries"]]
        tail = doc.get("tail")
        return LiDensity(b, doc["rel_freqs"], [nan(v) for v in doc["alphas"]],
                         [nan(v) for v in doc["betas"]],
                         tail and tail["eta"], tail and tail["lambda"])
    raise DomainError(f"unknown model method {method!r}")


def est_quantile(e, p):
    return e.quantile(p)


def est_density(e, p):
    """Density at the ``p``-th estimated quantile; must be positive."""
    d = e.density_at(p)
    if not np.all(np.asarray(d) > 0):
        raise NumericalError("estimated density is not positive; the fit is unusable")
    return d


def est_cdf(e, x):
    return e.cdf(x)
