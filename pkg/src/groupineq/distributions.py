"""Reference income distributions and their population inequality values.

Every family exposes a closed-form quantile function so samples are drawn by
inverse transform, and the population measures are integrals over the
probability scale, ``mu = int_0^1 Q(p) dp`` and so on.
"""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalError
from .measures import DEFAULT_EPSILON, DEFAULT_J, qri_probabilities

# family -> (parameter names, defaults used by the simulation study)
FAMILIES = {
    "lognormal": (("mu", "sigma"), (0.0, 1.0)),
    "singhmaddala": (("a", "b", "q"), (1.6971, 87.6981, 8.3679)),
    "dagum": (("a", "b", "p"), (4.273, 14.28, 0.36)),
    "chisquare": (("k",), (2.0,)),
    "paretoii": (("scale", "shape"), (1.0, 2.0)),
    "exponential": (("rate",), (1.0,)),
    "weibull": (("shape", "scale"), (10.0, 1.0)),
}

_ALIASES = {
    "singh-maddala": "singhmaddala", "sm": "singhmaddala",
    "chisq": "chisquare", "chi2": "chisquare",
    "pareto": "paretoii", "pareto2": "paretoii", "lomax": "paretoii",
    "exp": "exponential",
}

_QUAD_DELTA = 1e-10
_QUAD_RTOL = 1e-8
_QUAD_ERR_MAX = 1e-6
# heavy right tails need resolution close to p = 1
_QUAD_BREAKS = (0.5, 0.9, 0.99, 0.999, 0.9999, 1 - 1e-6)


def _probabilities(p):
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise DomainError("probabilities must lie strictly inside (0, 1)")
    return p


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class RefDistribution:
    """A parametric income distribution from the simulation study.

    Parameters are stored in the fixed family order of :data:`FAMILIES`;
    Weibull accepts a single shape with unit scale.
    """

    family: str
    params: tuple

    def __post_init__(self):
        family = _ALIASES.get(self.family.lower(), self.family.lower())
        if family not in FAMILIES:
            raise DomainError(f"unknown distribution family {self.family!r}")
        names, defaults = FAMILIES[family]
        params = tuple(float(v) for v in self.params)
        if family == "weibull" and len(params) == 1:
            params = params + (1.0,)
        if len(params) != len(names):
            raise DomainError(
                f"{family} takes {len(names)} parameters ({', '.join(names)}), "
                f"got {len(params)}")
        for name, value in zip(names, params):
            if name != "mu" and not value > 0:
                raise DomainError(f"{family} parameter {name} must be positive")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)

    @classmethod
    def from_spec(cls, spec):
        """Parse ``family:param1,param2,...``; missing params take defaults."""
        family, _, rest = spec.strip().partition(":")
        key = _ALIASES.get(family.lower(), family.lower())
        if key not in FAMILIES:
            raise DomainError(f"unknown distribution family {family!r}")
        if rest.strip():
            try:
                params = tuple(float(v) for v in rest.split(","))
            except ValueError:
                raise DomainError(f"malformed parameters in {spec!r}") from None
        else:
            params = FAMILIES[key][1]
        return cls(key, params)

    def to_spec(self):
        return self.family + ":" + ",".join(f"{v:g}" for v in self.params)

    def __str__(self):
        return self.to_spec()

    def quantile(self, p):
        p = _probabilities(p)
        f, th = self.family, self.params
        if f == "lognormal":
            x = np.exp(th[0] + th[1] * special.ndtri(p))
        elif f == "singhmaddala":
            a, b, q = th
            x = b * np.expm1(-np.log1p(-p) / q) ** (1.0 / a)
        elif f == "dagum":
            a, b, pp = th
            x = b * np.expm1(-np.log(p) / pp) ** (-1.0 / a)
        elif f == "chisquare":
            x = 2.0 * special.gammaincinv(th[0] / 2.0, p)
        elif f == "paretoii":
            s, a = th
            x = s * np.expm1(-np.log1p(-p) / a)
        elif f == "exponential":
            x = -np.log1p(-p) / th[0]
        else:
            k, s = th
            x = s * (-np.log1p(-p)) ** (1.0 / k)
        return _out(x)

    def pdf(self, x):
        """Density at ``x``; zero outside the support."""
        x = np.asarray(x, dtype=float)
        f, th = self.family, self.params
        inside = x > 0
        z = np.where(inside, x, 1.0)
        if f == "lognormal":
            mu, s = th
            d = np.exp(-0.5 * ((np.log(z) - mu) / s) ** 2) / (z * s * np.sqrt(2 * np.pi))
        elif f == "singhmaddala":
            a, b, q = th
            t = (z / b) ** a
            d = a * q * t / (z * (1.0 + t) ** (1.0 + q))
        elif f == "dagum":
            a, b, pp = th
            t = (z / b) ** a
            d = a * pp * t ** pp / (z * (1.0 + t) ** (pp + 1.0))
        elif f == "chisquare":
            k = th[0] / 2.0
            d = np.exp((k - 1.0) * np.log(z) - z / 2.0 - special.gammaln(k) - k * np.log(2.0))
        elif f == "paretoii":
            s, a = th
            d = (a / s) * (1.0 + z / s) ** (-(a + 1.0))
            inside = x >= 0
            d = np.where(x == 0, a / s, d)
        elif f == "exponential":
            d = th[0] * np.exp(-th[0] * z)
            inside = x >= 0
            d = np.where(x == 0, th[0], d)
        else:
            k, s = th
            t = z / s
            d = (k / s) * t ** (k - 1.0) * np.exp(-t ** k)
        return _out(np.where(inside, d, 0.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        f, th = self.family, self.params
        z = np.maximum(x, 0.0)
        if f == "lognormal":
            with np.errstate(divide="ignore"):
                c = special.ndtr((np.log(z) - th[0]) / th[1])
        elif f == "singhmaddala":
            a, b, q = th
            c = 1.0 - (1.0 + (z / b) ** a) ** (-q)
        elif f == "dagum":
            a, b, pp = th
            with np.errstate(divide="ignore"):
                c = (1.0 + (z / b) ** (-a)) ** (-pp)
        elif f == "chisquare":
            c = special.gammainc(th[0] / 2.0, z / 2.0)
        elif f == "paretoii":
            s, a = th
            c = 1.0 - (1.0 + z / s) ** (-a)
        elif f == "exponential":
            c = -np.expm1(-th[0] * z)
        else:
            k, s = th
            c = -np.expm1(-(z / s) ** k)
        return _out(np.where(x > 0, c, 0.0))

    def density_at(self, p):
        """Density evaluated at the ``p``-th quantile."""
        return self.pdf(self.quantile(p))

    def sample(self, n, rng):
        """Inverse-transform sample of size ``n`` drawn with ``rng``."""
        u = rng.random(n)
        # random() can return exactly 0
        u = np.where(u > 0, u, np.nextafter(0.0, 1.0))
        return np.asarray(self.quantile(u))


def ref_quantile(d, p):
    return d.quantile(p)


def ref_density(d, x):
    return d.pdf(x)


@dataclass(frozen=True)
class TrueMeasures:
    gini: float
    theil: float
    atkinson: float
    qri: float

    def as_dict(self):
        return {"gini": self.gini, "theil": self.theil,
                "atkinson": self.atkinson, "qri": self.qri}


def _quad(fn, what):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(fn, _QUAD_DELTA, 1.0 - _QUAD_DELTA,
                                    epsabs=0.0, epsrel=_QUAD_RTOL, limit=1000,
                                    points=_QUAD_BREAKS)
    if not np.isfinite(value) or err > _QUAD_ERR_MAX * max(1.0, abs(value)):
        raise NumericalError(
            f"quadrature for {what} did not converge (value={value:.6g}, "
            f"estimated error={err:.3g})")
    return value


def measures_from_quantile(q, epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    """Population measures of the distribution with quantile function ``q``.

    ``q`` maps a scalar probability to an income.  Integrals are computed by
    adaptive Gauss-Kronrod quadrature on ``(1e-10, 1 - 1e-10)``.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    q = _scalar(q)
    mu = _quad(q, "the mean")
    gini = _quad(lambda p: q(p) * (2.0 * p - 1.0), "the Gini index") / mu

    def theil_integrand(p):
        r = q(p) / mu
        return r * np.log(r) if r > 0 else 0.0

    theil = _quad(theil_integrand, "the Theil index")
    if epsilon == 1:
        ede = np.exp(_quad(lambda p: np.log(q(p) / mu), "the Atkinson index"))
    else:
        k = 1.0 - epsilon
        ede = _quad(lambda p: (q(p) / mu) ** k, "the Atkinson index") ** (1.0 / k)
    lo, hi = qri_probabilities(J)
    ratios = np.array([q(a) / q(b) for a, b in zip(lo, hi)])
    return TrueMeasures(float(gini), float(theil), float(1.0 - ede),
                        float(np.mean(1.0 - ratios)))


def _scalar(q):
    return lambda p: float(q(p))


def true_measures(d, epsilon=DEFAULT_EPSILON, J=DEFAULT_J):
    """Population Gini, Theil, Atkinson and QRI values of ``d``."""
    return measures_from_quantile(d.quantile, epsilon, J)
