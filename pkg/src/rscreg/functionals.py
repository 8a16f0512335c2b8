"""Distributional statistics evaluated on a Sample or a leave-one-out view.

All statistics use plug-in conventions: variance divides by n, the
quantile is the type-1 order statistic ``y_(ceil(n*tau))``, and the Gini
index is ``sum_ij |y_i - y_j| / (2 n^2 mu)``.

The DER polarization index is

    P_alpha = (1/n) sum_i f(y_i)^alpha a(y_i)

with ``f`` a Gaussian kernel density estimate evaluated at the sample
points and ``a`` the sorted-rank alienation term.  With ``alpha = 0`` it
equals ``2 * mean * Gini``; on mean-normalized data that is ``2 * Gini``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateBandwidth, DegenerateSample, TooFewObservations

__all__ = [
    "KdeConfig",
    "Functional",
    "evaluate",
    "kde_at",
    "bandwidth",
    "der_alienation",
    "der_index",
    "gini",
    "type1_quantile_index",
]

KINDS = ("mean", "quantile", "variance", "gini", "der")
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KdeConfig:
    """Gaussian kernel with Silverman's rule (``h=None``) or a fixed bandwidth."""

    kernel: str = "gaussian"
    h: float = None

    def __post_init__(self):
        if self.kernel != "gaussian":
            raise ValueError(f"unsupported kernel {self.kernel!r}")
        if self.h is not None and not self.h > 0:
            raise ValueError("fixed bandwidth must be positive")

    @property
    def rule(self):
        return "silverman" if self.h is None else "fixed"


@dataclass(frozen=True)
class Functional:
    """A statistic v(F).

    Parameters
    ----------
    kind : {"mean", "quantile", "variance", "gini", "der"}
    tau : float, optional
        Probability for ``quantile``, strictly inside (0, 1).
    alpha : float, optional
        Identification exponent for ``der``; values in [0, 1] are accepted,
        [0.25, 1] is the range allowed by the DER axioms.
    kde : KdeConfig
        Density estimator used by ``der`` and by the quantile influence function.
    normalize_mean : bool
        Divide the data by its own mean before evaluating.
    loo_bandwidth : {"auto", "recompute", "freeze"}
        How ``der`` treats its bandwidth under leave-one-out: re-derived on
        each reduced sample (the definition), frozen at the full-sample value
        (O(n) per removal), or ``auto`` = recompute for n <= 2000.
    """

    kind: str
    tau: float = None
    alpha: float = None
    kde: KdeConfig = field(default_factory=KdeConfig)
    normalize_mean: bool = False
    loo_bandwidth: str = "auto"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functional {self.kind!r}")
        if self.kind == "quantile":
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise ValueError("quantile needs tau strictly inside (0, 1)")
        if self.kind == "der":
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError("der needs alpha in [0, 1]")
        if self.loo_bandwidth not in ("auto", "recompute", "freeze"):
            raise ValueError(f"bad loo_bandwidth {self.loo_bandwidth!r}")

    @classmethod
    def mean(cls, **kw):
        return cls("mean", **kw)

    @classmethod
    def variance(cls, **kw):
        return cls("variance", **kw)

    @classmethod
    def gini(cls, **kw):
        return cls("gini", **kw)

    @classmethod
    def quantile(cls, tau, **kw):
        return cls("quantile", tau=tau, **kw)

    @classmethod
    def der(cls, alpha, **kw):
        return cls("der", alpha=alpha, **kw)

    @classmethod
    def parse(cls, text, **kw):
        """Parse ``NAME[:param]``, e.g. ``gini``, ``der:0.5``, ``quantile:0.9``."""
        name, _, param = text.strip().lower().partition(":")
        name = {"var": "variance", "q": "quantile"}.get(name, name)
        if name not in KINDS:
            raise ValueError(f"unknown functional {text!r}")
        if name == "quantile":
            if not param:
                raise ValueError("quantile needs a parameter, e.g. quantile:0.5")
            return cls.quantile(float(param), **kw)
        if name == "der":
            return cls.der(float(param) if param else 0.5, **kw)
        if param:
            raise ValueError(f"{name} takes no parameter")
        return cls(name, **kw)

    @property
    def label(self):
        if self.kind == "quantile":
            return f"quantile:{self.tau:g}"
        if self.kind == "der":
            return f"der:{self.alpha:g}"
        return self.kind

    @property
    def has_analytic_if(self):
        return self.kind in ("mean", "quantile", "variance", "gini")

    @property
    def min_n(self):
        return 3 if self.kind == "der" else 2

    def __call__(self, data):
        return evaluate(self, data)


def _sorted(data):
    if hasattr(data, "sorted_values"):
        return np.asarray(data.sorted_values, dtype=float)
    return np.sort(np.asarray(data, dtype=float).ravel(), kind="stable")


def bandwidth(ys_sorted, config=KdeConfig()):
    """Bandwidth for sorted data under ``config``; raises on zero spread."""
    if config.h is not None:
        return float(config.h)
    if ys_sorted.shape[0] < 3:
        raise TooFewObservations("kernel density needs n >= 3")
    h = float(_kernels.silverman(np.ascontiguousarray(ys_sorted, dtype=float)))
    if not h > 0.0:
        raise DegenerateBandwidth("Silverman bandwidth is zero (no spread in data)")
    return h


def kde_at(data, points, config=KdeConfig()):
    """Gaussian kernel density of ``data`` evaluated at ``points``.

    Each output is ``sum_i phi((p - y_i)/h) / (n h)``.
    """
    ys = _sorted(data)
    n = ys.shape[0]
    if n < 3:
        raise TooFewObservations("kernel density needs n >= 3")
    h = bandwidth(ys, config)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    sums = _kernels.sums_at(ys, np.ascontiguousarray(pts.ravel()), h)
    return (sums / (n * h * _SQRT2PI)).reshape(pts.shape)


def der_alienation(data):
    """Alienation terms a(y_i) in sorted order; their mean is 2 * mean * Gini."""
    ys = _sorted(data)
    if ys.shape[0] < 2:
        raise TooFewObservations("alienation needs n >= 2")
    return _kernels.alienation(ys)


def _der_sorted(ys, alpha, config, normalize):
    if ys.shape[0] < 3:
        raise TooFewObservations("DER index needs n >= 3")
    h = -1.0 if config.h is None else float(config.h)
    val = _kernels.der_sorted(ys, float(alpha), h, bool(normalize))
    if not np.isfinite(val):
        if normalize and np.mean(ys) <= 0:
            raise DegenerateSample("mean normalization needs a positive mean")
        raise DegenerateBandwidth("Silverman bandwidth is zero (no spread in data)")
    return float(val)


def der_index(data, alpha, config=KdeConfig(), normalize_mean=False):
    """DER polarization index P_alpha with the density estimated at the sample points."""
    return _der_sorted(_sorted(data), alpha, config, normalize_mean)


def gini(data):
    return _gini_sorted(_sorted(data))


def _gini_sorted(ys):
    n = ys.shape[0]
    mu = float(np.mean(ys))
    w = ys - mu
    i = np.arange(1, n + 1)
    t = float(np.dot(2 * i - n - 1, w))
    if t == 0.0:
        return 0.0
    if mu == 0.0:
        raise DegenerateSample("Gini index undefined for zero mean")
    return t / (n * n * mu)


def type1_quantile_index(n, tau):
    """0-based sorted position of the type-1 empirical tau-quantile."""
    x = n * tau
    r = round(x)
    k = r if abs(x - r) < 1e-9 * max(1.0, x) else math.ceil(x)
    return min(max(int(k), 1), n) - 1


def _eval_sorted(functional, ys):
    n = ys.shape[0]
    if n < functional.min_n:
        raise TooFewObservations(f"{functional.label} needs n >= {functional.min_n}")
    kind = functional.kind
    if kind == "der":
        return _der_sorted(ys, functional.alpha, functional.kde, functional.normalize_mean)
    if functional.normalize_mean:
        mu = float(np.mean(ys))
        if mu <= 0:
            raise DegenerateSample("mean normalization needs a positive mean")
        ys = ys / mu
    if kind == "mean":
        return float(np.mean(ys))
    if kind == "variance":
        return float(np.mean((ys - np.mean(ys)) ** 2))
    if kind == "quantile":
        return float(ys[type1_quantile_index(n, functional.tau)])
    return _gini_sorted(ys)


def evaluate(functional, data):
    """v(F_n) for a Sample, LeaveOneOutView or plain array."""
    return _eval_sorted(functional, _sorted(data))
