"""Per-observation recentered influence values.

Two routes produce a value for every observation j:

* analytic RIF, ``v_n + IF(y_j)``, for the statistics with a known influence
  function (mean, quantile, variance, Gini);
* recentered sensitivity curve, ``v_n + n * (v_n - v_n^(j))``, for any
  statistic, by leave-one-out re-evaluation.

Leave-one-out values are computed either by literal re-evaluation on every
reduced sample (``strategy="exact"``) or, for mean, variance, Gini and
quantiles, by O(1) downdates of full-sample sums (``"incremental"``).
"""
import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoAnalyticForm, TooFewObservations
from .functionals import (
    Functional,
    _eval_sorted,
    bandwidth,
    evaluate,
    kde_at,
    type1_quantile_index,
)
from .sample import Sample, leave_one_out

__all__ = [
    "Method",
    "InfluenceVector",
    "analytic_rif",
    "sc_at",
    "rsc_full",
    "loo_values",
    "sc_if_gap",
    "DER_RECOMPUTE_MAX_N",
]

DER_RECOMPUTE_MAX_N = 2000

# degree of homogeneity, used for the chain rule under mean normalization
_DEGREE = {"mean": 1, "quantile": 1, "variance": 2, "gini": 0}


class Method(str, enum.Enum):
    ANALYTIC_RIF = "rif"
    LOO_RSC = "rsc"
    SPLINE_RSC = "rsc-sp"


@dataclass(frozen=True)
class InfluenceVector:
    """Recentered influence values aligned with the original observation order."""

    values: np.ndarray
    v_n: float
    method: Method
    functional: Functional

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("non-finite influence values")

    def __len__(self):
        return self.values.shape[0]

    @property
    def centered(self):
        """Unrecentered values (IF or SC)."""
        return self.values - self.v_n


def _as_sample(data):
    return data if isinstance(data, Sample) else Sample(data)


def _raw_if(kind, functional, sample, raw_v):
    y = sample.values
    mu = sample.mean
    if kind == "mean":
        return y - mu
    if kind == "variance":
        return (y - mu) ** 2 - raw_v
    if kind == "quantile":
        dens = float(kde_at(sample, [raw_v], functional.kde)[0])
        return (functional.tau - (y <= raw_v)) / dens
    # Gini: A(y)/mu - G - G*y/mu with A the mean absolute distance to the sample
    a_sorted = _kernels.alienation(np.ascontiguousarray(sample.sorted_values))
    a = np.empty(sample.n)
    a[sample.sort_index] = a_sorted
    return a / mu - raw_v - raw_v * y / mu


def analytic_rif(functional, data):
    """Analytic recentered influence function for mean, quantile, variance or Gini.

    Raises
    ------
    NoAnalyticForm
        For the DER index (and anything else without a closed-form IF).
    """
    if not functional.has_analytic_if:
        raise NoAnalyticForm(functional.label)
    sample = _as_sample(data)
    kind = functional.kind
    if kind == "mean" and not functional.normalize_mean:
        # RIF of the mean is y itself
        return InfluenceVector(np.array(sample.values), sample.mean, Method.ANALYTIC_RIF, functional)
    raw = Functional(kind, tau=functional.tau, kde=functional.kde)
    raw_v = evaluate(raw, sample)
    inf = _raw_if(kind, functional, sample, raw_v)
    if functional.normalize_mean:
        k = _DEGREE[kind]
        mu = sample.mean
        v_n = raw_v / mu**k
        inf = inf / mu**k - k * raw_v * (sample.values - mu) / mu ** (k + 1)
    else:
        v_n = raw_v
    return InfluenceVector(v_n + inf, v_n, Method.ANALYTIC_RIF, functional)


def sc_at(functional, data, j):
    """Sensitivity curve at observation j by literal leave-one-out re-evaluation."""
    sample = _as_sample(data)
    if sample.n < 3:
        raise TooFewObservations("sensitivity curve needs n >= 3")
    v_n = evaluate(functional, sample)
    return sample.n * (v_n - evaluate(functional, leave_one_out(sample, j)))


def _der_mode(functional, n):
    mode = functional.loo_bandwidth
    if mode == "auto":
        mode = "recompute" if n <= DER_RECOMPUTE_MAX_N else "freeze"
    return mode


def _der_loo(functional, ys, positions):
    cfg = functional.kde
    mode = _der_mode(functional, ys.shape[0])
    if mode == "recompute":
        h = -1.0 if cfg.h is None else float(cfg.h)
        out = _kernels.der_loo_recompute(ys, positions, float(functional.alpha), h, functional.normalize_mean)
    else:
        if cfg.h is None:
            h_raw = bandwidth(ys, cfg)
        else:
            h_raw = float(cfg.h) * (float(np.mean(ys)) if functional.normalize_mean else 1.0)
        out = _kernels.der_loo_freeze(ys, positions, float(functional.alpha), h_raw, functional.normalize_mean)
    if not np.all(np.isfinite(out)):
        # re-evaluate the first failure through the checked path for a proper error
        bad = positions[np.flatnonzero(~np.isfinite(out))[0]]
        _eval_sorted(functional, np.delete(ys, bad))
        raise FloatingPointError("non-finite leave-one-out DER value")
    return out


def _loo_incremental(functional, ys, positions):
    n = ys.shape[0]
    m = n - 1
    kind = functional.kind
    total = float(np.sum(ys))
    mu = total / n
    y_r = ys[positions]
    mu_loo = (n * mu - y_r) / m
    if kind == "mean":
        raw = mu_loo
    elif kind == "variance":
        d = y_r - mu
        var = float(np.mean((ys - mu) ** 2))
        raw = (n * var - n * d * d / m) / m
    elif kind == "quantile":
        k = type1_quantile_index(m, functional.tau)
        raw = np.where(positions > k, ys[k], ys[np.minimum(k + 1, n - 1)])
    elif kind == "gini":
        w = ys - mu
        i = np.arange(1, n + 1)
        t = float(np.dot(2 * i - n - 1, w))
        dist = n * _kernels.alienation(np.ascontiguousarray(ys))[positions]
        num = t - dist
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = np.where(num == 0.0, 0.0, num / (m * m * mu_loo))
    else:
        raise ValueError(f"no incremental leave-one-out for {functional.label}")
    if functional.normalize_mean:
        raw = raw / mu_loo ** _DEGREE[kind]
    return np.asarray(raw, dtype=float)


def loo_values(functional, data, positions=None, strategy="auto"):
    """v(F_n^(j)) for the observations at the given *sorted* positions.

    Parameters
    ----------
    strategy : {"auto", "exact", "incremental"}
        ``auto`` uses downdates where available, re-evaluation otherwise.
        The DER index is always re-evaluated.
    """
    sample = _as_sample(data)
    ys = np.ascontiguousarray(sample.sorted_values, dtype=float)
    n = ys.shape[0]
    if n < 3:
        raise TooFewObservations("leave-one-out values need n >= 3")
    if positions is None:
        positions = np.arange(n)
    positions = np.asarray(positions, dtype=np.int64)
    if strategy not in ("auto", "exact", "incremental"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if functional.kind == "der":
        return _der_loo(functional, ys, positions)
    if strategy == "exact":
        out = np.empty(positions.shape[0])
        for t, r in enumerate(positions):
            out[t] = _eval_sorted(functional, np.delete(ys, r))
        return out
    return _loo_incremental(functional, ys, positions)


def rsc_full(functional, data, strategy="auto"):
    """Recentered sensitivity curve for every observation.

    ``values[j] = v_n + n * (v_n - v_n^(j))`` in original observation order.
    """
    sample = _as_sample(data)
    v_n = evaluate(functional, sample)
    loo = loo_values(functional, sample, None, strategy)
    values = np.empty(sample.n)
    values[sample.sort_index] = v_n + sample.n * (v_n - loo)
    return InfluenceVector(values, v_n, Method.LOO_RSC, functional)


def sc_if_gap(functional, data, strategy="auto"):
    """max_j |SC(y_j) - IF(y_j)|: how far the sensitivity curve is from the IF."""
    if not functional.has_analytic_if:
        raise NoAnalyticForm(functional.label)
    sample = _as_sample(data)
    rif = analytic_rif(functional, sample)
    rsc = rsc_full(functional, sample, strategy)
    return float(np.max(np.abs(rsc.centered - rif.centered)))
