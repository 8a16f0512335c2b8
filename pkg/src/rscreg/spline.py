"""Restricted cubic spline interpolation of the sensitivity curve.

The sensitivity curve is computed exactly only on a random subsample of
size n*, a restricted cubic spline in y is fitted to those values by least
squares, and the fitted spline supplies the values for the rest of the
sample.  Knots are placed on the *full* sample.

The basis is the Durrleman-Simon parametrisation

    h_j(y) = (y-k_j)+^3 - (y-k_{K-1})+^3 (k_K-k_j)/(k_K-k_{K-1})
                        + (y-k_K)+^3 (k_{K-1}-k_j)/(k_K-k_{K-1}),   j = 1..K-2

which is linear below k_1 and above k_K.
"""
from dataclasses import dataclass

import numpy as np

from .errors import SingularDesign, TooFewDistinctValues, TooFewObservations
from .functionals import evaluate
from .influence import InfluenceVector, Method, _as_sample, loo_values
from .sample import rng_for

__all__ = [
    "KnotSet",
    "SplineModel",
    "HARRELL_PROBS",
    "default_n_star",
    "select_knots",
    "rcs_basis",
    "fit_rcs",
    "fit_spline_rsc",
    "interpolate",
]

# Harrell, Regression Modeling Strategies, table 2.3
HARRELL_PROBS = {
    3: (0.10, 0.50, 0.90),
    4: (0.05, 0.35, 0.65, 0.95),
    5: (0.05, 0.275, 0.50, 0.725, 0.95),
    6: (0.05, 0.23, 0.41, 0.59, 0.77, 0.95),
    7: (0.025, 0.1833, 0.3417, 0.50, 0.6583, 0.8167, 0.975),
}


def default_n_star(n, fraction=0.1, lo=200, hi=1000):
    """Subsample size: ``fraction * n`` clipped to [lo, hi] and never above n."""
    return int(min(n, max(lo, min(hi, round(fraction * n)))))


@dataclass(frozen=True)
class KnotSet:
    knots: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 3:
            raise TooFewDistinctValues("a restricted cubic spline needs at least 3 knots")
        if np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing")
        k.flags.writeable = False
        object.__setattr__(self, "knots", k)

    @property
    def K(self):
        return self.knots.size

    def __iter__(self):
        return iter(self.knots)


def select_knots(data, K=5):
    """Knots at Harrell's quantile positions of the full sample.

    For K > 7 the probabilities are equally spaced on [0.05, 0.95].
    Coincident quantiles are merged; fewer than 3 distinct knots is an error.
    """
    if K < 3:
        raise ValueError("K must be >= 3")
    ys = _as_sample(data).sorted_values
    if ys.size < K:
        raise TooFewObservations(f"need n >= K ({K}) to place knots")
    probs = HARRELL_PROBS.get(K) or tuple(np.linspace(0.05, 0.95, K))
    knots = np.unique(np.quantile(ys, probs))
    if knots.size < 3:
        raise TooFewDistinctValues(
            f"only {knots.size} distinct knot value(s); data has too little variation"
        )
    return KnotSet(knots)


def rcs_basis(y, knots):
    """Restricted cubic spline basis, shape ``y.shape + (K-2,)``."""
    k = knots.knots if isinstance(knots, KnotSet) else np.asarray(knots, dtype=float)
    y = np.asarray(y, dtype=float)
    kk, km = k[-1], k[-2]
    denom = kk - km
    yy = y[..., None]
    inner = k[:-2]
    cube = lambda u: np.maximum(u, 0.0) ** 3
    return (
        cube(yy - inner)
        - cube(yy - km) * (kk - inner) / denom
        + cube(yy - kk) * (km - inner) / denom
    )


def _design(y, knots, ncols):
    basis = rcs_basis(y, knots)[:, :ncols]
    return np.column_stack([np.ones_like(y), y, basis])


def fit_rcs(y, target, knots):
    """Least-squares fit of ``target`` on (1, y, h_1..h_{K-2}).

    Columns are centred and scaled before a QR solve.  A rank-deficient
    design drops the highest-index spline column and refits, down to a
    single spline column.

    Returns
    -------
    coef : ndarray, length K
        (beta0, beta1, gamma_1..gamma_{K-2}); dropped gammas are 0.
    dropped : int
    """
    y = np.asarray(y, dtype=float)
    target = np.asarray(target, dtype=float)
    K = knots.K
    for ncols in range(K - 2, 0, -1):
        X = _design(y, knots, ncols)
        if X.shape[0] < X.shape[1]:
            continue
        m = X[:, 1:].mean(axis=0)
        s = X[:, 1:].std(axis=0)
        if np.any(s <= 0):
            continue
        Z = np.column_stack([X[:, 0], (X[:, 1:] - m) / s])
        q, r = np.linalg.qr(Z)
        d = np.abs(np.diag(r))
        if d.min() <= 1e-10 * d.max():
            continue
        b = np.linalg.solve(r, q.T @ target)
        slopes = b[1:] / s
        coef = np.zeros(K)
        coef[0] = b[0] - np.dot(slopes, m)
        coef[1 : 2 + ncols] = slopes
        return coef, K - 2 - ncols
    raise SingularDesign(
        "spline design is singular even with one spline term; "
        "the subsample may miss whole knot regions"
    )


@dataclass(frozen=True)
class SplineModel:
    knots: KnotSet
    beta0: float
    beta1: float
    gamma: np.ndarray
    subsample_indices: np.ndarray
    fit_r2: float
    v_n: float = np.nan
    functional: object = None
    dropped: int = 0

    @property
    def coef(self):
        return np.concatenate([[self.beta0, self.beta1], self.gamma])

    def predict(self, y):
        y = np.asarray(y, dtype=float)
        return self.beta0 + self.beta1 * y + rcs_basis(y, self.knots) @ self.gamma


def _r2(target, fitted):
    sst = float(np.sum((target - target.mean()) ** 2))
    if sst == 0.0:
        return 1.0
    return float(max(0.0, 1.0 - np.sum((target - fitted) ** 2) / sst))


def fit_to_target(y, target, knots, subsample_indices=None, **extra):
    """Fit a spline to an arbitrary target and wrap it in a SplineModel."""
    coef, dropped = fit_rcs(y, target, knots)
    fitted = coef[0] + coef[1] * np.asarray(y) + rcs_basis(y, knots) @ coef[2:]
    return SplineModel(
        knots=knots,
        beta0=float(coef[0]),
        beta1=float(coef[1]),
        gamma=coef[2:],
        subsample_indices=subsample_indices,
        fit_r2=_r2(np.asarray(target, dtype=float), fitted),
        dropped=dropped,
        **extra,
    )


def fit_spline_rsc(functional, data, n_star=None, K=5, seed=0, strategy="auto"):
    """Fit a restricted cubic spline to the exact RSC on a random subsample.

    Parameters
    ----------
    n_star : int, optional
        Subsample size; defaults to :func:`default_n_star`.
    K : int
        Number of knots (placed on the full sample).
    seed : int
        Seed for the subsample draw (without replacement).
    """
    sample = _as_sample(data)
    n = sample.n
    if n_star is None:
        n_star = default_n_star(n)
    if not K <= n_star <= n:
        raise ValueError(f"need K <= n_star <= n, got K={K}, n_star={n_star}, n={n}")
    knots = select_knots(sample, K)
    idx = np.sort(rng_for(seed).choice(n, size=n_star, replace=False))
    v_n = evaluate(functional, sample)
    loo = loo_values(functional, sample, sample.rank[idx], strategy)
    target = v_n + n * (v_n - loo)
    y_sub = sample.values[idx]
    return fit_to_target(y_sub, target, knots, subsample_indices=idx, v_n=v_n, functional=functional)


def interpolate(model, data):
    """Spline-interpolated RSC for every observation of ``data``."""
    sample = _as_sample(data)
    return InfluenceVector(model.predict(sample.values), model.v_n, Method.SPLINE_RSC, model.functional)
