"""OLS of recentered influence values on covariates.

The slope of ``E[RIF | X]`` averaged over X (the average partial effect)
estimates the effect of a marginal shift in X on the unconditional
statistic.  Standard errors are HC1 heteroskedasticity-robust; the
sampling error of v_n inside the regressand is not propagated.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficientDesign, SpecMismatch
from .influence import Method, analytic_rif, rsc_full
from .spline import fit_spline_rsc, interpolate

__all__ = [
    "ModelSpec",
    "EffectReport",
    "build_design",
    "ols",
    "average_partial_effect",
    "influence_vector",
    "rif_regress",
]

FORMS = ("linear", "quadratic", "cubic", "custom")


@dataclass(frozen=True)
class ModelSpec:
    """Polynomial form of the conditional mean of the regressand.

    ``custom`` takes ``builder(X) -> (design, term_names)``; the design must
    include its own intercept column if one is wanted.
    """

    form: str = "linear"
    builder: object = None

    def __post_init__(self):
        aliases = {"quad": "quadratic", "lin": "linear"}
        object.__setattr__(self, "form", aliases.get(self.form, self.form))
        if self.form not in FORMS:
            raise ValueError(f"unknown model form {self.form!r}")
        if (self.form == "custom") != (self.builder is not None):
            raise ValueError("a builder is required for, and only for, the custom form")


def build_design(spec, X, names):
    """Design matrix and term names for covariates ``X`` (n x p).

    Squares are added only for covariates with more than two distinct values
    and cubes only for more than three (otherwise they are collinear with
    lower powers); quadratic and cubic forms add all pairwise interactions.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = list(names)
    if spec.form == "custom":
        design, terms = spec.builder(X)
        return np.asarray(design, dtype=float), list(terms)
    cols = [np.ones(X.shape[0])] + [X[:, k] for k in range(X.shape[1])]
    terms = ["_cons"] + names
    if spec.form in ("quadratic", "cubic"):
        distinct = [np.unique(X[:, k]).size for k in range(X.shape[1])]
        powers = (2, 3) if spec.form == "cubic" else (2,)
        for pw in powers:
            for k, nm in enumerate(names):
                if distinct[k] > pw:
                    cols.append(X[:, k] ** pw)
                    terms.append(f"{nm}^{pw}")
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                prod = X[:, a] * X[:, b]
                if np.ptp(prod) == 0:
                    continue
                cols.append(prod)
                terms.append(f"{names[a]}*{names[b]}")
    return np.column_stack(cols), terms


def design_from_terms(X, names, terms):
    """Evaluate named terms (``_cons``, ``x``, ``x^2``, ``a*b``) on ``X``."""
    col = {nm: X[:, k] for k, nm in enumerate(names)}
    out = np.empty((X.shape[0], len(terms)))
    for t, term in enumerate(terms):
        if term == "_cons":
            out[:, t] = 1.0
        elif "*" in term:
            a, b = term.split("*")
            out[:, t] = col[a] * col[b]
        elif "^" in term:
            a, pw = term.rsplit("^", 1)
            out[:, t] = col[a] ** int(pw)
        else:
            out[:, t] = col[term]
    return out


@dataclass
class EffectReport:
    """Coefficients, HC1 covariance and average partial effects of one fit."""

    terms: list
    coefficients: np.ndarray
    covariance: np.ndarray
    covariate_names: list
    ape: np.ndarray = None
    se_ape: np.ndarray = None
    n_used: int = 0
    method: Method = None
    spec: ModelSpec = field(default_factory=ModelSpec)
    v_n: float = np.nan

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def coef(self, term):
        return float(self.coefficients[self.terms.index(term)])

    def effect(self, name):
        """(APE, standard error) for a covariate."""
        k = self.covariate_names.index(name)
        return float(self.ape[k]), float(self.se_ape[k])

    def scaled(self, c):
        """Every estimate multiplied by ``c`` (e.g. 100 for percentage tables)."""
        return EffectReport(
            self.terms,
            self.coefficients * c,
            self.covariance * c * c,
            self.covariate_names,
            None if self.ape is None else self.ape * c,
            None if self.se_ape is None else self.se_ape * abs(c),
            self.n_used,
            self.method,
            self.spec,
            self.v_n * c,
        )


def _hc1(design, resid, r_inv):
    n, k = design.shape
    bread = r_inv @ r_inv.T
    xe = design * resid[:, None]
    meat = xe.T @ xe
    cov = n / (n - k) * bread @ meat @ bread
    return 0.5 * (cov + cov.T)


def ols(y, spec, covariates, names=None, method=None):
    """Least squares of ``y`` on the design built from ``covariates``.

    Raises
    ------
    RankDeficientDesign
        If the design does not have full column rank.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = [f"x{k + 1}" for k in range(X.shape[1])]
    names = list(names)
    design, terms = build_design(spec, X, names)
    n, k = design.shape
    if X.shape[0] != y.shape[0]:
        raise ValueError("y and covariates must have the same number of rows")
    if n < k + 1:
        raise RankDeficientDesign(f"{n} rows for {k} regressors")
    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0):
        raise RankDeficientDesign("design has an all-zero column")
    q, r = np.linalg.qr(design / norms)
    d = np.abs(np.diag(r))
    if d.min() <= 1e-10 * d.max():
        raise RankDeficientDesign(
            "design matrix is rank deficient (collinear columns: "
            + ", ".join(t for t, di in zip(terms, d) if di <= 1e-10 * d.max())
            + ")"
        )
    theta_s = np.linalg.solve(r, q.T @ y)
    theta = theta_s / norms
    resid = y - design @ theta
    r_inv = np.linalg.inv(r) / norms[:, None]
    cov = _hc1(design, resid, r_inv)
    report = EffectReport(terms, theta, cov, names, n_used=n, method=method, spec=spec)
    report.ape, report.se_ape = average_partial_effect(report, X)
    return report


def _ape_gradients(spec, X, names, terms):
    """Rows g_k with APE_k = g_k . theta."""
    n, p = X.shape
    if p == 1 and spec.form != "custom":
        x = X[:, 0]
        g = np.zeros(len(terms))
        g[terms.index(names[0])] = 1.0
        if f"{names[0]}^2" in terms:
            g[terms.index(f"{names[0]}^2")] = 2.0 * x.mean()
        if f"{names[0]}^3" in terms:
            g[terms.index(f"{names[0]}^3")] = 3.0 * np.mean(x * x)
        return g[None, :]
    if spec.form == "linear":
        G = np.zeros((p, len(terms)))
        for k, nm in enumerate(names):
            G[k, terms.index(nm)] = 1.0
        return G
    # numerical average derivative of the fitted mean; exact for polynomial designs
    G = np.empty((p, len(terms)))
    for k in range(p):
        sd = X[:, k].std()
        step = 1e-5 * (sd if sd > 0 else 1.0)
        up, dn = X.copy(), X.copy()
        up[:, k] += step
        dn[:, k] -= step
        if spec.form == "custom":
            hi, lo = spec.builder(up)[0], spec.builder(dn)[0]
        else:
            hi, lo = design_from_terms(up, names, terms), design_from_terms(dn, names, terms)
        G[k] = (np.mean(hi, axis=0) - np.mean(lo, axis=0)) / (2 * step)
    return G


def average_partial_effect(report, covariates):
    """Average partial effects and delta-method standard errors.

    Linear: b.  Quadratic: b + 2 c mean(X).  Cubic: b + 2 c mean(X) + 3 d mean(X^2).
    With several covariates the derivative of the fitted mean is taken
    numerically and averaged over observations.
    """
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != len(report.covariate_names):
        raise SpecMismatch(
            f"report has {len(report.covariate_names)} covariates, got {X.shape[1]} columns"
        )
    _, terms = build_design(report.spec, X, report.covariate_names)
    if terms != list(report.terms):
        raise SpecMismatch("covariates produce different design terms than the fitted report")
    G = _ape_gradients(report.spec, X, report.covariate_names, terms)
    ape = G @ report.coefficients
    var = np.einsum("ij,jk,ik->i", G, report.covariance, G)
    return ape, np.sqrt(np.clip(var, 0.0, None))


def influence_vector(sample, functional, method, n_star=None, K=5, seed=0, strategy="auto"):
    """Recentered influence values of ``sample`` by the chosen method."""
    method = Method(method)
    if method is Method.ANALYTIC_RIF:
        return analytic_rif(functional, sample)
    if method is Method.LOO_RSC:
        return rsc_full(functional, sample, strategy)
    model = fit_spline_rsc(functional, sample, n_star=n_star, K=K, seed=seed, strategy=strategy)
    return interpolate(model, sample)


def rif_regress(dataset, functional, method, spec=ModelSpec(), n_star=None, K=5, seed=0,
                strategy="auto", covariates=None):
    """Regress recentered influence values of the outcome on the covariates.

    Parameters
    ----------
    dataset : Dataset
    functional : Functional
    method : Method or {"rif", "rsc", "rsc-sp"}
    spec : ModelSpec
    n_star, K, seed :
        Spline options, used by ``rsc-sp`` only.
    covariates : list of str, optional
        Subset of dataset columns to use (default all).
    """
    names = list(covariates) if covariates else list(dataset.names)
    X = np.column_stack([dataset.column(nm) for nm in names])
    inf = influence_vector(dataset.outcome, functional, method, n_star=n_star, K=K, seed=seed,
                           strategy=strategy)
    report = ols(inf.values, spec, X, names, method=inf.method)
    report.v_n = inf.v_n
    return report
