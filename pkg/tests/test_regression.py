import numpy as np
import pytest

from rscreg import (
    Dataset,
    DgpModel,
    Functional,
    ModelSpec,
    NoAnalyticForm,
    RankDeficientDesign,
    Sample,
    SpecMismatch,
    average_partial_effect,
    dgp_draw,
    ols,
    rif_regress,
)
from rscreg.influence import Method
from rscreg.regression import build_design


def brute_hc1(X, y):
    n, k = X.shape
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    e = y - X @ beta
    bread = np.linalg.inv(X.T @ X)
    meat = sum(np.outer(X[i], X[i]) * e[i] ** 2 for i in range(n))
    return beta, n / (n - k) * bread @ meat @ bread


def test_exact_line_and_constant():
    x = np.linspace(0, 1, 20)
    rep = ols(1 + 2 * x, ModelSpec(), x)
    np.testing.assert_allclose(rep.coefficients, [1.0, 2.0], atol=1e-10)
    assert rep.ape[0] == rep.coefficients[1]
    rep = ols(np.full(20, 4.2), ModelSpec(), x)
    assert rep.coef("x1") == pytest.approx(0.0, abs=1e-12)
    assert rep.coef("_cons") == pytest.approx(4.2, rel=1e-12)


def test_rank_deficient():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    with pytest.raises(RankDeficientDesign):
        ols(rng.normal(size=50), ModelSpec(), np.column_stack([x, x]))
    with pytest.raises(RankDeficientDesign):
        ols(rng.normal(size=2), ModelSpec(), np.array([[1.0], [2.0]]))


@pytest.mark.parametrize("form", ["linear", "quadratic", "cubic"])
def test_hc1_matches_brute_force(form):
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(20, 200))
        X = rng.uniform(size=(n, 2))
        y = 1 + X[:, 0] - 2 * X[:, 1] ** 2 + rng.normal(size=n) * (1 + X[:, 0])
        rep = ols(y, ModelSpec(form), X)
        D, _ = build_design(ModelSpec(form), X, ["x1", "x2"])
        beta, cov = brute_hc1(D, y)
        np.testing.assert_allclose(rep.coefficients, beta, rtol=1e-9, atol=1e-10)
        np.testing.assert_allclose(rep.covariance, cov, rtol=1e-9, atol=1e-12)
        assert np.allclose(rep.covariance, rep.covariance.T)
        assert np.linalg.eigvalsh(rep.covariance).min() >= -1e-10 * np.trace(rep.covariance)


def test_quadratic_ape_examples():
    x = np.linspace(0, 1, 101)
    rep = ols(x**2, ModelSpec("quadratic"), x)
    assert rep.ape[0] == pytest.approx(2 * x.mean(), abs=1e-6)
    rng = np.random.default_rng(2)
    y = 3 + 0.7 * x + rng.normal(scale=1e-12, size=x.size)
    rep = ols(y, ModelSpec("quad"), x)
    assert rep.ape[0] == pytest.approx(0.7, abs=1e-6)


def test_cubic_ape_uses_mean_of_square():
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2, 400)
    y = 1 + x - 0.5 * x**2 + 0.25 * x**3
    rep = ols(y, ModelSpec("cubic"), x)
    # the average derivative of the fitted mean
    expect = np.mean(1 - x + 0.75 * x**2)
    assert rep.ape[0] == pytest.approx(expect, rel=1e-8)
    b, c, d = rep.coef("x1"), rep.coef("x1^2"), rep.coef("x1^3")
    assert rep.ape[0] == pytest.approx(b + 2 * c * x.mean() + 3 * d * np.mean(x**2), rel=1e-12)


def test_ape_recentering_invariance():
    rng = np.random.default_rng(4)
    x = rng.uniform(size=300)
    y = np.sin(3 * x) + rng.normal(scale=0.1, size=300)
    a = ols(y, ModelSpec("quadratic"), x)
    b = ols(y, ModelSpec("quadratic"), x + 5.0)
    assert a.coef("x1") != pytest.approx(b.coef("x1"))
    assert a.ape[0] == pytest.approx(b.ape[0], abs=1e-8)
    assert a.se_ape[0] == pytest.approx(b.se_ape[0], rel=1e-6)


def test_numerical_ape_matches_closed_form():
    rng = np.random.default_rng(5)
    n = 500
    X = np.column_stack([rng.uniform(size=n), rng.integers(0, 2, n)])
    y = X[:, 0] ** 2 + X[:, 0] * X[:, 1] + rng.normal(size=n)
    rep = ols(y, ModelSpec("quadratic"), X, ["a", "b"])
    # binary b gets no square; interaction a*b is present
    assert rep.terms == ["_cons", "a", "b", "a^2", "a*b"]
    th = dict(zip(rep.terms, rep.coefficients))
    a, b = X[:, 0], X[:, 1]
    ape_a = th["a"] + 2 * th["a^2"] * a.mean() + th["a*b"] * b.mean()
    ape_b = th["b"] + th["a*b"] * a.mean()
    np.testing.assert_allclose(rep.ape, [ape_a, ape_b], rtol=1e-6)
    # single-covariate numeric path agrees with the closed form
    x = X[:, :1]
    cubic = ols(y, ModelSpec("cubic"), x)
    custom = ols(y, ModelSpec("custom", builder=lambda Z: (
        np.column_stack([np.ones(len(Z)), Z[:, 0], Z[:, 0] ** 2, Z[:, 0] ** 3]),
        ["_cons", "x1", "x1^2", "x1^3"])), x)
    assert custom.ape[0] == pytest.approx(cubic.ape[0], rel=1e-6)


def test_spec_mismatch():
    rng = np.random.default_rng(6)
    X = rng.uniform(size=(50, 2))
    rep = ols(rng.normal(size=50), ModelSpec(), X)
    with pytest.raises(SpecMismatch):
        average_partial_effect(rep, X[:, :1])


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("quartic")
    with pytest.raises(ValueError):
        ModelSpec("custom")


def test_mean_regression_is_plain_ols():
    d = dgp_draw(DgpModel("locscale"), 800, 7)
    plain = ols(d.outcome.values, ModelSpec("quadratic"), d.covariates, ["x"])
    rep = rif_regress(d, Functional.mean(), "rif", ModelSpec("quadratic"))
    np.testing.assert_array_equal(rep.coefficients, plain.coefficients)
    np.testing.assert_array_equal(rep.covariance, plain.covariance)
    np.testing.assert_array_equal(rep.ape, plain.ape)
    # RSC of the mean is an affine map of y: v + n (y - v) / (n - 1)
    n = d.n
    for m in ("rsc", "rsc-sp"):
        rep = rif_regress(d, Functional.mean(), m, ModelSpec("quadratic"))
        np.testing.assert_allclose(rep.coefficients[1:] * (n - 1) / n, plain.coefficients[1:],
                                   rtol=1e-8)


def test_rif_regress_errors_and_scaling():
    d = dgp_draw(DgpModel("locscale"), 300, 8)
    with pytest.raises(NoAnalyticForm):
        rif_regress(d, Functional.der(0.5), "rif")
    rep = rif_regress(d, Functional.gini(), Method.LOO_RSC)
    s = rep.scaled(100)
    assert s.ape[0] == pytest.approx(100 * rep.ape[0])
    assert s.se_ape[0] == pytest.approx(100 * rep.se_ape[0])
    assert s.v_n == pytest.approx(100 * rep.v_n)
    assert rep.method is Method.LOO_RSC


def test_variance_rif_vs_rsc_close():
    d = dgp_draw(DgpModel("locscale"), 5000, 9)
    a = rif_regress(d, Functional.variance(), "rif").coef("x")
    b = rif_regress(d, Functional.variance(), "rsc").coef("x")
    assert abs(a - b) < 0.01


def test_multi_covariate_dataset():
    rng = np.random.default_rng(10)
    n = 400
    X = rng.normal(size=(n, 3))
    y = 10 + X @ [1.0, 0.5, -0.5] + rng.normal(size=n) * np.exp(0.3 * X[:, 0])
    d = Dataset(Sample(y), X, ("a", "b", "c"))
    rep = rif_regress(d, Functional.variance(), "rsc", covariates=["a", "c"])
    assert rep.covariate_names == ["a", "c"]
    assert rep.effect("a")[1] > 0
