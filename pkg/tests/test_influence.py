import numpy as np
import pytest

from rscreg import (
    DgpModel,
    Functional,
    KdeConfig,
    NoAnalyticForm,
    Sample,
    analytic_rif,
    der_index,
    dgp_draw,
    evaluate,
    leave_one_out,
    loo_values,
    rsc_full,
    sc_at,
    sc_if_gap,
)
from rscreg.functionals import bandwidth
from rscreg.influence import Method


def draw(n, seed=0, kind="locscale"):
    return dgp_draw(DgpModel(kind), n, seed).outcome


def brute_loo(functional, y):
    """v(F_n^(j)) by deleting each observation from a plain array."""
    return np.array([evaluate(functional, np.delete(y, j)) for j in range(y.size)])


def brute_gini_if(y):
    # finite-difference IF of the Gini at the empirical distribution: mixture
    # weights (1-t) F_n + t delta_y evaluated on a weighted sample
    n = y.size
    out = np.empty(n)
    t = 1e-7

    def wgini(vals, w):
        mu = np.dot(w, vals)
        return np.sum(w[:, None] * w[None, :] * np.abs(vals[:, None] - vals[None, :])) / (2 * mu)

    base = wgini(y, np.full(n, 1 / n))
    for i in range(n):
        w = np.full(n, (1 - t) / n)
        w[i] += t
        out[i] = (wgini(y, w) - base) / t
    return out


MOMENTS = [Functional.mean(), Functional.variance(), Functional.gini(), Functional.quantile(0.3),
           Functional.quantile(0.5)]


def test_rif_mean_is_y():
    s = Sample([1.0, 2.0, 3.0])
    r = analytic_rif(Functional.mean(), s)
    assert r.values.tolist() == [1.0, 2.0, 3.0]
    assert r.method is Method.ANALYTIC_RIF
    y = draw(300).values
    assert np.array_equal(analytic_rif(Functional.mean(), y).values, y)


def test_rif_variance_at_one_sd():
    y = np.array([1.0, 3.0, 1.0, 3.0])  # mean 2, sd 1
    r = analytic_rif(Functional.variance(), y)
    np.testing.assert_allclose(r.values, r.v_n)


def test_gini_rif_recenters():
    r = analytic_rif(Functional.gini(), [1.0, 2.0, 3.0])
    assert np.mean(r.values) == pytest.approx(8 / 36, rel=1e-8)
    y = draw(2000, 3).values
    for f in (Functional.mean(), Functional.variance(), Functional.gini()):
        r = analytic_rif(f, y)
        assert np.mean(r.values) == pytest.approx(r.v_n, rel=1e-8)
        r = analytic_rif(f.__class__(f.kind, normalize_mean=True), y)
        assert np.mean(r.values) == pytest.approx(r.v_n, rel=1e-8)


def test_gini_if_matches_gateaux_derivative():
    rng = np.random.default_rng(0)
    y = rng.lognormal(size=25)
    r = analytic_rif(Functional.gini(), y)
    # the discrete form uses the midpoint CDF, so it matches up to O(1/n) per point
    np.testing.assert_allclose(r.centered, brute_gini_if(y), atol=2.0 / y.size)


def test_quantile_rif_mean():
    y = draw(1000, 1).values
    f = Functional.quantile(0.3)
    r = analytic_rif(f, y)
    # exactly mean zero when n*tau is an integer
    assert np.mean(r.centered) == pytest.approx(0.0, abs=1e-10)
    f = Functional.quantile(0.3005)
    r = analytic_rif(f, y)
    dens = r.values.max() - r.values.min()
    assert abs(np.mean(r.centered)) <= 1.0 / y.size * dens


def test_der_has_no_analytic_form():
    with pytest.raises(NoAnalyticForm, match="no analytic influence function"):
        analytic_rif(Functional.der(0.5), draw(50).values)
    with pytest.raises(NoAnalyticForm):
        sc_if_gap(Functional.der(0.5), draw(50).values)


def test_sc_examples():
    s = Sample([1.0, 2.0, 3.0])
    assert sc_at(Functional.mean(), s, 2) == pytest.approx(1.5)
    for j in range(3):
        assert sc_at(Functional.variance(), [1.0, 1.0, 1.0], j) == 0.0
    r = rsc_full(Functional.mean(), s)
    np.testing.assert_allclose(r.values, [0.5, 2.0, 3.5], rtol=0, atol=1e-12)


def test_sc_mean_closed_form():
    y = draw(500, 2).values
    n = y.size
    expect = y.mean() + n * (y - y.mean()) / (n - 1)
    for strategy in ("exact", "incremental"):
        np.testing.assert_allclose(rsc_full(Functional.mean(), y, strategy).values, expect, rtol=1e-12)


def test_gini_sc_scale_invariant():
    y = draw(300, 4).values
    a = rsc_full(Functional.gini(), y, "exact").centered
    b = rsc_full(Functional.gini(), 7.5 * y, "exact").centered
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)
    f = Functional.der(0.5, normalize_mean=True)
    np.testing.assert_allclose(rsc_full(f, y).centered, rsc_full(f, 3.0 * y).centered, rtol=0, atol=1e-10)


@pytest.mark.parametrize("functional", MOMENTS, ids=lambda f: f.label)
def test_incremental_equals_exact(functional):
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(3, 300))
        y = rng.lognormal(size=n)
        if rng.random() < 0.3:
            y = np.round(y, 1)  # ties
        a = loo_values(functional, y, strategy="exact")
        b = loo_values(functional, y, strategy="incremental")
        np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-12)
    y = draw(2000, 8).values
    a = rsc_full(functional, y, "exact").values
    b = rsc_full(functional, y, "incremental").values
    np.testing.assert_allclose(b, a, rtol=0, atol=1e-9 * (1 + abs(evaluate(functional, y))))


@pytest.mark.parametrize("functional", MOMENTS + [Functional.der(0.5)], ids=lambda f: f.label)
def test_loo_against_array_deletion(functional):
    y = draw(60, 9).values
    s = Sample(y)
    got = loo_values(functional, s)[s.rank]  # sorted positions -> original order
    np.testing.assert_allclose(got, brute_loo(functional, y), rtol=1e-11)
    assert evaluate(functional, leave_one_out(s, 5)) == pytest.approx(brute_loo(functional, y)[5])


def test_rsc_equals_sc_at():
    y = draw(40, 10).values
    for f in (Functional.gini(), Functional.der(0.5)):
        r = rsc_full(f, y)
        for j in (0, 17, 39):
            assert r.values[j] - r.v_n == pytest.approx(sc_at(f, y, j), rel=1e-10)


def test_der_rsc_finite_and_deterministic():
    y = draw(200, 11).values
    a = rsc_full(Functional.der(0.5), y)
    b = rsc_full(Functional.der(0.5), y)
    assert np.all(np.isfinite(a.values))
    assert np.array_equal(a.values, b.values)


def test_der_freeze_mode_close_to_recompute():
    y = draw(1000, 12).values
    rec = rsc_full(Functional.der(0.5, loo_bandwidth="recompute"), y)
    frz = rsc_full(Functional.der(0.5, loo_bandwidth="freeze"), y)
    # the frozen bandwidth misses only the O(1/n) bandwidth response to the removal
    assert np.corrcoef(rec.values, frz.values)[0, 1] > 0.99
    assert abs(np.mean(rec.values) - np.mean(frz.values)) < 0.1 * np.std(rec.values)
    # with a fixed bandwidth both modes are the same computation
    f = dict(kde=KdeConfig(h=0.5))
    a = rsc_full(Functional.der(0.5, loo_bandwidth="recompute", **f), y).values
    b = rsc_full(Functional.der(0.5, loo_bandwidth="freeze", **f), y).values
    np.testing.assert_allclose(a, b, rtol=1e-9)


def test_der_freeze_normalized_matches_direct():
    y = draw(300, 13).values
    s = Sample(y)
    h = bandwidth(s.sorted_values)
    f = Functional.der(0.5, normalize_mean=True, loo_bandwidth="freeze")
    got = loo_values(f, s)[s.rank]
    for j in range(0, 300, 37):
        rest = np.delete(y, j)
        # raw index at the frozen full-sample bandwidth, rescaled by mu_j^(alpha - 1)
        expect = der_index(rest, 0.5, KdeConfig(h=h)) * rest.mean() ** -0.5
        assert got[j] == pytest.approx(expect, rel=1e-10)


def test_rsc_recentering_shrinks():
    for f in (Functional.variance(), Functional.gini()):
        for n in (500, 4000):
            sc = rsc_full(f, draw(n, 14).values).centered
            assert abs(np.mean(sc)) < 3 * np.std(sc) / np.sqrt(n)


def test_sc_if_gap_mean_closed_form():
    y = draw(400, 15).values
    expect = np.max(np.abs(y - y.mean())) / (y.size - 1)
    assert sc_if_gap(Functional.mean(), y) == pytest.approx(expect, rel=1e-10)
    assert sc_if_gap(Functional.gini(), [2.0, 2.0, 2.0, 2.0]) == 0.0


def test_variance_rsc_vs_rif_gap_shrinks():
    big = draw(5000, 16).values
    small = big[:500]
    f = Functional.variance()
    assert sc_if_gap(f, big) < sc_if_gap(f, small)
