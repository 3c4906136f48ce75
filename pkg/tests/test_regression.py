import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from kdx.data_model import build_dataset
from kdx.regression import (DesignMatrix, RankError, build_design, pinball_loss, quantile_reg,
                            weighted_quantile, wls, year_fixed_effects)
from conftest import record


def design(X, y, w=None, names=None):
    X = np.column_stack([np.ones(len(y)), X])
    w = np.ones(len(y)) if w is None else w
    names = names or tuple(["const"] + [f"x{i}" for i in range(1, X.shape[1])])
    return DesignMatrix(np.asarray(y, float), X, np.asarray(w, float), tuple(names))


def lp_quantile(X, y, w, tau):
    """Weighted quantile regression as a linear programme (oracle)."""
    n, k = X.shape
    c = np.concatenate([np.zeros(k), tau * w, (1 - tau) * w])
    A = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    res = linprog(c, A_eq=A, b_eq=y, bounds=bounds, method="highs")
    assert res.status == 0
    return res.x[:k], res.fun


def instance(seed, n=None, k=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(15, 80))
    k = k or int(rng.integers(1, 4))
    X = rng.normal(size=(n, k))
    y = 1.0 + X @ rng.normal(size=k) + rng.standard_t(3, size=n)
    w = rng.random(n) + 0.05
    return design(X, y, w)


def test_wls_exact_fit():
    x = np.linspace(0, 5, 12)
    d = design(x, 2 * x, np.random.default_rng(0).random(12) + 0.1)
    res = wls(d)
    np.testing.assert_allclose(res.coefficients, [0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(res.se, 0.0, atol=1e-7)


def test_wls_equal_weights_is_ols():
    d = instance(3)
    res = wls(DesignMatrix(d.y, d.X, np.full(d.y.size, 0.37), d.names))
    ols, *_ = np.linalg.lstsq(d.X, d.y, rcond=None)
    np.testing.assert_allclose(res.coefficients, ols, atol=1e-10)


def test_wls_classical_se():
    d = instance(4, n=50, k=2)
    res = wls(d)
    Xw = d.X * np.sqrt(d.weights)[:, None]
    yw = d.y * np.sqrt(d.weights)
    beta, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    r = yw - Xw @ beta
    cov = r @ r / (50 - 3) * np.linalg.inv(Xw.T @ Xw)
    np.testing.assert_allclose(res.se, np.sqrt(np.diag(cov)), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_wls_weight_scaling(seed, c):
    d = instance(seed)
    a = wls(d)
    b = wls(DesignMatrix(d.y, d.X, c * d.weights, d.names))
    np.testing.assert_allclose(b.coefficients, a.coefficients, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(b.se, a.se, rtol=1e-9, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_wls_duplicate_split(seed):
    d = instance(seed)
    i = seed % d.y.size
    w = d.weights.copy()
    w[i] /= 2
    split = DesignMatrix(np.append(d.y, d.y[i]), np.vstack([d.X, d.X[i]]), np.append(w, w[i]),
                         d.names)
    np.testing.assert_allclose(wls(split).coefficients, wls(d).coefficients,
                               rtol=1e-9, atol=1e-9)


def test_wls_rank_deficient():
    x = np.arange(10.0)
    with pytest.raises(RankError):
        wls(design(np.column_stack([x, 2 * x]), x))
    with pytest.raises(RankError):
        wls(design(x[:1], x[:1]))


@pytest.mark.parametrize("seed", range(20))
def test_quantile_reg_matches_lp(seed):
    d = instance(seed)
    tau = (0.1, 0.3, 0.5, 0.7, 0.9)[seed % 5]
    res = quantile_reg(d, tau, B=0)
    _, best = lp_quantile(d.X, d.y, d.weights, tau)
    assert res.converged
    assert res.loss <= best * (1 + 1e-9) + 1e-12
    assert pinball_loss(d.y, d.X, d.weights, res.coefficients, tau) == pytest.approx(res.loss)


@pytest.mark.parametrize("seed", range(10))
def test_quantile_reg_beats_grid_search(seed):
    d = instance(100 + seed, k=1)
    tau = 0.25 + 0.05 * seed
    beta = quantile_reg(d, tau, B=0).coefficients
    loss = pinball_loss(d.y, d.X, d.weights, beta, tau)
    offsets = np.linspace(-1, 1, 41)
    for a in offsets:
        for b in offsets:
            trial = beta + np.array([a, b]) * 0.5
            assert loss <= pinball_loss(d.y, d.X, d.weights, trial, tau) + 1e-12


def test_intercept_only_median():
    y = np.array([5.0, 1.0, 9.0, 3.0, 7.0])
    d = DesignMatrix(y, np.ones((5, 1)), np.ones(5), ("const",))
    assert quantile_reg(d, 0.5, B=0).coefficients[0] == 5.0
    y4 = np.array([1.0, 2.0, 3.0, 10.0])
    d4 = DesignMatrix(y4, np.ones((4, 1)), np.ones(4), ("const",))
    assert quantile_reg(d4, 0.5, B=0).coefficients[0] == np.median(y4)


def test_weighted_quantile():
    assert weighted_quantile([1.0, 2.0, 3.0], [1.0, 1.0, 2.0], 0.5) == 2.5
    assert weighted_quantile([1.0, 2.0, 3.0], [1.0, 1.0, 3.0], 0.5) == 3.0
    assert weighted_quantile([4.0], [1.0], 0.1) == 4.0


def test_slope_recovered_within_bootstrap_se():
    rng = np.random.default_rng(42)
    x = rng.uniform(0, 10, 300)
    y = 1.0 + 2.0 * x + rng.normal(0, 1.5, 300)
    d = design(x, y)
    for tau in (0.25, 0.5, 0.75):
        res = quantile_reg(d, tau, B=200, seed=1)
        assert abs(res.coef("x1") - 2.0) < 3 * res.stderr("x1")
        true_const = 1.0 + 1.5 * float(np.sqrt(2) * __import__("scipy").special.erfinv(2 * tau - 1))
        assert abs(res.coef("const") - true_const) < 3 * res.stderr("const")


def test_median_regression_close_to_wls():
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 10, 400)
    y = 3.0 - 1.0 * x + rng.laplace(0, 1.0, 400)
    d = design(x, y)
    q = quantile_reg(d, 0.5, B=100, seed=2)
    m = wls(d)
    assert abs(q.coef("x1") - m.coef("x1")) < 3 * np.hypot(q.stderr("x1"), m.stderr("x1"))


def test_quantile_reg_weight_scaling():
    d = instance(5)
    a = quantile_reg(d, 0.3, B=0)
    b = quantile_reg(DesignMatrix(d.y, d.X, 1000 * d.weights, d.names), 0.3, B=0)
    np.testing.assert_allclose(a.coefficients, b.coefficients, rtol=1e-8, atol=1e-8)


def test_quantile_reg_bootstrap_reproducible():
    d = instance(6)
    a = quantile_reg(d, 0.5, B=30, seed=3)
    b = quantile_reg(d, 0.5, B=30, seed=3)
    np.testing.assert_array_equal(a.se, b.se)
    assert np.all(a.se > 0)


def test_quantile_reg_errors():
    d = instance(1)
    for tau in (0.0, 1.0):
        with pytest.raises(ValueError):
            quantile_reg(d, tau)


# -- designs on datasets ----------------------------------------------------------

def year_records(means, per_year=4, prtp="1.0", spread=(-3.0, -1.0, 1.0, 3.0)):
    out = []
    for year, mean in means.items():
        for j in range(per_year):
            out.append(record(paper_id=f"{year}-{j}", pub_year=year, dollar_year=2010,
                              emission_year=2010, scc_reported=mean + spread[j % len(spread)],
                              prtp=prtp))
    return out


def test_design_excludes_other_prtp():
    recs = year_records({1990: 100, 2000: 120}) + [record(prtp="other", pub_year=1990)]
    ds = build_dataset(recs).reweighted("none")
    assert build_design(ds).y.size == 8
    assert build_design(ds, ("pub_year",)).y.size == 9
    with pytest.raises(ValueError):
        build_design(ds, ("pub_year", "year_dummies"))


def test_year_dummies_base_year():
    ds = build_dataset(year_records({1982: 1, 1990: 2, 2000: 3})).reweighted("none")
    d = build_design(ds, ("year_dummies",))
    assert d.names == ("const", "y1990", "y2000")
    ds2 = build_dataset(year_records({1985: 1, 1990: 2})).reweighted("none")
    assert build_design(ds2, ("year_dummies",)).names == ("const", "y1990")


def test_year_effects_zero_for_equal_means():
    ds = build_dataset(year_records({1982: 100.0, 1995: 100.0, 2010: 100.0})).reweighted("none")
    fe = year_fixed_effects(ds, with_prtp=False)
    np.testing.assert_allclose(fe.effects, 0.0, atol=1e-10)
    assert fe.base_year == 1982


def test_year_effects_step():
    ds = build_dataset(year_records({1982: 100.0, 1995: 100.0, 2010: 110.0})).reweighted("none")
    fe = year_fixed_effects(ds, with_prtp=False)
    assert list(fe.years) == [1995, 2010]
    np.testing.assert_allclose(fe.effects, [0.0, 10.0], atol=1e-10)
    assert np.all(fe.half_width > 0)
    np.testing.assert_allclose(fe.half_width, fe.result.se[1:])


def test_year_effects_need_two_years():
    ds = build_dataset(year_records({2001: 50.0})).reweighted("none")
    with pytest.raises(ValueError):
        year_fixed_effects(ds)


def test_prtp_slope_recovered():
    recs = []
    for i, prtp in enumerate(["0.0", "1.0", "2.0", "3.0"] * 5):
        recs.append(record(paper_id=f"p{i}", prtp=prtp, pub_year=1990 + i, dollar_year=2010,
                           emission_year=2010, scc_reported=400.0 - 100.0 * float(prtp)))
    ds = build_dataset(recs).reweighted("none")
    res = wls(build_design(ds))
    assert res.coef("prtp") == pytest.approx(-100.0, abs=1e-9)
    assert res.coef("pub_year") == pytest.approx(0.0, abs=1e-9)
    q = quantile_reg(build_design(ds), 0.5, B=0)
    assert q.coef("prtp") == pytest.approx(-100.0, abs=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_quantile_reg_on_resample_matches_lp(seed):
    d = instance(200 + seed)
    idx = np.random.default_rng(seed).integers(0, d.y.size, d.y.size)
    r = d.take(idx)
    tau = 0.1 + 0.08 * seed
    res = quantile_reg(r, tau, B=0)
    _, best = lp_quantile(r.X, r.y, r.weights, tau)
    assert res.converged
    assert res.loss <= best * (1 + 1e-9) + 1e-12
