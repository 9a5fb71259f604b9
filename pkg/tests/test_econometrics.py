import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from discspace import econometrics as em
from discspace.econometrics import (
    RegressionResult, build_design, cluster_robust_vcov, fit_fe, marginal_effects, ols, sd_impact,
    within_transform,
)
from discspace.errors import MissingCoefficient, NoResidualDof, RankDeficient, SingleCluster
from discspace.growth import GrowthPanel
from discspace.simulate import simulate_dataset

from oracles import brute_force_cr1, dummy_design, normal_equations, random_fe_dataset


def _growth(rows):
    df = pd.DataFrame(rows, columns=["country", "discipline", "period_start", "period_end", "start_rca", "growth"])
    df["start_level"] = df["start_rca"]
    df["end_level"] = np.nan
    return GrowthPanel("documents", "rca", df)


def _density(rows):
    return pd.DataFrame(rows, columns=["country", "discipline", "year", "value"])


def test_build_design_split_and_interaction():
    g = _growth([("a", "i", 2000, 2004, 0.99, 0.1), ("a", "j", 2000, 2004, 1.0, 0.2),
                 ("b", "i", 2000, 2004, 2.0, 0.3)])
    dens = _density([("a", "i", 2000, 0.3), ("a", "j", 2000, 0.5), ("b", "i", 2000, 0.4),
                     ("b", "i", 2004, 0.9)])
    lt = build_design(g, dens, "rca_lt_1")
    assert lt.x_rca.tolist() == [0.99]
    ge = build_design(g, dens, "rca_ge_1", with_interaction=True)
    assert ge.x_rca.tolist() == [1.0, 2.0]
    # density joined at the period start year, not the end
    assert ge.x_density.tolist() == [0.5, 0.4]
    assert ge.slope_matrix()[1, 2] == pytest.approx(0.8, abs=1e-15)
    assert ge.slope_names == ["avg_proximity", "rca", "avg_proximity_x_rca"]


def test_build_design_counts_dropped_rows():
    g = _growth([("a", "i", 2000, 2004, 0.5, 0.1), ("a", "j", 2000, 2004, 0.5, 0.1),
                 ("a", "k", 2000, 2004, 0.5, 0.1)])
    dens = _density([("a", "i", 2000, 0.3), ("a", "j", 2000, np.nan)])
    ds = build_design(g, dens, "rca_lt_1")
    assert len(ds) == 1 and ds.n_dropped == 2


def _tiny(unit, period, x, y):
    n = len(y)
    return em.RegressionDataset(
        y=np.asarray(y, float), x_density=np.asarray(x, float), x_rca=np.asarray(x, float) ** 2,
        period=np.asarray(period), unit_id=np.asarray(unit), country_id=np.asarray(unit),
        unit_labels=tuple((str(u), "x") for u in sorted(set(unit))), subsample=None, with_interaction=False,
    )


def test_within_transform_hand_example():
    ds = _tiny([0, 0, 1, 1], [2000, 2000, 2000, 2000], [1, 3, 5, 5], [1, 3, 2, 2])
    wd = within_transform(ds)
    assert wd.X[:, 0].tolist() == [-1, 1, 0, 0]
    assert wd.y.tolist() == [-1, 1, 0, 0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_within_transform_unit_means_vanish(seed):
    ds = random_fe_dataset(np.random.default_rng(seed))
    wd = within_transform(ds)
    for u in np.unique(wd.unit_id):
        m = wd.unit_id == u
        assert np.all(np.abs(wd.X[m].mean(axis=0)) < 1e-10)
        assert abs(wd.y[m].mean()) < 1e-10


def test_single_unit_is_rank_deficient():
    # one row per period: the period dummies use up every within-unit degree of freedom
    with pytest.raises(RankDeficient):
        fit_fe(_tiny([0, 0, 0], [2000, 2004, 2008], [1, 2, 4], [1, 2, 3]))
    wd = within_transform(_tiny([0], [2000], [3], [1]))
    assert np.all(wd.X == 0) and np.all(wd.y == 0)
    with pytest.raises(RankDeficient):
        fit_fe(_tiny([0], [2000], [3], [1]))


def test_no_within_density_variation_is_rank_deficient():
    rng = np.random.default_rng(0)
    ds = simulate_dataset(rng, n_units=40, n_periods=4)
    flat = em.RegressionDataset(
        y=ds.y, x_density=np.repeat(rng.random(40), 4), x_rca=ds.x_rca, period=ds.period, unit_id=ds.unit_id,
        country_id=ds.country_id, unit_labels=ds.unit_labels, subsample=None, with_interaction=False,
    )
    with pytest.raises(RankDeficient) as exc:
        fit_fe(flat)
    assert exc.value.columns == ["avg_proximity"]


def test_ols_exact_fit_and_group_means():
    x = np.arange(1.0, 6.0)
    fit = ols(x[:, None], 2 * x)
    assert fit.coef[0] == pytest.approx(2.0, abs=1e-14)
    assert np.abs(fit.residuals).max() < 1e-13

    groups = np.array([0, 0, 1, 1, 1, 2])
    y = np.array([1.0, 3.0, 2.0, 4.0, 6.0, 10.0])
    D = (groups[:, None] == np.arange(3)[None, :]).astype(float)
    np.testing.assert_allclose(ols(D, y).coef, [2.0, 4.0, 10.0], atol=1e-13)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_ols_matches_normal_equations(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    y = X @ rng.normal(size=3) + rng.normal(size=50)
    fit = ols(X, y)
    np.testing.assert_allclose(fit.coef, normal_equations(X, y), rtol=1e-8, atol=1e-10)
    assert np.abs(X.T @ fit.residuals).max() <= 1e-8 * np.abs(X.T @ y).max()


def test_ols_names_dependent_columns():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 3))
    X = np.column_stack([X, X[:, 0] + X[:, 1]])
    with pytest.raises(RankDeficient) as exc:
        ols(X, rng.normal(size=20), ["a", "b", "c", "a_plus_b"])
    assert len(exc.value.columns) == 1 and exc.value.columns[0] in {"a", "b", "a_plus_b"}


def test_cluster_vcov_singletons_equal_hc1():
    rng = np.random.default_rng(2)
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    r = rng.normal(size=40)
    N, K = X.shape
    bread = np.linalg.inv(X.T @ X)
    hc1 = bread @ (X.T * r**2) @ X @ bread * N / (N - K)
    np.testing.assert_allclose(cluster_robust_vcov(X, r, np.arange(40)), hc1, rtol=1e-12)


def test_cluster_vcov_two_cluster_toy():
    X = np.array([[1, 0.5], [1, -1.0], [1, 2.0], [1, 0.0], [1, 1.5], [1, -0.5]])
    r = np.array([0.3, -0.1, 0.2, -0.4, 0.1, -0.1])
    g = np.array([0, 0, 0, 1, 1, 1])
    # by hand: score sums per cluster, outer products, CR1 with G=2, N=6, K=2
    s0 = X[:3].T @ r[:3]
    s1 = X[3:].T @ r[3:]
    bread = np.linalg.inv(X.T @ X)
    expected = bread @ (np.outer(s0, s0) + np.outer(s1, s1)) @ bread * 2 * 5 / 4
    np.testing.assert_allclose(cluster_robust_vcov(X, r, g), expected, rtol=1e-10, atol=1e-14)


def test_single_cluster_rejected():
    with pytest.raises(SingleCluster):
        cluster_robust_vcov(np.ones((4, 1)), np.ones(4), np.zeros(4))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_within_equals_dummy_variable_ols(seed):
    ds = random_fe_dataset(np.random.default_rng(seed))
    try:
        res = fit_fe(ds)
    except (RankDeficient, NoResidualDof):
        return
    X, k = dummy_design(ds)
    b = normal_equations(X, ds.y)
    np.testing.assert_allclose(res.params[:k], b[:k], rtol=1e-8, atol=1e-8)
    V = brute_force_cr1(X, ds.y - X @ b, ds.unit_id)
    np.testing.assert_allclose(np.sqrt(np.diag(res.vcov)[:k]), np.sqrt(np.diag(V)[:k]), rtol=1e-8)
    # constant is the observation-weighted average unit effect
    assert res.coef("_cons") == pytest.approx(b[k:][ds.unit_id].mean(), abs=1e-8)


def test_country_clustering_matches_brute_force():
    ds = random_fe_dataset(np.random.default_rng(5), interaction=True)
    res = fit_fe(ds, cluster="country")
    X, k = dummy_design(ds)
    b = normal_equations(X, ds.y)
    V = brute_force_cr1(X, ds.y - X @ b, ds.country_id)
    np.testing.assert_allclose(res.vcov[:k, :k], V[:k, :k], rtol=1e-8, atol=1e-14)
    assert res.cluster_level == "country"
    assert res.n_clusters == len(np.unique(ds.country_id))


def test_base_period_only_moves_constant_and_dummies():
    ds = random_fe_dataset(np.random.default_rng(9), interaction=True)
    levels = sorted(set(ds.period.tolist()))
    a = fit_fe(ds, base_period=levels[0])
    b = fit_fe(ds, base_period=levels[-1])
    for n in ds.slope_names:
        assert a.coef(n) == pytest.approx(b.coef(n), abs=1e-10)
        assert a.se(n) == pytest.approx(b.se(n), rel=1e-8)


def test_frisch_waugh_balanced_panel():
    ds = simulate_dataset(np.random.default_rng(4), n_units=60, n_periods=5)
    res = fit_fe(ds)
    # partial period dummies out first, then sweep unit means
    P = (ds.period[:, None] == np.unique(ds.period)[None, :]).astype(float)
    def resid(v):
        return v - P @ np.linalg.lstsq(P, v, rcond=None)[0]
    Xs = np.column_stack([resid(c) for c in ds.slope_matrix().T])
    ys = resid(ds.y)
    wd_X = np.column_stack([c - (np.bincount(ds.unit_id, c) / np.bincount(ds.unit_id))[ds.unit_id] for c in Xs.T])
    wd_y = ys - (np.bincount(ds.unit_id, ys) / np.bincount(ds.unit_id))[ds.unit_id]
    b = np.linalg.lstsq(wd_X, wd_y, rcond=None)[0]
    np.testing.assert_allclose(res.params[:2], b, rtol=1e-8)


def test_simulation_recovers_truth():
    ds = simulate_dataset(np.random.default_rng(123), n_units=500, n_periods=6, alpha=(0.5, -0.3, 0.0))
    res = fit_fe(ds)
    assert abs(res.coef("avg_proximity") - 0.5) < 3 * res.se("avg_proximity")
    assert abs(res.coef("rca") + 0.3) < 3 * res.se("rca")
    assert res.n_obs == 3000 and res.n_units == 500
    assert 0 < res.r_squared_within < 1
    assert np.allclose(res.vcov, res.vcov.T)
    assert np.linalg.eigvalsh(res.vcov).min() > -1e-12


@pytest.mark.slow
def test_cr1_close_to_classical_under_homoskedasticity():
    # iid errors: the clustered variance matches the classical one up to the
    # deterministic CR1 factor, which counts the absorbed unit effects in K
    rng = np.random.default_rng(2024)
    ratios = []
    for _ in range(200):
        ds = simulate_dataset(rng, n_units=300, n_periods=4, rho=0.0, sigma=0.05)
        ds = em.RegressionDataset(**{**ds.__dict__, "y": ds.y - ds.y + 0.5 * ds.x_density - 0.3 * ds.x_rca
                                     + rng.normal(0, 0.05, len(ds.y))})
        res = fit_fe(ds)
        wd = within_transform(ds, res.extra["base_period"])
        X = wd.X
        resid = wd.y - X @ res.params[: X.shape[1]]
        dof = len(ds.y) - X.shape[1] - res.n_units
        classical = np.linalg.inv(X.T @ X) * (resid @ resid) / dof
        N, G = len(ds.y), res.n_clusters
        K = X.shape[1] + 1 + (res.n_units - 1)
        factor = G / (G - 1) * (N - 1) / (N - K)
        ratios.append(res.vcov[0, 0] / classical[0, 0] / factor)
    ratios = np.array(ratios)
    mc_se = ratios.std(ddof=1) / np.sqrt(len(ratios))
    assert abs(ratios.mean() - 1) < 3 * mc_se + 0.02


def test_marginal_effects_without_interaction_is_exact():
    res = RegressionResult.from_estimates({"avg_proximity": 0.58, "rca": -0.611}, {"avg_proximity": 0.064,
                                                                                     "rca": 0.011})
    me = marginal_effects(res, (0.555, 0.339))
    assert me.ame_density == 0.58 and me.ame_rca == -0.611
    assert me.se_density == pytest.approx(0.064) and me.se_rca == pytest.approx(0.011)


def test_delta_method_with_zero_interaction_equals_se_alpha1():
    ds = simulate_dataset(np.random.default_rng(8), n_units=200, n_periods=5, alpha=(0.5, -0.3, 0.0),
                          with_interaction=True)
    res = fit_fe(ds)
    # rebuild the result with a3 set to exactly zero; the SE is a1's whenever mean_rca = 0
    me = marginal_effects(res, (0.0, 0.0))
    assert me.se_density == pytest.approx(res.se("avg_proximity"), rel=1e-12)
    assert me.se_rca == pytest.approx(res.se("rca"), rel=1e-12)
    names = list(res.names)
    params = res.params.copy()
    params[names.index("avg_proximity_x_rca")] = 0.0
    zeroed = RegressionResult(res.names, params, res.vcov, res.n_obs, res.n_units, res.n_clusters,
                              res.r_squared_within, res.cluster_level)
    assert marginal_effects(zeroed, (0.7, 0.3)).ame_density == res.coef("avg_proximity")


def test_delta_method_matches_linear_combination_variance():
    ds = simulate_dataset(np.random.default_rng(10), n_units=200, n_periods=5, alpha=(0.5, -0.3, 0.2))
    res = fit_fe(ds)
    m_r, m_d = 0.6, 0.35
    me = marginal_effects(res, (m_r, m_d))
    g = np.zeros(len(res.names))
    g[res.names.index("avg_proximity")] = 1
    g[res.names.index("avg_proximity_x_rca")] = m_r
    assert me.se_density == pytest.approx(np.sqrt(g @ res.vcov @ g), rel=1e-12)


@pytest.mark.parametrize(
    "a1,a3,mean_rca,expected",
    [(0.496, 0.145, 0.555, 0.577), (0.605, -0.044, 2.689, 0.486)],
)
def test_marginal_effects_reference_values(a1, a3, mean_rca, expected):
    res = RegressionResult.from_estimates({"avg_proximity": a1, "rca": 0.0, "avg_proximity_x_rca": a3})
    assert marginal_effects(res, (mean_rca, 0.0)).ame_density == pytest.approx(expected, abs=0.002)


def test_missing_coefficient():
    with pytest.raises(MissingCoefficient):
        marginal_effects(RegressionResult.from_estimates({"rca": 1.0}), (1.0, 1.0))


def test_sd_impact():
    assert sd_impact(0.577, 0.098) == pytest.approx(5.65, abs=0.01)
    assert sd_impact(0.486, 0.122) == pytest.approx(5.92, abs=0.05)
    assert sd_impact(0.0, 0.1) == 0.0
    with pytest.raises(ValueError):
        sd_impact(0.5, 0.0)


def test_stars():
    assert em.stars(0.005) == "***" and em.stars(0.03) == "**" and em.stars(0.07) == "*" and em.stars(0.2) == ""


def test_saturated_design_has_no_residual_dof():
    with pytest.raises(NoResidualDof):
        cluster_robust_vcov(np.eye(3), np.zeros(3), np.arange(3))
