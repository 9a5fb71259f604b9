"""Fixed-effects growth regressions with cluster-robust inference.

Growth of a country-discipline unit over a period is regressed on the unit's
density at the period start and its start RCA (optionally their product),
absorbing unit fixed effects by within-unit demeaning and period effects with
dummies. Standard errors are CR1 clustered, by default at the unit level.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from .errors import MissingCoefficient, NoResidualDof, RankDeficient, SingleCluster
from .growth import GrowthPanel

DENSITY = "avg_proximity"
DELTA_DENSITY = "delta_avg_proximity"
RCA = "rca"
CONST = "_cons"
SUBSAMPLES = ("rca_lt_1", "rca_ge_1")
CLUSTER_LEVELS = ("country-discipline", "country")
RANK_TOL = 1e-10


def interaction_name(density_name: str) -> str:
    return f"{density_name}_x_{RCA}"


@dataclass(frozen=True)
class RegressionDataset:
    y: np.ndarray
    x_density: np.ndarray
    x_rca: np.ndarray
    period: np.ndarray  # period start year per row
    unit_id: np.ndarray  # dense codes
    country_id: np.ndarray  # dense codes, for country-level clustering
    unit_labels: tuple[tuple[str, str], ...]
    subsample: str | None
    with_interaction: bool
    density_name: str = DENSITY
    n_dropped: int = 0  # growth rows without a density to join

    def __post_init__(self):
        if self.subsample == "rca_lt_1" and np.any(self.x_rca >= 1):
            raise ValueError("rca_lt_1 dataset contains start RCA >= 1")
        if self.subsample == "rca_ge_1" and np.any(self.x_rca < 1):
            raise ValueError("rca_ge_1 dataset contains start RCA < 1")

    def __len__(self):
        return len(self.y)

    @property
    def n_units(self) -> int:
        return len(np.unique(self.unit_id))

    @property
    def slope_names(self) -> list[str]:
        names = [self.density_name, RCA]
        if self.with_interaction:
            names.append(interaction_name(self.density_name))
        return names

    def slope_matrix(self) -> np.ndarray:
        cols = [self.x_density, self.x_rca]
        if self.with_interaction:
            cols.append(self.x_density * self.x_rca)
        return np.column_stack(cols)


def density_frame(vectors) -> pd.DataFrame:
    """Stack DensityVectors into a long (country, discipline, year, value) frame."""
    frames = [
        pd.DataFrame({"country": v.country, "discipline": list(v.disciplines), "year": v.year, "value": v.density})
        for v in vectors
    ]
    if not frames:
        return pd.DataFrame(columns=["country", "discipline", "year", "value"])
    return pd.concat(frames, ignore_index=True)


def _dense_codes(values) -> np.ndarray:
    _, codes = np.unique(np.asarray(values), return_inverse=True)
    return codes.ravel()


def build_design(
    growth: GrowthPanel,
    density_source: pd.DataFrame,
    subsample: str | None,
    with_interaction: bool = False,
    density_name: str = DENSITY,
) -> RegressionDataset:
    """Join growth rows to the density at the start of their period.

    ``density_source`` is long-form with columns country, discipline, year,
    value; ``year`` is matched against the growth row's period start. For the
    change-in-density variant, pass the change over each period keyed by its
    start year. Rows with no (or an undefined) density are dropped and counted
    in ``n_dropped``.
    """
    if subsample not in (*SUBSAMPLES, None):
        raise ValueError(f"unknown subsample {subsample!r}")
    rows = growth.rows
    if subsample == "rca_lt_1":
        rows = rows[rows["start_rca"] < 1]
    elif subsample == "rca_ge_1":
        rows = rows[rows["start_rca"] >= 1]

    dens = density_source.rename(columns={"year": "period_start", "value": "_density"})
    dens = dens[["country", "discipline", "period_start", "_density"]]
    merged = rows.merge(dens, on=["country", "discipline", "period_start"], how="left", validate="one_to_one")
    ok = merged["_density"].notna().to_numpy()
    n_dropped = int((~ok).sum())
    merged = merged[ok].sort_values(["country", "discipline", "period_start"], kind="mergesort")

    units = list(zip(merged["country"], merged["discipline"]))
    unit_labels = tuple(sorted(set(units)))
    pos = {u: k for k, u in enumerate(unit_labels)}
    return RegressionDataset(
        y=merged["growth"].to_numpy(dtype=float),
        x_density=merged["_density"].to_numpy(dtype=float),
        x_rca=merged["start_rca"].to_numpy(dtype=float),
        period=merged["period_start"].to_numpy(dtype=np.int64),
        unit_id=np.array([pos[u] for u in units], dtype=np.int64),
        country_id=_dense_codes(merged["country"].astype(str).to_numpy()),
        unit_labels=unit_labels,
        subsample=subsample,
        with_interaction=with_interaction,
        density_name=density_name,
        n_dropped=n_dropped,
    )


@dataclass(frozen=True)
class WithinDesign:
    X: np.ndarray  # demeaned slopes then demeaned period dummies
    y: np.ndarray
    names: list[str]
    X_raw: np.ndarray  # same columns before demeaning
    x_means: np.ndarray  # grand means of X_raw
    y_mean: float
    unit_id: np.ndarray
    n_units: int
    base_period: int | None


def _demean(a: np.ndarray, codes: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(codes, minlength=n_groups).astype(float)
    if a.ndim == 1:
        return a - (np.bincount(codes, weights=a, minlength=n_groups) / counts)[codes]
    out = np.empty_like(a, dtype=float)
    for k in range(a.shape[1]):
        out[:, k] = a[:, k] - (np.bincount(codes, weights=a[:, k], minlength=n_groups) / counts)[codes]
    return out


def period_dummies(period: np.ndarray, base: int | None = None) -> tuple[np.ndarray, list[str], int | None]:
    """Dummy columns for every period except the base (earliest unless given)."""
    levels = sorted(set(period.tolist()))
    if not levels:
        return np.empty((0, 0)), [], None
    if base is None or base not in levels:
        base = levels[0]
    keep = [p for p in levels if p != base]
    D = (period[:, None] == np.array(keep)[None, :]).astype(float) if keep else np.empty((len(period), 0))
    return D, [f"period_{p}" for p in keep], base


def within_transform(ds: RegressionDataset, base_period: int | None = None) -> WithinDesign:
    """Demean y, slopes and period dummies within each unit."""
    D, d_names, base = period_dummies(ds.period, base_period)
    X_raw = np.column_stack([ds.slope_matrix(), D]) if D.size else ds.slope_matrix()
    codes = _dense_codes(ds.unit_id)
    n_units = int(codes.max()) + 1 if len(codes) else 0
    return WithinDesign(
        X=_demean(X_raw, codes, n_units),
        y=_demean(ds.y, codes, n_units),
        names=ds.slope_names + d_names,
        X_raw=X_raw,
        x_means=X_raw.mean(axis=0),
        y_mean=float(ds.y.mean()) if len(ds.y) else float("nan"),
        unit_id=codes,
        n_units=n_units,
        base_period=base,
    )


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray
    residuals: np.ndarray


def _dependent_columns(X: np.ndarray) -> list[int]:
    norms = np.linalg.norm(X, axis=0)
    scale = norms.max() if norms.size else 0.0
    dead = [k for k in range(X.shape[1]) if norms[k] == 0 or norms[k] <= RANK_TOL * scale]
    if scale == 0:
        return list(range(X.shape[1]))
    live = [k for k in range(X.shape[1]) if k not in dead]
    Xs = X[:, live] / norms[live]
    _, R, piv = scipy.linalg.qr(Xs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > RANK_TOL * max(diag[0], 1.0)).sum()) if diag.size else 0
    if Xs.shape[0] < Xs.shape[1]:
        rank = min(rank, Xs.shape[0])
    return sorted(dead + [live[k] for k in piv[rank:]])


def ols(X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None) -> OlsFit:
    """Least squares via Householder QR.

    Raises RankDeficient, naming the columns that are linear combinations of
    the others, when X does not have full column rank.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = list(names) if names is not None else [f"x{k}" for k in range(X.shape[1])]
    bad = _dependent_columns(X) if X.shape[1] else []
    if bad or X.shape[0] < X.shape[1]:
        raise RankDeficient([names[k] for k in bad] or names)
    Q, R = np.linalg.qr(X, mode="reduced")
    coef = scipy.linalg.solve_triangular(R, Q.T @ y)
    return OlsFit(coef=coef, residuals=y - X @ coef)


def cluster_robust_vcov(X: np.ndarray, residuals: np.ndarray, cluster_ids, n_absorbed: int = 0) -> np.ndarray:
    """CR1 sandwich covariance.

    (X'X)^-1 (sum_g X_g' r_g r_g' X_g) (X'X)^-1 * G/(G-1) * (N-1)/(N-K),
    where K counts the columns of X plus ``n_absorbed`` parameters swept out
    before X was formed (unit fixed effects).
    """
    X = np.asarray(X, dtype=float)
    r = np.asarray(residuals, dtype=float)
    codes = _dense_codes(cluster_ids)
    G = int(codes.max()) + 1 if len(codes) else 0
    if G < 2:
        raise SingleCluster(f"need at least 2 clusters, got {G}")
    N, k = X.shape
    K = k + n_absorbed
    if N <= K:
        raise NoResidualDof(f"no residual degrees of freedom (N={N}, K={K})")
    bread = np.linalg.inv(X.T @ X)
    scores = np.zeros((G, k))
    np.add.at(scores, codes, X * r[:, None])
    meat = scores.T @ scores
    V = bread @ meat @ bread * (G / (G - 1)) * ((N - 1) / (N - K))
    return (V + V.T) / 2


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    params: np.ndarray
    vcov: np.ndarray
    n_obs: int
    n_units: int
    n_clusters: int
    r_squared_within: float
    cluster_level: str
    density_name: str = DENSITY
    label: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_estimates(cls, coefs: Mapping[str, float], ses: Mapping[str, float] | None = None, **kw):
        """Result from published point estimates (SEs on the diagonal, covariances 0)."""
        names = tuple(coefs)
        se = np.array([(ses or {}).get(n, 0.0) for n in names])
        defaults = dict(n_obs=0, n_units=0, n_clusters=0, r_squared_within=float("nan"), cluster_level="unknown")
        defaults.update(kw)
        return cls(names=names, params=np.array([coefs[n] for n in names], dtype=float),
                   vcov=np.diag(se**2), **defaults)

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.names, self.params.tolist()))

    def _idx(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise MissingCoefficient(name) from None

    def coef(self, name: str) -> float:
        return float(self.params[self._idx(name)])

    def cov(self, a: str, b: str) -> float:
        return float(self.vcov[self._idx(a), self._idx(b)])

    def se(self, name: str) -> float:
        return float(np.sqrt(self.cov(name, name)))

    def has(self, name: str) -> bool:
        return name in self.names

    def pvalue(self, name: str) -> float:
        se = self.se(name)
        if not se > 0:
            return float("nan")
        df = max(self.n_clusters - 1, 1)
        return float(2 * stats.t.sf(abs(self.coef(name) / se), df))

    def table(self) -> pd.DataFrame:
        rows = []
        for n in self.names:
            p = self.pvalue(n)
            rows.append({"name": n, "estimate": self.coef(n), "se": self.se(n), "pvalue": p, "stars": stars(p)})
        return pd.DataFrame(rows)


def stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""


def fit_fe(
    ds: RegressionDataset,
    cluster: str = "country-discipline",
    base_period: int | None = None,
    label: str = "",
) -> RegressionResult:
    """Within estimator with period dummies and CR1 clustered covariance.

    The reported constant is the grand-mean intercept ybar - xbar'b, with its
    variance taken from the equivalent regression of (y~ + ybar) on
    (X~ + xbar, 1). Units with a single row stay in the sample and
    contribute nothing to the slopes.
    """
    if cluster not in CLUSTER_LEVELS:
        raise ValueError(f"cluster must be one of {CLUSTER_LEVELS}")
    wd = within_transform(ds, base_period)

    # columns with no within-unit variation are absorbed by the unit effects
    raw_norm = np.linalg.norm(wd.X_raw, axis=0)
    dm_norm = np.linalg.norm(wd.X, axis=0)
    absorbed = [n for n, a, b in zip(wd.names, raw_norm, dm_norm) if b <= RANK_TOL * max(a, 1e-300)]
    if absorbed:
        raise RankDeficient(absorbed)
    fit = ols(wd.X, wd.y, wd.names)
    const = wd.y_mean - float(wd.x_means @ fit.coef)

    Z = np.column_stack([wd.X + wd.x_means, np.ones(len(wd.y))])
    clusters = ds.unit_id if cluster == "country-discipline" else ds.country_id
    V = cluster_robust_vcov(Z, fit.residuals, clusters, n_absorbed=wd.n_units - 1)

    tss = float(wd.y @ wd.y)
    r2 = 1.0 - float(fit.residuals @ fit.residuals) / tss if tss > 0 else float("nan")
    return RegressionResult(
        names=tuple(wd.names) + (CONST,),
        params=np.append(fit.coef, const),
        vcov=V,
        n_obs=len(ds),
        n_units=wd.n_units,
        n_clusters=len(np.unique(clusters)),
        r_squared_within=r2,
        cluster_level=cluster,
        density_name=ds.density_name,
        label=label,
        extra={"base_period": wd.base_period, "subsample": ds.subsample, "n_dropped": ds.n_dropped},
    )


@dataclass(frozen=True)
class MarginalEffects:
    ame_density: float
    ame_rca: float
    se_density: float
    se_rca: float
    evaluation_means: tuple[float, float]  # (mean_rca, mean_density)


def marginal_effects(res: RegressionResult, means: tuple[float, float]) -> MarginalEffects:
    """Effects of density and RCA evaluated at the given (mean_rca, mean_density).

    d growth / d density = a1 + a3 * rca and d growth / d rca = a2 + a3 * density,
    with delta-method standard errors. Without an interaction term these are
    just a1 and a2.
    """
    mean_rca, mean_density = means
    d, inter = res.density_name, interaction_name(res.density_name)
    a1, a2 = res.coef(d), res.coef(RCA)
    v11, v22 = res.cov(d, d), res.cov(RCA, RCA)
    if not res.has(inter):
        return MarginalEffects(a1, a2, float(np.sqrt(v11)), float(np.sqrt(v22)), (mean_rca, mean_density))
    a3 = res.coef(inter)
    v33, v13, v23 = res.cov(inter, inter), res.cov(d, inter), res.cov(RCA, inter)
    var_d = v11 + mean_rca**2 * v33 + 2 * mean_rca * v13
    var_r = v22 + mean_density**2 * v33 + 2 * mean_density * v23
    return MarginalEffects(
        ame_density=a1 + a3 * mean_rca,
        ame_rca=a2 + a3 * mean_density,
        se_density=float(np.sqrt(max(var_d, 0.0))),
        se_rca=float(np.sqrt(max(var_r, 0.0))),
        evaluation_means=(mean_rca, mean_density),
    )


def sd_impact(ame: float, sd_density: float) -> float:
    """Growth response to a one-standard-deviation density shift, in percentage points."""
    if not sd_density > 0:
        raise ValueError("sd_density must be positive")
    return 100.0 * ame * sd_density
