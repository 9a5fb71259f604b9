"""Per-metric yearly layers and the regression table layouts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd
from scipy import stats

from . import econometrics as em
from .growth import GrowthPanel, PeriodGrid, growth_panel, raw_growth_panel
from .panel import Panel
from .proximity import DensityVector, ProximityMatrix, density_matrix, proximity_matrix
from .rca import RcaFlags, RcaSlice, rca_flag, rca_for_year


@dataclass
class MetricState:
    """RCA, flags, proximity and density for one metric over a set of years."""

    panel: Panel
    metric: str
    slices: dict[int, RcaSlice]
    flags: dict[int, RcaFlags]
    phi: dict[int, ProximityMatrix]
    density: dict[int, np.ndarray]  # (country, discipline)

    def density_vector(self, year: int, country: str) -> DensityVector:
        ci = self.panel.countries.index(country)
        return DensityVector(year, country, self.metric, self.panel.disciplines, self.density[year][ci])

    def density_long(self, years: Iterable[int] | None = None) -> pd.DataFrame:
        frames = []
        for y in sorted(years if years is not None else self.density):
            frames.append(_long(self.panel, self.density[y], "value").assign(year=y))
        return pd.concat(frames, ignore_index=True)[["country", "discipline", "year", "value"]]

    def delta_density_long(self, grid: PeriodGrid) -> pd.DataFrame:
        """Density change over each period, keyed by the period start year."""
        frames = []
        for start, end in grid:
            frames.append(
                _long(self.panel, self.density[end] - self.density[start], "value").assign(year=start, period_end=end)
            )
        return pd.concat(frames, ignore_index=True)[["country", "discipline", "year", "period_end", "value"]]

    def rca_long(self, years: Iterable[int] | None = None) -> pd.DataFrame:
        frames = []
        for y in sorted(years if years is not None else self.slices):
            frames.append(_long(self.panel, self.slices[y].values, "rca").assign(year=y))
        return pd.concat(frames, ignore_index=True)[["year", "country", "discipline", "rca"]]


def _long(panel: Panel, mat: np.ndarray, name: str) -> pd.DataFrame:
    c, d = np.meshgrid(np.arange(len(panel.countries)), np.arange(len(panel.disciplines)), indexing="ij")
    return pd.DataFrame(
        {
            "country": np.asarray(panel.countries, dtype=object)[c.ravel()],
            "discipline": np.asarray(panel.disciplines, dtype=object)[d.ravel()],
            name: np.asarray(mat, dtype=float).ravel(),
        }
    )


def metric_state(panel: Panel, metric: str, years: Iterable[int]) -> MetricState:
    slices, flags, phi, dens = {}, {}, {}, {}
    for y in sorted(set(years)):
        slices[y] = rca_for_year(panel, y, metric)
        flags[y] = rca_flag(slices[y])
        phi[y] = proximity_matrix(flags[y])
        dens[y] = density_matrix(phi[y], flags[y])
    return MetricState(panel, metric, slices, flags, phi, dens)


@dataclass(frozen=True)
class ColumnSpec:
    metric: str
    target: str  # "rca" | "raw_count"
    regressor: str  # "level" | "delta"
    subsample: str
    interaction: bool


_SUB = ("rca_lt_1", "rca_ge_1")

TABLES: dict[str, tuple[ColumnSpec, ...]] = {
    "4a": tuple(ColumnSpec("documents", "rca", "level", s, i) for i in (False, True) for s in _SUB),
    "4b": tuple(ColumnSpec("citations", "rca", "level", s, i) for i in (False, True) for s in _SUB),
    "6": tuple(ColumnSpec(m, "rca", "delta", s, False) for m in ("documents", "citations") for s in _SUB),
    "7": tuple(ColumnSpec(m, "raw_count", "level", s, False) for m in ("documents", "citations") for s in _SUB),
}


def column_spec(table: str, column: int) -> ColumnSpec:
    try:
        cols = TABLES[table]
    except KeyError:
        raise ValueError(f"unknown table {table!r}; choose from {sorted(TABLES)}") from None
    if not 1 <= column <= len(cols):
        raise ValueError(f"table {table} has columns 1..{len(cols)}")
    return cols[column - 1]


class GrowthCache:
    """Memoizes growth panels per (metric, target) for one panel and grid."""

    def __init__(self, states: dict[str, MetricState], grid: PeriodGrid):
        self.states = states
        self.grid = grid
        self._cache: dict[tuple[str, str], GrowthPanel] = {}

    def get(self, metric: str, target: str) -> GrowthPanel:
        key = (metric, target)
        if key not in self._cache:
            st = self.states[metric]
            if target == "rca":
                self._cache[key] = growth_panel(st.slices, self.grid)
            else:
                self._cache[key] = raw_growth_panel(st.panel, metric, self.grid, st.slices)
        return self._cache[key]


def design_for(spec: ColumnSpec, states: dict[str, MetricState], growths: GrowthCache) -> em.RegressionDataset:
    st = states[spec.metric]
    g = growths.get(spec.metric, spec.target)
    if spec.regressor == "delta":
        source = st.delta_density_long(growths.grid).drop(columns="period_end")
        name = em.DELTA_DENSITY
    else:
        source = st.density_long([p[0] for p in growths.grid])
        name = em.DENSITY
    return em.build_design(g, source, spec.subsample, spec.interaction, density_name=name)


def fit_column(
    table: str, column: int, states: dict[str, MetricState], growths: GrowthCache, cluster: str
) -> tuple[em.RegressionResult, em.RegressionDataset]:
    spec = column_spec(table, column)
    ds = design_for(spec, states, growths)
    res = em.fit_fe(ds, cluster=cluster, base_period=growths.grid.periods[0][0], label=f"table {table} column {column}")
    return res, ds


def regression_rows(table: str, column: int, res: em.RegressionResult, ds: em.RegressionDataset) -> list[dict]:
    """Flat report rows: coefficients, marginal effects at subsample means, fit stats."""
    spec = column_spec(table, column)
    base = {"table": table, "column": column, "metric": spec.metric, "subsample": spec.subsample,
            "cluster": res.cluster_level}
    rows = [
        {**base, "term": r.name, "estimate": r.estimate, "se": r.se, "stars": r.stars}
        for r in res.table().itertuples(index=False)
    ]
    if spec.interaction:
        me = em.marginal_effects(res, (float(ds.x_rca.mean()), float(ds.x_density.mean())))
        df = max(res.n_clusters - 1, 1)
        for term, est, se in (
            (f"me_{ds.density_name}", me.ame_density, me.se_density),
            (f"me_{em.RCA}", me.ame_rca, me.se_rca),
        ):
            p = float(2 * stats.t.sf(abs(est / se), df)) if se > 0 else float("nan")
            rows.append({**base, "term": term, "estimate": est, "se": se, "stars": em.stars(p)})
    for term, val in (("n_obs", res.n_obs), ("n_units", res.n_units), ("n_clusters", res.n_clusters),
                      ("r2_within", res.r_squared_within), ("n_dropped", ds.n_dropped)):
        rows.append({**base, "term": term, "estimate": val, "se": np.nan, "stars": ""})
    return rows
