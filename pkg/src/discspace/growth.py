"""Annualized geometric growth over a fixed grid of periods."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd

from .errors import MissingYearSlice, NonpositiveStart
from .panel import Panel
from .rca import RcaSlice

DEFAULT_PERIODS = ((1996, 2000), (2000, 2004), (2004, 2008), (2008, 2012), (2012, 2016), (2016, 2019))

GROWTH_COLUMNS = [
    "country", "discipline", "period_start", "period_end",
    "start_rca", "start_level", "end_level", "growth",
]


@dataclass(frozen=True)
class PeriodGrid:
    periods: tuple[tuple[int, int], ...] = DEFAULT_PERIODS

    def __post_init__(self):
        periods = tuple((int(a), int(b)) for a, b in self.periods)
        for a, b in periods:
            if b <= a:
                raise ValueError(f"period ({a}, {b}) must have start < end")
        for (a0, b0), (a1, b1) in zip(periods, periods[1:]):
            if a1 < b0:
                raise ValueError(f"periods ({a0}, {b0}) and ({a1}, {b1}) overlap")
        object.__setattr__(self, "periods", periods)

    @property
    def years(self) -> list[int]:
        return sorted({y for p in self.periods for y in p})

    def __iter__(self):
        return iter(self.periods)

    def __len__(self):
        return len(self.periods)


@dataclass(frozen=True)
class GrowthPanel:
    """One row per (country, discipline, period) with a positive start value.

    ``start_rca`` is the RCA at the period start whatever the target is, since
    it is both the convergence regressor and the subsample split variable.
    ``start_level``/``end_level`` hold the quantity actually grown (RCA or raw
    count).
    """

    metric: str
    target: str  # "rca" | "raw_count"
    rows: pd.DataFrame = field(repr=False)

    def __len__(self):
        return len(self.rows)


def geometric_growth(v_start, v_end, n_years):
    """(v_end / v_start) ** (1 / n_years) - 1.

    Works elementwise on arrays. An end value of 0 gives exactly -1.
    """
    v_start = np.asarray(v_start, dtype=float)
    v_end = np.asarray(v_end, dtype=float)
    if np.any(np.asarray(n_years) < 1):
        raise ValueError("n_years must be >= 1")
    if np.any(~(v_start > 0)):
        raise NonpositiveStart("start value must be positive")
    if np.any(v_end < 0):
        raise ValueError("end value must be non-negative")
    out = np.power(v_end / v_start, 1.0 / np.asarray(n_years, dtype=float)) - 1.0
    return float(out) if out.ndim == 0 else out


def _period_rows(countries, disciplines, start, end, start_level, end_level, start_rca, n):
    ok = (start_level > 0) & np.isfinite(end_level) & np.isfinite(start_rca)
    ci, di = np.nonzero(ok)
    s = start_level[ci, di]
    e = end_level[ci, di]
    return pd.DataFrame(
        {
            "country": np.asarray(countries, dtype=object)[ci],
            "discipline": np.asarray(disciplines, dtype=object)[di],
            "period_start": start,
            "period_end": end,
            "start_rca": start_rca[ci, di],
            "start_level": s,
            "end_level": e,
            "growth": geometric_growth(s, e, n) if len(s) else np.empty(0),
        }
    )


def _finish(frames) -> pd.DataFrame:
    if not frames:
        return pd.DataFrame(columns=GROWTH_COLUMNS)
    df = pd.concat(frames, ignore_index=True)
    return df.sort_values(["country", "discipline", "period_start"], kind="mergesort").reset_index(drop=True)


def _slice(slices: Mapping[int, RcaSlice], year: int) -> RcaSlice:
    try:
        return slices[year]
    except KeyError:
        raise MissingYearSlice(year) from None


def growth_panel(slices: Mapping[int, RcaSlice], grid: PeriodGrid = PeriodGrid()) -> GrowthPanel:
    """Annualized RCA growth per country, discipline and period.

    Rows whose start RCA is zero or undefined are dropped, as are rows whose
    end RCA is undefined (the country published nothing in the end year).
    """
    frames = []
    metric = None
    for start, end in grid:
        s, e = _slice(slices, start), _slice(slices, end)
        metric = s.metric
        frames.append(
            _period_rows(s.countries, s.disciplines, start, end, s.values, e.values, s.values, end - start)
        )
    return GrowthPanel(metric=metric, target="rca", rows=_finish(frames))


def raw_growth_panel(
    panel: Panel, metric: str, grid: PeriodGrid, slices: Mapping[int, RcaSlice]
) -> GrowthPanel:
    """Annualized growth of the raw counts, carrying the start-of-period RCA."""
    frames = []
    for start, end in grid:
        s = _slice(slices, start)
        frames.append(
            _period_rows(
                panel.countries, panel.disciplines, start, end,
                panel.year_slice(start, metric), panel.year_slice(end, metric),
                s.values, end - start,
            )
        )
    return GrowthPanel(metric=metric, target="raw_count", rows=_finish(frames))
