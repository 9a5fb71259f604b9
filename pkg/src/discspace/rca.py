"""Balassa revealed comparative advantage and its >= 1 indicator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import InconsistentInputs
from .panel import Panel, Totals, totals as compute_totals


@dataclass(frozen=True)
class RcaSlice:
    """RCA for every (country, discipline) in one year.

    ``values`` is NaN where the index is undefined (a zero country, world
    discipline or world total).
    """

    year: int
    metric: str
    countries: tuple[str, ...]
    disciplines: tuple[str, ...]
    values: np.ndarray

    def value(self, country: str, discipline: str) -> float:
        return float(self.values[self.countries.index(country), self.disciplines.index(discipline)])

    def to_frame(self) -> pd.DataFrame:
        c, d = np.meshgrid(np.arange(len(self.countries)), np.arange(len(self.disciplines)), indexing="ij")
        return pd.DataFrame(
            {
                "country": np.asarray(self.countries, dtype=object)[c.ravel()],
                "discipline": np.asarray(self.disciplines, dtype=object)[d.ravel()],
                "rca": self.values.ravel(),
            }
        )


@dataclass(frozen=True)
class RcaFlags:
    year: int
    metric: str
    countries: tuple[str, ...]
    disciplines: tuple[str, ...]
    flags: np.ndarray  # bool (country, discipline)

    def flag(self, country: str, discipline: str) -> bool:
        return bool(self.flags[self.countries.index(country), self.disciplines.index(discipline)])


def rca(totals: Totals, panel: Panel) -> RcaSlice:
    """RCA_ci = (x_ci / x_c) / (x*_i / X*) for one year and metric."""
    if totals.countries != panel.countries or totals.disciplines != panel.disciplines:
        raise InconsistentInputs("totals and panel have different catalogs")
    x = panel.year_slice(totals.year, totals.metric)
    if not np.array_equal(x.sum(axis=1), totals.country_totals) or x.sum() != totals.world_total:
        raise InconsistentInputs(
            f"totals do not match panel counts for {totals.metric} in {totals.year}"
        )

    xc = totals.country_totals[:, None]
    xi = totals.world_discipline_totals[None, :]
    X = totals.world_total
    defined = (xc > 0) & (xi > 0) & (X > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (x / xc) / (xi / X)
    values = np.where(defined, values, np.nan)
    values.flags.writeable = False
    return RcaSlice(totals.year, totals.metric, panel.countries, panel.disciplines, values)


def rca_for_year(panel: Panel, year: int, metric: str) -> RcaSlice:
    return rca(compute_totals(panel, year, metric), panel)


def rca_flag(slice_: RcaSlice) -> RcaFlags:
    # NaN >= 1 is False, so missing values map to no advantage
    with np.errstate(invalid="ignore"):
        flags = slice_.values >= 1.0
    flags.flags.writeable = False
    return RcaFlags(slice_.year, slice_.metric, slice_.countries, slice_.disciplines, flags)
