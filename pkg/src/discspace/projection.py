"""Projected RCA growth through the density channel, and discipline rankings."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from .econometrics import RegressionResult, interaction_name, marginal_effects
from .errors import InconsistentInputs, MissingDensity, TooFewRowsWarning
from .proximity import DensityVector
from .rca import RcaSlice

FORMS = ("interaction", "ame")


@dataclass(frozen=True)
class ProjectionRow:
    discipline: str
    projected_growth: float
    base_rca: float
    density: float
    main_area: str = ""


@dataclass(frozen=True)
class ProjectionReport:
    country: str
    base_year: int
    metric: str
    rows: tuple[ProjectionRow, ...]  # ascending projected growth, ties by discipline
    coefficient_source: str
    form: str
    subsample: str | None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"discipline": r.discipline, "projection": r.projected_growth, "rca_base": r.base_rca,
                 "density": r.density, "main_area": r.main_area}
                for r in self.rows
            ],
            columns=["discipline", "projection", "rca_base", "density", "main_area"],
        )


def project_growth(
    res: RegressionResult,
    density: DensityVector,
    rca: RcaSlice,
    country: str,
    form: str = "interaction",
    means: tuple[float, float] | None = None,
    subsample: str | None = "rca_lt_1",
    main_areas: Mapping[str, str] | None = None,
) -> ProjectionReport:
    """Growth attributable to density alone for each discipline of ``country``.

    ``form="interaction"`` uses (a1 + a3 * rca_j) * density_j (a1 * density_j
    when the model has no interaction). ``form="ame"`` uses the marginal effect
    at ``means`` times density_j. The convergence term in RCA is left out.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    if density.country != country:
        raise InconsistentInputs(f"density vector is for {density.country}, not {country}")
    if density.year != rca.year or density.metric != rca.metric:
        raise InconsistentInputs("density and RCA come from different years or metrics")
    if density.disciplines != rca.disciplines:
        raise InconsistentInputs("density and RCA have different discipline catalogs")
    try:
        base = rca.values[rca.countries.index(country)]
    except ValueError:
        raise InconsistentInputs(f"country {country} not in RCA slice") from None

    a1 = res.coef(res.density_name)
    inter = interaction_name(res.density_name)
    if form == "ame":
        if means is None:
            raise ValueError("form='ame' needs evaluation means")
        slope = np.full(base.shape, marginal_effects(res, means).ame_density)
    elif res.has(inter):
        slope = a1 + res.coef(inter) * base
    else:
        slope = np.full(base.shape, a1)
    proj = slope * density.density

    keep = np.isfinite(density.density) & np.isfinite(base)
    if subsample == "rca_lt_1":
        keep &= base < 1
    elif subsample == "rca_ge_1":
        keep &= base >= 1
    if not keep.any():
        raise MissingDensity(f"no discipline of {country} has both a density and an RCA in {rca.year}")

    areas = main_areas or {}
    rows = [
        ProjectionRow(d, float(proj[k]), float(base[k]), float(density.density[k]), areas.get(d, ""))
        for k, d in enumerate(rca.disciplines)
        if keep[k]
    ]
    rows.sort(key=lambda r: (r.projected_growth, r.discipline))
    return ProjectionReport(
        country=country,
        base_year=rca.year,
        metric=rca.metric,
        rows=tuple(rows),
        coefficient_source=res.label or "unlabelled regression",
        form=form,
        subsample=subsample,
    )


def rank_disciplines(report: ProjectionReport, k: int = 5) -> tuple[list[ProjectionRow], list[ProjectionRow]]:
    """Bottom-k and top-k disciplines, both listed in ascending projection.

    With fewer than 2k rows the two lists overlap; a TooFewRowsWarning is
    issued and whatever is available is returned.
    """
    if any(r.base_rca >= 1 for r in report.rows):
        raise ValueError("ranking expects a report restricted to base RCA < 1")
    rows = list(report.rows)
    if len(rows) < 2 * k:
        warnings.warn(f"only {len(rows)} disciplines available for k={k}", TooFewRowsWarning, stacklevel=2)
    return rows[:k], rows[-k:] if k else []


def read_main_areas(path) -> dict[str, str]:
    """Two-column CSV ``discipline,main_area``."""
    df = pd.read_csv(path, dtype=str).fillna("")
    return dict(zip(df["discipline"], df["main_area"]))
