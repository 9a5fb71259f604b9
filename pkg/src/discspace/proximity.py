"""Revealed proximity between disciplines and per-country density.

Proximity is the minimum of the two conditional probabilities of holding an
advantage in one discipline given an advantage in the other, computed from
the cross-country co-occurrence counts of the RCA flags in one year.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import CountryMismatch, EmptyFlags, InconsistentInputs, UnknownCountry, YearOrder
from .rca import RcaFlags


@dataclass(frozen=True)
class ProximityMatrix:
    year: int
    metric: str
    disciplines: tuple[str, ...]
    phi: np.ndarray  # symmetric, in [0, 1]
    counts: np.ndarray  # countries flagged per discipline

    def value(self, a: str, b: str) -> float:
        return float(self.phi[self.disciplines.index(a), self.disciplines.index(b)])

    def to_frame(self) -> pd.DataFrame:
        """Upper triangle including the diagonal."""
        i, j = np.triu_indices(len(self.disciplines))
        names = np.asarray(self.disciplines, dtype=object)
        return pd.DataFrame({"discipline_i": names[i], "discipline_j": names[j], "phi": self.phi[i, j]})


@dataclass(frozen=True)
class DensityVector:
    year: int
    country: str
    metric: str
    disciplines: tuple[str, ...]
    density: np.ndarray  # NaN where the neighbourhood weight is zero

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.disciplines, self.density.tolist()))


def proximity_matrix(flags: RcaFlags) -> ProximityMatrix:
    """phi_ij = #{c: RCA in i and j} / max(#{c: RCA in i}, #{c: RCA in j}).

    Disciplines nobody specializes in get zero proximity to everything,
    including themselves.
    """
    if len(flags.countries) == 0:
        raise EmptyFlags("flags cover no countries")
    m = flags.flags.astype(np.int64)
    joint = m.T @ m
    counts = np.diag(joint).copy()
    denom = np.maximum(counts[:, None], counts[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(denom > 0, joint / denom, 0.0)
    phi.flags.writeable = False
    counts.flags.writeable = False
    return ProximityMatrix(flags.year, flags.metric, flags.disciplines, phi, counts)


def _neighbour_weights(phi: ProximityMatrix) -> np.ndarray:
    w = np.array(phi.phi, copy=True)
    np.fill_diagonal(w, 0.0)
    return w


def _check_same_slice(phi: ProximityMatrix, flags: RcaFlags) -> None:
    if phi.year != flags.year or phi.metric != flags.metric:
        raise InconsistentInputs(
            f"proximity ({phi.year}, {phi.metric}) and flags ({flags.year}, {flags.metric}) differ"
        )
    if phi.disciplines != flags.disciplines:
        raise InconsistentInputs("proximity and flags have different discipline catalogs")


def _density_rows(weights: np.ndarray, flag_rows: np.ndarray) -> np.ndarray:
    # Numerator and denominator go through the same reduction over the same
    # weights (unflagged ones zeroed) so an all-flags row gives exactly 1.
    denom = weights.sum(axis=0)
    out = np.empty(flag_rows.shape, dtype=float)
    for k, row in enumerate(flag_rows):
        num = np.where(row[:, None], weights, 0.0).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[k] = np.where(denom > 0, num / denom, np.nan)
    return out


def avg_proximity(phi: ProximityMatrix, flags: RcaFlags, country: str) -> DensityVector:
    """Share of discipline j's neighbourhood where ``country`` already has RCA.

    The sum runs over i != j; a discipline with no neighbours of positive
    proximity gets NaN.
    """
    _check_same_slice(phi, flags)
    try:
        ci = flags.countries.index(country)
    except ValueError:
        raise UnknownCountry(country) from None
    dens = _density_rows(_neighbour_weights(phi), flags.flags[ci : ci + 1])[0]
    dens.flags.writeable = False
    return DensityVector(flags.year, country, flags.metric, flags.disciplines, dens)


def density_matrix(phi: ProximityMatrix, flags: RcaFlags) -> np.ndarray:
    """Density for every country at once, shape (country, discipline)."""
    _check_same_slice(phi, flags)
    return _density_rows(_neighbour_weights(phi), flags.flags)


def delta_density(d_start: DensityVector, d_end: DensityVector) -> dict[str, float]:
    """Change in density per discipline; NaN wherever either end is undefined."""
    if d_start.country != d_end.country or d_start.metric != d_end.metric:
        raise CountryMismatch(
            f"cannot difference {d_start.country}/{d_start.metric} against {d_end.country}/{d_end.metric}"
        )
    if d_start.year >= d_end.year:
        raise YearOrder(f"start year {d_start.year} is not before end year {d_end.year}")
    if d_start.disciplines != d_end.disciplines:
        raise InconsistentInputs("density vectors have different discipline catalogs")
    diff = d_end.density - d_start.density
    return dict(zip(d_start.disciplines, diff.tolist()))
