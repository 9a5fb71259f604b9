"""Summary tables, RCA transition groups and kernel density curves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from .econometrics import RegressionDataset
from .errors import DegenerateSample, EmptyDataset, InconsistentInputs, MetricMismatch
from .rca import RcaFlags

GROUPS = ("gained", "stayed_without", "kept", "lost")
GRID_POINTS = 512


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    sd: float
    min: float
    max: float
    sd_defined: bool = True


@dataclass(frozen=True)
class SummaryTable:
    variables: dict[str, Summary]
    subsample: str | None
    metric: str | None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"variable": k, "count": s.count, "mean": s.mean, "sd": s.sd, "min": s.min, "max": s.max}
             for k, s in self.variables.items()]
        )


def _summary(x: np.ndarray) -> Summary:
    n = len(x)
    sd_defined = n > 1
    return Summary(
        count=n,
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)) if sd_defined else 0.0,
        min=float(x.min()),
        max=float(x.max()),
        sd_defined=sd_defined,
    )


def summary_stats(ds: RegressionDataset, metric: str | None = None) -> SummaryTable:
    """Count / mean / sd (n-1) / min / max of growth, density and start RCA."""
    if len(ds) == 0:
        raise EmptyDataset("cannot summarize an empty dataset")
    return SummaryTable(
        variables={
            "growth_rca": _summary(ds.y),
            ds.density_name: _summary(ds.x_density),
            "rca_value": _summary(ds.x_rca),
        },
        subsample=ds.subsample,
        metric=metric,
    )


def transition_split(flags_t: RcaFlags, flags_t1: RcaFlags, country: str) -> dict[str, str]:
    if flags_t.metric != flags_t1.metric:
        raise MetricMismatch(f"{flags_t.metric} vs {flags_t1.metric}")
    if flags_t.disciplines != flags_t1.disciplines:
        raise InconsistentInputs("flag slices have different discipline catalogs")
    a = flags_t.flags[flags_t.countries.index(country)]
    b = flags_t1.flags[flags_t1.countries.index(country)]
    return {d: transition_group(x, y) for d, x, y in zip(flags_t.disciplines, a, b)}


def transition_group(before: bool, after: bool) -> str:
    if before:
        return "kept" if after else "lost"
    return "gained" if after else "stayed_without"


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    group: str | None = None
    kernel: str = "gaussian"
    bandwidth_rule: str = "silverman"

    def integral(self) -> float:
        return float(trapezoid(self.values, self.grid))


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to whichever spread is nonzero."""
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1) if len(x) > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    spreads = [s for s in (sd, (q75 - q25) / 1.34) if s > 0]
    if not spreads:
        raise DegenerateSample("sample has no spread; pass a bandwidth")
    return 0.9 * min(spreads) * len(x) ** (-0.2)


def kde(values, bandwidth: float | None = None, group: str | None = None, chunk: int = 4096) -> DensityCurve:
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if len(x) == 0:
        raise DegenerateSample("empty sample")
    rule = "given"
    if bandwidth is None:
        if len(np.unique(x)) < 2:
            raise DegenerateSample("need at least 2 distinct values for an automatic bandwidth")
        bandwidth = silverman_bandwidth(x)
        rule = "silverman"
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    h = float(bandwidth)
    grid = np.linspace(x.min() - 3 * h, x.max() + 3 * h, GRID_POINTS)
    dens = kde_evaluate(x, grid, h, chunk)
    return DensityCurve(grid=grid, values=dens, bandwidth=h, group=group, bandwidth_rule=rule)


def kde_evaluate(values, points, bandwidth: float, chunk: int = 4096) -> np.ndarray:
    """Gaussian kernel density of ``values`` at arbitrary ``points``."""
    x = np.asarray(values, dtype=float)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    acc = np.zeros(pts.shape)
    for s in range(0, len(x), chunk):
        z = (pts[:, None] - x[None, s : s + chunk]) / bandwidth
        acc += np.exp(-0.5 * z * z).sum(axis=1)
    return acc / (len(x) * bandwidth * math.sqrt(2 * math.pi))
