"""Data-generating processes with known coefficients, for checking the estimator."""
from __future__ import annotations

import numpy as np

from .econometrics import RegressionDataset


def simulate_dataset(
    rng: np.random.Generator,
    n_units: int = 500,
    n_periods: int = 6,
    alpha: tuple[float, float, float] = (0.5, -0.3, 0.0),
    sigma: float = 0.05,
    rho: float = 0.5,
    with_interaction: bool | None = None,
    unbalanced: float = 0.0,
) -> RegressionDataset:
    """Panel from y = a1*d + a2*r + a3*d*r + unit FE + period FE + e.

    ``e`` is AR(1) within each unit with heteroskedastic innovations, so
    errors are correlated inside a cluster but independent across units.
    ``unbalanced`` is the probability that any single row is dropped.
    """
    a1, a2, a3 = alpha
    if with_interaction is None:
        with_interaction = a3 != 0
    unit_fe = rng.normal(0, 0.3, n_units)
    period_fe = rng.normal(0, 0.1, n_periods)
    d_level = rng.uniform(0.1, 0.6, n_units)
    r_level = rng.uniform(0.2, 0.9, n_units)

    d = np.clip(d_level[:, None] + rng.normal(0, 0.08, (n_units, n_periods)), 0, 1)
    r = np.abs(r_level[:, None] + rng.normal(0, 0.15, (n_units, n_periods)))
    e = np.empty((n_units, n_periods))
    scale = sigma * rng.uniform(0.5, 1.5, n_units)
    e[:, 0] = rng.normal(0, 1, n_units) * scale / np.sqrt(1 - rho**2)
    for t in range(1, n_periods):
        e[:, t] = rho * e[:, t - 1] + rng.normal(0, 1, n_units) * scale
    y = a1 * d + a2 * r + a3 * d * r + unit_fe[:, None] + period_fe[None, :] + e

    unit = np.repeat(np.arange(n_units), n_periods)
    period = np.tile(1996 + 4 * np.arange(n_periods), n_units)
    keep = rng.random(unit.size) >= unbalanced
    labels = tuple((f"c{k // 10:03d}", f"d{k % 10}") for k in range(n_units))
    return RegressionDataset(
        y=y.ravel()[keep],
        x_density=d.ravel()[keep],
        x_rca=r.ravel()[keep],
        period=period[keep],
        unit_id=unit[keep],
        country_id=unit[keep] // 10,
        unit_labels=labels,
        subsample=None,
        with_interaction=with_interaction,
    )
