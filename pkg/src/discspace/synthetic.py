"""Seeded synthetic bibliometric panels for tests and the bundled fixture."""
from __future__ import annotations

import numpy as np
import pandas as pd

from .panel import Panel

COUNTRIES = ("ARG", "BRA", "CHL", "GHA", "URY")
DISCIPLINES = (
    "Agronomy", "Biochemistry", "Cardiology", "Ecology",
    "Geology", "Mathematics", "Oncology", "Surgery",
)


def synthetic_frame(
    countries=COUNTRIES,
    disciplines=DISCIPLINES,
    years: tuple[int, int] = (1996, 2019),
    seed: int = 0,
    drop_zero_rows: bool = True,
) -> pd.DataFrame:
    """Poisson counts around drifting country-discipline intensities.

    Each country has a size that grows over time and a log-intensity per
    discipline following a random walk, so specializations come and go.
    Zero-count rows are left out when ``drop_zero_rows`` (as in the exports).
    """
    rng = np.random.default_rng(seed)
    nc, nd = len(countries), len(disciplines)
    ys = np.arange(years[0], years[1] + 1)
    size0 = rng.lognormal(6.0, 0.6, nc)
    trend = rng.normal(0.04, 0.02, nc)
    base = rng.normal(0.0, 1.0, (nc, nd))
    walk = np.cumsum(rng.normal(0.0, 0.18, (nc, nd, len(ys))), axis=2)
    logit = base[:, :, None] + walk
    share = np.exp(logit) / np.exp(logit).sum(axis=1, keepdims=True)
    size = size0[:, None] * np.exp(trend[:, None] * (ys - ys[0])[None, :])
    docs = rng.poisson(size[:, None, :] * share)
    quality = rng.lognormal(1.5, 0.4, (nc, nd))
    cites = rng.poisson(docs * quality[:, :, None])

    c, d, t = np.meshgrid(np.arange(nc), np.arange(nd), np.arange(len(ys)), indexing="ij")
    df = pd.DataFrame(
        {
            "country": np.asarray(countries, dtype=object)[c.ravel()],
            "discipline": np.asarray(disciplines, dtype=object)[d.ravel()],
            "year": ys[t.ravel()],
            "documents": docs.ravel(),
            "citations": cites.ravel(),
        }
    )
    if drop_zero_rows:
        df = df[(df["documents"] > 0) | (df["citations"] > 0)].reset_index(drop=True)
    return df


def synthetic_panel(**kw) -> Panel:
    return Panel.from_frame(synthetic_frame(**kw))
