"""End-to-end run: ingest -> RCA -> proximity -> density -> growth -> regressions -> reports.

Every output is a CSV written with fixed float formatting, so identical
config and input produce byte-identical files. Files are staged in a
temporary directory and only moved into place once every stage succeeded.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from . import econometrics as em
from .analysis import TABLES, GrowthCache, MetricState, design_for, fit_column, metric_state, regression_rows
from .errors import DiscspaceError, StageError, YearOutOfRange
from .growth import DEFAULT_PERIODS, PeriodGrid
from .panel import METRICS, Panel, filter_countries, ingest_csv
from .projection import project_growth, read_main_areas
from .stats_report import kde, summary_stats, transition_group

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


@dataclass
class RunConfig:
    input_path: str
    min_docs: float = 100
    reference_year: int = 2019
    periods: tuple[tuple[int, int], ...] = DEFAULT_PERIODS
    metrics: tuple[str, ...] = METRICS
    cluster: str = "country-discipline"
    interaction: bool = True  # projection form: interaction model vs marginal effect at means
    output_dir: str = "output"
    seed: int = 0
    main_areas_path: str | None = None

    def __post_init__(self):
        self.periods = tuple((int(a), int(b)) for a, b in self.periods)
        self.metrics = tuple(self.metrics)
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ValueError(f"unknown metric(s) {bad}")
        if self.cluster not in em.CLUSTER_LEVELS:
            raise ValueError(f"cluster must be one of {em.CLUSTER_LEVELS}")

    @property
    def grid(self) -> PeriodGrid:
        return PeriodGrid(self.periods)

    def years_needed(self) -> list[int]:
        return sorted(set(self.grid.years) | {self.reference_year})

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["periods"] = [list(p) for p in self.periods]
        d["metrics"] = list(self.metrics)
        return d


def load_config(path: str | Path, **overrides) -> RunConfig:
    """Read a YAML key-value config; non-None ``overrides`` win."""
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**raw)


def validate_years(panel: Panel, config: RunConfig) -> None:
    for y in config.years_needed():
        panel.year_index(y)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _write(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


class _Run:
    def __init__(self, config: RunConfig, workdir: Path):
        self.config = config
        self.workdir = workdir
        self.files: list[str] = []
        self.stage = "init"

    def emit(self, name: str, df: pd.DataFrame) -> None:
        _write(df, self.workdir / name)
        self.files.append(name)

    def run(self) -> None:
        cfg = self.config
        self.stage = "ingest"
        raw = ingest_csv(cfg.input_path)
        raw.year_index(cfg.reference_year)
        self.stage = "filter"
        panel = filter_countries(raw, cfg.min_docs, cfg.reference_year)
        validate_years(panel, cfg)
        self.emit("panel_filtered.csv", panel.to_frame())

        self.stage = "rca"
        states: dict[str, MetricState] = {m: metric_state(panel, m, cfg.years_needed()) for m in cfg.metrics}
        self.emit("rca.csv", pd.concat(
            [st.rca_long().assign(metric=m) for m, st in states.items()], ignore_index=True
        )[["metric", "year", "country", "discipline", "rca"]])

        self.stage = "proximity"
        self.emit("proximity.csv", pd.concat(
            [st.phi[y].to_frame().assign(metric=m, year=y) for m, st in states.items() for y in sorted(st.phi)],
            ignore_index=True,
        )[["metric", "year", "discipline_i", "discipline_j", "phi"]])

        self.stage = "density"
        self.emit("density.csv", pd.concat(
            [st.density_long().assign(metric=m) for m, st in states.items()], ignore_index=True
        ).rename(columns={"value": "avg_proximity"})[["metric", "year", "country", "discipline", "avg_proximity"]])
        self.emit("delta_density.csv", pd.concat(
            [st.delta_density_long(cfg.grid).assign(metric=m) for m, st in states.items()], ignore_index=True
        ).rename(columns={"year": "period_start", "value": "delta_avg_proximity"})[
            ["metric", "period_start", "period_end", "country", "discipline", "delta_avg_proximity"]
        ])

        self.stage = "growth"
        growths = GrowthCache(states, cfg.grid)
        frames = []
        for m in cfg.metrics:
            for target in ("rca", "raw_count"):
                frames.append(growths.get(m, target).rows.assign(metric=m, target=target))
        cols = ["target", "metric", "country", "discipline", "period_start", "period_end",
                "start_rca", "start_level", "end_level", "growth"]
        self.emit("growth.csv", pd.concat(frames, ignore_index=True)[cols])

        self.stage = "regress"
        fitted = {}
        for table, specs in TABLES.items():
            rows = []
            for col, spec in enumerate(specs, start=1):
                if spec.metric not in states:
                    continue
                try:
                    res, ds = fit_column(table, col, states, growths, cfg.cluster)
                except DiscspaceError as exc:
                    log.warning("table %s column %d not estimable: %s", table, col, exc)
                    rows.append({"table": table, "column": col, "metric": spec.metric, "subsample": spec.subsample,
                                 "cluster": cfg.cluster, "term": "error", "estimate": str(exc), "se": np.nan,
                                 "stars": ""})
                    continue
                fitted[(table, col)] = (res, ds)
                rows.extend(regression_rows(table, col, res, ds))
            self.emit(f"table{table}.csv", pd.DataFrame(rows))

        self.stage = "project"
        self.emit("projections.csv", self._projections(states, fitted))

        self.stage = "report"
        self.emit("summary_tables.csv", self._summaries(states, growths))
        self.emit("kde_curves.csv", self._kde(states, growths))

        cfg_dict = cfg.to_dict()
        cfg_dict["input_path"] = Path(cfg.input_path).name
        # where the files land is not part of what was computed
        del cfg_dict["output_dir"]
        (self.workdir / "run_config.json").write_text(json.dumps(cfg_dict, indent=2, sort_keys=True) + "\n")
        self.files.append("run_config.json")

    def _projections(self, states, fitted) -> pd.DataFrame:
        cfg = self.config
        cols = ["country", "discipline", "projection", "rca_base", "density", "main_area"]
        if "documents" not in states or ("4a", 3) not in fitted:
            return pd.DataFrame(columns=cols)
        res, ds = fitted[("4a", 3)]
        st = states["documents"]
        areas = read_main_areas(cfg.main_areas_path) if cfg.main_areas_path else None
        form = "interaction" if cfg.interaction else "ame"
        means = (float(ds.x_rca.mean()), float(ds.x_density.mean()))
        frames = []
        for c in st.panel.countries:
            try:
                rep = project_growth(res, st.density_vector(cfg.reference_year, c), st.slices[cfg.reference_year],
                                     c, form=form, means=means, main_areas=areas)
            except DiscspaceError:
                continue
            frames.append(rep.to_frame().assign(country=c))
        if not frames:
            return pd.DataFrame(columns=cols)
        return pd.concat(frames, ignore_index=True)[cols]

    def _summaries(self, states, growths) -> pd.DataFrame:
        rows = []
        for m, table in (("documents", "2"), ("citations", "3")):
            if m not in states:
                continue
            for sub in em.SUBSAMPLES:
                spec = next(s for s in TABLES["4a" if m == "documents" else "4b"] if s.subsample == sub)
                ds = design_for(spec, states, growths)
                if len(ds) == 0:
                    continue
                summary = summary_stats(ds, metric=m).to_frame()
                rows.append(summary.assign(table=table, metric=m, subsample=sub))
        cols = ["table", "metric", "subsample", "variable", "count", "mean", "sd", "min", "max"]
        return pd.concat(rows, ignore_index=True)[cols] if rows else pd.DataFrame(columns=cols)

    def _kde(self, states, growths) -> pd.DataFrame:
        frames = []
        for m, st in states.items():
            pooled = transition_sample(st, growths)
            for figure, groups in (("1", ("gained", "stayed_without")), ("2", ("kept", "lost"))):
                for g in groups:
                    vals = pooled.loc[pooled["group"] == g, "avg_proximity"].to_numpy()
                    try:
                        curve = kde(vals, group=g)
                    except DiscspaceError as exc:
                        log.warning("no density curve for figure %s %s %s: %s", figure, m, g, exc)
                        continue
                    frames.append(pd.DataFrame({"figure": figure, "metric": m, "group": g,
                                                "bandwidth": curve.bandwidth, "grid": curve.grid,
                                                "value": curve.values}))
        cols = ["figure", "metric", "group", "bandwidth", "grid", "value"]
        return pd.concat(frames, ignore_index=True)[cols] if frames else pd.DataFrame(columns=cols)


def transition_sample(st: MetricState, growths: GrowthCache, period: int | None = None) -> pd.DataFrame:
    """Start-of-period density with the RCA transition group of each growth row.

    Pools every period of the grid unless ``period`` (a start year) is given.
    """
    g = growths.get(st.metric, "rca").rows
    if period is not None:
        g = g[g["period_start"] == period]
    dens = st.density_long([p[0] for p in growths.grid]).rename(columns={"year": "period_start",
                                                                         "value": "avg_proximity"})
    merged = g.merge(dens, on=["country", "discipline", "period_start"], how="inner")
    merged = merged[merged["avg_proximity"].notna()]
    groups = [transition_group(a >= 1, b >= 1) for a, b in zip(merged["start_rca"], merged["end_level"])]
    return merged.assign(group=groups)[["country", "discipline", "period_start", "avg_proximity", "group"]]


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage and return the manifest (also written as manifest.json).

    On failure nothing is left in the output directory from this run and a
    StageError naming the failing stage is raised.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    runner = _Run(config, work)
    try:
        runner.run()
    except YearOutOfRange:
        shutil.rmtree(work, ignore_errors=True)
        raise
    except Exception as exc:
        shutil.rmtree(work, ignore_errors=True)
        raise StageError(runner.stage, exc) from exc

    entries = []
    for name in runner.files:
        os.replace(work / name, out / name)
        entries.append({"file": name, "sha256": sha256_file(out / name), "bytes": (out / name).stat().st_size})
    shutil.rmtree(work, ignore_errors=True)
    manifest = {"input_sha256": sha256_file(config.input_path), "files": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
