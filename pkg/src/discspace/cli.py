"""Command-line entry point: ``discspace <subcommand> ...``.

Every subcommand reads the raw panel (``--input`` or the config file),
applies the country filter, computes what it needs and writes CSV to stdout
or ``--out``.
"""
from __future__ import annotations

import argparse
import logging
import sys

import pandas as pd

from . import econometrics as em
from .analysis import GrowthCache, column_spec, design_for, fit_column, metric_state, regression_rows
from .errors import DiscspaceError
from .panel import filter_countries, ingest_csv, write_csv
from .pipeline import FLOAT_FORMAT, RunConfig, load_config, run_pipeline, transition_sample, validate_years
from .projection import project_growth, rank_disciplines, read_main_areas
from .stats_report import kde, summary_stats


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML run configuration; flags override its fields")
    p.add_argument("--input", dest="input_path", help="long-form panel CSV")
    p.add_argument("--min-docs", type=float, help="country filter threshold (default 100)")
    p.add_argument("--reference-year", type=int, help="year the filter is applied to (default 2019)")
    p.add_argument("--out", help="write CSV here instead of stdout")


def _config(args) -> RunConfig:
    overrides = {
        "input_path": args.input_path,
        "min_docs": args.min_docs,
        "reference_year": args.reference_year,
        "cluster": getattr(args, "cluster", None),
        "output_dir": getattr(args, "output_dir", None),
        "seed": getattr(args, "seed", None),
        "main_areas_path": getattr(args, "main_areas", None),
    }
    if args.config:
        return load_config(args.config, **overrides)
    if not args.input_path:
        raise SystemExit("either --input or --config is required")
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _panel(cfg: RunConfig):
    raw = ingest_csv(cfg.input_path)
    raw.year_index(cfg.reference_year)
    return filter_countries(raw, cfg.min_docs, cfg.reference_year)


def _emit(df: pd.DataFrame, out) -> None:
    if out:
        df.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    else:
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _states(cfg: RunConfig, panel, metrics, extra_years=()):
    validate_years(panel, cfg)
    years = set(cfg.years_needed()) | set(extra_years)
    return {m: metric_state(panel, m, years) for m in metrics}


def cmd_ingest(args) -> None:
    cfg = _config(args)
    panel = _panel(cfg)
    if args.out:
        write_csv(panel, args.out)
    else:
        _emit(panel.to_frame(), None)
    print(
        f"{len(panel.countries)} countries, {len(panel.disciplines)} disciplines, "
        f"years {panel.year_range[0]}-{panel.year_range[1]}, {panel.n_observations} observations",
        file=sys.stderr,
    )


def cmd_rca(args) -> None:
    cfg = _config(args)
    panel = _panel(cfg)
    st = metric_state(panel, args.metric, [args.year])
    _emit(st.slices[args.year].to_frame(), args.out)


def cmd_proximity(args) -> None:
    cfg = _config(args)
    st = metric_state(_panel(cfg), args.metric, [args.year])
    _emit(st.phi[args.year].to_frame(), args.out)


def cmd_density(args) -> None:
    cfg = _config(args)
    panel = _panel(cfg)
    if args.country not in panel.countries:
        raise DiscspaceError(f"unknown country {args.country!r}")
    st = metric_state(panel, args.metric, [args.year])
    vec = st.density_vector(args.year, args.country)
    _emit(pd.DataFrame({"discipline": list(vec.disciplines), "avg_proximity": vec.density}), args.out)


def cmd_growth(args) -> None:
    cfg = _config(args)
    panel = _panel(cfg)
    states = _states(cfg, panel, [args.metric])
    target = "rca" if args.target == "rca" else "raw_count"
    rows = GrowthCache(states, cfg.grid).get(args.metric, target).rows
    _emit(rows[["country", "discipline", "period_start", "period_end", "start_rca", "growth"]], args.out)


def cmd_regress(args) -> None:
    cfg = _config(args)
    spec = column_spec(args.table, args.column)
    panel = _panel(cfg)
    states = _states(cfg, panel, [spec.metric])
    res, ds = fit_column(args.table, args.column, states, GrowthCache(states, cfg.grid), cfg.cluster)
    _emit(pd.DataFrame(regression_rows(args.table, args.column, res, ds)), args.out)


def cmd_project(args) -> None:
    cfg = _config(args)
    spec = column_spec(args.table, args.column)
    if spec.metric != args.metric:
        raise SystemExit(f"table {args.table} column {args.column} is estimated on {spec.metric}")
    panel = _panel(cfg)
    states = _states(cfg, panel, [args.metric], extra_years=[args.base_year])
    res, ds = fit_column(args.table, args.column, states, GrowthCache(states, cfg.grid), cfg.cluster)
    st = states[args.metric]
    if args.country not in panel.countries:
        raise DiscspaceError(f"unknown country {args.country!r}")
    means = (float(ds.x_rca.mean()), float(ds.x_density.mean()))
    areas = read_main_areas(cfg.main_areas_path) if cfg.main_areas_path else None
    report = project_growth(res, st.density_vector(args.base_year, args.country), st.slices[args.base_year],
                            args.country, form=args.form, means=means, main_areas=areas)
    if args.emit_figure3:
        report.to_frame()[["discipline", "density", "projection"]].to_csv(
            args.emit_figure3, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    bottom, top = rank_disciplines(report, args.top)
    frame = pd.DataFrame(
        [{"block": blk, "discipline": r.discipline, "projection": r.projected_growth, "rca_base": r.base_rca,
          "main_area": r.main_area} for blk, rows in (("lower", bottom), ("higher", top)) for r in rows]
    )
    _emit(frame, args.out)


def cmd_report(args) -> None:
    cfg = _config(args)
    panel = _panel(cfg)
    if args.kind == "summary":
        metric = "documents" if args.table == "2" else "citations"
        states = _states(cfg, panel, [metric])
        growths = GrowthCache(states, cfg.grid)
        table = "4a" if metric == "documents" else "4b"
        frames = []
        for col, sub in ((1, "rca_lt_1"), (2, "rca_ge_1")):
            ds = design_for(column_spec(table, col), states, growths)
            frames.append(summary_stats(ds, metric).to_frame().assign(subsample=sub))
        _emit(pd.concat(frames, ignore_index=True)[["subsample", "variable", "count", "mean", "sd", "min", "max"]],
              args.out)
    else:
        states = _states(cfg, panel, [args.metric])
        pooled = transition_sample(states[args.metric], GrowthCache(states, cfg.grid), args.period)
        groups = ("gained", "stayed_without") if args.figure == "1" else ("kept", "lost")
        frames = []
        for g in groups:
            curve = kde(pooled.loc[pooled["group"] == g, "avg_proximity"].to_numpy(), group=g)
            frames.append(pd.DataFrame({"grid": curve.grid, "value": curve.values, "group": g}))
        _emit(pd.concat(frames, ignore_index=True), args.out)


def cmd_run(args) -> None:
    cfg = _config(args)
    manifest = run_pipeline(cfg)
    for entry in manifest["files"]:
        print(f"{entry['sha256'][:16]}  {entry['file']}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discspace", description="Discipline-space analytics on bibliometric panels")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and filter the panel")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rca", help="RCA for one year")
    _add_common(p)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--metric", choices=("documents", "citations"), default="documents")
    p.set_defaults(func=cmd_rca)

    p = sub.add_parser("proximity", help="proximity matrix for one year")
    _add_common(p)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--metric", choices=("documents", "citations"), default="documents")
    p.set_defaults(func=cmd_proximity)

    p = sub.add_parser("density", help="average proximity of one country")
    _add_common(p)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--country", required=True)
    p.add_argument("--metric", choices=("documents", "citations"), default="documents")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("growth", help="annualized growth panel")
    _add_common(p)
    p.add_argument("--target", choices=("rca", "raw"), default="rca")
    p.add_argument("--metric", choices=("documents", "citations"), default="documents")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("regress", help="one column of a regression table")
    _add_common(p)
    p.add_argument("--table", choices=("4a", "4b", "6", "7"), required=True)
    p.add_argument("--column", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--cluster", choices=em.CLUSTER_LEVELS)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("project", help="projected growth ranking for one country")
    _add_common(p)
    p.add_argument("--country", required=True)
    p.add_argument("--base-year", type=int, default=2019)
    p.add_argument("--metric", choices=("documents", "citations"), default="documents")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--table", choices=("4a", "4b"), default="4a")
    p.add_argument("--column", type=int, choices=(1, 2, 3, 4), default=3)
    p.add_argument("--form", choices=("interaction", "ame"), default="interaction")
    p.add_argument("--cluster", choices=em.CLUSTER_LEVELS)
    p.add_argument("--main-areas", help="CSV discipline,main_area")
    p.add_argument("--emit-figure3", metavar="PATH", help="also write (density, projection) pairs")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("report", help="summary tables and density curves")
    rsub = p.add_subparsers(dest="kind", required=True)
    q = rsub.add_parser("summary")
    _add_common(q)
    q.add_argument("--table", choices=("2", "3"), required=True)
    q.set_defaults(func=cmd_report)
    q = rsub.add_parser("kde")
    _add_common(q)
    q.add_argument("--figure", choices=("1", "2"), required=True)
    q.add_argument("--metric", choices=("documents", "citations"), default="documents")
    q.add_argument("--period", type=int, help="restrict to the period starting in this year")
    q.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="full pipeline with manifest")
    _add_common(p)
    p.add_argument("--output-dir")
    p.add_argument("--cluster", choices=em.CLUSTER_LEVELS)
    p.add_argument("--seed", type=int, help="seed for simulation oracles only")
    p.add_argument("--main-areas")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except DiscspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
