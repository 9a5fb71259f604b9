"""Discipline-space analytics: RCA, revealed proximity, density and growth regressions."""
from .econometrics import (
    MarginalEffects,
    RegressionDataset,
    RegressionResult,
    build_design,
    cluster_robust_vcov,
    fit_fe,
    marginal_effects,
    ols,
    sd_impact,
    within_transform,
)
from .growth import GrowthPanel, PeriodGrid, geometric_growth, growth_panel, raw_growth_panel
from .panel import Panel, Totals, filter_countries, ingest_csv, totals, write_csv
from .pipeline import RunConfig, load_config, run_pipeline
from .projection import ProjectionReport, project_growth, rank_disciplines
from .proximity import (
    DensityVector,
    ProximityMatrix,
    avg_proximity,
    delta_density,
    density_matrix,
    proximity_matrix,
)
from .rca import RcaFlags, RcaSlice, rca, rca_flag, rca_for_year
from .stats_report import DensityCurve, SummaryTable, kde, summary_stats, transition_split

__version__ = "0.1.0"
