"""Exception types raised across the pipeline."""


class DiscspaceError(Exception):
    """Base class for every error raised by this package."""


class PanelError(DiscspaceError):
    pass


class MissingColumn(PanelError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"input is missing required column(s): {', '.join(self.columns)}")


class DuplicateTriple(PanelError):
    def __init__(self, key, rows):
        self.key = key
        self.rows = list(rows)
        super().__init__(f"duplicate (country, discipline, year) {key} on rows {self.rows}")


class NegativeCount(PanelError):
    def __init__(self, row, column):
        self.row = row
        self.column = column
        super().__init__(f"negative count in column {column!r} on row {row}")


class MalformedRow(PanelError):
    def __init__(self, row, reason):
        self.row = row
        super().__init__(f"malformed row {row}: {reason}")


class YearOutOfRange(DiscspaceError):
    def __init__(self, year, year_range):
        self.year = year
        self.year_range = year_range
        super().__init__(f"year {year} outside panel range {year_range[0]}-{year_range[1]}")


class InconsistentInputs(DiscspaceError):
    pass


class EmptyFlags(DiscspaceError):
    pass


class UnknownCountry(DiscspaceError):
    def __init__(self, country):
        self.country = country
        super().__init__(f"unknown country {country!r}")


class CountryMismatch(DiscspaceError):
    pass


class YearOrder(DiscspaceError):
    pass


class NonpositiveStart(DiscspaceError):
    pass


class MissingYearSlice(DiscspaceError):
    def __init__(self, year):
        self.year = year
        super().__init__(f"no RCA slice for year {year}")


class RankDeficient(DiscspaceError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient; dependent column(s): {self.columns}")


class SingleCluster(DiscspaceError):
    pass


class NoResidualDof(DiscspaceError):
    """The regression is saturated: as many parameters as observations."""


class MissingCoefficient(DiscspaceError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"regression result has no coefficient {name!r}")


class MissingDensity(DiscspaceError):
    pass


class EmptyDataset(DiscspaceError):
    pass


class MetricMismatch(DiscspaceError):
    pass


class DegenerateSample(DiscspaceError):
    pass


class StageError(DiscspaceError):
    """Wraps a failure inside ``run_pipeline`` with the stage it came from."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


class TooFewRowsWarning(UserWarning):
    pass
