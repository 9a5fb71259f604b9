"""Country x discipline x year bibliometric panel: ingestion, filtering, totals.

The panel is held densely as ``(country, discipline, year)`` arrays, one per
metric. Absent triples are zeros; the ``observed`` mask only remembers which
triples were present in the source file so that writing the panel back out
reproduces the same rows.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (
    DuplicateTriple,
    MalformedRow,
    MissingColumn,
    NegativeCount,
    YearOutOfRange,
)

METRICS = ("documents", "citations")
KEY_COLUMNS = ("country", "discipline", "year")


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Panel:
    countries: tuple[str, ...]
    disciplines: tuple[str, ...]
    year_range: tuple[int, int]
    documents: np.ndarray  # (n_countries, n_disciplines, n_years)
    citations: np.ndarray
    observed: np.ndarray  # bool, same shape

    def __post_init__(self):
        shape = (len(self.countries), len(self.disciplines), self.n_years)
        for name in ("documents", "citations", "observed"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, _frozen(arr))
        if (self.documents < 0).any() or (self.citations < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def n_years(self) -> int:
        return self.year_range[1] - self.year_range[0] + 1

    @property
    def years(self) -> range:
        return range(self.year_range[0], self.year_range[1] + 1)

    @property
    def n_observations(self) -> int:
        return int(self.observed.sum())

    def counts(self, metric: str) -> np.ndarray:
        _check_metric(metric)
        return self.documents if metric == "documents" else self.citations

    def year_index(self, year: int) -> int:
        if not self.year_range[0] <= year <= self.year_range[1]:
            raise YearOutOfRange(year, self.year_range)
        return year - self.year_range[0]

    def year_slice(self, year: int, metric: str) -> np.ndarray:
        """Counts for one year as a (country, discipline) matrix."""
        return self.counts(metric)[:, :, self.year_index(year)]

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.countries == other.countries
            and self.disciplines == other.disciplines
            and self.year_range == other.year_range
            and np.array_equal(self.documents, other.documents)
            and np.array_equal(self.citations, other.citations)
            and np.array_equal(self.observed, other.observed)
        )

    __hash__ = None

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "Panel":
        """Build a panel from a long frame with the canonical columns.

        ``citations`` may be absent or NaN (read as 0). Duplicate triples and
        negative counts raise the same errors as ``ingest_csv``; row numbers
        are frame positions counted from 1.
        """
        missing = [c for c in (*KEY_COLUMNS, "documents") if c not in df.columns]
        if missing:
            raise MissingColumn(missing)
        df = df.reset_index(drop=True)
        countries = [str(c) for c in df["country"]]
        disciplines = [str(d) for d in df["discipline"]]
        years = df["year"].astype(int).to_numpy()
        docs = df["documents"].astype(float).fillna(0.0).to_numpy()
        if "citations" in df.columns:
            cites = df["citations"].astype(float).fillna(0.0).to_numpy()
        else:
            cites = np.zeros(len(df))
        for col, vals in (("documents", docs), ("citations", cites)):
            bad = np.flatnonzero(vals < 0)
            if bad.size:
                raise NegativeCount(int(bad[0]) + 1, col)
        return cls._assemble(countries, disciplines, years, docs, cites, np.arange(1, len(df) + 1))

    @classmethod
    def _assemble(cls, countries, disciplines, years, docs, cites, row_numbers) -> "Panel":
        c_cat = tuple(sorted(set(countries)))
        d_cat = tuple(sorted(set(disciplines)))
        if len(years):
            y0, y1 = int(np.min(years)), int(np.max(years))
        else:
            y0, y1 = 0, -1
        c_pos = {c: k for k, c in enumerate(c_cat)}
        d_pos = {d: k for k, d in enumerate(d_cat)}
        ci = np.array([c_pos[c] for c in countries], dtype=np.intp)
        di = np.array([d_pos[d] for d in disciplines], dtype=np.intp)
        yi = np.asarray(years, dtype=np.intp) - y0

        shape = (len(c_cat), len(d_cat), y1 - y0 + 1)
        flat = np.ravel_multi_index((ci, di, yi), shape) if len(ci) else np.array([], dtype=np.intp)
        uniq, first, counts = np.unique(flat, return_index=True, return_counts=True)
        if (counts > 1).any():
            dup_key = uniq[counts > 1][0]
            rows = [int(row_numbers[k]) for k in np.flatnonzero(flat == dup_key)]
            k0 = int(np.flatnonzero(flat == dup_key)[0])
            raise DuplicateTriple((countries[k0], disciplines[k0], int(years[k0])), rows)

        documents = np.zeros(shape)
        citations = np.zeros(shape)
        observed = np.zeros(shape, dtype=bool)
        documents.flat[flat] = docs
        citations.flat[flat] = cites
        observed.flat[flat] = True
        return cls(c_cat, d_cat, (y0, y1), documents, citations, observed)

    def to_frame(self) -> pd.DataFrame:
        """Long frame of observed triples, ordered by (country, discipline, year)."""
        ci, di, yi = np.nonzero(self.observed)
        return pd.DataFrame(
            {
                "country": np.asarray(self.countries, dtype=object)[ci],
                "discipline": np.asarray(self.disciplines, dtype=object)[di],
                "year": yi + self.year_range[0],
                "documents": self.documents[ci, di, yi],
                "citations": self.citations[ci, di, yi],
            }
        )


@dataclass(frozen=True)
class Totals:
    """Country, world-per-discipline and world totals for one year and metric."""

    year: int
    metric: str
    countries: tuple[str, ...]
    disciplines: tuple[str, ...]
    country_totals: np.ndarray
    world_discipline_totals: np.ndarray
    world_total: float

    def as_dicts(self) -> tuple[dict[str, float], dict[str, float], float]:
        return (
            dict(zip(self.countries, self.country_totals.tolist())),
            dict(zip(self.disciplines, self.world_discipline_totals.tolist())),
            self.world_total,
        )


def _parse_count(raw: str, row: int, column: str, allow_empty: bool) -> float:
    raw = raw.strip() if raw is not None else ""
    if raw == "":
        if allow_empty:
            return 0.0
        raise MalformedRow(row, f"empty {column}")
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(row, f"non-numeric {column} {raw!r}") from None
    if not np.isfinite(value):
        raise MalformedRow(row, f"non-finite {column} {raw!r}")
    if value < 0:
        raise NegativeCount(row, column)
    return value


def ingest_csv(path: str | Path, metric_columns: Mapping[str, str] | None = None) -> Panel:
    """Read a long-form ``country,discipline,year,documents,citations`` CSV.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV with a header row.
    metric_columns : mapping, optional
        Maps ``"documents"`` / ``"citations"`` to the column names used in the
        file. Defaults to the canonical names. If the citations column is not
        mapped and not present, citations are all zero.

    Raises
    ------
    MissingColumn, DuplicateTriple, NegativeCount, MalformedRow
        Row numbers are file line numbers (the header is line 1).
    """
    mapping = {"documents": "documents", "citations": "citations"}
    if metric_columns:
        unknown = set(metric_columns) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metric(s) in metric_columns: {sorted(unknown)}")
        mapping.update(metric_columns)
    explicit_citations = bool(metric_columns and "citations" in metric_columns)

    countries, disciplines, years, docs, cites, rows = [], [], [], [], [], []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = [*KEY_COLUMNS, mapping["documents"]]
        if explicit_citations:
            required.append(mapping["citations"])
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumn(missing)
        has_citations = mapping["citations"] in header

        for line_no, rec in enumerate(reader, start=2):
            if None in rec or any(rec.get(c) is None for c in required):
                raise MalformedRow(line_no, "wrong number of fields")
            country = rec["country"].strip()
            discipline = rec["discipline"].strip()
            if not country or not discipline:
                raise MalformedRow(line_no, "empty country or discipline")
            try:
                year = int(rec["year"].strip())
            except ValueError:
                raise MalformedRow(line_no, f"non-integer year {rec['year']!r}") from None
            countries.append(country)
            disciplines.append(discipline)
            years.append(year)
            docs.append(_parse_count(rec[mapping["documents"]], line_no, "documents", False))
            cites.append(
                _parse_count(rec[mapping["citations"]], line_no, "citations", True)
                if has_citations
                else 0.0
            )
            rows.append(line_no)

    return Panel._assemble(
        countries, disciplines, np.array(years, dtype=np.int64),
        np.array(docs, dtype=float), np.array(cites, dtype=float), np.array(rows),
    )


def _fmt_count(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_csv(panel: Panel, path: str | Path) -> None:
    """Serialize the observed triples in the canonical CSV layout."""
    df = panel.to_frame()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "discipline", "year", "documents", "citations"])
        for rec in df.itertuples(index=False):
            w.writerow([rec.country, rec.discipline, int(rec.year),
                        _fmt_count(rec.documents), _fmt_count(rec.citations)])


def filter_countries(panel: Panel, min_docs: float, reference_year: int) -> Panel:
    """Keep countries whose total documents in ``reference_year`` reach ``min_docs``.

    Surviving countries keep all their observations in every year.
    """
    yi = panel.year_index(reference_year)
    keep = panel.documents[:, :, yi].sum(axis=1) >= min_docs
    if keep.all():
        return panel
    idx = np.flatnonzero(keep)
    return Panel(
        tuple(panel.countries[k] for k in idx),
        panel.disciplines,
        panel.year_range,
        panel.documents[idx],
        panel.citations[idx],
        panel.observed[idx],
    )


def totals(panel: Panel, year: int, metric: str) -> Totals:
    x = panel.year_slice(year, metric)
    country_totals = x.sum(axis=1)
    world_disc = x.sum(axis=0)
    return Totals(
        year=year,
        metric=metric,
        countries=panel.countries,
        disciplines=panel.disciplines,
        country_totals=_frozen(country_totals),
        world_discipline_totals=_frozen(world_disc),
        world_total=float(x.sum()),
    )


def records_to_panel(records: Iterable[tuple]) -> Panel:
    """Convenience: ``(country, discipline, year, documents[, citations])`` tuples."""
    rows = [tuple(r) + (0,) * (5 - len(r)) for r in records]
    df = pd.DataFrame(rows, columns=["country", "discipline", "year", "documents", "citations"])
    return Panel.from_frame(df)
