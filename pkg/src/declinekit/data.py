"""War records, world-population series and war-size summaries.

Wars are read from delimited text, sized either by raw battle-deaths or by
battle-deaths per 100,000 of world population in the onset year.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import DataError, SchemaError

COVERAGE = (1816, 2007)
SIZE_FLOOR = 1000
PER_CAPITA_SCALE = 1e5


class WarType(str, enum.Enum):
    INTERSTATE = "interstate"
    INTRASTATE = "intrastate"

    @classmethod
    def parse(cls, text: str) -> "WarType":
        key = text.strip().lower().replace("-", "")
        if key.startswith("inter"):
            return cls.INTERSTATE
        if key.startswith("intra") or key in ("civil", "internal"):
            return cls.INTRASTATE
        raise ValueError(f"unknown war type {text!r}")


@dataclass(frozen=True)
class WarRecord:
    id: str
    onset_year: int
    end_year: int
    battle_deaths: int
    war_type: WarType | None = None
    name: str | None = None

    def __post_init__(self):
        if self.onset_year > self.end_year:
            raise DataError(f"war {self.id}: onset {self.onset_year} after end {self.end_year}")
        if not COVERAGE[0] <= self.onset_year <= COVERAGE[1]:
            raise DataError(f"war {self.id}: onset year {self.onset_year} outside {COVERAGE}")
        if self.battle_deaths < 1:
            raise DataError(f"war {self.id}: battle_deaths must be >= 1")

    @property
    def below_floor(self) -> bool:
        return self.battle_deaths < SIZE_FLOOR


@dataclass(frozen=True)
class WarSchema:
    """Header names for the war CSV. ``name`` and ``type`` may be absent."""

    id: str = "id"
    name: str = "name"
    type: str = "type"
    onset_year: str = "onset_year"
    end_year: str = "end_year"
    battle_deaths: str = "battle_deaths"

    required = ("id", "onset_year", "end_year", "battle_deaths")


@dataclass(frozen=True)
class RowIssue:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass
class IngestResult:
    records: list[WarRecord]
    warnings: list[RowIssue] = field(default_factory=list)
    errors: list[RowIssue] = field(default_factory=list)

    def __len__(self):
        return len(self.records)


def _parse_int(text: str, column: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        # accept "1000.0" but not "1000.5"
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"{column} is not an integer: {text!r}") from None
        return int(value)


def ingest_wars(source: TextIO, schema: WarSchema | None = None, delimiter: str = ",") -> IngestResult:
    """Read war records from a delimited text stream with a header row.

    Rows that cannot be parsed, or whose onset year falls outside the
    coverage window, are reported in ``errors`` and skipped. Wars below
    10^3 battle-deaths are kept and reported in ``warnings``.

    Raises
    ------
    SchemaError
        If the header is missing a required column.
    """
    schema = schema or WarSchema()
    reader = csv.DictReader(source, delimiter=delimiter)
    header = reader.fieldnames or []
    missing = [getattr(schema, key) for key in WarSchema.required if getattr(schema, key) not in header]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}")
    has_name = schema.name in header
    has_type = schema.type in header

    result = IngestResult(records=[])
    for row in reader:
        line = reader.line_num
        try:
            onset = _parse_int(row[schema.onset_year], "onset_year")
            end = _parse_int(row[schema.end_year], "end_year")
            deaths = _parse_int(row[schema.battle_deaths], "battle_deaths")
            war_type = WarType.parse(row[schema.type]) if has_type and row[schema.type] else None
            name = row[schema.name] if has_name and row[schema.name] else None
            record = WarRecord(
                id=row[schema.id].strip(),
                onset_year=onset,
                end_year=end,
                battle_deaths=deaths,
                war_type=war_type,
                name=name,
            )
        except (ValueError, TypeError, AttributeError, DataError) as exc:
            result.errors.append(RowIssue(line, str(exc)))
            continue
        if record.below_floor:
            result.warnings.append(
                RowIssue(line, f"war {record.id} has {deaths} battle-deaths, below the {SIZE_FLOOR} floor")
            )
        result.records.append(record)
    return result


def read_population_table(source: TextIO, delimiter: str = ",") -> list[tuple[int, float]]:
    """Read a ``year,population`` table."""
    reader = csv.DictReader(source, delimiter=delimiter)
    header = reader.fieldnames or []
    for column in ("year", "population"):
        if column not in header:
            raise SchemaError(f"population table missing column {column!r}")
    table = []
    for row in reader:
        try:
            table.append((_parse_int(row["year"], "year"), float(row["population"])))
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"line {reader.line_num}: {exc}") from None
    return table


class PopulationConflictWarning(UserWarning):
    """Two population sources disagree on the same year."""


@dataclass(frozen=True)
class PopulationSeries:
    """Contiguous annual world-population series.

    ``interpolated`` holds the years whose value was filled in linearly
    rather than observed.
    """

    entries: Mapping[int, float]
    interpolated: frozenset[int] = frozenset()

    @property
    def years(self) -> range:
        return range(min(self.entries), max(self.entries) + 1)

    def provenance(self, year: int) -> str:
        if year not in self.entries:
            raise KeyError(year)
        return "interpolated" if year in self.interpolated else "observed"

    def __getitem__(self, year: int) -> float:
        return self.entries[year]

    def __contains__(self, year) -> bool:
        return year in self.entries

    def __len__(self):
        return len(self.entries)


def build_population_series(
    sources: Sequence[Iterable[tuple[int, float]]],
    year_range: tuple[int, int] | None = None,
) -> PopulationSeries:
    """Merge population tables and linearly interpolate gaps.

    Sources are in precedence order: when several cover the same year the
    first listed wins and a :class:`PopulationConflictWarning` is issued
    if the values differ. ``year_range`` defaults to the observed hull;
    values are never extrapolated beyond it.
    """
    observed: dict[int, float] = {}
    for rank, table in enumerate(sources):
        for year, value in table:
            year = int(year)
            value = float(value)
            if not value > 0 or not math.isfinite(value):
                raise DataError(f"population for {year} must be positive, got {value}")
            if year in observed:
                if observed[year] != value:
                    warnings.warn(
                        f"population sources disagree for {year}; keeping {observed[year]:g} over "
                        f"{value:g} from source {rank}",
                        PopulationConflictWarning,
                        stacklevel=2,
                    )
                continue
            observed[year] = value
    if not observed:
        raise DataError("no population observations supplied")

    lo, hi = year_range if year_range is not None else (min(observed), max(observed))
    if lo > hi:
        raise DataError(f"empty year range [{lo}, {hi}]")
    if lo < min(observed) or hi > max(observed):
        raise DataError(
            f"range [{lo}, {hi}] extends beyond observed years [{min(observed)}, {max(observed)}]; "
            "extrapolation is not supported"
        )

    known = np.array(sorted(observed))
    values = np.array([observed[y] for y in known])
    years = np.arange(lo, hi + 1)
    filled = np.interp(years, known, values)
    entries = {}
    interpolated = set()
    for year, value in zip(years.tolist(), filled.tolist()):
        if year in observed:
            entries[year] = observed[year]
        else:
            entries[year] = value
            interpolated.add(year)
    return PopulationSeries(entries=entries, interpolated=frozenset(interpolated))


class Scale(str, enum.Enum):
    RAW = "raw"
    NORMALIZED = "normalized"


@dataclass(frozen=True, eq=False)
class SizedEventSet:
    """Onset years paired with positive event sizes.

    Raw sets hold battle-deaths and are thresholded on log10 magnitude;
    normalized sets hold deaths per 100,000 persons and are thresholded on
    the rate itself.
    """

    years: np.ndarray
    sizes: np.ndarray
    scale: Scale = Scale.RAW

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64)
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if years.shape != sizes.shape or years.ndim != 1:
            raise DataError("years and sizes must be 1-d arrays of equal length")
        if np.any(~(sizes > 0)):
            raise DataError("all event sizes must be positive")
        years = years.copy()
        sizes = sizes.copy()
        years.flags.writeable = False
        sizes.flags.writeable = False
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "scale", Scale(self.scale))

    @property
    def threshold_kind(self) -> str:
        return "log10_magnitude" if self.scale is Scale.RAW else "absolute_rate"

    def exceeds(self, m: float) -> np.ndarray:
        """Boolean mask of events with size at least ``m`` on this set's threshold scale."""
        if self.scale is Scale.RAW:
            return np.log10(self.sizes) >= m
        return self.sizes >= m

    @property
    def records(self) -> list[tuple[int, float]]:
        return list(zip(self.years.tolist(), self.sizes.tolist()))

    def __len__(self):
        return len(self.years)

    def __eq__(self, other):
        if not isinstance(other, SizedEventSet):
            return NotImplemented
        return (
            self.scale is other.scale
            and np.array_equal(self.years, other.years)
            and np.array_equal(self.sizes, other.sizes)
        )

    __hash__ = None


def raw_sizes(wars: Sequence[WarRecord]) -> SizedEventSet:
    return SizedEventSet(
        years=np.array([w.onset_year for w in wars], dtype=np.int64),
        sizes=np.array([w.battle_deaths for w in wars], dtype=np.float64),
        scale=Scale.RAW,
    )


def normalize_sizes(wars: Sequence[WarRecord], pop: PopulationSeries) -> SizedEventSet:
    """Battle-deaths per 100,000 of world population in each war's onset year."""
    missing = sorted({w.onset_year for w in wars if w.onset_year not in pop})
    if missing:
        raise DataError(f"no population for onset year(s): {', '.join(map(str, missing))}")
    years = np.array([w.onset_year for w in wars], dtype=np.int64)
    deaths = np.array([w.battle_deaths for w in wars], dtype=np.float64)
    population = np.array([pop[y] for y in years.tolist()], dtype=np.float64)
    return SizedEventSet(years=years, sizes=deaths / population * PER_CAPITA_SCALE, scale=Scale.NORMALIZED)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float
    median: float
    min: float
    max: float
    skewness: float | None
    tail_fraction: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "sd": self.sd,
            "median": self.median,
            "min": self.min,
            "max": self.max,
            "skewness": self.skewness,
            "tail_fraction": self.tail_fraction,
        }


def summarize(sizes) -> SummaryStats:
    """Summary statistics of a size sample.

    ``sd`` uses the n - 1 denominator. ``skewness`` is the moment
    coefficient m3 / m2**1.5 without small-sample correction, and is
    ``None`` for a constant sample. ``tail_fraction`` is the share of
    values strictly above the mean.
    """
    x = np.asarray(sizes, dtype=np.float64)
    if x.size == 0:
        raise DataError("cannot summarize an empty sample")
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    # relative test: float noise on a constant sample must still count as zero variance
    if m2 <= (np.finfo(float).eps * max(abs(mean), 1.0)) ** 2:
        skewness = None
        sd = 0.0
    else:
        skewness = m3 / m2**1.5
    return SummaryStats(
        n=int(x.size),
        mean=mean,
        sd=sd,
        median=float(np.median(x)),
        min=float(x.min()),
        max=float(x.max()),
        skewness=skewness,
        tail_fraction=float(np.count_nonzero(x > mean)) / x.size,
    )
