"""Scan candidate changepoints and thresholds for a decline in exceedance rates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Scale, SizedEventSet
from .errors import ConfigError, DataError
from .inference import DEFAULT_DRAWS, DeclineEstimate, PartitionCounts, probability_of_decline

log = logging.getLogger(__name__)

METHODS_YEARS = (1859, 1970)
FIGURE_YEARS = (1856, 1989)
RAW_THRESHOLDS = tuple(3 + 0.5 * i for i in range(9))
NORMALIZED_THRESHOLDS = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def default_thresholds(scale: Scale | str) -> tuple[float, ...]:
    return RAW_THRESHOLDS if Scale(scale) is Scale.RAW else NORMALIZED_THRESHOLDS


@dataclass
class ScanResult:
    """Decline probabilities over a (year x threshold) grid.

    ``grid[i][j]`` is ``None`` where no events precede ``years[i]``.
    ``yearly_average[i]`` is ``None`` when every threshold is excluded or
    invalid for that year.
    """

    years: list[int]
    thresholds: list[float]
    grid: list[list[DeclineEstimate | None]]
    yearly_average: list[float | None]
    n_draws: int
    seed: int
    scale: Scale
    excluded_thresholds: list[float] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.years), len(self.thresholds)

    def column(self, m: float) -> list[float | None]:
        j = self.thresholds.index(m)
        return [None if row[j] is None else row[j].pr_decline for row in self.grid]

    def matrix(self) -> np.ndarray:
        """Probabilities as a float array, NaN for invalid cells."""
        return np.array(
            [[np.nan if cell is None else cell.pr_decline for cell in row] for row in self.grid], dtype=float
        )

    def long_rows(self) -> list[dict]:
        rows = []
        for year, row in zip(self.years, self.grid):
            for m, cell in zip(self.thresholds, row):
                rows.append(
                    {
                        "year": year,
                        "m": m,
                        "pr_decline": None if cell is None else cell.pr_decline,
                        "degenerate": None if cell is None else cell.degenerate,
                    }
                )
        return rows

    def averaged_rows(self) -> list[dict]:
        return [{"year": y, "mean_pr_decline": v} for y, v in zip(self.years, self.yearly_average)]


def _boundary_thresholds(events: SizedEventSet, thresholds: Sequence[float]) -> list[float]:
    # thresholds at which every event falls on the same side, so the proportion is forced
    out = []
    for m in thresholds:
        hits = np.count_nonzero(events.exceeds(m))
        if hits == 0 or hits == len(events):
            out.append(m)
    return out


def scan_changepoints(
    events: SizedEventSet,
    years: tuple[int, int] = METHODS_YEARS,
    thresholds: Sequence[float] | None = None,
    n_draws: int = DEFAULT_DRAWS,
    seed: int = 0,
    exclude_boundary: bool = False,
) -> ScanResult:
    """Estimate the probability of decline for every year in ``years`` (inclusive) and threshold.

    With ``exclude_boundary`` the thresholds whose exceedance proportion is
    0 or 1 over the whole data set are left out of the yearly averages
    (they still appear in the grid).
    """
    y_lo, y_hi = int(years[0]), int(years[1])
    if y_lo >= y_hi:
        raise ConfigError(f"year range must satisfy lo < hi, got [{y_lo}, {y_hi}]")
    if thresholds is None:
        thresholds = default_thresholds(events.scale)
    thresholds = [float(m) for m in thresholds]
    if not thresholds:
        raise ConfigError("at least one threshold is required")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ConfigError("thresholds must be strictly ascending")
    if n_draws < 1:
        raise ConfigError("n_draws must be at least 1")
    if len(events) == 0:
        raise DataError("event set is empty")

    order = np.argsort(events.years, kind="stable")
    sorted_years = events.years[order]
    exceed = [np.concatenate([[0], np.cumsum(events.exceeds(m)[order])]) for m in thresholds]
    total = len(events)

    candidate_years = list(range(y_lo, y_hi + 1))
    grid: list[list[DeclineEstimate | None]] = []
    for t_hat in candidate_years:
        k = int(np.searchsorted(sorted_years, t_hat, side="right"))
        row = []
        for m, cum in zip(thresholds, exceed):
            if k == 0:
                row.append(None)
                continue
            a = int(cum[k])
            y = int(cum[-1] - cum[k])
            counts = PartitionCounts(a=a, b=k - a, y=y, n_minus_y=total - k - y, t_hat=t_hat, m=m)
            row.append(probability_of_decline(counts, n_draws=n_draws, seed=seed))
        grid.append(row)

    excluded = _boundary_thresholds(events, thresholds) if exclude_boundary else []
    if len(excluded) == len(thresholds):
        raise ConfigError("every threshold is a boundary threshold; nothing left to average")
    keep = [j for j, m in enumerate(thresholds) if m not in excluded]

    averages: list[float | None] = []
    for t_hat, row in zip(candidate_years, grid):
        values = [row[j].pr_decline for j in keep if row[j] is not None]
        if len(values) < len(keep):
            log.warning("year %d: %d invalid cell(s) left out of the average", t_hat, len(keep) - len(values))
        averages.append(float(np.mean(values)) if values else None)

    return ScanResult(
        years=candidate_years,
        thresholds=thresholds,
        grid=grid,
        yearly_average=averages,
        n_draws=n_draws,
        seed=seed,
        scale=events.scale,
        excluded_thresholds=excluded,
    )


def average_over_thresholds(scan: ScanResult) -> list[tuple[int, float]]:
    """Per-year mean probability of decline, skipping years with no valid cell."""
    series = [(y, v) for y, v in zip(scan.years, scan.yearly_average) if v is not None]
    if not series:
        raise DataError("no year has a valid threshold-averaged probability")
    return series


def locate_changepoint(averaged: Sequence[tuple[int, float]]) -> tuple[int, float]:
    """Year with the highest mean probability; the earliest year wins ties."""
    if not averaged:
        raise DataError("empty probability series")
    best = None
    for year, value in sorted(averaged):
        if best is None or value > best[1]:
            best = (year, value)
    return best


def first_crossing(averaged: Sequence[tuple[int, float]], level: float = 0.66) -> int | None:
    """First year whose mean probability reaches ``level``, or ``None``."""
    for year, value in sorted(averaged):
        if value >= level:
            return year
    return None
