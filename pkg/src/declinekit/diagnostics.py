"""Onset-rate and inter-onset gap diagnostics, plus synthetic stationary corpora.

The decline statistic assumes a single memoryless war-generating process.
``onset_frequency`` and ``gap_distribution`` check that assumption on data;
``generate_stationary_corpus`` produces data that satisfies it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .data import COVERAGE, Scale, SizedEventSet, WarRecord
from .errors import DataError


@dataclass
class OnsetDiagnostics:
    annual_counts: dict[int, int] = field(default_factory=dict)
    mean_rate: float | None = None
    moving_average: dict[int, float] = field(default_factory=dict)
    gaps: list[int] = field(default_factory=list)
    lambda_hat: float | None = None
    observed_gap_props: dict[int, float] = field(default_factory=dict)
    expected_gap_props: dict[int, float] = field(default_factory=dict)

    def annual_rows(self) -> list[dict]:
        return [
            {"year": y, "count": c, "moving_avg": self.moving_average.get(y)} for y, c in self.annual_counts.items()
        ]

    def gap_rows(self) -> list[dict]:
        support = sorted(set(self.observed_gap_props) | set(self.expected_gap_props))
        return [
            {
                "gap": g,
                "observed_prop": self.observed_gap_props.get(g, 0.0),
                "expected_prop": self.expected_gap_props.get(g, 0.0),
            }
            for g in support
        ]


def _onset_years(wars) -> np.ndarray:
    if isinstance(wars, SizedEventSet):
        return np.asarray(wars.years, dtype=np.int64)
    return np.array([w.onset_year if isinstance(w, WarRecord) else int(w) for w in wars], dtype=np.int64)


def onset_frequency(
    wars: Union[Sequence[WarRecord], SizedEventSet, Iterable[int]],
    window: int = 5,
    span: tuple[int, int] | None = None,
) -> OnsetDiagnostics:
    """Zero-filled onsets per year with a centered moving average.

    ``span`` defaults to the dataset coverage window widened to include
    every onset. Edge years average over the part of the window that
    falls inside the span.
    """
    years = _onset_years(wars)
    if years.size == 0:
        raise DataError("no wars supplied")
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd number")
    if span is None:
        span = (min(COVERAGE[0], int(years.min())), max(COVERAGE[1], int(years.max())))
    lo, hi = span
    if years.min() < lo or years.max() > hi:
        raise DataError(f"onsets fall outside span [{lo}, {hi}]")

    counts = np.bincount(years - lo, minlength=hi - lo + 1)
    half = window // 2
    csum = np.concatenate([[0], np.cumsum(counts)])
    idx = np.arange(counts.size)
    left = np.maximum(idx - half, 0)
    right = np.minimum(idx + half + 1, counts.size)
    moving = (csum[right] - csum[left]) / (right - left)

    span_years = range(lo, hi + 1)
    return OnsetDiagnostics(
        annual_counts=dict(zip(span_years, counts.tolist())),
        mean_rate=float(counts.sum()) / counts.size,
        moving_average=dict(zip(span_years, moving.tolist())),
    )


def gap_distribution(
    wars: Union[Sequence[WarRecord], SizedEventSet, Iterable[int]],
    n_sim: int = 1000,
    seed: int = 0,
    unique_onsets: bool = False,
) -> OnsetDiagnostics:
    """Years between consecutive onsets against a Poisson reference.

    Gaps are differences of the sorted onset years, so wars starting in the
    same year contribute a zero gap (``unique_onsets`` collapses them
    first). The expected proportions average ``n_sim`` Poisson samples of
    the same size as the observed gaps, with rate equal to the mean gap,
    truncated to the observed support.
    """
    years = np.sort(_onset_years(wars))
    if unique_onsets:
        years = np.unique(years)
    if years.size < 2:
        raise DataError("need at least two onsets to form a gap")
    if n_sim < 1:
        raise ValueError("n_sim must be at least 1")
    gaps = np.diff(years)
    lam = float(gaps.mean())
    support = int(gaps.max()) + 1
    observed = np.bincount(gaps, minlength=support) / gaps.size

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    sims = rng.poisson(lam, size=(n_sim, gaps.size))
    # equal replicate sizes make the average of per-replicate distributions a pooled histogram
    sim_counts = np.bincount(sims.ravel(), minlength=support)[:support]
    expected = sim_counts / sims.size

    return OnsetDiagnostics(
        gaps=gaps.tolist(),
        lambda_hat=lam,
        observed_gap_props=dict(enumerate(observed.tolist())),
        expected_gap_props=dict(enumerate(expected.tolist())),
    )


@dataclass(frozen=True)
class LogUniform:
    """Sizes whose log10 is uniform on [lo_mag, hi_mag)."""

    lo_mag: float
    hi_mag: float

    def __post_init__(self):
        if not self.hi_mag > self.lo_mag:
            raise ValueError("log_uniform requires hi_mag > lo_mag")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return 10.0 ** rng.uniform(self.lo_mag, self.hi_mag, size=size)


@dataclass(frozen=True)
class DiscretePowerLaw:
    """Integer sizes with P(x) roughly proportional to x**-exponent for x >= x_min.

    Uses the rounded continuous inverse transform, which is accurate to a
    few percent in the tail for x_min of order ten or more.
    """

    exponent: float
    x_min: int

    def __post_init__(self):
        if not self.exponent > 1:
            raise ValueError("discrete_power_law requires exponent > 1")
        if self.x_min < 1:
            raise ValueError("discrete_power_law requires x_min >= 1")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        x = np.floor((self.x_min - 0.5) * (1.0 - u) ** (-1.0 / (self.exponent - 1.0)) + 0.5)
        return np.maximum(x, self.x_min)


SizeLaw = Union[LogUniform, DiscretePowerLaw]


def generate_stationary_corpus(
    span: tuple[int, int],
    onset_rate: float,
    size_law: SizeLaw,
    seed: int = 0,
) -> SizedEventSet:
    """Raw-scale events with Poisson(onset_rate) onsets per year and i.i.d. sizes."""
    lo, hi = int(span[0]), int(span[1])
    if hi < lo:
        raise ValueError("span must satisfy lo <= hi")
    if not onset_rate > 0:
        raise ValueError("onset_rate must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    per_year = rng.poisson(onset_rate, size=hi - lo + 1)
    years = np.repeat(np.arange(lo, hi + 1), per_year)
    sizes = size_law.sample(rng, years.size)
    return SizedEventSet(years=years, sizes=sizes, scale=Scale.RAW)


def shift_after(events: SizedEventSet, year: int, magnitudes: float) -> SizedEventSet:
    """Divide sizes of events with onset after ``year`` by 10**magnitudes."""
    sizes = np.where(events.years > year, events.sizes / 10.0**magnitudes, events.sizes)
    return SizedEventSet(years=events.years, sizes=sizes, scale=events.scale)
