"""Prior-predictive check of post-split exceedance proportions."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .changepoint import default_thresholds
from .data import SizedEventSet
from .errors import DataError
from .inference import DEFAULT_DRAWS, ROLE_PREDICTIVE, BetaParams, derive_seed, partition_counts, sample_beta

DEFAULT_SPLIT = 1946
BAND_QUANTILES = (0.17, 0.83)
DRAW_FLOOR = 1e-12


@dataclass(frozen=True)
class PredictionRatio:
    m: float
    observed_p: float
    predicted_mean: float
    ratio: float
    band_lo: float
    band_hi: float
    n_draws: int
    seed: int
    degenerate: bool = False
    n_floored: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def predict_proportion_ratios(
    events: SizedEventSet,
    split_year: int = DEFAULT_SPLIT,
    thresholds: Sequence[float] | None = None,
    n_draws: int = DEFAULT_DRAWS,
    seed: int = 0,
) -> list[PredictionRatio]:
    """Observed post-split proportions relative to draws from the pre-split Beta prior.

    For each threshold the pre-split events (onset <= ``split_year``) give
    Beta(a, b); its draw average is the point prediction. The band is the
    central 66% interval of ``observed_p / draw`` with draws floored at
    1e-12. A zero shape makes the prior a point mass and marks the entry
    degenerate.
    """
    if thresholds is None:
        thresholds = default_thresholds(events.scale)
    pre = events.years <= split_year
    k = int(np.count_nonzero(pre))
    n = len(events) - k
    if n == 0:
        raise DataError(f"no events after {split_year}")
    if k == 0:
        raise DataError(f"no events at or before {split_year}")

    out = []
    for m in thresholds:
        m = float(m)
        counts = partition_counts(events, split_year, m)
        params = BetaParams(counts.a, counts.b)
        draws = sample_beta(params, n_draws, derive_seed(seed, counts, ROLE_PREDICTIVE))
        n_floored = int(np.count_nonzero(draws < DRAW_FLOOR))
        draws = np.maximum(draws, DRAW_FLOOR)
        observed = counts.y / n
        predicted = float(draws.mean())
        lo, hi = np.quantile(observed / draws, BAND_QUANTILES)
        out.append(
            PredictionRatio(
                m=m,
                observed_p=observed,
                predicted_mean=predicted,
                ratio=observed / predicted,
                band_lo=float(lo),
                band_hi=float(hi),
                n_draws=n_draws,
                seed=seed,
                degenerate=params.point_mass is not None,
                n_floored=n_floored,
            )
        )
    return out
