"""Bayesian changepoint analysis of heavy-tailed event sizes."""

__version__ = "0.1.0"

from .changepoint import (
    ScanResult,
    average_over_thresholds,
    first_crossing,
    locate_changepoint,
    scan_changepoints,
)
from .data import (
    PopulationSeries,
    SizedEventSet,
    SummaryStats,
    WarRecord,
    WarSchema,
    build_population_series,
    ingest_wars,
    normalize_sizes,
    raw_sizes,
    summarize,
)
from .diagnostics import (
    DiscretePowerLaw,
    LogUniform,
    OnsetDiagnostics,
    gap_distribution,
    generate_stationary_corpus,
    onset_frequency,
)
from .inference import (
    BetaParams,
    DeclineEstimate,
    PartitionCounts,
    exact_decline_probability,
    partition_counts,
    probability_of_decline,
    sample_beta,
)
from .prediction import PredictionRatio, predict_proportion_ratios
