"""Synthetic data with known ground truth, and brute-force oracles."""

from .oracles import (
    oracle_components,
    oracle_concentration,
    oracle_day_buckets,
    oracle_dense_counts,
    oracle_lifecycle,
    oracle_ndjson_line_ok,
    oracle_pearson,
    oracle_validation,
)
from .synth import (
    SynthParams,
    SynthProject,
    cohort_batch,
    daily_counts,
    synth_bulk_ndjson,
    synth_cohort,
    synth_project,
)

__all__ = [
    "SynthParams", "SynthProject", "cohort_batch", "daily_counts", "synth_bulk_ndjson",
    "synth_cohort", "synth_project", "oracle_components", "oracle_concentration",
    "oracle_day_buckets", "oracle_dense_counts", "oracle_lifecycle", "oracle_ndjson_line_ok",
    "oracle_pearson", "oracle_validation",
]
