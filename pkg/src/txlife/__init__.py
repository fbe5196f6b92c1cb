"""Temporal transaction-graph analytics for crypto project life cycles."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .graph_of_graphs import (
    ProjectEdge, ProjectGraph, ProjectNode, activity_correlation, build_project_graph,
    export_project_graph, graph_summary,
)
from .ingest import (
    RecordBatch, TransactionRecord, filter_project, parse_records, validate_batch,
)
from .lifecycle import (
    Category, CohortStats, LifecycleSummary, classify, cohort_stats, find_diminishing,
    find_peak, summarize,
)
from .metrics import (
    MetricSeries, degree_histogram, edge_count_series, node_count_series,
    top_k_concentration, volume_series,
)
from .temporal_graph import (
    DaySnapshot, TemporalGraph, build_temporal_graph, snapshot_stats, window_graph,
)
