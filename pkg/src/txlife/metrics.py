"""Dense per-day activity series and structural statistics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .artifacts import csv_bytes, sha256_hex
from .errors import DataError, ZeroVolume
from .temporal_graph import EdgeBlock, TemporalGraph

METRICS = ("edge_count", "node_count", "volume")
# CLI spelling -> series name
METRIC_ALIASES = {"edges": "edge_count", "nodes": "node_count", "volume": "volume"}


@dataclass(frozen=True, eq=False)
class MetricSeries:
    """One value per calendar day from ``start_day`` to the last active day.

    Count metrics are ``int64``; ``volume`` is an object array of exact
    Python ints so values beyond 64 bits survive.
    """

    project_id: str
    metric: str
    start_day: int
    values: np.ndarray
    variant: str = "daily"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if len(self.values) < 1:
            raise DataError("a metric series needs at least one day")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def last_day(self) -> int:
        return self.start_day + len(self.values) - 1

    @property
    def days(self) -> np.ndarray:
        return np.arange(self.start_day, self.last_day + 1, dtype=np.int64)

    def tolist(self) -> list[int]:
        return [int(v) for v in self.values]

    def __eq__(self, other):
        if not isinstance(other, MetricSeries):
            return NotImplemented
        return (self.project_id, self.metric, self.start_day, self.variant) == (
            other.project_id, other.metric, other.start_day, other.variant
        ) and self.tolist() == other.tolist()

    __hash__ = None

    def to_csv(self) -> bytes:
        return csv_bytes(("day_index", "value"), zip(self.days.tolist(), self.tolist()))

    def digest(self) -> str:
        return sha256_hex(self.to_csv())

    @classmethod
    def from_csv(cls, data: bytes, project_id: str, metric: str, variant: str = "daily") -> "MetricSeries":
        rows = list(csv.reader(io.StringIO(data.decode("utf-8"), newline="")))[1:]
        days = [int(d) for d, _ in rows]
        vals = [int(v) for _, v in rows]
        if days != list(range(days[0], days[0] + len(days))):
            raise DataError(f"series for {project_id!r}/{metric} is not dense")
        arr = np.array(vals, dtype=object) if metric == "volume" else np.array(vals, dtype=np.int64)
        return cls(project_id, metric, days[0], arr, variant)


def _expand(tg: TemporalGraph, per_day, dtype) -> np.ndarray:
    out = np.zeros(tg.last_day - tg.launch_day + 1, dtype=dtype)
    idx = tg.days - tg.launch_day
    if dtype is object:
        for i, v in zip(idx.tolist(), per_day):
            out[i] = v
    else:
        out[idx] = per_day
    return out


def edge_count_series(tg: TemporalGraph) -> MetricSeries:
    return MetricSeries(tg.project_id, "edge_count", tg.launch_day,
                        _expand(tg, tg.per_day_edges, np.int64))


def node_count_series(tg: TemporalGraph, cumulative: bool = False) -> MetricSeries:
    """Distinct incident addresses per day.

    With ``cumulative=True`` each day holds the number of distinct addresses
    seen from launch through that day instead.
    """
    if not cumulative:
        return MetricSeries(tg.project_id, "node_count", tg.launch_day,
                            _expand(tg, tg.per_day_nodes, np.int64))
    new = _expand(tg, tg.per_day_new_nodes, np.int64)
    return MetricSeries(tg.project_id, "node_count", tg.launch_day, np.cumsum(new), "cumulative")


def volume_series(tg: TemporalGraph) -> MetricSeries:
    return MetricSeries(tg.project_id, "volume", tg.launch_day, _expand(tg, tg.per_day_volume, object))


def series_for(tg: TemporalGraph, metric: str, cumulative_nodes: bool = False) -> MetricSeries:
    metric = METRIC_ALIASES.get(metric, metric)
    if metric == "edge_count":
        return edge_count_series(tg)
    if metric == "node_count":
        return node_count_series(tg, cumulative_nodes)
    if metric == "volume":
        return volume_series(tg)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class ConcentrationReport:
    k: int
    share: Fraction
    total_volume: int
    n_addresses: int
    direction: str = "inflow"
    tie_policy: str = "volume desc, address id asc"
    top: tuple[tuple[str, int], ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "share": str(self.share),
            "share_float": float(self.share),
            "total_volume": str(self.total_volume),
            "n_addresses": self.n_addresses,
            "direction": self.direction,
            "tie_policy": self.tie_policy,
            "top": [[a, str(v)] for a, v in self.top],
        }


def top_k_concentration(agg: EdgeBlock, k: int, direction: str = "inflow") -> ConcentrationReport:
    """Share of total volume held by the ``k`` largest receivers (or senders).

    Exact rational share. Ranking is by volume descending, then address id
    ascending, so the listed top-k is deterministic under ties.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if direction not in ("inflow", "outflow"):
        raise ValueError(f"direction must be inflow or outflow, not {direction!r}")
    ends = agg.dst if direction == "inflow" else agg.src
    per: dict[int, int] = {}
    for node, v in zip(ends.tolist(), agg.values):
        per[node] = per.get(node, 0) + v
    total = sum(per.values())
    if total == 0:
        raise ZeroVolume("total volume is zero; concentration undefined")
    ranked = sorted(per.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    held = sum(v for _, v in ranked)
    return ConcentrationReport(
        k=k,
        share=Fraction(held, total),
        total_volume=total,
        n_addresses=len(per),
        direction=direction,
        top=tuple((agg.addresses[n], v) for n, v in ranked),
    )


@dataclass(frozen=True)
class DegreeHistograms:
    in_degree: dict[int, int]
    out_degree: dict[int, int]
    total: dict[int, int]


def _hist(deg: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(deg, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def degree_histogram(s: EdgeBlock) -> DegreeHistograms:
    """Degree -> node count over the addresses incident to ``s``.

    A self-loop adds one to both in- and out-degree, hence two to total.
    """
    if len(s) == 0:
        return DegreeHistograms({}, {}, {})
    nodes = s.node_ids()
    size = int(nodes.max()) + 1
    out_deg = np.bincount(s.src, minlength=size)[nodes]
    in_deg = np.bincount(s.dst, minlength=size)[nodes]
    return DegreeHistograms(_hist(in_deg), _hist(out_deg), _hist(in_deg + out_deg))
