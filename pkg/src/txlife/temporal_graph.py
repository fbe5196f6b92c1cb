"""Daily directed multigraph snapshots of one project's transfers.

Node ids are dense integers assigned in first-appearance order over the
canonical record order (``from_addr`` before ``to_addr`` within a record), so
two builds from the same batch are identical. Every record becomes its own
edge; parallel edges and self-loops are kept.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels
from .artifacts import Manifest, iso_date, read_json, require
from .errors import DataError, EmptyBatch, InvalidWindow
from .ingest import RecordBatch

SECONDS_PER_DAY = 86400
EDGE_CSV_HEADER = ("day_index", "from", "to", "value", "tx_id")
STATS_CSV_HEADER = ("day_index", "date", "num_edges", "num_nodes", "total_volume")


@dataclass(frozen=True, eq=False)
class EdgeBlock:
    """A run of edges sharing one address table.

    ``src``/``dst`` index into ``addresses``; ``values`` are exact Python ints.
    ``timestamps`` is ``None`` for graphs reloaded from a CSV export.
    """

    addresses: tuple[str, ...]
    src: np.ndarray
    dst: np.ndarray
    values: tuple[int, ...]
    tx_ids: tuple[str, ...]
    timestamps: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.tx_ids)

    @property
    def edges(self) -> list[tuple[str, str, int, str]]:
        a = self.addresses
        return [(a[u], a[v], val, t) for u, v, val, t in
                zip(self.src.tolist(), self.dst.tolist(), self.values, self.tx_ids)]

    def node_ids(self) -> np.ndarray:
        return np.unique(np.concatenate((self.src, self.dst)))


@dataclass(frozen=True, eq=False)
class DaySnapshot(EdgeBlock):
    day_index: int = 0

    @classmethod
    def from_edges(cls, day_index: int, edges) -> "DaySnapshot":
        """Build a standalone snapshot from ``(from, to, value[, tx_id])`` tuples."""
        ids: dict[str, int] = {}
        src, dst, vals, txs = [], [], [], []
        for i, e in enumerate(edges):
            u, v, val = e[0], e[1], e[2]
            src.append(ids.setdefault(u, len(ids)))
            dst.append(ids.setdefault(v, len(ids)))
            vals.append(int(val))
            txs.append(e[3] if len(e) > 3 else f"e{i}")
        return cls(tuple(ids), np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                   tuple(vals), tuple(txs), None, day_index)

    def __eq__(self, other):
        if not isinstance(other, DaySnapshot):
            return NotImplemented
        return self.day_index == other.day_index and self.edges == other.edges

    __hash__ = None


@dataclass(frozen=True, eq=False)
class WindowAggregate(EdgeBlock):
    """Union multigraph of all snapshots with day_index in ``[from_day, to_day]``."""

    from_day: int = 0
    to_day: int = 0


@dataclass(frozen=True)
class SnapshotStats:
    num_edges: int
    num_nodes: int
    total_volume: int


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    """Ordered daily snapshots for one project, stored column-wise.

    ``edge_day`` is non-decreasing; ``days[k]`` is the day of the edges in
    ``offsets[k]:offsets[k + 1]``. Inactive days are simply absent.
    """

    project_id: str
    addresses: tuple[str, ...]
    edge_day: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    values: tuple[int, ...]
    tx_ids: tuple[str, ...]
    timestamps: np.ndarray | None
    days: np.ndarray
    offsets: np.ndarray

    @property
    def launch_day(self) -> int:
        return int(self.days[0])

    @property
    def last_day(self) -> int:
        return int(self.days[-1])

    @property
    def n_edges(self) -> int:
        return len(self.tx_ids)

    @property
    def n_addresses(self) -> int:
        return len(self.addresses)

    @property
    def address_ids(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.addresses)}

    def _block(self, cls, lo: int, hi: int, **extra):
        ts = None if self.timestamps is None else self.timestamps[lo:hi]
        return cls(self.addresses, self.src[lo:hi], self.dst[lo:hi], self.values[lo:hi],
                   self.tx_ids[lo:hi], ts, **extra)

    def snapshot(self, k: int) -> DaySnapshot:
        o = self.offsets
        return self._block(DaySnapshot, int(o[k]), int(o[k + 1]), day_index=int(self.days[k]))

    @cached_property
    def snapshots(self) -> tuple[DaySnapshot, ...]:
        return tuple(self.snapshot(k) for k in range(len(self.days)))

    def __eq__(self, other):
        if not isinstance(other, TemporalGraph):
            return NotImplemented
        return (
            self.project_id == other.project_id
            and self.addresses == other.addresses
            and self.values == other.values
            and self.tx_ids == other.tx_ids
            and np.array_equal(self.edge_day, other.edge_day)
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
        )

    __hash__ = None

    @cached_property
    def per_day_edges(self) -> np.ndarray:
        return np.diff(self.offsets)

    @cached_property
    def per_day_nodes(self) -> np.ndarray:
        return _kernels.distinct_per_segment(self.offsets, self.src, self.dst, self.n_addresses)

    @cached_property
    def per_day_new_nodes(self) -> np.ndarray:
        return _kernels.new_nodes_per_segment(self.offsets, self.src, self.dst, self.n_addresses)

    @cached_property
    def per_day_volume(self) -> tuple[int, ...]:
        v, o = self.values, self.offsets.tolist()
        return tuple(sum(v[o[k]:o[k + 1]]) for k in range(len(o) - 1))


def _from_columns(project_id, addresses, edge_day, src, dst, values, tx_ids, timestamps):
    edge_day = np.asarray(edge_day, dtype=np.int64)
    if edge_day.size and np.any(np.diff(edge_day) < 0):
        raise DataError("records are not in canonical (timestamp, tx_id) order")
    days, offsets = _kernels.segment_offsets(edge_day)
    return TemporalGraph(
        project_id, tuple(addresses), edge_day,
        np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
        tuple(values), tuple(tx_ids), timestamps, days, offsets,
    )


def build_temporal_graph(batch: RecordBatch, project_id: str) -> TemporalGraph:
    """Bucket one project's records into UTC-day multigraph snapshots.

    ``batch`` must already be restricted to ``project_id`` (see
    :func:`txlife.ingest.filter_project`); foreign records are a
    :class:`DataError`, an empty batch is :class:`EmptyBatch`.
    """
    recs = batch.records
    if not recs:
        raise EmptyBatch(f"project {project_id!r} has no records")
    ids: dict[str, int] = {}
    setdefault = ids.setdefault
    n = len(recs)
    src = np.empty(n, dtype=np.int64)
    dst = np.empty(n, dtype=np.int64)
    ts = np.empty(n, dtype=np.int64)
    for i, r in enumerate(recs):
        if r.project_id != project_id:
            raise DataError(f"record {r.tx_id!r} belongs to {r.project_id!r}, not {project_id!r}")
        src[i] = setdefault(r.from_addr, len(ids))
        dst[i] = setdefault(r.to_addr, len(ids))
        ts[i] = r.timestamp
    return _from_columns(
        project_id, ids, ts // SECONDS_PER_DAY, src, dst,
        [r.value for r in recs], [r.tx_id for r in recs], ts,
    )


def snapshot_stats(s: EdgeBlock) -> SnapshotStats:
    if len(s) == 0:
        return SnapshotStats(0, 0, 0)
    return SnapshotStats(len(s), int(s.node_ids().size), sum(s.values))


def daily_stats(tg: TemporalGraph) -> list[tuple[int, SnapshotStats]]:
    """Stats for every active day, computed column-wise with the fast kernels."""
    return [
        (int(d), SnapshotStats(int(e), int(n), v))
        for d, e, n, v in zip(tg.days, tg.per_day_edges, tg.per_day_nodes, tg.per_day_volume)
    ]


def window_graph(tg: TemporalGraph, from_day: int, to_day: int) -> WindowAggregate:
    if from_day > to_day:
        raise InvalidWindow(f"from_day {from_day} > to_day {to_day}")
    lo = int(np.searchsorted(tg.edge_day, from_day, side="left"))
    hi = int(np.searchsorted(tg.edge_day, to_day, side="right"))
    return tg._block(WindowAggregate, lo, hi, from_day=int(from_day), to_day=int(to_day))


def whole_graph(tg: TemporalGraph) -> WindowAggregate:
    return window_graph(tg, tg.launch_day, tg.last_day)


# -- export / reload --------------------------------------------------------

def _day_file(day: int) -> str:
    return f"days/{day:07d}.csv"


def export_temporal_graph(tg: TemporalGraph, directory: Path) -> dict:
    """Write one edge CSV per active day, a stats CSV and ``manifest.json``."""
    m = Manifest(
        directory,
        project_id=tg.project_id,
        launch_day=tg.launch_day,
        launch_date=iso_date(tg.launch_day),
        last_day=tg.last_day,
        last_date=iso_date(tg.last_day),
        n_edges=tg.n_edges,
        n_days_active=len(tg.days),
        addresses=list(tg.addresses),
    )
    a = tg.addresses
    for k in range(len(tg.days)):
        d = int(tg.days[k])
        lo, hi = int(tg.offsets[k]), int(tg.offsets[k + 1])
        rows = [(d, a[u], a[v], val, t) for u, v, val, t in zip(
            tg.src[lo:hi].tolist(), tg.dst[lo:hi].tolist(), tg.values[lo:hi], tg.tx_ids[lo:hi])]
        m.write_csv(_day_file(d), EDGE_CSV_HEADER, rows)
    m.write_csv("stats.csv", STATS_CSV_HEADER, [
        (d, iso_date(d), s.num_edges, s.num_nodes, s.total_volume) for d, s in daily_stats(tg)
    ])
    return m.close()


def load_temporal_graph(directory: Path) -> TemporalGraph:
    directory = Path(directory)
    man = read_json(directory / "manifest.json", "build")
    ids = {a: i for i, a in enumerate(man["addresses"])}
    edge_day, src, dst, values, txs = [], [], [], [], []
    for f in man["files"]:
        if not f["path"].startswith("days/"):
            continue
        text = require(directory / f["path"], "build").read_text(encoding="utf-8")
        rows = csv.reader(io.StringIO(text, newline=""))
        next(rows)
        for d, u, v, val, t in rows:
            edge_day.append(int(d))
            src.append(ids[u])
            dst.append(ids[v])
            values.append(int(val))
            txs.append(t)
    return _from_columns(man["project_id"], man["addresses"], edge_day, src, dst, values, txs, None)
