import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from txlife.errors import DataError, EmptyBatch, InvalidWindow
from txlife.ingest import RecordBatch
from txlife.temporal_graph import (
    DaySnapshot, build_temporal_graph, daily_stats, export_temporal_graph,
    load_temporal_graph, snapshot_stats, window_graph,
)
from txlife.testkit import oracle_day_buckets

from conftest import rec

D = 86400


def test_same_day_three_edges():
    b = RecordBatch.from_records([rec("1", 5, "A", "B"), rec("2", 6, "A", "B"), rec("3", 7, "B", "C")])
    tg = build_temporal_graph(b, "P")
    assert len(tg.snapshots) == 1
    s = snapshot_stats(tg.snapshots[0])
    assert (s.num_edges, s.num_nodes, s.total_volume) == (3, 3, 3)


@pytest.mark.parametrize("a, b, nodes", [("A", "B", 2), ("A", "A", 1)])
def test_single_record(a, b, nodes):
    tg = build_temporal_graph(RecordBatch.from_records([rec("1", 0, a, b, 7)]), "P")
    s = snapshot_stats(tg.snapshots[0])
    assert (s.num_edges, s.num_nodes, s.total_volume) == (1, nodes, 7)


def test_gap_days_absent(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    assert [s.day_index for s in tg.snapshots] == [100, 102]
    assert (tg.launch_day, tg.last_day) == (100, 102)
    buckets = oracle_day_buckets(two_day_batch.records)
    for s in tg.snapshots:
        assert [(u, v, val) for u, v, val, _ in s.edges] == buckets[s.day_index]


def test_day_boundary_is_utc_midnight():
    b = RecordBatch.from_records([rec("1", D - 1, "A", "B"), rec("2", D, "A", "B")])
    assert [s.day_index for s in build_temporal_graph(b, "P").snapshots] == [0, 1]


def test_empty_batch_rejected():
    with pytest.raises(EmptyBatch):
        build_temporal_graph(RecordBatch((), ""), "P")


def test_foreign_project_rejected():
    b = RecordBatch.from_records([rec("1", 0, "A", "B", project="Q")])
    with pytest.raises(DataError):
        build_temporal_graph(b, "P")


def test_address_ids_first_appearance(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    assert tg.addresses == ("A", "B", "C")


def test_snapshot_stats_examples():
    s = snapshot_stats(DaySnapshot.from_edges(0, [("A", "B", 5), ("A", "B", 3)]))
    assert (s.num_edges, s.num_nodes, s.total_volume) == (2, 2, 8)
    assert snapshot_stats(DaySnapshot.from_edges(0, [])) == snapshot_stats(DaySnapshot.from_edges(1, []))
    e = snapshot_stats(DaySnapshot.from_edges(0, []))
    assert (e.num_edges, e.num_nodes, e.total_volume) == (0, 0, 0)
    s = snapshot_stats(DaySnapshot.from_edges(0, [("A", "A", 7)]))
    assert (s.num_edges, s.num_nodes, s.total_volume) == (1, 1, 7)


def test_window_graph(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    assert len(window_graph(tg, 0, 10**6)) == len(two_day_batch)
    assert len(window_graph(tg, 200, 300)) == 0
    w = window_graph(tg, 100, 101)
    assert [e[3] for e in w.edges] == ["t1", "t2", "t3"]
    assert [e[3] for e in window_graph(tg, 101, 102).edges] == ["t4"]
    with pytest.raises(InvalidWindow):
        window_graph(tg, 5, 4)


records_strategy = st.lists(
    st.builds(
        lambda i, ts, a, b, v: rec(f"t{i}", ts, a, b, v),
        st.integers(0, 10**6), st.integers(0, 30 * D), st.sampled_from("ABCDEFG"),
        st.sampled_from("ABCDEFG"), st.integers(0, 10**25),
    ),
    min_size=1, max_size=60,
)


@settings(max_examples=100)
@given(records_strategy)
def test_graph_properties(records):
    batch = RecordBatch.from_records(records)
    tg = build_temporal_graph(batch, "P")
    snaps = tg.snapshots
    # conservation and ordering
    assert sum(len(s) for s in snaps) == len(batch)
    days = [s.day_index for s in snaps]
    assert days == sorted(set(days))
    assert tg.launch_day == days[0] and tg.last_day == days[-1]
    for s in snaps:
        assert len(s) >= 1
        assert all(int(t) // D == s.day_index for t in s.timestamps)
        st_ = snapshot_stats(s)
        assert st_.num_nodes <= 2 * st_.num_edges
        endpoints = [x for u, v, _, _ in s.edges for x in (u, v)]
        assert (st_.num_nodes == 2 * st_.num_edges) == (len(endpoints) == len(set(endpoints)))
    # fast column-wise stats agree with per-snapshot stats
    assert [s for _, s in daily_stats(tg)] == [snapshot_stats(s) for s in snaps]
    # determinism
    assert build_temporal_graph(batch, "P") == tg


def test_export_and_reload(tmp_path, two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    man = export_temporal_graph(tg, tmp_path / "g")
    assert man["launch_day"] == 100 and man["launch_date"] == "1970-04-11"
    assert man["addresses"] == ["A", "B", "C"]
    assert (tmp_path / "g" / "days" / "0000100.csv").read_text().splitlines() == [
        "day_index,from,to,value,tx_id", "100,A,B,5,t1", "100,A,B,3,t2", "100,B,C,1,t3"]
    assert (tmp_path / "g" / "stats.csv").read_text().splitlines()[1:] == [
        "100,1970-04-11,3,3,9", "102,1970-04-13,1,2,2"]
    back = load_temporal_graph(tmp_path / "g")
    assert back == tg
    again = export_temporal_graph(back, tmp_path / "g2")
    assert again["files"] == man["files"]
    np.testing.assert_array_equal(back.per_day_nodes, tg.per_day_nodes)
