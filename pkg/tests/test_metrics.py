import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from txlife.errors import ZeroVolume
from txlife.ingest import RecordBatch
from txlife.metrics import (
    MetricSeries, degree_histogram, edge_count_series, node_count_series,
    top_k_concentration, volume_series,
)
from txlife.temporal_graph import DaySnapshot, build_temporal_graph
from txlife.testkit import oracle_concentration, oracle_dense_counts, synth_cohort

from conftest import rec

D = 86400


def test_edge_series_expands_gaps(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    s = edge_count_series(tg)
    assert s.start_day == 100 and s.last_day == 102
    assert s.tolist() == oracle_dense_counts(two_day_batch.records) == [3, 0, 1]


def test_single_day_series():
    tg = build_temporal_graph(RecordBatch.from_records([rec("1", 0, "A", "B")]), "P")
    assert edge_count_series(tg).tolist() == [1]


def test_series_sum_conservation():
    for p in synth_cohort(50, seed=11, max_days=40):
        tg = build_temporal_graph(p.batch, p.params.project_id)
        assert sum(edge_count_series(tg).tolist()) == len(p.batch)
        assert edge_count_series(tg).tolist() == oracle_dense_counts(p.batch.records)


def test_node_series(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    assert node_count_series(tg).tolist() == [3, 0, 2]
    assert node_count_series(tg, cumulative=True).tolist() == [3, 3, 3]


def test_cumulative_nodes_against_set_oracle():
    rng = random.Random(3)
    recs = [rec(f"t{i}", rng.randint(0, 20 * D), rng.choice("ABCDEFGHIJ"), rng.choice("ABCDEFGHIJ"))
            for i in range(200)]
    batch = RecordBatch.from_records(recs)
    tg = build_temporal_graph(batch, "P")
    got = node_count_series(tg, cumulative=True)
    seen, expected = set(), []
    for d in range(got.start_day, got.last_day + 1):
        seen |= {x for r in batch.records if r.timestamp // D == d for x in (r.from_addr, r.to_addr)}
        expected.append(len(seen))
    assert got.tolist() == expected
    daily = node_count_series(tg).tolist()
    for d, n in zip(range(got.start_day, got.last_day + 1), daily):
        assert n == len({x for r in batch.records if r.timestamp // D == d for x in (r.from_addr, r.to_addr)})


def test_volume_series_exact_and_whale_day():
    recs = [rec(f"u{d}-{i}", d * D + i, "A", "B", 1) for d in range(5) for i in range(10)]
    recs.append(rec("whale", 2 * D + 99, "C", "D", 10**6))
    tg = build_temporal_graph(RecordBatch.from_records(recs), "P")
    vol, edges = volume_series(tg).tolist(), edge_count_series(tg).tolist()
    assert vol == [10, 10, 10 + 10**6, 10, 10]
    assert edges == [10, 10, 11, 10, 10]
    assert max(vol) / min(vol) > 10**4 and max(edges) / min(edges) < 1.2


def test_volume_beyond_int64():
    big = 2**90
    tg = build_temporal_graph(RecordBatch.from_records([rec("1", 0, "A", "B", big), rec("2", 1, "A", "B", big)]), "P")
    assert volume_series(tg).tolist() == [2 * big]


def test_zero_value_day():
    tg = build_temporal_graph(RecordBatch.from_records([rec("1", 0, "A", "B", 0)]), "P")
    assert volume_series(tg).tolist() == [0]


def test_series_aligned_across_metrics(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    ss = [edge_count_series(tg), node_count_series(tg), volume_series(tg)]
    assert len({(s.start_day, len(s)) for s in ss}) == 1


def test_series_csv_round_trip(two_day_batch):
    tg = build_temporal_graph(two_day_batch, "P")
    for s in (edge_count_series(tg), volume_series(tg)):
        assert s.to_csv().decode().splitlines()[0] == "day_index,value"
        assert MetricSeries.from_csv(s.to_csv(), "P", s.metric) == s


def test_concentration_examples():
    agg = DaySnapshot.from_edges(0, [("X", "A", 90), ("X", "B", 10)])
    r = top_k_concentration(agg, 1)
    assert r.share == Fraction(9, 10)
    assert r.top == (("A", 90),)
    assert top_k_concentration(agg, 2).share == 1
    assert top_k_concentration(agg, 50).share == 1
    uni = DaySnapshot.from_edges(0, [("X", f"R{i}", 7) for i in range(8)])
    assert top_k_concentration(uni, 3).share == Fraction(3, 8)


def test_concentration_ties_by_address_id():
    agg = DaySnapshot.from_edges(0, [("X", "B", 5), ("X", "A", 5), ("X", "C", 5)])
    assert top_k_concentration(agg, 2).top == (("B", 5), ("A", 5))


def test_concentration_outflow():
    agg = DaySnapshot.from_edges(0, [("S1", "A", 90), ("S2", "A", 10)])
    assert top_k_concentration(agg, 1).share == 1
    assert top_k_concentration(agg, 1, "outflow").share == Fraction(9, 10)


def test_concentration_zero_volume():
    with pytest.raises(ZeroVolume):
        top_k_concentration(DaySnapshot.from_edges(0, [("X", "A", 0)]), 1)
    with pytest.raises(ValueError):
        top_k_concentration(DaySnapshot.from_edges(0, [("X", "A", 1)]), 0)


edges_strategy = st.lists(
    st.tuples(st.sampled_from("ABCDEFGH"), st.sampled_from("ABCDEFGH"), st.integers(0, 10**20)),
    min_size=1, max_size=50,
).filter(lambda es: sum(v for _, _, v in es) > 0)


@settings(max_examples=150)
@given(edges_strategy)
def test_concentration_properties(edges):
    agg = DaySnapshot.from_edges(0, edges)
    receivers = len({b for _, b, _ in edges})
    shares = [top_k_concentration(agg, k).share for k in range(1, receivers + 2)]
    assert all(a <= b for a, b in zip(shares, shares[1:]))
    assert shares[receivers - 1] == 1
    assert all(0 <= s <= 1 for s in shares)
    for k in (1, 2, 3):
        assert top_k_concentration(agg, k).share == oracle_concentration(edges, k)


def test_degree_histogram_example():
    h = degree_histogram(DaySnapshot.from_edges(0, [("A", "B", 1), ("A", "C", 1)]))
    assert h.out_degree == {2: 1, 0: 2}
    assert h.in_degree == {0: 1, 1: 2}
    assert h.total == {2: 1, 1: 2}
    e = degree_histogram(DaySnapshot.from_edges(0, []))
    assert (e.in_degree, e.out_degree, e.total) == ({}, {}, {})


def test_degree_self_loop_counts_twice():
    h = degree_histogram(DaySnapshot.from_edges(0, [("A", "A", 1)]))
    assert h.total == {2: 1}


def test_handshake_random_snapshots():
    rng = random.Random(99)
    for _ in range(100):
        n = rng.randint(0, 40)
        edges = [(rng.choice("ABCDEFGHIJKL"), rng.choice("ABCDEFGHIJKL"), 1) for _ in range(n)]
        s = DaySnapshot.from_edges(0, edges)
        h = degree_histogram(s)
        nodes = len({x for u, v, _ in edges for x in (u, v)})
        for hist in (h.in_degree, h.out_degree, h.total):
            assert sum(hist.values()) == nodes
        assert sum(d * c for d, c in h.total.items()) == 2 * n
        assert sum(d * c for d, c in h.in_degree.items()) == n
