import pytest

from txlife.errors import InvalidParams
from txlife.ingest import validate_batch
from txlife.lifecycle import summarize
from txlife.metrics import edge_count_series
from txlife.temporal_graph import build_temporal_graph
from txlife.testkit import (
    SynthParams, daily_counts, oracle_lifecycle, oracle_pearson, synth_cohort, synth_project,
)


def _recover(p):
    tg = build_temporal_graph(p.batch, p.params.project_id)
    return summarize(edge_count_series(tg))


def test_fast_decay_ground_truth():
    p = synth_project(SynthParams(seed=1, n_days=12, peak_day=3, peak_height=100, decay_rate=2.0))
    # day 5 holds floor(100 * e^-4) = 1, the first day at or below 1% of the peak
    assert p.counts[3:6] == (100, 13, 1) and p.truth.t_diminishing == 5
    s = _recover(p)
    assert (s.t_peak, s.n_peak, s.t_diminishing) == (3, 100, 5)
    assert s.t_diminishing - s.t_peak <= 5


def test_same_seed_same_batch():
    params = SynthParams(seed=42, n_days=30, peak_day=4, peak_height=60)
    a, b = synth_project(params), synth_project(params)
    assert a.batch == b.batch and a.truth == b.truth
    c = synth_project(SynthParams(seed=43, n_days=30, peak_day=4, peak_height=60))
    assert c.batch != a.batch


def test_single_day_censored():
    p = synth_project(SynthParams(seed=0, n_days=1, peak_day=0, peak_height=5))
    s = _recover(p)
    assert s.censored and p.truth.censored and s.t_peak == 0


def test_peak_strictly_largest():
    for p in synth_cohort(30, seed=5):
        c = list(p.counts)
        assert c[p.params.peak_day] == p.params.peak_height
        assert sum(x == max(c) for x in c) == 1
        assert c[0] >= 1


def test_generated_batches_are_clean():
    for p in synth_cohort(10, seed=9):
        v = validate_batch(p.batch)
        assert v.clean and v.zero_value_count == 0


def test_cohort_pipeline_recovers_truth():
    for p in synth_cohort(40, seed=3):
        s = _recover(p)
        assert (s.t_peak, s.n_peak, s.t_diminishing) == (p.truth.t_peak, p.truth.n_peak, p.truth.t_diminishing)
        assert oracle_lifecycle(list(p.counts))[2] == p.truth.t_diminishing


@pytest.mark.parametrize("kw", [
    dict(n_days=0, peak_day=0, peak_height=5),
    dict(n_days=5, peak_day=5, peak_height=5),
    dict(n_days=5, peak_day=2, peak_height=1),
    dict(n_days=5, peak_day=0, peak_height=0),
    dict(n_days=5, peak_day=0, peak_height=5, n_addresses=1),
])
def test_invalid_params(kw):
    with pytest.raises(InvalidParams):
        synth_project(SynthParams(seed=0, **kw))


def test_counts_envelope():
    c = daily_counts(SynthParams(seed=0, n_days=6, peak_day=2, peak_height=10, rise_rate=0.0, decay_rate=0.0))
    assert c == [9, 9, 10, 9, 9, 9]


def test_oracle_examples():
    assert oracle_lifecycle([1, 5, 100, 50, 2, 0, 1]) == (2, 100, 5)
    assert oracle_lifecycle([5]) == (0, 5, None)
    assert oracle_pearson([1, 2, 3], [1, 2, 3]) == 1.0
    assert oracle_pearson([1, 2, 3], [-1, -2, -3]) == -1.0
