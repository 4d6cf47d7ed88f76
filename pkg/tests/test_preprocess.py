from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from alarmgraph.ingest import build_vocabulary
from alarmgraph.preprocess import (
    PreprocessConfig,
    dechatter,
    format_sequences,
    parse_sequences,
    segment,
    segment_runs,
)

from conftest import make_log


def secs(log):
    from conftest import T0

    return [int((e.triggered_at - T0).total_seconds()) for e in log]


def test_dechatter_example():
    log = make_log([("RT_HI", s) for s in (0, 20, 40, 70)])
    assert secs(dechatter(log, 60)) == [0, 70]


def test_dechatter_exact_window_is_suppressed():
    log = make_log([("A", 0), ("A", 60), ("A", 61)])
    assert secs(dechatter(log, 60)) == [0, 61]


def test_dechatter_tags_independent():
    log = make_log([("A", 0), ("B", 10), ("A", 30), ("B", 100)])
    assert [(e.tag, s) for e, s in zip(dechatter(log, 60), secs(dechatter(log, 60)))] == [("A", 0), ("B", 10), ("B", 100)]


def test_segment_gap_just_over_threshold_splits():
    log = make_log([("A", 0), ("B", 301)])
    assert [len(r) for r in segment_runs(log, 300)] == [1, 1]


def test_segment_gap_equal_threshold_does_not_split():
    log = make_log([("A", 0), ("B", 300)])
    assert [len(r) for r in segment_runs(log, 300)] == [2]


def test_segment_min_len_and_numbering():
    pairs = [(f"T{i}", i * 10) for i in range(5)] + [("X", 1000), ("Y", 1010)] + [(f"T{i}", 5000 + i) for i in range(6)]
    seqs = segment(make_log(pairs), 300, 5)
    assert [s.id for s in seqs] == [0, 1]
    assert [len(s) for s in seqs] == [5, 6]


def test_empty_log():
    assert segment(make_log([]), 300, 5) == []
    assert len(dechatter(make_log([]), 60)) == 0


def test_config_rejects_nonpositive():
    for kw in ({"chatter_window": 0}, {"gap_threshold": -1}, {"min_len": 0}):
        with pytest.raises(ValueError):
            PreprocessConfig(**kw)


def test_sequences_round_trip():
    log = make_log([(f"T{i % 3}", i * 70) for i in range(12)])
    vocab = build_vocabulary(log)
    seqs = segment(log, 300, 5, vocab)
    assert parse_sequences(format_sequences(seqs, vocab), vocab) == seqs


_pairs = st.lists(st.tuples(st.sampled_from("ABCD"), st.integers(0, 2000)), max_size=60)


def _naive_dechatter(pairs, window):
    # keep an event iff no kept event of the same tag lies in [t - window, t)
    kept = []
    for tag, t in sorted(pairs, key=lambda x: x[1]):
        if not any(k_tag == tag and t - window <= kt <= t for k_tag, kt in kept):
            kept.append((tag, t))
    return kept


@settings(max_examples=200, deadline=None)
@given(_pairs, st.integers(1, 200))
def test_dechatter_matches_naive(pairs, window):
    log = make_log(pairs)
    got = [(e.tag, s) for e, s in zip(dechatter(log, window), secs(dechatter(log, window)))]
    # stable sort keeps input order on ties in both
    assert got == _naive_dechatter([(e.tag, s) for e, s in zip(log, secs(log))], window)


@settings(max_examples=100, deadline=None)
@given(_pairs, st.integers(1, 200))
def test_dechatter_idempotent(pairs, window):
    once = dechatter(make_log(pairs), window)
    assert dechatter(once, window).events == once.events


@settings(max_examples=100, deadline=None)
@given(_pairs, st.integers(1, 500))
def test_runs_partition_log(pairs, gap):
    log = make_log(pairs)
    runs = segment_runs(log, gap)
    assert [e for r in runs for e in r] == list(log.events)
    s = secs(log)
    # every boundary is a gap > threshold and every within-run step is <= threshold
    idx = 0
    for r in runs:
        for j in range(1, len(r)):
            assert s[idx + j] - s[idx + j - 1] <= gap
        if idx:
            assert s[idx] - s[idx - 1] > gap
        idx += len(r)


@settings(max_examples=100, deadline=None)
@given(_pairs, st.integers(1, 500), st.integers(1, 6))
def test_segment_keeps_exactly_long_runs(pairs, gap, min_len):
    log = make_log(pairs)
    seqs = segment(log, gap, min_len)
    assert all(len(s) >= min_len for s in seqs)
    assert sum(len(s) for s in seqs) == sum(len(r) for r in segment_runs(log, gap) if len(r) >= min_len)
