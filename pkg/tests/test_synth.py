import numpy as np
import pytest

from alarmgraph.errors import InvalidSpec
from alarmgraph.ingest import format_log
from alarmgraph.synth import (
    TE_BASE_TAGS,
    ScenarioSpec,
    builtin_te_vocabulary,
    concatenate,
    generate,
    planted_scenario,
)


def test_builtin_vocabulary():
    assert len(TE_BASE_TAGS) == len(set(TE_BASE_TAGS)) == 41
    vocab = builtin_te_vocabulary()
    assert len(vocab) == 82
    assert {"RT_HI", "RT_LO", "RP_HI", "AF_LO"} <= set(vocab)


def test_single_group_no_noise():
    spec = ScenarioSpec("F1", [["RT_HI", "RP_HI"]], fault_interval=3600, burst_rate=1.0, spread=30, total_alarms=400, seed=2)
    log, truth = generate(spec)
    assert len(log) == 400
    assert truth.n_duplicates == 0
    alarms = [e for e in log if e.tag != "F1"]
    assert {e.tag for e in alarms} == {"RT_HI", "RP_HI"}
    # RT and RP fire in pairs within the spread. A partner can be missing only
    # when the same-tag minimum gap dropped it, i.e. another burst came right before.
    for e in alarms:
        partner = "RP_HI" if e.tag == "RT_HI" else "RT_HI"
        near = [abs((f.triggered_at - e.triggered_at).total_seconds()) for f in alarms if f.tag == partner]
        if min(near) > 30:
            same = [
                (e.triggered_at - f.triggered_at).total_seconds()
                for f in alarms
                if f.tag == e.tag and f.triggered_at < e.triggered_at
            ]
            assert same and min(same) <= 60 + 2 * 30 or e is alarms[-1]


def test_chatter_fraction():
    spec = planted_scenario(5, chatter_prob=0.5)
    log, truth = generate(spec)
    assert len(log) == 4000
    originals = sum(1 for e, d in zip(log, truth.is_duplicate) if not d and e.tag != spec.fault_label)
    assert truth.n_duplicates / originals == pytest.approx(0.5, abs=0.03)


def test_duplicates_follow_an_original_within_a_minute():
    spec = planted_scenario(1)
    log, truth = generate(spec)
    last_original = {}
    for e, dup in zip(log, truth.is_duplicate):
        if dup:
            gap = (e.triggered_at - last_original[e.tag]).total_seconds()
            assert 1 <= gap <= 59
        else:
            if e.tag in last_original and e.tag != spec.fault_label:
                assert (e.triggered_at - last_original[e.tag]).total_seconds() > 60
            last_original[e.tag] = e.triggered_at


def test_fault_tag_periodic():
    spec = planted_scenario(0)
    log, truth = generate(spec)
    times = [e.triggered_at for e in log if e.tag == "F12"]
    gaps = {(b - a).total_seconds() for a, b in zip(times, times[1:])}
    assert gaps == {1800.0}
    assert truth.fault_group == {"F12": 1}
    assert all(e.subblock == "Fault" for e in log if e.tag == "F12")


def test_planted_scenario_layout():
    spec = planted_scenario(0)
    assert len(spec.groups) == 3 and all(len(g) == 4 for g in spec.groups)
    assert {"RT_HI", "RP_HI"} <= set(spec.groups[0])
    assert len(spec.noise_tags) == 10
    _, truth = generate(spec)
    assert sum(g is None for g in truth.tag_group.values()) == 10


def test_deterministic():
    a = format_log(generate(planted_scenario(3))[0])
    b = format_log(generate(planted_scenario(3))[0])
    c = format_log(generate(planted_scenario(4))[0])
    assert a == b and a != c


def test_log_sorted_and_valid():
    log, truth = generate(planted_scenario(7))
    t = [e.triggered_at for e in log]
    assert t == sorted(t)
    assert len(truth.is_duplicate) == len(log)


@pytest.mark.parametrize(
    "kw",
    [
        {"groups": []},
        {"groups": [["A"], ["A"]]},
        {"chatter_prob": 1.5},
        {"burst_rate": 0},
        {"fault_interval": 0},
        {"noise_rate": 1.0, "noise_tags": []},
        {"fault_group": 5},
    ],
)
def test_invalid_spec(kw):
    base = dict(fault_label="F1", groups=[["A", "B"]], fault_interval=600)
    base.update(kw)
    with pytest.raises(InvalidSpec):
        generate(ScenarioSpec(**base))


def test_concatenate_keeps_order():
    a = generate(planted_scenario(1, total_alarms=200))
    b = generate(planted_scenario(2, total_alarms=300, fault_label="F6"))
    log, truth = concatenate([a, b])
    assert len(log) == 500 and len(truth.is_duplicate) == 500
    t = [e.triggered_at for e in log]
    assert t == sorted(t)
    assert set(truth.fault_group) == {"F12", "F6"}
