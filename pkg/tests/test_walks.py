import numpy as np
import pytest

from alarmgraph.embed.walks import (
    WalkParams,
    biased_step_weights,
    format_corpus,
    generate_corpus,
    generate_walk,
    parse_corpus,
    sample_next_steps,
)
from alarmgraph.errors import DeadEnd, EmptyGraph
from alarmgraph.graph import CooccurrenceGraph


def make_graph(n, edges, tags=None):
    return CooccurrenceGraph(n, {(min(p, q), max(p, q)): w for (p, q), w in edges.items()}, np.ones(n), tags)


# 0-1-2 triangle plus 3 hanging off 1
G = make_graph(4, {(0, 1): 0.5, (0, 2): 0.2, (1, 2): 0.4, (1, 3): 0.8})


def test_alpha_cases():
    p, q = 0.25, 4.0
    nbrs, w = biased_step_weights(0, 1, G, p, q)
    got = dict(zip(nbrs.tolist(), w.tolist()))
    assert got[0] == pytest.approx(0.5 / p)  # return to prev
    assert got[2] == pytest.approx(0.4)  # shared neighbour
    assert got[3] == pytest.approx(0.8 / q)  # two hops from prev


def test_first_step_unbiased():
    nbrs, w = biased_step_weights(None, 1, G, 0.1, 7.0)
    assert dict(zip(nbrs.tolist(), w.tolist())) == {0: 0.5, 2: 0.4, 3: 0.8}


def test_dead_end():
    g = make_graph(3, {(0, 1): 1.0})
    with pytest.raises(DeadEnd):
        biased_step_weights(None, 2, g, 1, 1)


def test_reduction_p_q_one():
    for t in range(4):
        for v in G.neighbors(t):
            nbrs, w = biased_step_weights(t, int(v), G, 1.0, 1.0)
            assert np.array_equal(w, G.neighbor_weights(int(v)))


def test_two_node_alternates():
    g = make_graph(2, {(0, 1): 0.3})
    walk = generate_walk(g, 0, WalkParams(walk_length=4), np.random.default_rng(0))
    assert walk == [0, 1, 0, 1]


def test_star_low_q_prefers_other_leaves():
    # centre 0 with leaves 1..4; from leaf 1 through centre
    g = make_graph(5, {(0, k): 0.1 * k for k in range(1, 5)})
    p, q = 1e6, 1e-3
    nbrs, w = biased_step_weights(1, 0, g, p, q)
    expect = w / w.sum()
    draws = sample_next_steps(g, 1, 0, p, q, 100_000, np.random.default_rng(5))
    emp = np.array([(draws == x).mean() for x in nbrs])
    assert np.abs(emp - expect).sum() <= 0.02
    assert emp[nbrs.tolist().index(1)] < 1e-3


def test_first_order_frequencies_from_walks():
    # one-step frequencies out of node 1, collected from real walks with p = q = 1
    params = WalkParams(num_walks=2000, walk_length=40, seed=11)
    corpus = generate_corpus(G, params)
    counts = dict.fromkeys(G.neighbors(1).tolist(), 0)
    for walk in corpus.walks:
        for a, b in zip(walk, walk[1:]):
            if a == 1:
                counts[b] += 1
    total = sum(counts.values())
    assert total >= 100_000
    w = G.neighbor_weights(1)
    expect = w / w.sum()
    emp = np.array([counts[x] / total for x in G.neighbors(1).tolist()])
    assert np.abs(emp - expect).sum() <= 0.02


def test_corpus_counts_and_validity():
    g = make_graph(6, {(0, 1): 0.5, (1, 2): 0.2, (0, 2): 0.9, (3, 4): 0.1})  # node 5 isolated
    params = WalkParams(num_walks=10, walk_length=12, p=0.5, q=2, seed=4)
    corpus = generate_corpus(g, params)
    assert len(corpus) == 10 * 5
    assert all(5 not in w for w in corpus.walks)
    for w in corpus.walks:
        assert 2 <= len(w) <= 12
        assert all(g.has_edge(a, b) for a, b in zip(w, w[1:]))
    starts = [w[0] for w in corpus.walks]
    assert sorted(starts) == sorted(list(range(5)) * 10)


def test_determinism_and_seed_change():
    params = WalkParams(num_walks=5, walk_length=20, p=2, q=0.5, seed=1)
    a = format_corpus(generate_corpus(G, params))
    assert a == format_corpus(generate_corpus(G, params))
    other = generate_corpus(G, WalkParams(num_walks=5, walk_length=20, p=2, q=0.5, seed=2))
    assert format_corpus(other) != a
    assert len(other) == 5 * 4


def test_empty_graph():
    with pytest.raises(EmptyGraph):
        generate_corpus(make_graph(3, {}), WalkParams())


@pytest.mark.parametrize("kw", [{"num_walks": 0}, {"walk_length": 1}, {"p": 0}, {"q": -1}])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        WalkParams(**kw)


def test_corpus_text_round_trip():
    tags = ["Reactor Temp", "B%x", "C"]
    g = make_graph(3, {(0, 1): 1.0, (1, 2): 0.5}, tags)
    corpus = generate_corpus(g, WalkParams(num_walks=2, walk_length=5))
    text = format_corpus(corpus)
    assert all(len(line.split()) == len(w) for line, w in zip(text.splitlines(), corpus.walks))
    assert parse_corpus(text, tags).walks == corpus.walks
