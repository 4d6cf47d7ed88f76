import numpy as np
import pytest

from alarmgraph.embed.similarity import (
    cosine_similarity_matrix,
    format_embeddings,
    format_square,
    parse_embeddings,
    parse_square,
)
from alarmgraph.embed.skipgram import (
    SkipGramParams,
    context_pairs,
    noise_distribution,
    sgd_step,
    sgns_loss_and_grad,
    train_skipgram,
)
from alarmgraph.embed.walks import WalkCorpus
from alarmgraph.errors import EmptyCorpus, IndexOutOfVocabulary, ZeroNormRow


def numeric_grad(f, x, h=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        up = f()
        x[idx] = old - h
        down = f()
        x[idx] = old
        g[idx] = (up - down) / (2 * h)
    return g


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)


def test_gradient_check_three_nodes():
    rng = np.random.default_rng(0)
    W_in, W_out = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    v, u, neg = W_in[0].copy(), W_out[1].copy(), W_out[[2]].copy()
    loss = lambda: sgns_loss_and_grad(v, u, neg)[0]  # noqa: E731
    _, dv, du, dn = sgns_loss_and_grad(v, u, neg)
    assert rel_err(dv, numeric_grad(loss, v)) <= 1e-4
    assert rel_err(du, numeric_grad(loss, u)) <= 1e-4
    assert rel_err(dn, numeric_grad(loss, neg)) <= 1e-4


def test_kernel_step_matches_analytic_gradient():
    rng = np.random.default_rng(1)
    w_in, w_out = rng.normal(size=(6, 4)), rng.normal(size=(6, 4))
    c, o, negs, lr = 0, 1, [2, 3, 4], 0.05
    loss, dv, du, dn = sgns_loss_and_grad(w_in[c], w_out[o], w_out[negs])
    exp_in, exp_out = w_in.copy(), w_out.copy()
    exp_in[c] -= lr * dv
    exp_out[o] -= lr * du
    exp_out[negs] -= lr * dn
    got = sgd_step(w_in, w_out, c, o, negs, lr)
    assert got == pytest.approx(loss, rel=1e-12)
    np.testing.assert_allclose(w_in, exp_in, rtol=0, atol=1e-12)
    np.testing.assert_allclose(w_out, exp_out, rtol=0, atol=1e-12)


def test_kernel_skips_negative_equal_to_context():
    rng = np.random.default_rng(2)
    w_in, w_out = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    a_in, a_out = w_in.copy(), w_out.copy()
    sgd_step(w_in, w_out, 0, 1, [1], 0.1)
    # same as a step with no negatives at all
    _, dv, du, _ =sgns_loss_and_grad(a_in[0], a_out[1], np.zeros((0, 2)))
    np.testing.assert_allclose(w_in[0], a_in[0] - 0.1 * dv, atol=1e-12)
    np.testing.assert_allclose(w_out[1], a_out[1] - 0.1 * du, atol=1e-12)


def test_context_pairs_window():
    c, o = context_pairs([[0, 1, 2]], 1)
    assert list(zip(c.tolist(), o.tolist())) == [(0, 1), (1, 0), (1, 2), (2, 1)]


def test_noise_distribution():
    p = noise_distribution(np.array([16, 0, 1]), 0.75)
    assert p[1] == 0 and p.sum() == pytest.approx(1)
    assert p[0] / p[2] == pytest.approx(8.0)


def clique_corpus(seed=0, n_walks=200, length=20):
    rng = np.random.default_rng(seed)
    walks = []
    for block in (range(0, 5), range(5, 10)):
        nodes = list(block)
        for _ in range(n_walks):
            walks.append(rng.choice(nodes, size=length).tolist())
    return WalkCorpus(walks, 10)


def test_two_cliques_separate():
    E = train_skipgram(clique_corpus(), SkipGramParams(dims=16, epochs=3, seed=3))
    S = cosine_similarity_matrix(E)
    same = np.array([[(i < 5) == (j < 5) for j in range(10)] for i in range(10)])
    off = ~np.eye(10, dtype=bool)
    assert S[same & off].mean() > S[~same].mean()


def test_loss_descent():
    E = train_skipgram(clique_corpus(1, 100), SkipGramParams(dims=16, epochs=5, seed=0))
    h = E.loss_history
    assert len(h) == 5
    for a, b in zip(h[:-2], h[1:-1]):
        assert b <= a
    assert h[-1] <= h[-2] * 1.05


def test_determinism():
    corpus = clique_corpus(2, 30)
    params = SkipGramParams(dims=8, epochs=2, seed=9)
    a, b = train_skipgram(corpus, params), train_skipgram(corpus, params)
    assert format_embeddings(a) == format_embeddings(b)
    c = train_skipgram(corpus, SkipGramParams(dims=8, epochs=2, seed=10))
    assert not np.array_equal(a.vectors, c.vectors)


def test_one_epoch_one_walk_changes_vectors():
    from alarmgraph.embed.skipgram import initial_vectors

    params = SkipGramParams(dims=4, epochs=1)
    E = train_skipgram(WalkCorpus([[0, 1, 0, 2]], 3), params)
    w0, _ = initial_vectors(3, params)
    assert np.all(np.isfinite(E.vectors))
    assert not np.allclose(E.vectors, w0)


def test_epochs_zero_rejected():
    with pytest.raises(ValueError):
        SkipGramParams(epochs=0)


def test_empty_and_out_of_range_corpus():
    with pytest.raises(EmptyCorpus):
        train_skipgram(WalkCorpus([], 3), SkipGramParams(dims=2))
    with pytest.raises(IndexOutOfVocabulary):
        train_skipgram(WalkCorpus([[0, 5]], 3), SkipGramParams(dims=2))


def test_absent_nodes_not_embedded():
    E = train_skipgram(WalkCorpus([[0, 2, 0, 2]], 4, list("ABCD")), SkipGramParams(dims=2))
    assert E.node_ids.tolist() == [0, 2] and E.labels == ["A", "C"]


def test_cosine_examples():
    S = cosine_similarity_matrix(np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 3.0]]))
    assert S[0, 1] == pytest.approx(1 / np.sqrt(2))
    assert S[0, 2] == 0
    assert np.all(np.diag(S) == 1) and np.array_equal(S, S.T)


def test_zero_norm_row():
    with pytest.raises(ZeroNormRow):
        cosine_similarity_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_tables_round_trip():
    E = train_skipgram(WalkCorpus([[0, 1, 2, 1]], 3, ["a", "b,c", "d"]), SkipGramParams(dims=3))
    back = parse_embeddings(format_embeddings(E))
    assert np.array_equal(back.vectors, E.vectors) and back.tags == E.tags
    S = cosine_similarity_matrix(E)
    M, labels = parse_square(format_square(S, E.labels))
    assert np.array_equal(M, S) and labels == E.labels
