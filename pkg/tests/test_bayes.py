import numpy as np
import pytest

from signpred.bayes import (
    SignPrior,
    batch_property_features,
    batch_type_features,
    bayes_node_properties,
    bayes_type_distribution,
    class_distribution,
    edge_property_features,
    edge_type_features,
    encode_concat,
    encode_kronecker,
    global_sign_prior,
    node_type_distribution,
    type_distributions,
)
from signpred.graph import DegreeTally, GraphError, SignedDigraph
from signpred.nodetypes import EdgeClass, classify_node, type_onehot

import oracles

Q8 = SignPrior.from_positive(0.8)


def test_bayes_properties_examples():
    p = bayes_node_properties(DegreeTally(3, 1, 2, 0, 0, 0), Q8)
    assert p.p_in_pos == pytest.approx(4.6 / 6, abs=1e-9)
    p = bayes_node_properties(DegreeTally(0, 0, 4, 0, 0, 0), SignPrior.from_positive(0.9))
    assert p.p_in_pos == pytest.approx(0.9, abs=1e-9) and p.p_in_neg == pytest.approx(0.1, abs=1e-9)
    t = DegreeTally(2, 1, 0, 0, 3, 0)
    p = bayes_node_properties(t, Q8)
    assert p.p_in_pos == 2 / (3 + 1e-10) and p.p_out_neg == 3 / (3 + 1e-10)


def test_class_distribution_examples():
    assert np.allclose(class_distribution(EdgeClass.NONE, 1, Q8), [0, 0.8, 0.2, 0], atol=1e-15)
    assert np.allclose(class_distribution(EdgeClass.NONE, 2, Q8), [0, 0.64, 0.04, 0.32], atol=1e-15)
    assert np.array_equal(class_distribution(EdgeClass.ALL_POS, 0, Q8), [0, 1, 0, 0])
    assert np.array_equal(class_distribution(EdgeClass.MIXED, 5, Q8), [0, 0, 0, 1])
    assert np.array_equal(class_distribution(EdgeClass.NONE, 0, Q8), [1, 0, 0, 0])


@pytest.mark.criterion(1)
def test_class_distribution_equals_enumeration():
    rng = np.random.default_rng(7)
    for observed in range(4):
        for k in range(11):
            for q in [0.0, 1.0, 0.5] + list(rng.random(3)):
                got = class_distribution(EdgeClass(observed), k, SignPrior.from_positive(q))
                want = oracles.class_distribution(observed, k, q)
                assert np.max(np.abs(got - want)) <= 1e-12, (observed, k, q)


def test_type_distribution_examples():
    n1 = DegreeTally(0, 0, 1, 2, 0, 0)
    d = bayes_type_distribution(n1, Q8, Q8)
    want = np.zeros(16)
    want[7], want[9] = 0.8, 0.2
    assert np.allclose(d, want, atol=1e-15)

    d = bayes_type_distribution(DegreeTally(0, 0, 2, 2, 0, 1), Q8, SignPrior.from_positive(0.5))
    want = np.zeros(16)
    for t, p in {8: 0.32, 10: 0.02, 12: 0.16, 13: 0.32, 14: 0.02, 15: 0.16}.items():
        want[t - 1] = p
    assert np.allclose(d, want, atol=1e-15)


def test_observed_tally_gives_onehot(rng):
    for _ in range(200):
        row = rng.integers(0, 4, size=6)
        row[[2, 5]] = 0
        t = DegreeTally.from_array(row)
        d = node_type_distribution(t, SignPrior.from_positive(float(rng.random())))
        assert np.array_equal(d, type_onehot(classify_node(t)))


@pytest.mark.criterion(1)
def test_type_distribution_normalized():
    rng = np.random.default_rng(11)
    tallies = rng.integers(0, 6, size=(20000, 6))
    tallies[rng.random((20000, 6)) < 0.4] = 0
    tallies[:50, 2] = 200  # exp/log branch
    for p in (0.0, 1e-6, 0.3, 0.85, 1.0):
        d = type_distributions(tallies, SignPrior.from_positive(p))
        assert np.all(d >= 0)
        assert np.max(np.abs(d.sum(axis=1) - 1.0)) <= 1e-9


def test_vectorized_matches_scalar(rng):
    tallies = rng.integers(0, 4, size=(300, 6))
    d = type_distributions(tallies, Q8)
    for row, v in zip(tallies, d):
        assert np.allclose(node_type_distribution(DegreeTally.from_array(row), Q8), v, atol=1e-15)


def test_encoders():
    a, b = type_onehot(3), type_onehot(9)
    c = encode_concat(a, b)
    assert c.sum() == 2 and not np.array_equal(c, encode_concat(b, a))
    k = encode_kronecker(a, b)
    assert k.shape == (256,) and k[(3 - 1) * 16 + (9 - 1)] == 1 and k.sum() == 1
    u = np.full(16, 1 / 16)
    assert np.allclose(encode_kronecker(u, u), 1 / 256)


def _fixture():
    # a=0, x=1, y=2, b=3: x->y hidden, a->x +, y->b -
    return SignedDigraph(4, [1, 0, 2], [2, 1, 3], [0, 1, -1])


def _mixture_oracle(g, x, y, p_pos, encoding):
    """Average over the two completed graphs of the edge's sign."""
    e = g.edge_id(x, y)
    enc = {"kronecker": encode_kronecker, "concat": encode_concat}[encoding]
    total = 0
    for s, w in ((1, p_pos), (-1, 1 - p_pos)):
        sign = g.sign.copy()
        sign[e] = s
        h = g.with_signs(sign)
        t = h.tallies()
        prior = SignPrior.from_positive(p_pos)
        vx = node_type_distribution(DegreeTally.from_array(t[x]), prior)
        vy = node_type_distribution(DegreeTally.from_array(t[y]), prior)
        total = total + w * enc(vx, vy)
    return total


def test_three_node_fixture_kronecker():
    g = _fixture()
    got = edge_type_features(g, 1, 2, Q8, "kronecker")
    want = _mixture_oracle(g, 1, 2, 0.8, "kronecker")
    assert np.max(np.abs(got - want)) <= 1e-12
    # Positive hypothesis: x=(All+,All+)=N8, y=(All+,All-)=N9; negative: x=(All+,All-)=N9, y=(All-,All-)=N7.
    hand = np.zeros(256)
    hand[(8 - 1) * 16 + (9 - 1)] = 0.8
    hand[(9 - 1) * 16 + (7 - 1)] = 0.2
    assert np.max(np.abs(got - hand)) <= 1e-12


@pytest.mark.criterion(1)
def test_hidden_edge_mixture_equals_hypothesis_average():
    rng = np.random.default_rng(99)
    for _ in range(60):
        g = oracles.random_graph(rng, n_max=25, density=0.2, hidden=0.3)
        hidden = np.flatnonzero(g.sign == 0)
        if g.positive_count + g.negative_count == 0 or len(hidden) == 0:
            continue
        prior = global_sign_prior(g)
        for e in hidden[:5]:
            x, y = int(g.src[e]), int(g.dst[e])
            for enc in ("kronecker", "concat"):
                got = edge_type_features(g, x, y, prior, enc)
                want = _mixture_oracle(g, x, y, prior.p_pos, enc)
                assert np.max(np.abs(got - want)) <= 1e-12


def test_mixture_degenerate_priors_bracket():
    g = _fixture()
    f1 = edge_type_features(g, 1, 2, SignPrior.from_positive(1.0))
    f0 = edge_type_features(g, 1, 2, SignPrior.from_positive(0.0))
    fm = edge_type_features(g, 1, 2, Q8)
    assert np.all(fm <= np.maximum(f0, f1) + 1e-15) and np.all(fm >= np.minimum(f0, f1) - 1e-15)


def test_edge_observed_flag_checked():
    g = _fixture()
    with pytest.raises(GraphError):
        edge_type_features(g, 1, 2, Q8, edge_observed=True)
    with pytest.raises(GraphError):
        edge_type_features(g, 2, 1, Q8)


def test_batch_matches_single(rng):
    g = oracles.random_graph(rng, n_max=40, density=0.2, hidden=0.25)
    prior = global_sign_prior(g)
    ids = np.arange(g.edge_count)
    for enc in ("kronecker", "concat"):
        B = batch_type_features(g, ids, prior, enc)
        for e in ids:
            single = edge_type_features(g, int(g.src[e]), int(g.dst[e]), prior, enc)
            assert np.allclose(B[e], single, atol=1e-14)
    P = batch_property_features(g, ids, prior)
    for e in ids:
        assert np.allclose(P[e], edge_property_features(g, int(g.src[e]), int(g.dst[e]), prior), atol=1e-15)


def test_batch_is_chunk_independent(rng):
    g = oracles.random_graph(rng, n_max=40, density=0.2, hidden=0.25)
    prior = global_sign_prior(g)
    ids = np.arange(g.edge_count)
    a = batch_type_features(g, ids, prior, "kronecker", chunk=7)
    b = batch_type_features(g, ids, prior, "kronecker")
    assert np.array_equal(a, b)
