import numpy as np
import pytest

from signpred.graph import DegreeTally, SignedDigraph
from signpred.nodetypes import (
    INTERACTION,
    EdgeClass,
    SignConstraint,
    census_determined,
    classify_node,
    edge_constraints,
    interaction_sign,
    node_properties,
    node_types,
    type_onehot,
)

from oracles import TYPE_TABLE, random_graph, side_class


def tally(ip=0, ineg=0, ih=0, op=0, oneg=0, oh=0):
    return DegreeTally(ip, ineg, ih, op, oneg, oh)


def test_classification_matches_table():
    for (i, o), t in TYPE_TABLE.items():
        ip, ineg = i & 1, i >> 1
        op, oneg = o & 1, o >> 1
        assert classify_node(tally(ip, ineg, 0, op, oneg, 0)) == t


@pytest.mark.criterion(1)
def test_classification_total_and_injective():
    seen = {}
    for ip in range(3):
        for ineg in range(3):
            for op in range(3):
                for oneg in range(3):
                    t = classify_node(tally(ip, ineg, 0, op, oneg, 0))
                    assert 1 <= t <= 16
                    key = (side_class([1] * ip + [-1] * ineg), side_class([1] * op + [-1] * oneg))
                    assert seen.setdefault(key, t) == t
    assert sorted(seen.values()) == list(range(1, 17))


def test_hidden_edges_ignored_unless_requested():
    t = tally(ip=1, oh=3)
    assert classify_node(t) == 4
    with pytest.raises(ValueError):
        classify_node(t, include_hidden=True)


def test_known_interactions():
    assert interaction_sign(1, 4) is SignConstraint.MUST_POSITIVE  # All+ out meets All+ in
    assert interaction_sign(2, 5) is SignConstraint.MUST_NEGATIVE
    assert interaction_sign(15, 15) is SignConstraint.UNDETERMINED
    assert interaction_sign(16, 1) is SignConstraint.FORBIDDEN
    assert interaction_sign(4, 1) is SignConstraint.FORBIDDEN  # source has no out edges
    assert interaction_sign(1, 5) is SignConstraint.FORBIDDEN  # All+ out into All- in
    with pytest.raises(ValueError):
        interaction_sign(0, 1)


@pytest.mark.criterion(1)
def test_consistency_theorem_on_random_graphs():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        g = random_graph(rng, n_max=100, density=float(rng.uniform(0.01, 0.2)), p_pos=float(rng.uniform(0.1, 0.9)))
        codes = edge_constraints(g)
        sign = g.sign
        ok = ((codes == 1) & (sign == 1)) | ((codes == 2) & (sign == -1)) | (codes == 3)
        assert ok.all()


def test_census_counts_small_graph():
    # 0 -> 1 (+) and 2 -> 1 (-): node 1 is Mixed-in, so both edges are forced by their sources.
    g = SignedDigraph(3, [0, 2], [1, 1], [1, -1])
    c = census_determined(g)
    assert tuple(c) == (1, 1, 0) and c.forbidden == 0 and c.determined == 2
    with pytest.raises(ValueError):
        census_determined(g.with_signs(np.array([1, 0])))


def test_node_types_vector(rng):
    g = random_graph(rng, n_max=50)
    types = node_types(g)
    for x in range(g.node_count):
        ins = [s for _, s in g.in_edges(x)]
        outs = [s for _, s in g.out_edges(x)]
        assert types[x] == TYPE_TABLE[(side_class(ins), side_class(outs))]


def test_node_properties_and_onehot():
    p = node_properties(tally(ip=3, ineg=1, op=0, oneg=0))
    assert p.p_in_pos == pytest.approx(0.75) and p.p_in_neg == pytest.approx(0.25)
    assert p.p_out_pos == 0 and p.p_out_neg == 0
    v = type_onehot(7)
    assert v.sum() == 1 and v[6] == 1
    assert INTERACTION.shape == (17, 17)
    assert EdgeClass.MIXED == 3
