"""Bayesian node features for partially observed signed graphs.

Hidden edge signs are treated as independent Bernoulli draws. A node's
incoming side draws from its own Bayesian incoming ratio, renormalized to a
probability pair, and likewise for its outgoing side. That gives each node a
distribution over the 16 types. Edge features encode the two endpoint
distributions by concatenation (32-d) or Kronecker product (256-d). An edge
whose own sign is hidden is encoded as the prior-weighted mixture of its
positive and negative hypotheses.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .graph import HIDDEN, NEGATIVE, POSITIVE, DegreeTally, GraphError, SignedDigraph
from .nodetypes import EPSILON, NUM_TYPES, TYPE_OF, EdgeClass

# Exponents above this use exp/log instead of repeated multiplication.
_MAX_REPEATED_POWER = 64


class SignPrior(NamedTuple):
    p_pos: float
    p_neg: float

    @classmethod
    def from_positive(cls, p_pos: float) -> "SignPrior":
        if not 0.0 <= p_pos <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {p_pos}")
        return cls(float(p_pos), 1.0 - float(p_pos))


class BayesNodeProperties(NamedTuple):
    p_in_pos: float
    p_in_neg: float
    p_out_pos: float
    p_out_neg: float


def global_sign_prior(g: SignedDigraph) -> SignPrior:
    """Fraction of positive edges among edges with an observed sign."""
    pos, neg = g.positive_count, g.negative_count
    if pos + neg == 0:
        raise GraphError("graph has no observed-sign edges")
    return SignPrior.from_positive(pos / (pos + neg))


def _bayes_ratio(pos, neg, hidden, p_pos, p_neg):
    denom = pos + neg + hidden + EPSILON
    return (pos + p_pos * hidden) / denom, (neg + p_neg * hidden) / denom


def bayes_node_properties(tally: DegreeTally, prior: SignPrior) -> BayesNodeProperties:
    p_in = _bayes_ratio(tally.d_in_pos, tally.d_in_neg, tally.d_in_hidden, *prior)
    p_out = _bayes_ratio(tally.d_out_pos, tally.d_out_neg, tally.d_out_hidden, *prior)
    return BayesNodeProperties(*p_in, *p_out)


def bayes_properties_matrix(tallies: np.ndarray, prior: SignPrior) -> np.ndarray:
    """Vectorized bayes_node_properties: ``(n, 6)`` tallies -> ``(n, 4)``."""
    t = np.asarray(tallies, dtype=np.float64)
    out = np.empty((len(t), 4))
    out[:, 0], out[:, 1] = _bayes_ratio(t[:, 0], t[:, 1], t[:, 2], *prior)
    out[:, 2], out[:, 3] = _bayes_ratio(t[:, 3], t[:, 4], t[:, 5], *prior)
    return out


def _local_q(pos_ratio, neg_ratio, fallback: float):
    """Renormalize a Bayesian ratio pair to P(+); ``fallback`` where both are 0."""
    total = pos_ratio + neg_ratio
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(total > 0, pos_ratio / np.where(total > 0, total, 1.0), fallback)
    return q


def local_priors(tally: DegreeTally, prior: SignPrior) -> tuple[SignPrior, SignPrior]:
    """Per-side Bernoulli priors for a node's hidden edges.

    Each side uses the node's Bayesian ratio pair scaled to sum to one; a side
    with no edges at all falls back to the global prior.
    """
    bp = bayes_node_properties(tally, prior)
    q_in = float(_local_q(bp.p_in_pos, bp.p_in_neg, prior.p_pos))
    q_out = float(_local_q(bp.p_out_pos, bp.p_out_neg, prior.p_pos))
    return SignPrior.from_positive(q_in), SignPrior.from_positive(q_out)


def _power(q, k):
    """``q ** k`` elementwise for integer ``k >= 0``.

    Repeated multiplication up to k = 64 keeps small-k results exact enough
    for enumeration oracles; larger k goes through exp/log.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.int64)
    q, k = np.broadcast_arrays(q, k)
    out = np.ones(q.shape)
    small = k <= _MAX_REPEATED_POWER
    kmax = int(k[small].max()) if small.any() else 0
    for i in range(kmax):
        step = small & (k > i)
        out = np.where(step, out * q, out)
    big = ~small
    if big.any():
        with np.errstate(divide="ignore"):
            logs = np.log(q[big])
        out[big] = np.where(q[big] > 0, np.exp(k[big] * logs), 0.0)
    return out


def _class_distribution(observed, k, q_pos):
    """Vectorized class distribution, returns ``(..., 4)`` indexed by EdgeClass."""
    observed = np.asarray(observed, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    q_pos = np.asarray(q_pos, dtype=np.float64)
    observed, k, q_pos = np.broadcast_arrays(observed, k, q_pos)
    q_neg = 1.0 - q_pos
    a = _power(q_pos, k)
    b = _power(q_neg, k)
    dist = np.zeros(observed.shape + (4,))
    none = observed == EdgeClass.NONE
    allp = observed == EdgeClass.ALL_POS
    alln = observed == EdgeClass.ALL_NEG
    mixed = observed == EdgeClass.MIXED
    hidden = k > 0

    dist[..., EdgeClass.NONE] = np.where(none & ~hidden, 1.0, 0.0)
    dist[..., EdgeClass.ALL_POS] = np.where(none & hidden, a, 0.0) + np.where(allp, a, 0.0)
    dist[..., EdgeClass.ALL_NEG] = np.where(none & hidden, b, 0.0) + np.where(alln, b, 0.0)
    rest_none = np.where(k == 1, 0.0, np.maximum(1.0 - a - b, 0.0))
    dist[..., EdgeClass.MIXED] = (
        np.where(none & hidden, rest_none, 0.0)
        + np.where(allp, 1.0 - a, 0.0)
        + np.where(alln, 1.0 - b, 0.0)
        + np.where(mixed, 1.0, 0.0)
    )
    return dist


def class_distribution(observed_class: EdgeClass, k: int, q: SignPrior) -> np.ndarray:
    """Distribution over EdgeClass of one side of a node with ``k`` hidden edges.

    ``q`` is the Bernoulli prior of each hidden edge's sign. The result is a
    length-4 vector indexed by ``EdgeClass``.
    """
    if k < 0:
        raise ValueError("hidden count must be non-negative")
    return _class_distribution(int(observed_class), int(k), q.p_pos)


def _type_distribution(in_dist: np.ndarray, out_dist: np.ndarray) -> np.ndarray:
    """Map per-side class distributions ``(..., 4)`` to ``(..., 16)`` over types."""
    joint = in_dist[..., :, None] * out_dist[..., None, :]
    out = np.zeros(in_dist.shape[:-1] + (NUM_TYPES,))
    for i in range(4):
        for o in range(4):
            out[..., TYPE_OF[i, o] - 1] = joint[..., i, o]
    return out


def bayes_type_distribution(
    tally: DegreeTally, in_prior: SignPrior, out_prior: SignPrior
) -> np.ndarray:
    """Probability of each of the 16 types, index ``t - 1`` for type ``t``."""
    in_cls = int(tally.d_in_pos > 0) + 2 * int(tally.d_in_neg > 0)
    out_cls = int(tally.d_out_pos > 0) + 2 * int(tally.d_out_neg > 0)
    return _type_distribution(
        _class_distribution(in_cls, tally.d_in_hidden, in_prior.p_pos),
        _class_distribution(out_cls, tally.d_out_hidden, out_prior.p_pos),
    )


def node_type_distribution(tally: DegreeTally, prior: SignPrior) -> np.ndarray:
    """bayes_type_distribution with the node's own local priors."""
    return bayes_type_distribution(tally, *local_priors(tally, prior))


def type_distributions(tallies: np.ndarray, prior: SignPrior) -> np.ndarray:
    """Vectorized node_type_distribution: ``(n, 6)`` tallies -> ``(n, 16)``."""
    t = np.asarray(tallies, dtype=np.int64)
    bp = bayes_properties_matrix(t, prior)
    q_in = _local_q(bp[:, 0], bp[:, 1], prior.p_pos)
    q_out = _local_q(bp[:, 2], bp[:, 3], prior.p_pos)
    in_cls = (t[:, 0] > 0) + 2 * (t[:, 1] > 0)
    out_cls = (t[:, 3] > 0) + 2 * (t[:, 4] > 0)
    return _type_distribution(
        _class_distribution(in_cls, t[:, 2], q_in),
        _class_distribution(out_cls, t[:, 5], q_out),
    )


def encode_concat(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    return np.concatenate([vx, vy], axis=-1)


def encode_kronecker(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    """Entry ``16 * (i - 1) + (j - 1)`` is ``vx[i] * vy[j]``; batches on axis 0."""
    vx = np.asarray(vx)
    vy = np.asarray(vy)
    return (vx[..., :, None] * vy[..., None, :]).reshape(vx.shape[:-1] + (-1,))


ENCODERS = {"concat": encode_concat, "kronecker": encode_kronecker}


def _hypothesis_tallies(tallies: np.ndarray, src, dst, sign: int):
    """Source and target tallies with the hidden edge turned into ``sign``."""
    tx = np.array(tallies[src], dtype=np.int64, copy=True)
    ty = np.array(tallies[dst], dtype=np.int64, copy=True)
    col = 0 if sign == POSITIVE else 1
    tx[..., 5] -= 1
    tx[..., 3 + col] += 1
    ty[..., 2] -= 1
    ty[..., col] += 1
    return tx, ty


def edge_type_features(
    g: SignedDigraph,
    x: int,
    y: int,
    prior: SignPrior,
    encoding: str = "kronecker",
    edge_observed: bool | None = None,
) -> np.ndarray:
    """Bayesian node-type interaction features of the edge ``x -> y``.

    ``prior`` is the global sign prior of ``g``. ``edge_observed`` defaults to
    whether the edge's sign is visible in ``g``; passing a value that
    contradicts the graph is an error.
    """
    encode = ENCODERS[encoding]
    e = g.edge_id(x, y)
    observed = g.sign[e] != HIDDEN
    if edge_observed is not None and bool(edge_observed) != observed:
        raise GraphError(f"edge {x} -> {y} observed={observed}, caller said {edge_observed}")
    tallies = g.tallies()
    if observed:
        vx = node_type_distribution(DegreeTally.from_array(tallies[x]), prior)
        vy = node_type_distribution(DegreeTally.from_array(tallies[y]), prior)
        return encode(vx, vy)
    feats = []
    for s in (POSITIVE, NEGATIVE):
        tx, ty = _hypothesis_tallies(tallies, x, y, s)
        vx = node_type_distribution(DegreeTally.from_array(tx), prior)
        vy = node_type_distribution(DegreeTally.from_array(ty), prior)
        feats.append(encode(vx, vy))
    return prior.p_pos * feats[0] + prior.p_neg * feats[1]


def edge_property_features(g: SignedDigraph, x: int, y: int, prior: SignPrior) -> np.ndarray:
    """Bayesian node properties of ``x`` followed by those of ``y`` (8-d)."""
    g.edge_id(x, y)
    tallies = g.tallies()
    px = bayes_node_properties(DegreeTally.from_array(tallies[x]), prior)
    py = bayes_node_properties(DegreeTally.from_array(tallies[y]), prior)
    return np.array(px + py)


# -- batch extraction ------------------------------------------------------------


def batch_type_features(
    g: SignedDigraph,
    edge_ids: np.ndarray,
    prior: SignPrior,
    encoding: str = "kronecker",
    chunk: int = 65536,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """edge_type_features for many edges at once, rows in ``edge_ids`` order.

    ``out`` may be a preallocated ``(len(edge_ids), width)`` array (or view).
    """
    encode = ENCODERS[encoding]
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    width = 2 * NUM_TYPES if encoding == "concat" else NUM_TYPES * NUM_TYPES
    if out is None:
        out = np.empty((len(edge_ids), width))
    tallies = g.tallies()
    node_dist = type_distributions(tallies, prior)
    for lo in range(0, len(edge_ids), chunk):
        ids = edge_ids[lo : lo + chunk]
        x, y = g.src[ids], g.dst[ids]
        block = encode(node_dist[x], node_dist[y])
        hid = np.flatnonzero(g.sign[ids] == HIDDEN)
        if len(hid):
            mix = np.zeros((len(hid), width))
            for s, w in ((POSITIVE, prior.p_pos), (NEGATIVE, prior.p_neg)):
                tx, ty = _hypothesis_tallies(tallies, x[hid], y[hid], s)
                mix += w * encode(type_distributions(tx, prior), type_distributions(ty, prior))
            block[hid] = mix
        out[lo : lo + len(ids)] = block
    return out


def batch_property_features(g: SignedDigraph, edge_ids: np.ndarray, prior: SignPrior) -> np.ndarray:
    props = bayes_properties_matrix(g.tallies(), prior)
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    return np.hstack([props[g.src[edge_ids]], props[g.dst[edge_ids]]])

