"""The 16 node types and the sign logic of their interactions.

A node's incoming edges fall in one of four classes (none, all positive,
all negative, mixed), and likewise its outgoing edges; the 4 x 4 pairs are
the node types N1..N16. Only observed signs enter the classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import DegreeTally, SignedDigraph

EPSILON = 1e-10
NUM_TYPES = 16


class EdgeClass(enum.IntEnum):
    NONE = 0
    ALL_POS = 1
    ALL_NEG = 2
    MIXED = 3


_N, _P, _M, _X = EdgeClass.NONE, EdgeClass.ALL_POS, EdgeClass.ALL_NEG, EdgeClass.MIXED

# Type id -> (incoming class, outgoing class).
TYPE_CLASSES: dict[int, tuple[EdgeClass, EdgeClass]] = {
    1: (_N, _P),
    2: (_N, _M),
    3: (_N, _X),
    4: (_P, _N),
    5: (_M, _N),
    6: (_X, _N),
    7: (_M, _M),
    8: (_P, _P),
    9: (_P, _M),
    10: (_M, _P),
    11: (_X, _M),
    12: (_X, _P),
    13: (_P, _X),
    14: (_M, _X),
    15: (_X, _X),
    16: (_N, _N),
}

# TYPE_OF[in_class, out_class] -> type id in 1..16.
TYPE_OF = np.zeros((4, 4), dtype=np.int64)
for _t, (_i, _o) in TYPE_CLASSES.items():
    TYPE_OF[_i, _o] = _t
TYPE_OF.setflags(write=False)

IN_CLASS_OF = np.array([0] + [int(TYPE_CLASSES[t][0]) for t in range(1, 17)], dtype=np.int64)
OUT_CLASS_OF = np.array([0] + [int(TYPE_CLASSES[t][1]) for t in range(1, 17)], dtype=np.int64)


def edge_class(pos, neg):
    """Edge class from positive/negative counts; works elementwise on arrays."""
    pos = np.asarray(pos)
    neg = np.asarray(neg)
    cls = (pos > 0).astype(np.int64) + 2 * (neg > 0).astype(np.int64)
    return cls if cls.ndim else EdgeClass(int(cls))


def type_of(in_class, out_class):
    t = TYPE_OF[np.asarray(in_class), np.asarray(out_class)]
    return int(t) if np.ndim(t) == 0 else t


def classify_node(tally: DegreeTally, include_hidden: bool = False) -> int:
    """Node type id (1..16) of a node from its observed-sign counts.

    Hidden-sign edges never decide a class. ``include_hidden`` is accepted for
    diagnostics only: when set, hidden edges are rejected rather than silently
    dropped, so a caller can assert the node is fully observed.
    """
    if include_hidden and (tally.d_in_hidden or tally.d_out_hidden):
        raise ValueError("node has hidden edges; its type is not deterministic")
    return type_of(
        edge_class(tally.d_in_pos, tally.d_in_neg),
        edge_class(tally.d_out_pos, tally.d_out_neg),
    )


def classify_tallies(tallies: np.ndarray) -> np.ndarray:
    """Vectorized classify_node over an ``(n, 6)`` tally matrix."""
    t = np.asarray(tallies)
    return TYPE_OF[edge_class(t[:, 0], t[:, 1]), edge_class(t[:, 3], t[:, 4])]


def node_types(g: SignedDigraph) -> np.ndarray:
    """Type id of every node of ``g``."""
    return classify_tallies(g.tallies())


class NodeProperties(NamedTuple):
    p_in_pos: float
    p_in_neg: float
    p_out_pos: float
    p_out_neg: float


def node_properties(tally: DegreeTally) -> NodeProperties:
    """Positive/negative fractions of incoming and outgoing observed edges."""
    din = tally.d_in_pos + tally.d_in_neg + EPSILON
    dout = tally.d_out_pos + tally.d_out_neg + EPSILON
    return NodeProperties(
        tally.d_in_pos / din,
        tally.d_in_neg / din,
        tally.d_out_pos / dout,
        tally.d_out_neg / dout,
    )


def type_onehot(t: int) -> np.ndarray:
    if not 1 <= t <= NUM_TYPES:
        raise ValueError(f"node type must be in 1..16, got {t}")
    v = np.zeros(NUM_TYPES)
    v[t - 1] = 1.0
    return v


class SignConstraint(enum.Enum):
    MUST_POSITIVE = "+"
    MUST_NEGATIVE = "-"
    UNDETERMINED = "?"
    FORBIDDEN = "x"


def _constraint_code(s, t):
    """0 forbidden, 1 must-positive, 2 must-negative, 3 undetermined.

    ``s`` is the source's outgoing class, ``t`` the target's incoming class.
    """
    s = np.asarray(s)
    t = np.asarray(t)
    forbidden = (s == _N) | (t == _N) | ((s == _P) & (t == _M)) | ((s == _M) & (t == _P))
    pos = (s == _P) | (t == _P)
    neg = (s == _M) | (t == _M)
    return np.where(forbidden, 0, np.where(pos, 1, np.where(neg, 2, 3)))


_CODE_TO_CONSTRAINT = (
    SignConstraint.FORBIDDEN,
    SignConstraint.MUST_POSITIVE,
    SignConstraint.MUST_NEGATIVE,
    SignConstraint.UNDETERMINED,
)

# INTERACTION[a, b] for type ids a (source) and b (target); row/col 0 unused.
INTERACTION = np.zeros((17, 17), dtype=np.int64)
INTERACTION[1:, 1:] = _constraint_code(OUT_CLASS_OF[1:, None], IN_CLASS_OF[None, 1:])
INTERACTION.setflags(write=False)


def interaction_sign(source: int, target: int) -> SignConstraint:
    """What the endpoint types alone say about the sign of ``source -> target``."""
    for t in (source, target):
        if not 1 <= t <= NUM_TYPES:
            raise ValueError(f"node type must be in 1..16, got {t}")
    return _CODE_TO_CONSTRAINT[INTERACTION[source, target]]


@dataclass(frozen=True)
class Census:
    must_positive: int
    must_negative: int
    undetermined: int
    forbidden: int

    @property
    def determined(self) -> int:
        return self.must_positive + self.must_negative

    def __iter__(self):
        return iter((self.must_positive, self.must_negative, self.undetermined))


def edge_constraints(g: SignedDigraph, types: np.ndarray | None = None) -> np.ndarray:
    """Constraint code per edge (see ``_constraint_code``)."""
    if types is None:
        types = node_types(g)
    return INTERACTION[types[g.src], types[g.dst]]


def census_determined(g: SignedDigraph) -> Census:
    """Count edges whose sign the endpoint types force, using full-graph types.

    Unpacks as ``(must_positive, must_negative, undetermined)``; ``forbidden``
    is a diagnostic that stays zero on consistent input.
    """
    if not g.fully_observed:
        raise ValueError("census_determined expects a fully observed graph")
    counts = np.bincount(edge_constraints(g), minlength=4)
    return Census(int(counts[1]), int(counts[2]), int(counts[3]), int(counts[0]))


def type_fractions(g: SignedDigraph) -> np.ndarray:
    """Fraction of nodes of each type, index ``t - 1`` for type ``t``."""
    if g.node_count == 0:
        return np.zeros(NUM_TYPES)
    counts = np.bincount(node_types(g), minlength=NUM_TYPES + 1)[1:]
    return counts / g.node_count
