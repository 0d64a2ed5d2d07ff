"""Triad counts, degree features and embeddedness around a node pair.

Triad contexts are indexed ``4 * a + b``. Here ``a`` is the x-z relation,
in the order x->z (+), x->z (-), z->x (+), z->x (-). ``b`` is the z-y
relation, in the order z->y (+), z->y (-), y->z (+), y->z (-).
"""

from __future__ import annotations

import numba
import numpy as np

from .graph import GraphError, SignedDigraph

TRIAD_CONTEXTS = tuple(
    f"x{xd}{xs}z,{zd}{zs}"
    for xd, xs in (("->", "+"), ("->", "-"), ("<-", "+"), ("<-", "-"))
    for zd, zs in (("z->y", "+"), ("z->y", "-"), ("y->z", "+"), ("y->z", "-"))
)

DEGREE_COLUMNS = (
    "d_in_pos(y)",
    "d_in_neg(y)",
    "d_out_pos(x)",
    "d_out_neg(x)",
    "common_neighbors(x,y)",
    "d_out(x)",
    "d_in(y)",
)

# Relation codes stored per (node, neighbor) slot; ABSENT means no edge that way.
ABSENT = 2


def _relation_arrays(g: SignedDigraph) -> tuple[np.ndarray, np.ndarray]:
    """Sign of the edge node->neighbor and neighbor->node for every nbr slot."""
    n = max(g.node_count, 1)
    ptr, nbr = g.nbr_ptr, g.nbr
    owner = np.repeat(np.arange(g.node_count, dtype=np.int64), np.diff(ptr))
    keys = owner * n + nbr
    out_rel = np.full(len(nbr), ABSENT, dtype=np.int8)
    in_rel = np.full(len(nbr), ABSENT, dtype=np.int8)
    if g.edge_count:
        fwd = np.searchsorted(keys, g.src * n + g.dst)
        out_rel[fwd] = g.sign
        back = np.searchsorted(keys, g.dst * n + g.src)
        in_rel[back] = g.sign
    return out_rel, in_rel


@numba.njit(cache=True, inline="always")
def _find(nbr, lo, hi, z):
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbr[mid] < z:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, inline="always")
def _slot(code, reverse):
    if code == 1:
        return 2 if reverse else 0
    if code == -1:
        return 3 if reverse else 1
    return -1


@numba.njit(cache=True, parallel=True)
def _pair_kernel(ptr, nbr, out_rel, in_rel, xs, ys, triads, embed):
    for e in numba.prange(len(xs)):
        x = xs[e]
        y = ys[e]
        # Walk the shorter list, bisect the longer one.
        a, b = x, y
        if ptr[x + 1] - ptr[x] > ptr[y + 1] - ptr[y]:
            a, b = y, x
        blo = ptr[b]
        bhi = ptr[b + 1]
        count = 0
        for i in range(ptr[a], ptr[a + 1]):
            z = nbr[i]
            if z == x or z == y:
                continue
            j = _find(nbr, blo, bhi, z)
            if j >= bhi or nbr[j] != z:
                continue
            blo = j + 1
            count += 1
            ix = i if a == x else j
            iy = j if a == x else i
            # x's slot for z: out_rel is x->z, in_rel is z->x.
            s0 = _slot(out_rel[ix], False)
            s1 = _slot(in_rel[ix], True)
            # y's slot for z: in_rel is z->y, out_rel is y->z.
            t0 = _slot(in_rel[iy], False)
            t1 = _slot(out_rel[iy], True)
            if s0 >= 0:
                if t0 >= 0:
                    triads[e, 4 * s0 + t0] += 1
                if t1 >= 0:
                    triads[e, 4 * s0 + t1] += 1
            if s1 >= 0:
                if t0 >= 0:
                    triads[e, 4 * s1 + t0] += 1
                if t1 >= 0:
                    triads[e, 4 * s1 + t1] += 1
        embed[e] = count


class PairScanner:
    """Precomputed adjacency for repeated triad/embeddedness queries on ``g``."""

    def __init__(self, g: SignedDigraph):
        self.graph = g
        self._out_rel, self._in_rel = _relation_arrays(g)

    def scan(self, xs, ys) -> tuple[np.ndarray, np.ndarray]:
        """Triad counts ``(k, 16)`` and embeddedness ``(k,)`` for node pairs."""
        xs = np.ascontiguousarray(xs, dtype=np.int64)
        ys = np.ascontiguousarray(ys, dtype=np.int64)
        if np.any(xs == ys):
            raise GraphError("triad features need two distinct nodes")
        n = self.graph.node_count
        if len(xs) and (min(xs.min(), ys.min()) < 0 or max(xs.max(), ys.max()) >= n):
            raise GraphError("unknown node id")
        triads = np.zeros((len(xs), 16), dtype=np.int64)
        embed = np.zeros(len(xs), dtype=np.int64)
        g = self.graph
        _pair_kernel(g.nbr_ptr, g.nbr, self._out_rel, self._in_rel, xs, ys, triads, embed)
        return triads, embed


def triad_features(g: SignedDigraph, x: int, y: int) -> np.ndarray:
    """Counts of the 16 signed directed two-hop contexts between ``x`` and ``y``.

    Only edges with an observed sign form contexts. When ``z`` is linked to
    ``x`` (or ``y``) in both directions, each edge pairs separately.
    """
    triads, _ = PairScanner(g).scan([x], [y])
    return triads[0]


def embeddedness(g: SignedDigraph, x: int, y: int) -> int:
    _, embed = PairScanner(g).scan([x], [y])
    return int(embed[0])


def edge_embeddedness(g: SignedDigraph, scanner: PairScanner | None = None) -> np.ndarray:
    """Number of common neighbors of every edge's endpoints."""
    scanner = scanner or PairScanner(g)
    return scanner.scan(g.src, g.dst)[1]


def _degree_rows(tallies: np.ndarray, xs, ys, embed) -> np.ndarray:
    tx = tallies[xs]
    ty = tallies[ys]
    return np.column_stack(
        [
            ty[:, 0],
            ty[:, 1],
            tx[:, 3],
            tx[:, 4],
            embed,
            tx[:, 3] + tx[:, 4] + tx[:, 5],
            ty[:, 0] + ty[:, 1] + ty[:, 2],
        ]
    ).astype(np.float64)


def degree_features(g: SignedDigraph, x: int, y: int) -> np.ndarray:
    """The seven degree features of the pair, signed counts from observed edges."""
    if int(x) == int(y):
        raise GraphError("degree features need two distinct nodes")
    emb = embeddedness(g, x, y)
    return _degree_rows(g.tallies(), np.array([x]), np.array([y]), np.array([emb]))[0]


def batch_structural_features(
    g: SignedDigraph, edge_ids: np.ndarray, scanner: PairScanner | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Triad ``(k, 16)``, degree ``(k, 7)`` and embeddedness ``(k,)`` per edge."""
    scanner = scanner or PairScanner(g)
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    xs, ys = g.src[edge_ids], g.dst[edge_ids]
    triads, embed = scanner.scan(xs, ys)
    return triads.astype(np.float64), _degree_rows(g.tallies(), xs, ys, embed), embed

