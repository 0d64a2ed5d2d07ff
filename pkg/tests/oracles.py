"""Slow, independent reference implementations used to check the fast code."""

from __future__ import annotations

import itertools

import numpy as np

from signpred.graph import SignedDigraph

# (in_class, out_class) -> type id, written out by hand from the type table.
TYPE_TABLE = {
    (0, 1): 1, (0, 2): 2, (0, 3): 3,
    (1, 0): 4, (2, 0): 5, (3, 0): 6,
    (2, 2): 7, (1, 1): 8, (1, 2): 9, (2, 1): 10,
    (3, 2): 11, (3, 1): 12, (1, 3): 13, (2, 3): 14, (3, 3): 15,
    (0, 0): 16,
}


def side_class(signs) -> int:
    pos = any(s > 0 for s in signs)
    neg = any(s < 0 for s in signs)
    return int(pos) + 2 * int(neg)


def class_distribution(observed: int, k: int, p_pos: float) -> np.ndarray:
    """Enumerate all 2**k sign assignments of the hidden edges."""
    has_pos = observed in (1, 3)
    has_neg = observed in (2, 3)
    dist = np.zeros(4)
    for signs in itertools.product((1, -1), repeat=k):
        w = 1.0
        for s in signs:
            w *= p_pos if s > 0 else 1.0 - p_pos
        cls = int(has_pos or 1 in signs) + 2 * int(has_neg or -1 in signs)
        dist[cls] += w
    return dist


def random_graph(rng, n_max=30, density=0.15, hidden=0.0, p_pos=0.75) -> SignedDigraph:
    n = int(rng.integers(2, n_max + 1))
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    sign = np.where(rng.random(len(src)) < p_pos, 1, -1)
    sign[rng.random(len(src)) < hidden] = 0
    return SignedDigraph(n, src, dst, sign)


def edge_dict(g: SignedDigraph) -> dict:
    return {(int(a), int(b)): int(s) for a, b, s in zip(g.src, g.dst, g.sign)}


def triads(g: SignedDigraph, x: int, y: int) -> np.ndarray:
    """Triple loop over every third node and every edge orientation."""
    edges = edge_dict(g)
    out = np.zeros(16, dtype=np.int64)
    for z in range(g.node_count):
        if z in (x, y):
            continue
        a_slots = []
        for (u, v), a in (((x, z), 0), ((z, x), 2)):
            s = edges.get((u, v), 0)
            if s:
                a_slots.append(a + (0 if s > 0 else 1))
        b_slots = []
        for (u, v), b in (((z, y), 0), ((y, z), 2)):
            s = edges.get((u, v), 0)
            if s:
                b_slots.append(b + (0 if s > 0 else 1))
        for a in a_slots:
            for b in b_slots:
                out[4 * a + b] += 1
    return out


def embeddedness(g: SignedDigraph, x: int, y: int) -> int:
    edges = edge_dict(g)
    nb = lambda u: {b for (a, b) in edges if a == u} | {a for (a, b) in edges if b == u}
    return len((nb(x) & nb(y)) - {x, y})


def planted_graph(n=600, m=6000, seed=0) -> SignedDigraph:
    """Random digraph whose signs depend on a hidden per-target quality."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    keep = src != dst
    keys = np.unique(src[keep] * n + dst[keep])
    src, dst = keys // n, keys % n
    quality = rng.normal(size=n)
    p = 1 / (1 + np.exp(-(2.5 * quality[dst] + 1.5)))
    sign = np.where(rng.random(len(src)) < p, 1, -1)
    return SignedDigraph(n, src, dst, sign)
