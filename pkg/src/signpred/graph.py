"""Signed directed graphs with optionally hidden edge signs.

Edges are stored once, in three parallel arrays (``src``, ``dst``,
``sign``), and indexed twice in CSR form (by source and by target) so that
per-node iteration is O(degree). A sign of ``HIDDEN`` (0) marks an edge whose
existence is known but whose sign is masked.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import numpy as np

POSITIVE = 1
NEGATIVE = -1
HIDDEN = 0

# Column order of the tally matrix returned by SignedDigraph.tallies().
TALLY_COLUMNS = (
    "d_in_pos",
    "d_in_neg",
    "d_in_hidden",
    "d_out_pos",
    "d_out_neg",
    "d_out_hidden",
)


class GraphError(ValueError):
    """Raised for structurally invalid graphs or queries."""


class EdgeListError(GraphError):
    """Raised when an edge-list file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class DegreeTally:
    """Per-node edge counts split by direction and sign.

    ``d_in_hidden`` and ``d_out_hidden`` are the numbers of incoming and
    outgoing edges whose sign is unobserved (``u`` and ``v``).
    """

    d_in_pos: int = 0
    d_in_neg: int = 0
    d_in_hidden: int = 0
    d_out_pos: int = 0
    d_out_neg: int = 0
    d_out_hidden: int = 0

    @property
    def in_degree(self) -> int:
        return self.d_in_pos + self.d_in_neg + self.d_in_hidden

    @property
    def out_degree(self) -> int:
        return self.d_out_pos + self.d_out_neg + self.d_out_hidden

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.d_in_pos,
                self.d_in_neg,
                self.d_in_hidden,
                self.d_out_pos,
                self.d_out_neg,
                self.d_out_hidden,
            ],
            dtype=np.int64,
        )

    @classmethod
    def from_array(cls, row: Sequence[int]) -> "DegreeTally":
        return cls(*(int(v) for v in row))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr(primary: np.ndarray, secondary: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Edge ids grouped by ``primary`` and sorted by ``secondary`` within a group."""
    order = np.lexsort((secondary, primary))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(primary, minlength=n), out=indptr[1:])
    return indptr, order


class SignedDigraph:
    """Immutable signed directed graph over dense node ids ``0..n-1``.

    Parameters
    ----------
    node_count:
        Number of nodes ``n``. Nodes without edges are allowed.
    src, dst:
        Integer arrays of edge endpoints.
    sign:
        Array with entries in ``{1, -1, 0}``; 0 means hidden.
    labels:
        Optional original node identifiers, indexed by dense id.
    """

    def __init__(
        self,
        node_count: int,
        src: Iterable[int],
        dst: Iterable[int],
        sign: Iterable[int],
        labels: Sequence | None = None,
        *,
        _validated: bool = False,
    ):
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        sign = np.asarray(sign, dtype=np.int8).reshape(-1)
        n = int(node_count)
        if not _validated:
            if n < 0:
                raise GraphError("node_count must be non-negative")
            if not (len(src) == len(dst) == len(sign)):
                raise GraphError("src, dst and sign must have equal length")
            if len(src):
                if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n:
                    raise GraphError("edge endpoint outside 0..n-1")
                if np.any(src == dst):
                    raise GraphError("self-loops are not allowed")
                if not np.all(np.isin(sign, (POSITIVE, NEGATIVE, HIDDEN))):
                    raise GraphError("signs must be 1, -1 or 0 (hidden)")
                keys = src * n + dst
                if len(np.unique(keys)) != len(keys):
                    raise GraphError("duplicate ordered pair")
            if labels is not None and len(labels) != n:
                raise GraphError("labels must have one entry per node")
        self._n = n
        self._src = _frozen(src.copy())
        self._dst = _frozen(dst.copy())
        self._sign = _frozen(sign.copy())
        self._labels = list(labels) if labels is not None else None

        out_ptr, out_order = _csr(self._src, self._dst, n)
        in_ptr, in_order = _csr(self._dst, self._src, n)
        self._out_ptr = _frozen(out_ptr)
        self._out_eid = _frozen(out_order)
        self._out_nbr = _frozen(self._dst[out_order])
        self._in_ptr = _frozen(in_ptr)
        self._in_eid = _frozen(in_order)
        self._in_nbr = _frozen(self._src[in_order])

    # -- basic accessors -------------------------------------------------

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._src)

    n = node_count
    m = edge_count

    @property
    def src(self) -> np.ndarray:
        return self._src

    @property
    def dst(self) -> np.ndarray:
        return self._dst

    @property
    def sign(self) -> np.ndarray:
        return self._sign

    @property
    def labels(self) -> list:
        if self._labels is None:
            return list(range(self._n))
        return self._labels

    @property
    def out_ptr(self) -> np.ndarray:
        return self._out_ptr

    @property
    def out_nbr(self) -> np.ndarray:
        return self._out_nbr

    @property
    def out_eid(self) -> np.ndarray:
        return self._out_eid

    @property
    def in_ptr(self) -> np.ndarray:
        return self._in_ptr

    @property
    def in_nbr(self) -> np.ndarray:
        return self._in_nbr

    @property
    def in_eid(self) -> np.ndarray:
        return self._in_eid

    def __repr__(self) -> str:
        return f"SignedDigraph(n={self._n}, m={self.edge_count}, hidden={self.hidden_count})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignedDigraph):
            return NotImplemented
        return (
            self._n == other._n
            and np.array_equal(self._src, other._src)
            and np.array_equal(self._dst, other._dst)
            and np.array_equal(self._sign, other._sign)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self._sign == POSITIVE))

    @property
    def negative_count(self) -> int:
        return int(np.count_nonzero(self._sign == NEGATIVE))

    @property
    def hidden_count(self) -> int:
        return int(np.count_nonzero(self._sign == HIDDEN))

    @property
    def fully_observed(self) -> bool:
        return self.hidden_count == 0

    def _check_node(self, x: int) -> int:
        x = int(x)
        if not 0 <= x < self._n:
            raise GraphError(f"unknown node id {x}")
        return x

    def out_edges(self, x: int) -> list[tuple[int, int]]:
        """``(target, sign)`` pairs for the edges leaving ``x``, by target id."""
        x = self._check_node(x)
        lo, hi = self._out_ptr[x], self._out_ptr[x + 1]
        return list(zip(self._out_nbr[lo:hi].tolist(), self._sign[self._out_eid[lo:hi]].tolist()))

    def in_edges(self, x: int) -> list[tuple[int, int]]:
        """``(source, sign)`` pairs for the edges entering ``x``, by source id."""
        x = self._check_node(x)
        lo, hi = self._in_ptr[x], self._in_ptr[x + 1]
        return list(zip(self._in_nbr[lo:hi].tolist(), self._sign[self._in_eid[lo:hi]].tolist()))

    def edge_id(self, x: int, y: int) -> int:
        """Index of edge ``x -> y`` in the edge arrays; raises if absent."""
        x = self._check_node(x)
        y = self._check_node(y)
        lo, hi = self._out_ptr[x], self._out_ptr[x + 1]
        k = lo + int(np.searchsorted(self._out_nbr[lo:hi], y))
        if k < hi and self._out_nbr[k] == y:
            return int(self._out_eid[k])
        raise GraphError(f"no edge {x} -> {y}")

    def has_edge(self, x: int, y: int) -> bool:
        try:
            self.edge_id(x, y)
        except GraphError:
            return False
        return True

    def with_signs(self, sign: np.ndarray) -> "SignedDigraph":
        """Same edge set with a new sign array (for masking and restoring)."""
        sign = np.asarray(sign, dtype=np.int8)
        if sign.shape != self._sign.shape:
            raise GraphError("sign array length must equal edge count")
        if not np.all(np.isin(sign, (POSITIVE, NEGATIVE, HIDDEN))):
            raise GraphError("signs must be 1, -1 or 0 (hidden)")
        return SignedDigraph(self._n, self._src, self._dst, sign, self._labels, _validated=True)

    # -- derived structures ------------------------------------------------

    @cached_property
    def _tallies(self) -> np.ndarray:
        n = self._n
        t = np.zeros((n, 6), dtype=np.int64)
        for col, s in enumerate((POSITIVE, NEGATIVE, HIDDEN)):
            mask = self._sign == s
            t[:, col] = np.bincount(self._dst[mask], minlength=n)
            t[:, 3 + col] = np.bincount(self._src[mask], minlength=n)
        return _frozen(t)

    def tallies(self) -> np.ndarray:
        """``(n, 6)`` integer matrix of degree tallies, columns as TALLY_COLUMNS."""
        return self._tallies

    @cached_property
    def _undirected(self) -> tuple[np.ndarray, np.ndarray]:
        n = self._n
        a = np.concatenate([self._src, self._dst])
        b = np.concatenate([self._dst, self._src])
        keys = np.unique(a * max(n, 1) + b)
        owner = keys // max(n, 1)
        nbr = keys % max(n, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(owner, minlength=n), out=indptr[1:])
        return _frozen(indptr), _frozen(nbr.astype(np.int64))

    @property
    def nbr_ptr(self) -> np.ndarray:
        """CSR pointer of the direction-agnostic neighbor lists."""
        return self._undirected[0]

    @property
    def nbr(self) -> np.ndarray:
        """Sorted unique neighbors of every node, concatenated (see nbr_ptr)."""
        return self._undirected[1]

    def neighbors(self, x: int) -> np.ndarray:
        x = self._check_node(x)
        ptr, nbr = self._undirected
        return nbr[ptr[x] : ptr[x + 1]]


def degree_tally(g: SignedDigraph, x: int) -> DegreeTally:
    x = g._check_node(x)
    return DegreeTally.from_array(g.tallies()[x])


def common_neighbors(g: SignedDigraph, x: int, y: int) -> list[int]:
    """Nodes adjacent to both ``x`` and ``y`` in either direction, any sign.

    Hidden-sign edges count: their existence is observed.
    """
    x = g._check_node(x)
    y = g._check_node(y)
    if x == y:
        raise GraphError("common_neighbors needs two distinct nodes")
    common = np.intersect1d(g.neighbors(x), g.neighbors(y), assume_unique=True)
    return [int(z) for z in common if z != x and z != y]


# -- edge-list IO ------------------------------------------------------------

_SIGN_TOKENS = {"1": POSITIVE, "+1": POSITIVE, "-1": NEGATIVE, "?": HIDDEN}


def _parse_sign(token: str, line: int, allow_hidden: bool) -> int:
    try:
        s = _SIGN_TOKENS[token]
    except KeyError:
        raise EdgeListError(f"bad sign {token!r} (expected 1, -1 or ?)", line) from None
    if s == HIDDEN and not allow_hidden:
        raise EdgeListError("hidden sign '?' not allowed here", line)
    return s


def _dense_labels(tokens: list[str]) -> tuple[list, np.ndarray]:
    """Map label tokens to dense ids; integer labels sort numerically."""
    try:
        values = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError:
        values = np.array(tokens, dtype=object)
        uniq, inverse = np.unique(values.astype(str), return_inverse=True)
        return uniq.tolist(), inverse.astype(np.int64)
    uniq, inverse = np.unique(values, return_inverse=True)
    return uniq.tolist(), inverse.astype(np.int64)


def load_edge_list(
    stream: TextIO | str,
    *,
    comment: str = "#",
    allow_hidden: bool = True,
    drop_self_loops: bool = False,
    drop_duplicates: bool = False,
) -> SignedDigraph:
    """Parse a whitespace-separated ``src dst sign`` edge list.

    Node labels are remapped to dense ids (sorted numerically when every label
    is an integer, lexicographically otherwise); the original labels are kept
    in ``graph.labels``. Self-loops and repeated ordered pairs are errors
    unless the corresponding ``drop_*`` flag is set, in which case they are
    skipped (the first occurrence of a pair wins).
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    a_tok: list[str] = []
    b_tok: list[str] = []
    signs: list[int] = []
    lines: list[int] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith(comment):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(f"expected 3 fields, got {len(parts)}", lineno)
        a, b, s = parts
        if a == b:
            if drop_self_loops:
                continue
            raise EdgeListError(f"self-loop on node {a}", lineno)
        a_tok.append(a)
        b_tok.append(b)
        signs.append(_parse_sign(s, lineno, allow_hidden))
        lines.append(lineno)

    m = len(signs)
    labels, ids = _dense_labels(a_tok + b_tok)
    src, dst = ids[:m], ids[m:]
    sign = np.array(signs, dtype=np.int8)
    n = len(labels)
    if m:
        keys = src * n + dst
        _, first = np.unique(keys, return_index=True)
        if len(first) != m:
            if drop_duplicates:
                keep = np.sort(first)
                src, dst, sign = src[keep], dst[keep], sign[keep]
            else:
                seen = np.zeros(m, dtype=bool)
                seen[first] = True
                dup = int(np.flatnonzero(~seen)[0])
                raise EdgeListError(
                    f"duplicate edge {a_tok[dup]} -> {b_tok[dup]}", lines[dup]
                )
    return SignedDigraph(n, src, dst, sign, labels, _validated=True)


def read_edge_list(path, **options) -> SignedDigraph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, **options)


def _sign_token(s: int) -> str:
    return "?" if s == HIDDEN else str(int(s))


def write_edge_list(
    g: SignedDigraph,
    stream: TextIO,
    *,
    header: Sequence[str] = (),
    edge_ids: np.ndarray | None = None,
    signs: np.ndarray | None = None,
) -> None:
    """Write edges as ``src dst sign`` lines using the original labels.

    ``edge_ids`` restricts output to a subset; ``signs`` overrides the stored
    signs for that subset (used for holdout files).
    """
    for h in header:
        stream.write(f"# {h}\n")
    labels = g.labels
    ids = np.arange(g.edge_count) if edge_ids is None else np.asarray(edge_ids)
    sgn = g.sign[ids] if signs is None else np.asarray(signs)
    src, dst = g.src[ids], g.dst[ids]
    stream.writelines(
        f"{labels[a]} {labels[b]} {_sign_token(s)}\n"
        for a, b, s in zip(src.tolist(), dst.tolist(), sgn.tolist())
    )


# -- masking -------------------------------------------------------------------


@dataclass(frozen=True)
class Holdout:
    """Edges whose signs were masked, with their true signs."""

    edge_ids: np.ndarray
    signs: np.ndarray
    seed: int
    fraction: float

    def __len__(self) -> int:
        return len(self.edge_ids)


def mask_count(m: int, fraction: float) -> int:
    """Number of edges to hide: ``fraction * m`` rounded half-up."""
    return int(math.floor(fraction * m + 0.5))


def mask_edges(g: SignedDigraph, fraction: float, seed: int) -> tuple[SignedDigraph, Holdout]:
    """Hide the signs of a uniformly random ``fraction`` of the edges.

    The chosen edge ids are returned sorted, with their true signs.
    """
    if not 0.0 <= fraction <= 1.0 or math.isnan(fraction):
        raise GraphError(f"fraction must lie in [0, 1], got {fraction}")
    if not g.fully_observed:
        raise GraphError("mask_edges expects a fully observed graph")
    k = mask_count(g.edge_count, fraction)
    rng = np.random.default_rng(seed)
    ids = np.sort(rng.choice(g.edge_count, size=k, replace=False)).astype(np.int64)
    true = g.sign[ids].copy()
    sign = g.sign.copy()
    sign[ids] = HIDDEN
    return g.with_signs(sign), Holdout(ids, true, int(seed), float(fraction))


def restore_signs(g: SignedDigraph, holdout: Holdout) -> SignedDigraph:
    sign = g.sign.copy()
    sign[holdout.edge_ids] = holdout.signs
    return g.with_signs(sign)


def write_holdout(g: SignedDigraph, holdout: Holdout, stream: TextIO) -> None:
    write_edge_list(
        g,
        stream,
        header=(f"holdout seed={holdout.seed} fraction={holdout.fraction!r}",),
        edge_ids=holdout.edge_ids,
        signs=holdout.signs,
    )


def read_holdout(g: SignedDigraph, stream: TextIO) -> Holdout:
    """Read a holdout file written for (a graph with the same labels as) ``g``."""
    seed, fraction = 0, math.nan
    index = {label: i for i, label in enumerate(g.labels)}
    as_int = all(isinstance(v, int) for v in g.labels)
    ids, signs = [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                if key == "seed":
                    seed = int(val)
                elif key == "fraction":
                    fraction = float(val)
            continue
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(f"expected 3 fields, got {len(parts)}", lineno)
        try:
            a = index[int(parts[0]) if as_int else parts[0]]
            b = index[int(parts[1]) if as_int else parts[1]]
        except (KeyError, ValueError):
            raise EdgeListError("holdout edge refers to an unknown node", lineno) from None
        try:
            ids.append(g.edge_id(a, b))
        except GraphError:
            raise EdgeListError("holdout edge not present in graph", lineno) from None
        signs.append(_parse_sign(parts[2], lineno, allow_hidden=False))
    order = np.argsort(ids, kind="stable")
    return Holdout(
        np.asarray(ids, dtype=np.int64)[order],
        np.asarray(signs, dtype=np.int8)[order],
        seed,
        fraction,
    )
