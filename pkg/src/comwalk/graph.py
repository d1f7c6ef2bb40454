"""Weighted graph storage, O(1) neighbor sampling, and edge splitting.

Nodes are dense integers assigned in first-seen order; the original string
ids live in a sidecar list. Adjacency is kept in compressed form (offset
array plus flat neighbor/weight arrays) so hot loops index arrays rather
than chase hash maps. Instances are immutable once built and safe to share
across any number of concurrent readers.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, EdgeListParseError
from .util import SEED_SPLIT, derived_generator


class Graph:
    """Immutable multigraph over dense integer node ids.

    Parallel edges are preserved as separate adjacency entries and
    self-loops are allowed. In the undirected case each edge (u, v, w)
    appears in both endpoint lists, a self-loop only in the one list it
    has, and ``degree`` counts a self-loop twice (the standard modularity
    convention). ``total_weight`` is the modularity denominator's m:
    every edge counted once regardless of direction.
    """

    def __init__(self, node_count, directed, src, dst, weight=None, labels=None):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if weight is None:
            weight = np.ones(len(src), dtype=np.float64)
        else:
            weight = np.asarray(weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(weight)):
            raise DataError("edge arrays must have equal length")
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or max(src.max(), dst.max()) >= node_count):
            raise DataError("edge endpoint out of range for node_count")
        if len(weight) and (not np.all(np.isfinite(weight)) or weight.min() <= 0):
            raise DataError("edge weights must be finite and > 0")
        if labels is None:
            labels = [str(i) for i in range(node_count)]
        elif len(labels) != node_count:
            raise DataError("label list length does not match node_count")

        self.node_count = int(node_count)
        self.directed = bool(directed)
        self.labels = list(labels)
        self._ids = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._ids) != node_count:
            raise DataError("node labels must be unique")

        # canonical edge multiset, each input edge exactly once
        self._esrc = src
        self._edst = dst
        self._ewgt = weight

        if directed:
            entry_src, entry_dst, entry_wgt = src, dst, weight
        else:
            rev = src != dst  # self-loops stored once
            entry_src = np.concatenate([src, dst[rev]])
            entry_dst = np.concatenate([dst, src[rev]])
            entry_wgt = np.concatenate([weight, weight[rev]])

        order = np.argsort(entry_src, kind="stable")
        self._nbr = entry_dst[order].astype(np.int64)
        self._wgt = entry_wgt[order]
        counts = np.bincount(entry_src, minlength=node_count)
        self._offsets = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=self._offsets[1:])

        self._degrees = np.bincount(entry_src, weights=entry_wgt,
                                    minlength=node_count)
        if not directed:
            loop = ~rev
            if loop.any():  # count self-loops twice toward degree
                self._degrees += np.bincount(src[loop], weights=weight[loop],
                                             minlength=node_count)
        self.total_weight = float(weight.sum())

        for arr in (self._esrc, self._edst, self._ewgt, self._nbr,
                    self._wgt, self._offsets, self._degrees):
            arr.setflags(write=False)

    @classmethod
    def from_pairs(cls, pairs, directed=False, node_count=None, labels=None):
        """Build from (u, v) or (u, v, w) tuples of integer ids."""
        src, dst, wgt = [], [], []
        for e in pairs:
            src.append(e[0])
            dst.append(e[1])
            wgt.append(e[2] if len(e) > 2 else 1.0)
        if node_count is None:
            node_count = max((max(s, d) for s, d in zip(src, dst)), default=-1) + 1
        return cls(node_count, directed, src, dst, wgt, labels=labels)

    def degree(self, u: int) -> float:
        return float(self._degrees[u])

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degree of every node (read-only array)."""
        return self._degrees

    @property
    def edge_count(self) -> int:
        return len(self._esrc)

    def neighbors(self, u: int):
        """(neighbor ids, weights) views of u's adjacency entries."""
        lo, hi = self._offsets[u], self._offsets[u + 1]
        return self._nbr[lo:hi], self._wgt[lo:hi]

    def out_degree_count(self, u: int) -> int:
        """Number of adjacency entries of u (parallel edges counted)."""
        return int(self._offsets[u + 1] - self._offsets[u])

    def edges(self):
        """(src, dst, weight) arrays listing every edge exactly once."""
        return self._esrc, self._edst, self._ewgt

    def label_of(self, u: int) -> str:
        return self.labels[u]

    def id_of(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise DataError(f"unknown node id {label!r}") from None

    def symmetrized(self) -> "Graph":
        """Undirected view of a directed graph (self if already undirected)."""
        if not self.directed:
            return self
        return Graph(self.node_count, False, self._esrc, self._edst,
                     self._ewgt, labels=self.labels)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return (f"Graph({kind}, nodes={self.node_count}, "
                f"edges={self.edge_count}, m={self.total_weight:g})")


def weighted_degree(g: Graph, u: int) -> float:
    """Sum of weights of edges incident to u (out-edges only if directed)."""
    return g.degree(u)


class AliasSampler:
    """Per-node alias tables for O(1) weight-proportional neighbor draws.

    Tables are built over the raw adjacency entries, so parallel edges
    accumulate probability naturally. Immutable after construction.
    """

    def __init__(self, graph: Graph):
        self._nbrs = []
        self._prob = []
        self._alias = []
        for u in range(graph.node_count):
            ids, wgt = graph.neighbors(u)
            self._nbrs.append(ids.tolist())
            prob, alias = _alias_setup(wgt)
            self._prob.append(prob)
            self._alias.append(alias)

    def neighbor_lists(self):
        """Per-node neighbor id lists (shared; treat as read-only)."""
        return self._nbrs

    def draw(self, u: int, rng):
        """One weighted draw from u's neighbors, or None if u has none.

        Consumes exactly one randrange and one random from rng, which keeps
        replay of recorded decision streams possible.
        """
        nbrs = self._nbrs[u]
        if not nbrs:
            return None
        i = rng.randrange(len(nbrs))
        if rng.random() < self._prob[u][i]:
            return nbrs[i]
        return nbrs[self._alias[u][i]]


def _alias_setup(weights):
    """Vose's alias method: returns (prob, alias) lists for one node."""
    k = len(weights)
    if k == 0:
        return [], []
    total = float(np.sum(weights))
    scaled = [w * k / total for w in weights]
    prob = [0.0] * k
    alias = [0] * k
    small = [i for i, s in enumerate(scaled) if s < 1.0]
    large = [i for i, s in enumerate(scaled) if s >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        (small if scaled[l] < 1.0 else large).append(l)
    for i in large:
        prob[i] = 1.0
    for i in small:  # only reachable through float round-off
        prob[i] = 1.0
    return prob, alias


def sample_neighbor(g: Graph, sampler: AliasSampler, u: int, rng):
    """Weighted neighbor draw for u; None when u has no out-neighbors."""
    return sampler.draw(u, rng)


def load_edge_list(source, directed=False, weighted=True, comment_prefix="#"):
    """Parse a whitespace-delimited edge list into a Graph.

    Lines are `src dst [weight]`; blank lines and lines starting with
    comment_prefix are skipped. Node tokens are arbitrary strings, mapped
    to dense ids in first-seen order. Missing weights default to 1.0; with
    weighted=False any weight column is ignored. Duplicate lines become
    parallel edges. Malformed lines raise EdgeListParseError with the
    1-based line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh, directed, weighted, comment_prefix)
    path = getattr(source, "name", None)
    if isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")

    ids: dict[str, int] = {}
    labels: list[str] = []
    src, dst, wgt = [], [], []

    def intern(tok):
        i = ids.get(tok)
        if i is None:
            i = len(labels)
            ids[tok] = i
            labels.append(tok)
        return i

    for line_no, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(comment_prefix):
            continue
        fields = stripped.split()
        if len(fields) not in (2, 3):
            raise EdgeListParseError(
                f"expected 2 or 3 fields, got {len(fields)}", line_no, path)
        w = 1.0
        if weighted and len(fields) == 3:
            try:
                w = float(fields[2])
            except ValueError:
                raise EdgeListParseError(
                    f"weight {fields[2]!r} is not a number", line_no, path
                ) from None
            if not math.isfinite(w) or w <= 0:
                raise EdgeListParseError(
                    f"weight must be finite and > 0, got {fields[2]}",
                    line_no, path)
        src.append(intern(fields[0]))
        dst.append(intern(fields[1]))
        wgt.append(w)

    return Graph(len(labels), directed, src, dst, wgt, labels=labels)


def save_edge_list(g: Graph, path):
    """Write g as an edge list, each edge once, using original node ids.

    The weight column is emitted only when some weight differs from 1.0,
    with full precision so a reload reproduces the adjacency exactly.
    """
    src, dst, wgt = g.edges()
    with_weights = bool(len(wgt)) and bool(np.any(wgt != 1.0))
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in zip(src, dst, wgt):
            if with_weights:
                fh.write(f"{g.labels[u]} {g.labels[v]} {float(w)!r}\n")
            else:
                fh.write(f"{g.labels[u]} {g.labels[v]}\n")


@dataclass
class EdgeSplit:
    """Result of removing test edges from a graph.

    residual keeps every node of the original graph (including any left
    isolated). removed_edges and negative_edges have equal length; the
    negatives are verified non-edges of the ORIGINAL graph.
    """
    residual: Graph
    removed_edges: list
    negative_edges: list


def split_edges(g: Graph, removal_fraction: float, rng_seed: int) -> EdgeSplit:
    """Remove a uniform random floor(fraction·|E|) subset of edges.

    No connectivity constraint is applied to the residual. An equally
    sized negative sample is drawn uniformly from the non-edges, without
    duplicates or self-loops. Deterministic for a fixed seed.
    """
    if g.directed:
        raise DataError("edge splitting requires an undirected graph")
    if not 0.0 < removal_fraction < 1.0:
        raise DataError("removal_fraction must lie in (0, 1)")
    n_edges = g.edge_count
    n_remove = int(removal_fraction * n_edges)
    if n_remove < 1:
        raise DataError("removal_fraction too small: no edge would be removed")

    rng = derived_generator(rng_seed, SEED_SPLIT)
    perm = rng.permutation(n_edges)
    removed_idx = perm[:n_remove]
    keep = np.ones(n_edges, dtype=bool)
    keep[removed_idx] = False

    src, dst, wgt = g.edges()
    removed = [(int(src[i]), int(dst[i])) for i in removed_idx]
    residual = Graph(g.node_count, False, src[keep], dst[keep], wgt[keep],
                     labels=g.labels)
    negatives = sample_non_edges(g, n_remove, rng)
    return EdgeSplit(residual, removed, negatives)


def sample_non_edges(g: Graph, count: int, rng, exclude=()) -> list:
    """Uniform sample of `count` distinct non-edges of g, as (u, v) u < v.

    Self-loops are never produced and pairs in `exclude` are avoided.
    Falls back to full enumeration when the request is a large share of
    the available non-edges; errors when the graph is too dense to supply
    enough of them.
    """
    n = g.node_count
    src, dst, _ = g.edges()
    taken = {(min(int(u), int(v)), max(int(u), int(v)))
             for u, v in zip(src, dst) if u != v}
    taken.update((min(u, v), max(u, v)) for u, v in exclude if u != v)
    capacity = n * (n - 1) // 2 - len(taken)
    if count > capacity:
        raise DataError(
            f"graph too dense: requested {count} non-edges, "
            f"only {capacity} exist")

    if count > capacity // 2:
        pool = [(u, v) for u in range(n) for v in range(u + 1, n)
                if (u, v) not in taken]
        idx = rng.permutation(len(pool))[:count]
        return [pool[i] for i in idx]

    out = []
    seen = set()
    while len(out) < count:
        batch = max(256, 2 * (count - len(out)))
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        for u, v in zip(us, vs):
            if u == v:
                continue
            key = (int(min(u, v)), int(max(u, v)))
            if key in taken or key in seen:
                continue
            seen.add(key)
            out.append(key)
            if len(out) == count:
                break
    return out


def save_edge_split(split: EdgeSplit, residual_path, removed_path,
                    negative_path):
    """Write the three split components as edge-list files."""
    save_edge_list(split.residual, residual_path)
    labels = split.residual.labels
    for pairs, path in ((split.removed_edges, removed_path),
                        (split.negative_edges, negative_path)):
        with open(path, "w", encoding="utf-8") as fh:
            for u, v in pairs:
                fh.write(f"{labels[u]} {labels[v]}\n")
