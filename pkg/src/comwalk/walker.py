"""Community-aware random walks and corpus assembly.

Each step from the current node c draws r uniform in [0,1): with
probability alpha (r < alpha) it jumps to a uniformly chosen member of
c's community other than c; otherwise it moves to a weight-proportional
out-neighbor of c. When the chosen branch has nothing to offer (no
out-neighbors at all, or an empty community pool) the walk backtracks:
the path is cut after the last node that still has a neighbor the walk
has never visited, and stepping resumes there; if no such node exists
the walk ends early. Visited status persists across cuts (a neighbor
abandoned by an earlier cut is not "new"), which is what guarantees the
walk always terminates. Community jumps ignore edge weights and always
use the CURRENT node's community.

With alpha = 0 no r is drawn, so the step stream is exactly that of a
plain weighted random walk.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

from .errors import DataError
from .graph import AliasSampler, Graph
from .util import SEED_SHUFFLE, SEED_WALK, derived_rng

# A walk is a plain list of node ids; element 0 is the start node.
Walk = list


@dataclass(frozen=True)
class WalkConfig:
    """Walk generation parameters.

    alpha is the community-jump probability; max_length caps each walk's
    node count; walks_per_node is how many passes over the shuffled node
    set the corpus makes. Defaults are the classification settings (link
    prediction conventionally uses alpha = 0.15).
    """
    alpha: float = 0.2
    max_length: int = 80
    walks_per_node: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DataError("alpha must lie in [0, 1]")
        if self.max_length < 1:
            raise DataError("max_length must be >= 1")
        if self.walks_per_node < 1:
            raise DataError("walks_per_node must be >= 1")


def walk_rng(master_seed: int, iteration: int, node: int):
    """The RNG stream owning walk (iteration, node).

    Streams are derived independently per walk, so a corpus is
    bit-identical however the walks are distributed over workers.
    """
    return derived_rng(master_seed, SEED_WALK, iteration, node)


class _WalkEngine:
    """Shared immutable state for walking one graph/partition pair."""

    def __init__(self, graph: Graph, partition, sampler=None):
        self._sampler = sampler if sampler is not None else AliasSampler(graph)
        self._nbrs = self._sampler.neighbor_lists()
        self._comm = partition.assignment.tolist()
        self._members = partition.members

    def walk(self, start, alpha, max_length, rng, step_trace=None):
        path = [start]
        visited = {start}
        nbrs = self._nbrs
        while len(path) < max_length:
            cur = path[-1]
            if alpha > 0.0 and rng.random() < alpha:
                pool = self._members[self._comm[cur]]
                if len(pool) <= 1:  # nobody to jump to
                    before = len(path)
                    if not self._backtrack(path, visited):
                        break
                    # with alpha = 1 a neighbor step can never happen, so a
                    # backtrack that goes nowhere would retry forever
                    if alpha >= 1.0 and len(path) == before:
                        break
                    continue
                nxt = pool[rng.randrange(len(pool))]
                while nxt == cur:
                    nxt = pool[rng.randrange(len(pool))]
                if step_trace is not None:
                    step_trace.append("community")
            else:
                if not nbrs[cur]:
                    if not self._backtrack(path, visited):
                        break
                    continue
                nxt = self._sampler.draw(cur, rng)
                if step_trace is not None:
                    step_trace.append("neighbor")
            path.append(nxt)
            visited.add(nxt)
        return path

    def _backtrack(self, path, visited):
        """Cut the path after the last node with an unvisited neighbor.

        Returns False when no node on the path qualifies, which ends the
        walk. Only the path shrinks; the visited set never does.
        """
        for idx in range(len(path) - 1, -1, -1):
            u = path[idx]
            if any(v not in visited for v in self._nbrs[u]):
                del path[idx + 1:]
                return True
        return False


def community_aware_walk(g: Graph, start: int, partition, cfg: WalkConfig,
                         rng, sampler=None, step_trace=None) -> Walk:
    """One walk from start under cfg, driven by the given rng.

    Pass a prebuilt AliasSampler to avoid rebuilding tables per call.
    step_trace, if a list, receives "community"/"neighbor" per step taken
    (diagnostic; backtracks and the start node leave no entry).
    """
    if not 0 <= start < g.node_count:
        raise DataError(f"start node {start} out of range")
    return _WalkEngine(g, partition, sampler).walk(
        start, cfg.alpha, cfg.max_length, rng, step_trace)


# fork-inherited state for pool workers
_SHARED = None


def _pool_task(task):
    iteration, nodes = task
    engine, cfg = _SHARED
    return [engine.walk(v, cfg.alpha, cfg.max_length,
                        walk_rng(cfg.rng_seed, iteration, v))
            for v in nodes]


def generate_corpus(g: Graph, partition, cfg: WalkConfig,
                    workers: int = 1) -> list:
    """All walks_per_node * node_count walks, in a deterministic order.

    Iteration i visits every node once in an order shuffled by a stream
    seeded from (rng_seed, i); each walk then runs on its own stream from
    (rng_seed, i, node). Output is bit-identical for a fixed seed no
    matter how many workers run.
    """
    orders = []
    for it in range(cfg.walks_per_node):
        order = list(range(g.node_count))
        derived_rng(cfg.rng_seed, SEED_SHUFFLE, it).shuffle(order)
        orders.append(order)

    engine = _WalkEngine(g, partition)
    if workers <= 1:
        return [engine.walk(v, cfg.alpha, cfg.max_length,
                            walk_rng(cfg.rng_seed, it, v))
                for it, order in enumerate(orders) for v in order]

    chunk = max(1, -(-g.node_count // (workers * 4)))
    tasks = [(it, order[i:i + chunk])
             for it, order in enumerate(orders)
             for i in range(0, len(order), chunk)]
    global _SHARED
    _SHARED = (engine, cfg)
    try:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=workers) as pool:
            parts = pool.map(_pool_task, tasks, chunksize=1)
    finally:
        _SHARED = None
    return [w for part in parts for w in part]


def save_walks(corpus, g: Graph, path):
    """One walk per line, space-separated original node ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus:
            fh.write(" ".join(g.labels[v] for v in walk))
            fh.write("\n")
