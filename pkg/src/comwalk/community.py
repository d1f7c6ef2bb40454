"""Louvain community detection by modularity maximization.

Modularity here is the classic weighted form

    Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)

summed over ordered node pairs, with m the total edge weight (each edge
once) and k_i the weighted degree. Directed graphs are symmetrized for
community purposes; walks elsewhere still respect direction.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, InternalError
from .graph import Graph
from .util import SEED_COMM, derived_rng

# minimum incremental gain for a local move to be accepted; guards against
# float noise flipping exact ties
_MOVE_EPS = 1e-12


class Partition:
    """Non-overlapping community assignment with its modularity score.

    assignment maps each node to a dense community id; members is the
    inverse view, a sorted node list per community. Immutable after
    construction.
    """

    def __init__(self, assignment, modularity_score: float):
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.ndim != 1:
            raise DataError("assignment must be a flat node -> community array")
        uniq, dense = np.unique(assignment, return_inverse=True)
        self.assignment = dense.astype(np.int64)
        self.assignment.setflags(write=False)
        self.community_count = len(uniq)
        self.members = [[] for _ in range(self.community_count)]
        for node, c in enumerate(self.assignment):
            self.members[c].append(node)
        self.modularity_score = float(modularity_score)

    def __repr__(self):
        return (f"Partition(communities={self.community_count}, "
                f"Q={self.modularity_score:.6f})")


def modularity(g: Graph, assignment) -> float:
    """Evaluate Q for the given node -> community assignment.

    Works directly from the edge list: the intra-community A-sum over
    ordered pairs is twice the one-per-edge intra weight (a self-loop of
    stored weight w counts as A_ii = 2w), and the degree term groups by
    community. Raises on an edgeless graph, where Q is undefined.
    """
    g = g.symmetrized()
    m = g.total_weight
    if m <= 0:
        raise DataError("modularity is undefined on a graph with no edges")
    assignment = np.asarray(assignment, dtype=np.int64)
    if len(assignment) != g.node_count:
        raise DataError("assignment must cover every node")

    src, dst, wgt = g.edges()
    intra = assignment[src] == assignment[dst]
    intra_sum = 2.0 * float(wgt[intra].sum())

    _, dense = np.unique(assignment, return_inverse=True)
    comm_degree = np.bincount(dense, weights=g.degrees)
    degree_term = float(np.sum(comm_degree ** 2))

    return intra_sum / (2.0 * m) - degree_term / (4.0 * m * m)


def local_moving_pass(g: Graph, assignment, rng):
    """One full Louvain local-moving phase on g.

    Sweeps the nodes in shuffled order, greedily moving each to the
    neighboring community with the largest positive modularity gain,
    and repeats until a complete sweep moves nothing. Gains are computed
    incrementally from community weight totals, never by re-evaluating Q.

    Ties keep the current community when it is among the best, otherwise
    the lowest community id wins. Returns (new assignment, total gain).
    """
    g = g.symmetrized()
    m = g.total_weight
    if m <= 0:
        raise DataError("local moving needs at least one edge")
    n = g.node_count
    comm = np.asarray(assignment, dtype=np.int64)
    if len(comm) != n:
        raise DataError("assignment must cover every node")
    _, comm = np.unique(comm, return_inverse=True)  # dense ids for indexing
    comm = comm.astype(np.int64)

    degrees = g.degrees
    sigma_tot = np.bincount(comm, weights=degrees, minlength=n or 1)
    sigma_tot = sigma_tot.astype(np.float64)

    inv_m = 1.0 / m
    inv_2m2 = 1.0 / (2.0 * m * m)
    total_gain = 0.0
    order = list(range(n))

    moved = True
    while moved:
        moved = False
        rng.shuffle(order)
        for i in order:
            a = int(comm[i])
            k_i = degrees[i]
            nbrs, wgts = g.neighbors(i)

            # weight from i into each neighboring community, self-loop excluded
            links: dict[int, float] = {}
            for j, w in zip(nbrs, wgts):
                if j == i:
                    continue
                c = int(comm[j])
                links[c] = links.get(c, 0.0) + w

            sigma_tot[a] -= k_i  # take i out before comparing destinations
            gain_stay = links.get(a, 0.0) * inv_m - k_i * sigma_tot[a] * inv_2m2
            best_comm, best_gain = a, gain_stay
            for c in sorted(links):
                if c == a:
                    continue
                gain = links[c] * inv_m - k_i * sigma_tot[c] * inv_2m2
                if gain > best_gain + _MOVE_EPS:
                    best_comm, best_gain = c, gain
            sigma_tot[best_comm] += k_i
            if best_comm != a:
                comm[i] = best_comm
                total_gain += best_gain - gain_stay
                moved = True

    return comm, total_gain


def aggregate_graph(g: Graph, assignment) -> Graph:
    """Collapse each community into a single node.

    Inter-community weights are summed into one edge per community pair;
    intra-community weight (each edge once, original self-loops included)
    becomes the stored self-loop weight, which the degree convention then
    counts twice. Total weight and all community degree sums are
    preserved, so modularity of any coarser partition is unchanged.
    """
    g = g.symmetrized()
    assignment = np.asarray(assignment, dtype=np.int64)
    if len(assignment) != g.node_count:
        raise DataError("assignment must cover every node")
    _, dense = np.unique(assignment, return_inverse=True)
    n_comm = int(dense.max()) + 1 if len(dense) else 0

    src, dst, wgt = g.edges()
    cs, cd = dense[src], dense[dst]
    lo, hi = np.minimum(cs, cd), np.maximum(cs, cd)
    keys = lo * n_comm + hi
    uniq, inv = np.unique(keys, return_inverse=True)
    wsum = np.bincount(inv, weights=wgt)
    return Graph(n_comm, False, uniq // n_comm, uniq % n_comm, wsum)


def louvain(g: Graph, max_passes: int = 20, min_gain: float = 1e-7,
            rng_seed: int = 0) -> Partition:
    """Full Louvain: local moving, aggregation, repeat.

    Each pass runs the local-moving phase on the current working graph,
    projects the result onto the original nodes, then aggregates. Stops
    when a pass gains less than min_gain, when communities stop merging,
    or after max_passes. Q over the pass sequence is non-decreasing; the
    history is exposed on the returned Partition as pass_history.
    """
    g = g.symmetrized()
    if g.edge_count == 0:
        raise DataError("community detection needs at least one edge")
    rng = derived_rng(rng_seed, SEED_COMM)

    working = g
    mapping = np.arange(g.node_count)  # original node -> working node
    pass_history = []
    best = np.arange(g.node_count)

    for _ in range(max_passes):
        local, gain = local_moving_pass(
            working, np.arange(working.node_count), rng)
        _, local_dense = np.unique(local, return_inverse=True)
        best = local_dense[mapping]
        pass_history.append(modularity(g, best))
        n_comm = int(local_dense.max()) + 1
        if gain < min_gain or n_comm == working.node_count:
            break
        working = aggregate_graph(working, local_dense)
        mapping = local_dense[mapping]

    if any(b - a < -1e-9 for a, b in zip(pass_history, pass_history[1:])):
        raise InternalError("modularity decreased across passes")

    part = Partition(best, modularity(g, best))
    part.pass_history = pass_history
    return part


def save_communities(partition: Partition, g: Graph, path):
    """Write `node_id community_id` lines, sorted by node."""
    with open(path, "w", encoding="utf-8") as fh:
        for node in range(g.node_count):
            fh.write(f"{g.labels[node]} {int(partition.assignment[node])}\n")


def load_communities(g: Graph, path) -> Partition:
    """Read a community file written by save_communities back into a Partition."""
    assignment = np.full(g.node_count, -1, dtype=np.int64)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 2:
                raise DataError(
                    f"{path}:{line_no}: expected `node community`, "
                    f"got {len(fields)} fields")
            try:
                cid = int(fields[1])
            except ValueError:
                raise DataError(
                    f"{path}:{line_no}: community id {fields[1]!r} "
                    f"is not an integer") from None
            assignment[g.id_of(fields[0])] = cid
    if (assignment < 0).any():
        missing = int((assignment < 0).sum())
        raise DataError(f"community file leaves {missing} nodes unassigned")
    return Partition(assignment, modularity(g, assignment))
