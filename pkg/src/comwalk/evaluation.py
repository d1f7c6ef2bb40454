"""Downstream evaluation: multi-label classification and link prediction.

Classification follows the usual embedding protocol: train one-vs-rest
logistic regression on a seeded fraction of the labeled nodes, then for
each test node with k true labels predict its top-k labels by classifier
score, and report micro/macro F1 over the full label universe. Link
prediction removes half the edges, re-embeds the residual graph, and
scores held-out edges against sampled non-edges with AUC-ROC.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.linear_model import LogisticRegression

from .errors import DataError, InternalError
from .graph import Graph, sample_non_edges, split_edges
from .skipgram import EmbeddingModel, init_embeddings, train
from .util import (SEED_EVAL, SEED_INIT, SEED_TRAIN, SEED_WALK, derive_seed,
                   derived_generator)
from .walker import generate_corpus

from .community import louvain


class LabelSet:
    """Per-node label sets over an explicit label universe.

    node_labels maps node id -> set of labels; nodes may carry several
    labels. The universe defaults to every label observed.
    """

    def __init__(self, node_labels: dict, universe=None):
        self.node_labels = {int(n): frozenset(ls)
                            for n, ls in node_labels.items()}
        seen = set()
        for ls in self.node_labels.values():
            seen.update(ls)
        self.universe = sorted(seen) if universe is None else sorted(universe)
        missing = seen - set(self.universe)
        if missing:
            raise DataError(f"labels outside the declared universe: "
                            f"{sorted(missing)[:5]}")

    def labeled_nodes(self):
        return sorted(self.node_labels)

    def __len__(self):
        return len(self.node_labels)


def load_labels(g: Graph, path) -> LabelSet:
    """Read `node label [label ...]` lines into a LabelSet.

    Node tokens are the graph's original ids; labels stay strings.
    """
    node_labels: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) < 2:
                raise DataError(
                    f"{path}:{line_no}: expected `node label [label ...]`")
            node = g.id_of(fields[0])
            node_labels.setdefault(node, set()).update(fields[1:])
    if not node_labels:
        raise DataError(f"{path}: no labeled nodes found")
    return LabelSet(node_labels)


class EdgeOperator(enum.Enum):
    """Element-wise combination of two node vectors into an edge vector."""
    HADAMARD = "hadamard"
    AVERAGE = "average"
    WEIGHTED_L1 = "weighted-l1"
    WEIGHTED_L2 = "weighted-l2"


def edge_features(fu, fv, op: EdgeOperator):
    """Apply op to a pair of equal-length vectors (or row-matrices)."""
    fu = np.asarray(fu, dtype=np.float64)
    fv = np.asarray(fv, dtype=np.float64)
    if fu.shape != fv.shape:
        raise DataError("edge operator inputs must have equal shape")
    if op == EdgeOperator.HADAMARD:
        return fu * fv
    if op == EdgeOperator.AVERAGE:
        return (fu + fv) / 2.0
    if op == EdgeOperator.WEIGHTED_L1:
        return np.abs(fu - fv)
    if op == EdgeOperator.WEIGHTED_L2:
        return (fu - fv) ** 2
    raise DataError(f"unknown edge operator {op!r}")


CSV_FIELDS = ("task", "dataset", "train_fraction", "operator", "alpha",
              "seed", "micro_f1", "macro_f1", "auc")


@dataclass
class EvalReport:
    """One experiment result row: the config echo plus its metrics."""
    task: str
    dataset: str = ""
    train_fraction: float = None
    operator: str = ""
    alpha: float = None
    seed: int = None
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.metrics.items():
            if not (0.0 <= value <= 1.0):
                raise InternalError(
                    f"metric {name}={value} outside [0, 1]")

    def csv_row(self) -> dict:
        def fmt(x):
            if x is None or x == "":
                return ""
            if isinstance(x, float):
                return f"{x:.6f}".rstrip("0").rstrip(".")
            return str(x)

        return {
            "task": self.task,
            "dataset": self.dataset,
            "train_fraction": fmt(self.train_fraction),
            "operator": self.operator,
            "alpha": fmt(self.alpha),
            "seed": fmt(self.seed),
            "micro_f1": fmt(self.metrics.get("micro_f1")),
            "macro_f1": fmt(self.metrics.get("macro_f1")),
            "auc": fmt(self.metrics.get("auc")),
        }


def write_reports(reports, path):
    """Append report rows to a CSV, writing the header on first use."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if fresh:
            writer.writeheader()
        for rep in reports:
            writer.writerow(rep.csv_row())


def micro_macro_f1(predictions: dict, truth: dict, universe) -> tuple:
    """Micro and macro F1 from per-node predicted and true label sets.

    Micro pools TP/FP/FN over all labels; macro averages the per-label F1
    over the whole universe, scoring empty labels (no TP, FP or FN) as 0.
    """
    if not truth:
        raise DataError("empty evaluation set")
    if set(predictions) != set(truth):
        raise DataError("predictions and truth cover different nodes")
    universe = list(universe)
    index = {c: i for i, c in enumerate(universe)}
    tp = np.zeros(len(universe))
    fp = np.zeros(len(universe))
    fn = np.zeros(len(universe))
    for node, true_set in truth.items():
        true_set = set(true_set)
        pred_set = set(predictions[node])
        for c in pred_set | true_set:
            try:
                i = index[c]
            except KeyError:
                raise DataError(f"label {c!r} outside the universe") from None
            if c in pred_set and c in true_set:
                tp[i] += 1
            elif c in pred_set:
                fp[i] += 1
            else:
                fn[i] += 1

    def f1(t, p, n):
        denom = 2 * t + p + n
        return 2 * t / denom if denom > 0 else 0.0

    micro = f1(tp.sum(), fp.sum(), fn.sum())
    macro = float(np.mean([f1(tp[i], fp[i], fn[i])
                           for i in range(len(universe))])) if universe else 0.0
    return micro, macro


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve, ties counted half (Mann-Whitney form)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DataError("scores and labels must be equal-length vectors")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)  # average ranks resolve ties as 0.5
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _embedding_rows(embeddings):
    if isinstance(embeddings, EmbeddingModel):
        return embeddings.input_vectors
    return np.asarray(embeddings, dtype=np.float64)


def _fit_logistic(x, y):
    clf = LogisticRegression(C=1.0, solver="lbfgs", max_iter=1000)
    clf.fit(x, y)
    return clf


def classify_experiment(embeddings, labels: LabelSet, train_fraction: float,
                        rng_seed: int, dataset: str = "",
                        alpha: float = None) -> EvalReport:
    """Seeded split, one-vs-rest logistic regression, top-k prediction.

    For each test node the predicted set is its k highest-scoring labels,
    k being the node's true label count. Labels that the training split
    never exhibits get a constant minus-infinity score (the experiment
    records how many; it is not fatal).
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie in (0, 1)")
    vecs = _embedding_rows(embeddings)
    nodes = labels.labeled_nodes()
    if len(nodes) < 2:
        raise DataError("need at least two labeled nodes to split")
    if nodes[-1] >= len(vecs):
        raise DataError("labeled node outside the embedding matrix")

    rng = derived_generator(rng_seed, SEED_EVAL)
    order = rng.permutation(len(nodes))
    n_train = int(round(train_fraction * len(nodes)))
    n_train = min(max(n_train, 1), len(nodes) - 1)
    train_nodes = [nodes[i] for i in order[:n_train]]
    test_nodes = [nodes[i] for i in order[n_train:]]

    universe = labels.universe
    x_train = vecs[train_nodes]
    x_test = vecs[test_nodes]
    scores = np.full((len(test_nodes), len(universe)), -np.inf)
    degenerate = 0
    for ci, c in enumerate(universe):
        y = np.fromiter((c in labels.node_labels.get(n, ())
                         for n in train_nodes), dtype=np.int64,
                        count=len(train_nodes))
        if y.min() == y.max():  # single-class column, nothing to fit
            degenerate += 1
            continue
        clf = _fit_logistic(x_train, y)
        scores[:, ci] = clf.decision_function(x_test)

    predictions = {}
    truth = {}
    for row, node in enumerate(test_nodes):
        true_set = labels.node_labels[node]
        k = len(true_set)
        top = np.argsort(-scores[row], kind="stable")[:k]
        predictions[node] = {universe[i] for i in top}
        truth[node] = true_set

    micro, macro = micro_macro_f1(predictions, truth, universe)
    report = EvalReport(task="classification", dataset=dataset,
                        train_fraction=train_fraction, alpha=alpha,
                        seed=rng_seed,
                        metrics={"micro_f1": micro, "macro_f1": macro})
    report.degenerate_labels = degenerate
    return report


def linkpred_experiment(g: Graph, walk_cfg, train_cfg, op: EdgeOperator,
                        rng_seed: int, dim: int = 128,
                        removal_fraction: float = 0.5, workers: int = 1,
                        dataset: str = "") -> EvalReport:
    """Split, embed the residual, classify held-out edges, report AUC.

    The experiment seed drives every stage (split, communities, walks,
    init, training, negative sampling); the rng_seed fields inside the
    walk/train configs are overridden so one seed reproduces the run.
    Test positives are the removed edges, test negatives the split's
    sample; training uses the residual edges plus a disjoint negative
    sample of equal size.
    """
    split = split_edges(g, removal_fraction, rng_seed)
    residual = split.residual

    partition = louvain(residual, rng_seed=rng_seed)
    walk_cfg = dataclasses.replace(
        walk_cfg, rng_seed=derive_seed(rng_seed, SEED_WALK))
    train_cfg = dataclasses.replace(
        train_cfg, rng_seed=derive_seed(rng_seed, SEED_TRAIN))
    corpus = generate_corpus(residual, partition, walk_cfg, workers=workers)
    model = init_embeddings(residual.node_count, dim,
                            derive_seed(rng_seed, SEED_INIT))
    train(corpus, train_cfg, model, workers=workers)
    vecs = model.input_vectors

    rsrc, rdst, _ = residual.edges()
    train_pos = list(zip(rsrc.tolist(), rdst.tolist()))
    rng = derived_generator(rng_seed, SEED_EVAL)
    train_neg = sample_non_edges(g, len(train_pos), rng,
                                 exclude=split.negative_edges)

    def featurize(pairs):
        us = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        vs = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        return edge_features(vecs[us], vecs[vs], op)

    x_train = np.vstack([featurize(train_pos), featurize(train_neg)])
    y_train = np.concatenate([np.ones(len(train_pos), dtype=np.int64),
                              np.zeros(len(train_neg), dtype=np.int64)])
    clf = _fit_logistic(x_train, y_train)

    test_pairs = split.removed_edges + split.negative_edges
    y_test = np.concatenate([np.ones(len(split.removed_edges), dtype=bool),
                             np.zeros(len(split.negative_edges), dtype=bool)])
    auc = auc_roc(clf.decision_function(featurize(test_pairs)), y_test)
    return EvalReport(task="link-prediction", dataset=dataset,
                      train_fraction=1.0 - removal_fraction,
                      operator=op.value, alpha=walk_cfg.alpha, seed=rng_seed,
                      metrics={"auc": auc})
