import csv
import io
import string

import numpy as np
import pytest

from comwalk import (CSV_FIELDS, DataError, EdgeOperator, EvalReport,
                     InternalError, LabelSet, TrainConfig, WalkConfig,
                     auc_roc, classify_experiment, edge_features,
                     linkpred_experiment, load_edge_list, load_labels,
                     micro_macro_f1, write_reports)

from oracles import auc_pairwise, micro_macro_direct
from synth import planted_graph


class TestLabelSet:
    def test_universe_defaults_to_observed(self):
        ls = LabelSet({0: {"b"}, 1: {"a", "b"}})
        assert ls.universe == ["a", "b"]
        assert ls.labeled_nodes() == [0, 1]
        assert len(ls) == 2

    def test_explicit_universe_checked(self):
        LabelSet({0: {"a"}}, universe={"a", "b"})
        with pytest.raises(DataError):
            LabelSet({0: {"a", "z"}}, universe={"a", "b"})

    def test_load_labels(self, tmp_path):
        g = load_edge_list(io.StringIO("u v\nv w\n"))
        path = tmp_path / "labels.txt"
        path.write_text("# comment\nu red\nv red blue\nu green\n")
        ls = load_labels(g, path)
        assert ls.node_labels[g.id_of("u")] == {"red", "green"}
        assert ls.node_labels[g.id_of("v")] == {"red", "blue"}
        assert g.id_of("w") not in ls.node_labels

    def test_load_labels_errors(self, tmp_path):
        g = load_edge_list(io.StringIO("u v\n"))
        path = tmp_path / "bad.txt"
        path.write_text("u\n")
        with pytest.raises(DataError):
            load_labels(g, path)
        path.write_text("#nothing\n")
        with pytest.raises(DataError):
            load_labels(g, path)
        path.write_text("ghost red\n")
        with pytest.raises(DataError):
            load_labels(g, path)


class TestMicroMacroF1:
    def test_hand_worked_example(self):
        truth = {0: {"A"}, 1: {"B"}}
        pred = {0: {"A", "C"}, 1: set()}
        micro, macro = micro_macro_f1(pred, truth, ["A", "B", "C"])
        # A: tp=1; B: fn=1; C: fp=1 -> micro 2/(2+1+1), macro (1+0+0)/3
        assert abs(micro - 0.5) < 1e-15
        assert abs(macro - 1 / 3) < 1e-15

    def test_perfect_and_disjoint(self):
        truth = {0: {"x"}, 1: {"y"}}
        assert micro_macro_f1(truth, truth, ["x", "y"]) == (1.0, 1.0)
        flipped = {0: {"y"}, 1: {"x"}}
        assert micro_macro_f1(flipped, truth, ["x", "y"]) == (0.0, 0.0)

    def test_unused_universe_label_drags_macro(self):
        truth = {0: {"a"}}
        micro, macro = micro_macro_f1(truth, truth, ["a", "b"])
        assert micro == 1.0
        assert macro == 0.5

    def test_errors(self):
        with pytest.raises(DataError):
            micro_macro_f1({}, {}, ["a"])
        with pytest.raises(DataError):
            micro_macro_f1({0: set()}, {1: set()}, ["a"])
        with pytest.raises(DataError):
            micro_macro_f1({0: {"zz"}}, {0: {"a"}}, ["a"])

    def test_matches_direct_counting(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            universe = list(string.ascii_lowercase[:rng.integers(1, 6)])
            nodes = range(rng.integers(1, 9))
            truth = {n: {c for c in universe if rng.random() < 0.4}
                     for n in nodes}
            pred = {n: {c for c in universe if rng.random() < 0.4}
                    for n in nodes}
            got = micro_macro_f1(pred, truth, universe)
            want = micro_macro_direct(pred, truth, universe)
            assert abs(got[0] - want[0]) < 1e-12
            assert abs(got[1] - want[1]) < 1e-12


class TestAucRoc:
    def test_hand_worked_example(self):
        auc = auc_roc([0.9, 0.4, 0.6, 0.1], [True, True, False, False])
        assert abs(auc - 0.75) < 1e-15

    def test_extremes_and_ties(self):
        assert auc_roc([0.8, 0.7, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
        assert auc_roc([0.1, 0.2, 0.7, 0.8], [1, 1, 0, 0]) == 0.0
        assert auc_roc([0.5, 0.5, 0.5], [1, 0, 1]) == 0.5

    def test_errors(self):
        with pytest.raises(DataError):
            auc_roc([0.5, 0.5], [1, 1])
        with pytest.raises(DataError):
            auc_roc([0.5], [0])
        with pytest.raises(DataError):
            auc_roc([0.5, 0.5], [1])

    def test_matches_pairwise_enumeration(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(3, 30))
            scores = rng.integers(0, 6, n) / 5.0  # coarse grid forces ties
            labels = rng.random(n) < 0.5
            if labels.all() or not labels.any():
                labels[0] = not labels[0]
            got = auc_roc(scores, labels)
            want = auc_pairwise(scores.tolist(), labels.tolist())
            assert abs(got - want) <= 1e-12


class TestEdgeFeatures:
    FU = np.array([1.0, 2.0])
    FV = np.array([3.0, -1.0])

    def test_hand_values(self):
        cases = {
            EdgeOperator.HADAMARD: [3.0, -2.0],
            EdgeOperator.AVERAGE: [2.0, 0.5],
            EdgeOperator.WEIGHTED_L1: [2.0, 3.0],
            EdgeOperator.WEIGHTED_L2: [4.0, 9.0],
        }
        for op, want in cases.items():
            assert np.array_equal(edge_features(self.FU, self.FV, op), want)

    def test_identical_vectors_zero_distance(self):
        for op in (EdgeOperator.WEIGHTED_L1, EdgeOperator.WEIGHTED_L2):
            assert np.all(edge_features(self.FU, self.FU, op) == 0.0)

    def test_symmetry(self):
        for op in EdgeOperator:
            a = edge_features(self.FU, self.FV, op)
            b = edge_features(self.FV, self.FU, op)
            assert np.array_equal(a, b)

    def test_matrix_rows(self):
        fu = np.array([[1.0, 2.0], [0.0, 1.0]])
        fv = np.array([[3.0, -1.0], [2.0, 2.0]])
        out = edge_features(fu, fv, EdgeOperator.HADAMARD)
        assert np.array_equal(out, [[3.0, -2.0], [0.0, 2.0]])

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            edge_features([1.0, 2.0], [1.0], EdgeOperator.AVERAGE)

    def test_enum_values(self):
        assert {op.value for op in EdgeOperator} == {
            "hadamard", "average", "weighted-l1", "weighted-l2"}


class TestClassifyExperiment:
    def split_embeddings(self, n, rng):
        """Two linearly separable clouds and matching single labels."""
        vecs = rng.normal(0, 0.3, (n, 4))
        vecs[: n // 2, 0] += 4.0
        vecs[n // 2:, 0] -= 4.0
        labels = LabelSet({i: {"pos" if i < n // 2 else "neg"}
                           for i in range(n)})
        return vecs, labels

    def test_separable_scores_perfectly(self):
        vecs, labels = self.split_embeddings(40, np.random.default_rng(3))
        rep = classify_experiment(vecs, labels, 0.5, rng_seed=1)
        assert rep.metrics["micro_f1"] == 1.0
        assert rep.metrics["macro_f1"] == 1.0
        assert rep.task == "classification"
        assert rep.degenerate_labels == 0

    def test_seed_reproducibility(self):
        vecs, labels = self.split_embeddings(30, np.random.default_rng(4))
        a = classify_experiment(vecs, labels, 0.4, rng_seed=9)
        b = classify_experiment(vecs, labels, 0.4, rng_seed=9)
        assert a.metrics == b.metrics
        c = classify_experiment(vecs, labels, 0.4, rng_seed=10)
        assert c.metrics is not None  # different split may or may not differ

    def test_degenerate_label_counted_not_fatal(self):
        vecs, _ = self.split_embeddings(20, np.random.default_rng(5))
        labels = LabelSet({i: {"pos" if i < 10 else "neg"}
                           for i in range(20)}, universe=["pos", "neg", "ghost"])
        rep = classify_experiment(vecs, labels, 0.5, rng_seed=2)
        assert rep.degenerate_labels >= 1
        assert rep.metrics["micro_f1"] == 1.0  # ghost never outranks a fit

    def test_train_fraction_validation(self):
        vecs, labels = self.split_embeddings(10, np.random.default_rng(6))
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(DataError):
                classify_experiment(vecs, labels, bad, rng_seed=0)

    def test_labeled_node_outside_matrix(self):
        vecs = np.zeros((3, 4))
        labels = LabelSet({0: {"a"}, 5: {"b"}})
        with pytest.raises(DataError):
            classify_experiment(vecs, labels, 0.5, rng_seed=0)


class TestLinkpredExperiment:
    def test_planted_graph_smoke(self):
        g, _ = planted_graph([20, 20], p_in=0.6, p_out=0.05, seed=1)
        rep = linkpred_experiment(
            g, WalkConfig(alpha=0.2, max_length=20, walks_per_node=5),
            TrainConfig(window=4), EdgeOperator.HADAMARD, rng_seed=3,
            dim=16, removal_fraction=0.3)
        assert rep.task == "link-prediction"
        assert rep.operator == "hadamard"
        assert 0.0 <= rep.metrics["auc"] <= 1.0
        assert rep.train_fraction == 0.7

    def test_seed_reproducibility(self):
        g, _ = planted_graph([15, 15], p_in=0.6, p_out=0.05, seed=2)
        kwargs = dict(walk_cfg=WalkConfig(max_length=15, walks_per_node=4),
                      train_cfg=TrainConfig(window=3),
                      op=EdgeOperator.AVERAGE, rng_seed=11, dim=8,
                      removal_fraction=0.3)
        a = linkpred_experiment(g, **kwargs)
        b = linkpred_experiment(g, **kwargs)
        assert a.metrics["auc"] == b.metrics["auc"]


class TestReports:
    def test_metrics_range_checked(self):
        with pytest.raises(InternalError):
            EvalReport(task="classification", metrics={"micro_f1": 1.2})
        with pytest.raises(InternalError):
            EvalReport(task="classification", metrics={"auc": -0.1})

    def test_write_header_then_append(self, tmp_path):
        path = tmp_path / "report.csv"
        rep = EvalReport(task="classification", dataset="toy",
                         train_fraction=0.5, seed=3,
                         metrics={"micro_f1": 0.5, "macro_f1": 1 / 3})
        write_reports([rep], path)
        write_reports([rep], path)
        rows = list(csv.reader(path.read_text().splitlines()))
        assert rows[0] == list(CSV_FIELDS)
        assert len(rows) == 3
        assert rows[1] == rows[2]
        assert rows[1][0] == "classification"
        assert rows[1][2] == "0.5"
        assert rows[1][6] == "0.5"
        assert rows[1][7] == "0.333333"
        assert rows[1][8] == ""  # no auc for classification rows

    def test_float_formatting_trims_zeros(self):
        rep = EvalReport(task="link-prediction", operator="hadamard",
                         alpha=0.15, train_fraction=0.25,
                         metrics={"auc": 0.875})
        row = rep.csv_row()
        assert row["alpha"] == "0.15"
        assert row["auc"] == "0.875"
        assert row["micro_f1"] == ""
