"""Command-line front end.

Subcommands: communities, walks, embed, eval-classify, eval-linkpred.
Option precedence is defaults < config file (--config, flat key=value
lines) < explicit flags. Every run writes a `<output>.meta` sidecar with
the fully resolved configuration; the sidecar is itself a valid --config
file, so a run can be reproduced from its own echo.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 internal error.
Progress goes to stderr; results go to files and stdout only.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .community import louvain, save_communities
from .errors import ComwalkError, DataError, InternalError
from .evaluation import (EdgeOperator, classify_experiment, linkpred_experiment,
                         load_labels, write_reports)
from .graph import load_edge_list
from .skipgram import (TrainConfig, init_embeddings, load_embeddings,
                       save_embeddings, train)
from .util import SEED_INIT, derive_seed
from .walker import WalkConfig, generate_corpus, save_walks


class UsageError(ComwalkError):
    """Bad invocation: missing/invalid flags or config entries."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


@dataclass
class RunConfig:
    """Fully resolved options for one command invocation."""
    command: str = ""
    edges: str = None
    labels: str = None
    embeddings: str = None
    output: str = None
    directed: bool = False
    weighted: bool = True
    alpha: float = 0.2
    walk_length: int = 80
    walks_per_node: int = 10
    dim: int = 128
    window: int = 10
    lr: float = 0.025
    negatives: int = 5
    workers: int = 1
    seed: int = 0
    deterministic: bool = False
    train_fraction: str = "0.5"
    operator: str = "hadamard"
    removal_fraction: float = 0.5

    def fractions(self) -> list:
        try:
            vals = [float(tok) for tok in str(self.train_fraction).split(",")]
        except ValueError:
            raise UsageError(
                f"bad --train-fraction value {self.train_fraction!r}") from None
        if not vals:
            raise UsageError("--train-fraction must list at least one value")
        return vals

    def operators(self) -> list:
        names = str(self.operator).split(",")
        if names == ["all"]:
            return list(EdgeOperator)
        ops = []
        for name in names:
            try:
                ops.append(EdgeOperator(name.strip()))
            except ValueError:
                choices = ", ".join(op.value for op in EdgeOperator)
                raise UsageError(f"unknown operator {name!r} "
                                 f"(choose from {choices} or all)") from None
        return ops

    def walk_config(self) -> WalkConfig:
        return WalkConfig(alpha=self.alpha, max_length=self.walk_length,
                          walks_per_node=self.walks_per_node,
                          rng_seed=self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(window=self.window, initial_lr=self.lr,
                           negatives_per_target=self.negatives,
                           rng_seed=self.seed,
                           deterministic=self.deterministic)


_BOOL_KEYS = {"directed", "weighted", "deterministic"}
_INT_KEYS = {"walk_length", "walks_per_node", "dim", "window", "negatives",
             "workers", "seed"}
_FLOAT_KEYS = {"alpha", "lr", "removal_fraction"}
_STR_KEYS = {"edges", "labels", "embeddings", "output", "train_fraction",
             "operator"}
_ALL_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _parse_config_file(path) -> dict:
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file: {e}") from None
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{line_no}: expected key=value")
        key, _, raw = stripped.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        if key not in _ALL_KEYS:
            raise UsageError(f"{path}:{line_no}: unknown config key {key!r}")
        try:
            if key in _BOOL_KEYS:
                if raw.lower() not in ("true", "false"):
                    raise ValueError
                values[key] = raw.lower() == "true"
            elif key in _INT_KEYS:
                values[key] = int(raw)
            elif key in _FLOAT_KEYS:
                values[key] = float(raw)
            else:
                values[key] = raw
        except ValueError:
            raise UsageError(
                f"{path}:{line_no}: bad value {raw!r} for {key}") from None
    return values


def _write_meta(cfg: RunConfig, output):
    path = str(output) + ".meta"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# command: {cfg.command}\n")
        for f in fields(RunConfig):
            if f.name == "command":
                continue
            value = getattr(cfg, f.name)
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            fh.write(f"{f.name}={value}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="comwalk",
                     description="Community-aware random-walk embeddings.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--edges", help="input edge list")
    common.add_argument("--output", help="output file")
    common.add_argument("--directed", action=argparse.BooleanOptionalAction,
                        default=None, help="treat edges as directed")
    common.add_argument("--weighted", action=argparse.BooleanOptionalAction,
                        default=None, help="honor the weight column")
    common.add_argument("--seed", type=int, default=None,
                        help="master RNG seed")
    common.add_argument("--workers", type=int, default=None,
                        help="worker count for walks/training")

    walkish = argparse.ArgumentParser(add_help=False)
    walkish.add_argument("--alpha", type=float, default=None,
                         help="community-jump probability")
    walkish.add_argument("--walk-length", type=int, default=None)
    walkish.add_argument("--walks-per-node", type=int, default=None)

    trainish = argparse.ArgumentParser(add_help=False)
    trainish.add_argument("--dim", type=int, default=None,
                          help="embedding dimension")
    trainish.add_argument("--window", type=int, default=None)
    trainish.add_argument("--lr", type=float, default=None,
                          help="initial learning rate")
    trainish.add_argument("--negatives", type=int, default=None,
                          help="negative samples per target")
    trainish.add_argument("--deterministic",
                          action=argparse.BooleanOptionalAction, default=None,
                          help="bit-reproducible single-shard training")

    sub.add_parser("communities", parents=[common],
                   help="detect communities, write node->community file")
    sub.add_parser("walks", parents=[common, walkish],
                   help="write the walk corpus without training")
    sub.add_parser("embed", parents=[common, walkish, trainish],
                   help="full pipeline: communities, walks, training")

    classify = sub.add_parser("eval-classify", parents=[common, walkish,
                                                        trainish],
                              help="multi-label classification report")
    classify.add_argument("--labels", help="node label file")
    classify.add_argument("--embeddings",
                          help="precomputed embedding file (skips training)")
    classify.add_argument("--train-fraction", default=None,
                          help="comma-separated labeled-train fractions")

    linkpred = sub.add_parser("eval-linkpred", parents=[common, walkish,
                                                        trainish],
                              help="link prediction report")
    linkpred.add_argument("--operator", default=None,
                          help="edge operator name(s), comma-separated or all")
    linkpred.add_argument("--removal-fraction", type=float, default=None)
    return parser


def resolve(args) -> RunConfig:
    """Merge defaults, config file and explicit flags into a RunConfig."""
    cfg = RunConfig(command=args.command)
    file_values = _parse_config_file(args.config) if args.config else {}
    for key, value in file_values.items():
        setattr(cfg, key, value)
    for key in _ALL_KEYS:
        if hasattr(args, key) and getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    if args.command == "eval-linkpred" and getattr(args, "alpha", None) is None \
            and "alpha" not in file_values:
        cfg.alpha = 0.15  # link-prediction default
    if cfg.edges is None:
        raise UsageError("--edges is required")
    if cfg.output is None:
        raise UsageError("--output is required")
    if args.command == "eval-classify" and cfg.labels is None:
        raise UsageError("eval-classify requires --labels")
    return cfg


def _log(msg):
    print(f"comwalk: {msg}", file=sys.stderr)


def _load_graph(cfg: RunConfig):
    _log(f"loading {cfg.edges}")
    g = load_edge_list(cfg.edges, directed=cfg.directed,
                       weighted=cfg.weighted)
    _log(f"loaded {g!r}")
    return g


def _detect(cfg: RunConfig, g):
    _log("detecting communities")
    part = louvain(g, rng_seed=cfg.seed)
    _log(f"found {part.community_count} communities, "
         f"Q={part.modularity_score:.6f}")
    return part


def _embed_pipeline(cfg: RunConfig, g):
    part = _detect(cfg, g)
    _log(f"generating {cfg.walks_per_node * g.node_count} walks")
    corpus = generate_corpus(g, part, cfg.walk_config(), workers=cfg.workers)
    model = init_embeddings(g.node_count, cfg.dim,
                            derive_seed(cfg.seed, SEED_INIT))
    _log("training")
    train(corpus, cfg.train_config(), model, workers=cfg.workers)
    _log(f"trained {model.last_pairs} pairs, "
         f"mean loss {model.last_loss / max(model.last_pairs, 1):.4f}")
    return model


def cmd_communities(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    part = _detect(cfg, g)
    save_communities(part, g, cfg.output)
    _write_meta(cfg, cfg.output)
    sizes = sorted(len(m) for m in part.members)
    hist = {}
    for s in sizes:
        hist[s] = hist.get(s, 0) + 1
    print(f"modularity {part.modularity_score:.6f}")
    print(f"communities {part.community_count}")
    print("size_histogram " +
          " ".join(f"{s}:{c}" for s, c in sorted(hist.items())))
    return 0


def cmd_walks(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    part = _detect(cfg, g)
    corpus = generate_corpus(g, part, cfg.walk_config(), workers=cfg.workers)
    save_walks(corpus, g, cfg.output)
    _write_meta(cfg, cfg.output)
    _log(f"wrote {len(corpus)} walks to {cfg.output}")
    return 0


def cmd_embed(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    model = _embed_pipeline(cfg, g)
    save_embeddings(model, g.labels, cfg.output)
    _write_meta(cfg, cfg.output)
    _log(f"wrote embeddings to {cfg.output}")
    return 0


def _aligned_embeddings(cfg: RunConfig, g):
    """Embedding rows indexed by graph node id, from file or training."""
    if cfg.embeddings:
        _log(f"reading embeddings from {cfg.embeddings}")
        emb_labels, vecs = load_embeddings(cfg.embeddings)
        index = {lab: i for i, lab in enumerate(emb_labels)}
        rows = np.empty((g.node_count, vecs.shape[1]))
        for node, lab in enumerate(g.labels):
            try:
                rows[node] = vecs[index[lab]]
            except KeyError:
                raise DataError(
                    f"embedding file lacks node {lab!r}") from None
        return rows
    return _embed_pipeline(cfg, g).input_vectors


def cmd_eval_classify(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    labels = load_labels(g, cfg.labels)
    _log(f"{len(labels)} labeled nodes, {len(labels.universe)} labels")
    vecs = _aligned_embeddings(cfg, g)
    dataset = Path(cfg.edges).stem
    reports = []
    for frac in cfg.fractions():
        rep = classify_experiment(vecs, labels, frac, cfg.seed,
                                  dataset=dataset, alpha=cfg.alpha)
        if rep.degenerate_labels:
            _log(f"fraction {frac}: {rep.degenerate_labels} labels "
                 f"missing from the training split")
        _log(f"fraction {frac}: micro={rep.metrics['micro_f1']:.4f} "
             f"macro={rep.metrics['macro_f1']:.4f}")
        reports.append(rep)
    write_reports(reports, cfg.output)
    _write_meta(cfg, cfg.output)
    return 0


def cmd_eval_linkpred(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    dataset = Path(cfg.edges).stem
    reports = []
    for op in cfg.operators():
        _log(f"link prediction with operator {op.value}")
        rep = linkpred_experiment(g, cfg.walk_config(), cfg.train_config(),
                                  op, cfg.seed, dim=cfg.dim,
                                  removal_fraction=cfg.removal_fraction,
                                  workers=cfg.workers, dataset=dataset)
        _log(f"operator {op.value}: auc={rep.metrics['auc']:.4f}")
        reports.append(rep)
    write_reports(reports, cfg.output)
    _write_meta(cfg, cfg.output)
    return 0


_COMMANDS = {
    "communities": cmd_communities,
    "walks": cmd_walks,
    "embed": cmd_embed,
    "eval-classify": cmd_eval_classify,
    "eval-linkpred": cmd_eval_linkpred,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required "
                             "(communities|walks|embed|eval-classify|"
                             "eval-linkpred)")
        cfg = resolve(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"comwalk: usage error: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"comwalk: error: {e}", file=sys.stderr)
        return 2
    except InternalError as e:
        print(f"comwalk: internal error: {e}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
