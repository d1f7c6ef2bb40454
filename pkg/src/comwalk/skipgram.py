"""Skip-gram embedding training with negative sampling.

Given a walk corpus, every (center, context) pair within the window is
trained by gradient ascent on

    log sigmoid(f(u) . f'(v)) + sum_neg log sigmoid(-f(u) . f'(neg))

with negatives drawn from the unigram^0.75 distribution over corpus
frequencies. The learning rate decays linearly with the number of center
positions processed, floored at 1e-4 of its initial value. Hot loops are
compiled with numba; the sigmoid exponent is clamped to +-30.

Deterministic mode trains a single shard and is bit-reproducible.
Parallel mode shards the corpus across threads that update the shared
matrices without locking (asynchronous SGD, lost updates tolerated).
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DataError, InternalError
from .util import SEED_INIT, SEED_TRAIN, derive_seed, derived_generator

_MAX_EXP = 30.0

# splitmix64 constants for the in-kernel negative-sampling stream
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


class EmbeddingModel:
    """Input and output (context) vector matrices, |V| x d, float64.

    The learned representation is input_vectors; output_vectors exist
    only as skip-gram context parameters.
    """

    def __init__(self, input_vectors, output_vectors):
        input_vectors = np.ascontiguousarray(input_vectors, dtype=np.float64)
        output_vectors = np.ascontiguousarray(output_vectors, dtype=np.float64)
        if input_vectors.shape != output_vectors.shape or input_vectors.ndim != 2:
            raise DataError("input and output matrices must both be |V| x d")
        self.input_vectors = input_vectors
        self.output_vectors = output_vectors
        # filled in by train() for monitoring
        self.last_pairs = 0
        self.last_loss = 0.0

    @property
    def node_count(self) -> int:
        return self.input_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def __repr__(self):
        return f"EmbeddingModel(nodes={self.node_count}, dim={self.dim})"


@dataclass(frozen=True)
class TrainConfig:
    """Skip-gram hyperparameters. Defaults follow the usual word2vec-style
    settings: window 10, initial lr 0.025 decayed to a 1e-4 floor, 5
    negatives per target."""
    window: int = 10
    initial_lr: float = 0.025
    negatives_per_target: int = 5
    rng_seed: int = 0
    deterministic: bool = True

    def __post_init__(self):
        if self.window < 1:
            raise DataError("window must be >= 1")
        if self.negatives_per_target < 1:
            raise DataError("negatives_per_target must be >= 1")
        if not self.initial_lr > 0:
            raise DataError("initial_lr must be > 0")

    @property
    def min_lr(self) -> float:
        return self.initial_lr * 1e-4


def init_embeddings(node_count: int, d: int, rng) -> EmbeddingModel:
    """Fresh model: input entries uniform on [-0.5/d, 0.5/d], outputs zero.

    rng may be a numpy Generator or an integer seed. With zero outputs
    every pair scores sigmoid(0) = 0.5 before training.
    """
    if node_count < 1 or d < 1:
        raise DataError("node_count and d must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = derived_generator(rng, SEED_INIT)
    inp = rng.uniform(-0.5 / d, 0.5 / d, size=(node_count, d))
    return EmbeddingModel(inp, np.zeros((node_count, d)))


def score(model: EmbeddingModel, u: int, v: int) -> float:
    """sigmoid(input(u) . output(v)), exponent clamped like the trainer."""
    x = float(np.dot(model.input_vectors[u], model.output_vectors[v]))
    x = min(_MAX_EXP, max(-_MAX_EXP, x))
    return 1.0 / (1.0 + math.exp(-x))


@njit(cache=True, nogil=True, fastmath=True)
def _pair_update(inp, out, center, context, negs, n_negs, lr, work):
    """One negative-sampling SGD step; returns the pre-update loss.

    Gradients w.r.t. the center input vector accumulate in `work` and are
    applied last, so every dot product sees the original input vector.
    A negative equal to the context is skipped.
    """
    iv = inp[center]
    d = iv.shape[0]
    for k in range(d):
        work[k] = 0.0

    ov = out[context]
    x = np.dot(iv, ov)
    if x > _MAX_EXP:
        x = _MAX_EXP
    elif x < -_MAX_EXP:
        x = -_MAX_EXP
    p = 1.0 / (1.0 + math.exp(-x))
    loss = -math.log(p)
    g = (1.0 - p) * lr
    for k in range(d):
        work[k] += g * ov[k]
        ov[k] += g * iv[k]

    for j in range(n_negs):
        nid = negs[j]
        if nid == context:
            continue
        nv = out[nid]
        x = np.dot(iv, nv)
        if x > _MAX_EXP:
            x = _MAX_EXP
        elif x < -_MAX_EXP:
            x = -_MAX_EXP
        p = 1.0 / (1.0 + math.exp(-x))
        loss += x - math.log(p)  # -log(1 - p), stable at both tails
        g = -p * lr
        for k in range(d):
            work[k] += g * nv[k]
            nv[k] += g * iv[k]

    for k in range(d):
        iv[k] += work[k]
    return loss


@njit(cache=True, nogil=True, fastmath=True)
def _train_shard(inp, out, tokens, starts, ends, window, n_negs, noise_cdf,
                 initial_lr, min_lr, total_positions, counter, seed):
    """Train every window pair of the given walks; returns (pairs, loss).

    counter is a shared one-element int64 array tracking center positions
    processed across all shards; it drives the linear lr decay. The
    negative-sampling stream is splitmix64 seeded per shard, inverted
    through the cumulative noise distribution by binary search.
    """
    d = inp.shape[1]
    work = np.empty(d, dtype=np.float64)
    negs = np.empty(max(n_negs, 1), dtype=np.int64)
    state = np.uint64(seed)
    total_noise = noise_cdf[-1]
    pairs = 0
    loss_sum = 0.0

    for wi in range(starts.shape[0]):
        s = starts[wi]
        e = ends[wi]
        for i in range(s, e):
            center = tokens[i]
            seen = counter[0]
            counter[0] = seen + 1
            lr = initial_lr * (1.0 - seen / total_positions)
            if lr < min_lr:
                lr = min_lr
            lo = i - window
            if lo < s:
                lo = s
            hi = i + window + 1
            if hi > e:
                hi = e
            for j in range(lo, hi):
                if j == i:
                    continue
                for k in range(n_negs):
                    state = state + _GOLD
                    z = state
                    z = (z ^ (z >> _S30)) * _MIX1
                    z = (z ^ (z >> _S27)) * _MIX2
                    z = z ^ (z >> _S31)
                    u = (z >> _S11) * _INV53
                    negs[k] = np.searchsorted(noise_cdf, u * total_noise,
                                              side="right")
                pairs += 1
                loss_sum += _pair_update(inp, out, center, tokens[j], negs,
                                         n_negs, lr, work)
    return pairs, loss_sum


def sgd_pair_update(model: EmbeddingModel, center: int, context: int,
                    negatives, lr: float) -> float:
    """Public single-pair update; negatives is any list of node ids
    (an empty list trains the positive term alone). Returns the loss at
    the pre-update parameters."""
    negs = np.asarray(list(negatives), dtype=np.int64)
    work = np.empty(model.dim, dtype=np.float64)
    return float(_pair_update(model.input_vectors, model.output_vectors,
                              center, context, negs, len(negs), lr, work))


def _flatten_corpus(corpus, node_count):
    lengths = np.fromiter((len(w) for w in corpus), dtype=np.int64,
                          count=len(corpus))
    total = int(lengths.sum())
    tokens = np.empty(total, dtype=np.int64)
    pos = 0
    for w in corpus:
        tokens[pos:pos + len(w)] = w
        pos += len(w)
    if total and (tokens.min() < 0 or tokens.max() >= node_count):
        raise DataError("corpus references a node outside the model")
    ends = np.cumsum(lengths)
    starts = ends - lengths
    return tokens, starts, ends


def train(corpus, cfg: TrainConfig, model: EmbeddingModel,
          workers: int = 1) -> EmbeddingModel:
    """Train the model in place over the whole corpus; returns the model.

    Walks shorter than 2 nodes contribute nothing. Negative draws use the
    unigram^0.75 distribution over corpus token frequencies. With
    cfg.deterministic the corpus runs as one shard regardless of workers;
    otherwise it is split into `workers` shards of roughly equal token
    count trained concurrently over the shared matrices.
    """
    if not corpus:
        return model
    tokens, starts, ends = _flatten_corpus(corpus, model.node_count)
    total_positions = int(tokens.shape[0])
    if total_positions == 0:
        return model

    freq = np.bincount(tokens, minlength=model.node_count).astype(np.float64)
    noise_cdf = np.cumsum(freq ** 0.75)
    counter = np.zeros(1, dtype=np.int64)
    shards = 1 if cfg.deterministic else max(1, int(workers))
    shards = min(shards, len(corpus))

    args = []
    bounds = np.linspace(0, len(corpus), shards + 1).astype(np.int64)
    for s in range(shards):
        lo, hi = bounds[s], bounds[s + 1]
        args.append((model.input_vectors, model.output_vectors, tokens,
                     starts[lo:hi], ends[lo:hi], cfg.window,
                     cfg.negatives_per_target, noise_cdf, cfg.initial_lr,
                     cfg.min_lr, total_positions, counter,
                     np.uint64(derive_seed(cfg.rng_seed, SEED_TRAIN, s))))

    if shards == 1:
        results = [_train_shard(*args[0])]
    else:
        with concurrent.futures.ThreadPoolExecutor(shards) as pool:
            results = list(pool.map(lambda a: _train_shard(*a), args))

    if not np.all(np.isfinite(model.input_vectors)) or \
            not np.all(np.isfinite(model.output_vectors)):
        raise InternalError("non-finite embedding entries after training")
    model.last_pairs = int(sum(r[0] for r in results))
    model.last_loss = float(sum(r[1] for r in results))
    return model


def save_embeddings(model: EmbeddingModel, labels, path):
    """word2vec text format: header `|V| d`, then `id v1 ... vd` rows."""
    inp = model.input_vectors
    if len(labels) != model.node_count:
        raise DataError("label count does not match the model")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.node_count} {model.dim}\n")
        for i, lab in enumerate(labels):
            fh.write(lab + " " + " ".join(f"{x:.9g}" for x in inp[i]) + "\n")


def load_embeddings(path):
    """Read a word2vec text file; returns (labels, |V| x d float array)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: malformed embedding header")
        count, dim = int(header[0]), int(header[1])
        labels = []
        vecs = np.empty((count, dim), dtype=np.float64)
        for i in range(count):
            fields = fh.readline().split()
            if len(fields) != dim + 1:
                raise DataError(f"{path}: row {i + 2} has wrong field count")
            labels.append(fields[0])
            vecs[i] = [float(x) for x in fields[1:]]
    return labels, vecs
