"""Continuous bag-of-words embeddings trained from scratch.

For a target token at position t, the context vector h is the mean of the
input-matrix rows of the tokens inside a symmetric window (truncated at
document edges, out-of-vocabulary tokens removed from the stream before
windowing). Scores for every vocabulary word are h projected through the
output matrix. The reference loss is the full-softmax negative
log-likelihood of the target; a sampled sigmoid loss with k negatives is
available as an opt-in for large vocabularies and is excluded from
bit-exactness guarantees. Optimization is plain SGD with a learning rate
decaying linearly to a floor over the total number of training positions.

Weights are float64 in memory. With a fixed seed and a single worker,
training is bit-deterministic; with several workers, document shards are
processed by threads that update the shared matrices without locks, so
results may differ between runs and between worker counts.

Model files: magic ``GLW2V1\\0``, u32 vocabulary size, u32 dimension, a
vocabulary block of length-prefixed UTF-8 words each followed by a u64
count, then the input matrix (V x d) and output matrix (d x V) as
row-major little-endian float32.
"""

from __future__ import annotations

import logging
import math
import struct
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, TrainingDivergedError, ValidationError

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"GLW2V1\x00"

LOSS_FULL_SOFTMAX = "full_softmax"
LOSS_NEGATIVE_SAMPLING = "negative_sampling"


@dataclass(frozen=True)
class TrainConfig:
    d: int = 450
    context: int = 2
    min_count: int = 40
    epochs: int = 5
    learning_rate: float = 0.025
    lr_floor: float = 1e-4
    loss: str = LOSS_FULL_SOFTMAX
    negative_k: int = 5
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("d must be >= 1")
        if self.context < 1:
            raise ValidationError("context must be >= 1")
        if self.min_count < 1:
            raise ValidationError("min_count must be >= 1")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be > 0")
        if self.loss not in (LOSS_FULL_SOFTMAX, LOSS_NEGATIVE_SAMPLING):
            raise ValidationError(f"unknown loss: {self.loss!r}")
        if self.negative_k < 1:
            raise ValidationError("negative_k must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


class Vocabulary:
    """Token inventory ordered by descending count, ties lexicographic."""

    def __init__(self, words: Sequence[str], counts: Mapping[str, int], min_count: int):
        self.words = tuple(words)
        self.counts = dict(counts)
        self.min_count = min_count
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id_of(self, word: str) -> int:
        return self.index[word]


def _token_stream(doc) -> Sequence[str]:
    return getattr(doc, "tokens", doc)


def build_vocab(docs: Iterable, min_count: int) -> Vocabulary:
    """Count tokens over all docs and keep those with count >= min_count."""
    if min_count < 1:
        raise ValidationError("min_count must be >= 1")
    counts: dict[str, int] = {}
    for doc in docs:
        for tok in _token_stream(doc):
            counts[tok] = counts.get(tok, 0) + 1
    kept = {w: n for w, n in counts.items() if n >= min_count}
    if not kept:
        raise ValidationError("no words meet min_count")
    words = sorted(kept, key=lambda w: (-kept[w], w))
    return Vocabulary(words, kept, min_count)


@dataclass
class CbowModel:
    vocab: Vocabulary
    w_in: np.ndarray  # (V, d) float64
    w_out: np.ndarray  # (d, V) float64
    config: TrainConfig
    epoch_losses: tuple[float, ...] = field(default=())

    def __post_init__(self):
        v, d = len(self.vocab), self.config.d
        if self.w_in.shape != (v, d) or self.w_out.shape != (d, v):
            raise ValidationError(
                f"weight shapes {self.w_in.shape}/{self.w_out.shape} do not match V={v}, d={d}"
            )

    def vector(self, word: str) -> np.ndarray:
        return self.w_in[self.vocab.id_of(word)]


@dataclass(frozen=True)
class ForwardResult:
    """Loss, softmax probabilities, and exact gradients for one position."""

    loss: float
    probs: np.ndarray  # (V,)
    h: np.ndarray  # (d,)
    grad_h: np.ndarray  # (d,)
    grad_w_out: np.ndarray  # (d, V)

    def grad_w_in(self, context_ids: Sequence[int], vocab_size: int) -> np.ndarray:
        """Dense (V, d) input-matrix gradient; duplicate context ids accumulate."""
        grad = np.zeros((vocab_size, self.grad_h.shape[0]))
        share = self.grad_h / len(context_ids)
        for cid in context_ids:
            grad[cid] += share
        return grad


def _softmax_parts(w_in, w_out, context_ids, target_id):
    h = w_in[context_ids].mean(axis=0)
    scores = h @ w_out
    m = scores.max()
    ex = np.exp(scores - m)
    z = ex.sum()
    loss = -(scores[target_id] - m - math.log(z))
    err = ex / z
    err[target_id] -= 1.0
    return loss, h, err


def cbow_forward(model: CbowModel, context_ids: Sequence[int], target_id: int) -> ForwardResult:
    """Full-softmax loss and exact gradients at the current weights."""
    if len(context_ids) == 0:
        raise ValidationError("context_ids must be non-empty")
    ids = np.asarray(context_ids, dtype=np.int64)
    loss, h, err = _softmax_parts(model.w_in, model.w_out, ids, target_id)
    probs = err.copy()
    probs[target_id] += 1.0
    return ForwardResult(
        loss=loss,
        probs=probs,
        h=h,
        grad_h=model.w_out @ err,
        grad_w_out=np.outer(h, err),
    )


def _encode(docs: Iterable, vocab: Vocabulary) -> list[np.ndarray]:
    index = vocab.index
    out = []
    for doc in docs:
        ids = [index[t] for t in _token_stream(doc) if t in index]
        out.append(np.asarray(ids, dtype=np.int64))
    return out


def _noise_distribution(vocab: Vocabulary) -> np.ndarray:
    weights = np.array([vocab.counts[w] for w in vocab.words], dtype=np.float64) ** 0.75
    return np.cumsum(weights / weights.sum())


def _train_shard(shard, w_in, w_out, config, total_steps, step_box, rng, noise_cdf, loss_box):
    c = config.context
    lr0 = config.learning_rate
    floor = config.lr_floor
    negative = config.loss == LOSS_NEGATIVE_SAMPLING
    k = config.negative_k
    loss_sum = 0.0
    steps = 0
    # overflow shows up as a non-finite loss, which is raised explicitly
    with np.errstate(over="ignore", invalid="ignore"):
        _train_shard_inner(
            shard, w_in, w_out, c, lr0, floor, negative, k, total_steps,
            step_box, rng, noise_cdf, loss_box,
        )


def _train_shard_inner(shard, w_in, w_out, c, lr0, floor, negative, k, total_steps,
                       step_box, rng, noise_cdf, loss_box):
    loss_sum = 0.0
    steps = 0
    for epoch_doc in shard:
        n = len(epoch_doc)
        if n < 2:
            continue
        for t in range(n):
            lo = 0 if t < c else t - c
            ctx = np.concatenate((epoch_doc[lo:t], epoch_doc[t + 1 : t + c + 1]))
            target = int(epoch_doc[t])
            lr = max(floor, lr0 - (lr0 - floor) * (step_box[0] / total_steps))
            if negative:
                h = w_in[ctx].mean(axis=0)
                negs = np.searchsorted(noise_cdf, rng.random(k))
                negs = negs[negs != target]
                out_ids = np.concatenate(([target], negs))
                u = h @ w_out[:, out_ids]
                # grad wrt u_j is sigmoid(u_j) - y_j with y = (1, 0, ..., 0)
                sig = 1.0 / (1.0 + np.exp(-u))
                loss = _log1p_exp(-u[0]) + _log1p_exp(u[1:]).sum()
                g = sig
                g[0] -= 1.0
                grad_h = w_out[:, out_ids] @ g
                w_out[:, out_ids] -= lr * np.outer(h, g)
            else:
                loss, h, err = _softmax_parts(w_in, w_out, ctx, target)
                grad_h = w_out @ err
                w_out -= lr * np.outer(h, err)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    "non-finite training loss", epoch=-1, step=step_box[0], learning_rate=lr
                )
            np.subtract.at(w_in, ctx, (lr / len(ctx)) * grad_h)
            step_box[0] += 1
            loss_sum += loss
            steps += 1
    loss_box.append((loss_sum, steps))


def _log1p_exp(x):
    """log(1 + exp(x)), stable; accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return out if out.ndim else float(out)


def train_cbow(docs: Iterable, config: TrainConfig, vocab: Vocabulary | None = None) -> CbowModel:
    """Train CBOW embeddings by SGD.

    Documents are processed in the given order each epoch (no shuffling);
    per-epoch mean training loss is logged and stored on the model. With
    workers > 1 the document list is sharded round-robin over threads and
    updates are unsynchronized.
    """
    doc_list = list(docs)
    if vocab is None:
        vocab = build_vocab(doc_list, config.min_count)
    encoded = _encode(doc_list, vocab)
    v, d = len(vocab), config.d

    rng = np.random.default_rng(config.seed)
    w_in = rng.uniform(-0.5 / d, 0.5 / d, size=(v, d))
    w_out = np.zeros((d, v))

    per_epoch = sum(len(ids) for ids in encoded if len(ids) >= 2)
    total_steps = config.epochs * per_epoch
    if total_steps == 0:
        return CbowModel(vocab, w_in, w_out, config)

    noise_cdf = _noise_distribution(vocab) if config.loss == LOSS_NEGATIVE_SAMPLING else None
    step_box = [0]
    losses = []
    for epoch in range(config.epochs):
        loss_box: list[tuple[float, int]] = []
        try:
            if config.workers == 1:
                _train_shard(
                    encoded, w_in, w_out, config, total_steps, step_box, rng, noise_cdf, loss_box
                )
            else:
                shards = [encoded[w :: config.workers] for w in range(config.workers)]
                seeds = np.random.SeedSequence([config.seed, epoch]).spawn(config.workers)
                threads = [
                    threading.Thread(
                        target=_train_shard,
                        args=(
                            shard,
                            w_in,
                            w_out,
                            config,
                            total_steps,
                            step_box,
                            np.random.default_rng(s),
                            noise_cdf,
                            loss_box,
                        ),
                    )
                    for shard, s in zip(shards, seeds)
                ]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        except TrainingDivergedError as exc:
            raise TrainingDivergedError(
                "non-finite training loss", epoch=epoch, step=exc.step, learning_rate=exc.learning_rate
            ) from None
        total = sum(s for s, _ in loss_box)
        steps = sum(n for _, n in loss_box)
        epoch_loss = total / steps if steps else float("nan")
        losses.append(epoch_loss)
        logger.info("epoch %d/%d: mean training loss %.6f", epoch + 1, config.epochs, epoch_loss)

    return CbowModel(vocab, w_in, w_out, config, epoch_losses=tuple(losses))


def corpus_loss(model: CbowModel, docs: Iterable) -> float:
    """Exact mean full-softmax loss over every training position, weights frozen."""
    encoded = _encode(docs, model.vocab)
    c = model.config.context
    total = 0.0
    steps = 0
    for ids in encoded:
        n = len(ids)
        if n < 2:
            continue
        for t in range(n):
            lo = 0 if t < c else t - c
            ctx = np.concatenate((ids[lo:t], ids[t + 1 : t + c + 1]))
            loss, _, _ = _softmax_parts(model.w_in, model.w_out, ctx, int(ids[t]))
            total += loss
            steps += 1
    if steps == 0:
        raise ValidationError("no training positions in docs")
    return total / steps


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|); raises ValueError on a zero-norm vector."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity of a zero-norm vector is undefined")
    return float(a @ b / (na * nb))


def top_k_neighbors(model: CbowModel, word: str, k: int) -> list[tuple[str, float]]:
    """The k nearest vocabulary words by cosine over input vectors.

    The query word is excluded; similarity ties break lexicographically.
    Returns min(k, V - 1) pairs. Unknown words raise KeyError.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    qid = model.vocab.id_of(word)
    q = model.w_in[qid]
    nq = np.linalg.norm(q)
    norms = np.linalg.norm(model.w_in, axis=1)
    if nq == 0.0 or np.any(norms == 0.0):
        raise ValueError("cosine similarity of a zero-norm vector is undefined")
    sims = (model.w_in @ q) / (norms * nq)
    pairs = [
        (model.vocab.words[j], float(sims[j])) for j in range(len(model.vocab)) if j != qid
    ]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:k]


def save_model(model: CbowModel, path: str | Path) -> None:
    """Write the binary model file (see module docstring for the layout)."""
    v, d = len(model.vocab), model.config.d
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<II", v, d))
        for word in model.vocab.words:
            raw = word.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<Q", model.vocab.counts[word]))
        fh.write(np.ascontiguousarray(model.w_in, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(model.w_out, dtype="<f4").tobytes())


def _read_exact(fh, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise FormatError("unexpected EOF in model file")
    return raw


def load_model(path: str | Path) -> CbowModel:
    """Read a model file; the training config is not stored, so the loaded
    config carries the file's dimension and the smallest stored count."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise FormatError("not a model file or unsupported version")
        v, d = struct.unpack("<II", _read_exact(fh, 8))
        words = []
        counts = {}
        for _ in range(v):
            (wlen,) = struct.unpack("<I", _read_exact(fh, 4))
            word = _read_exact(fh, wlen).decode("utf-8")
            (count,) = struct.unpack("<Q", _read_exact(fh, 8))
            words.append(word)
            counts[word] = count
        w_in = np.frombuffer(_read_exact(fh, 4 * v * d), dtype="<f4").reshape(v, d)
        w_out = np.frombuffer(_read_exact(fh, 4 * d * v), dtype="<f4").reshape(d, v)
        if fh.read(1):
            raise FormatError("trailing bytes in model file")
    min_count = min(counts.values()) if counts else 1
    config = TrainConfig(d=d, min_count=max(1, int(min_count)))
    vocab = Vocabulary(words, counts, config.min_count)
    return CbowModel(vocab, w_in.astype(np.float64), w_out.astype(np.float64), config)


@dataclass(frozen=True)
class TuneRow:
    context: int
    min_count: int
    d: int
    pearson_r: float | None
    coverage: float


@dataclass(frozen=True)
class TuneResult:
    rows: tuple[TuneRow, ...]
    best: TuneRow | None


def load_gold_pairs(path: str | Path) -> list[tuple[str, str, float]]:
    """TSV of word, word, and a human similarity score."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 'word<TAB>word<TAB>score'")
            try:
                score = float(parts[2])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad score {parts[2]!r}") from None
            out.append((parts[0], parts[1], score))
    if not out:
        raise ValidationError(f"{path}: no gold pairs")
    return out


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    if len(x) < 2 or np.std(x) == 0.0 or np.std(y) == 0.0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def tune_hyperparams(
    docs: Iterable,
    gold: Sequence[tuple[str, str, float]],
    contexts: Sequence[int],
    min_counts: Sequence[int],
    dims: Sequence[int],
    base_config: TrainConfig | None = None,
) -> TuneResult:
    """Grid search scored by Pearson correlation with gold pair similarities.

    One row per (context, min_count, d) combination in grid order; a
    combination whose vocabulary covers fewer than two gold pairs gets a
    missing correlation rather than zero. Every combination trains from the
    same seed. Best row is the argmax correlation, first row winning ties.
    """
    base = base_config or TrainConfig()
    doc_list = list(docs)
    rows: list[TuneRow] = []
    for c in contexts:
        for mc in min_counts:
            for dd in dims:
                config = replace(base, context=c, min_count=mc, d=dd)
                try:
                    model = train_cbow(doc_list, config)
                except ValidationError:
                    rows.append(TuneRow(c, mc, dd, None, 0.0))
                    continue
                sims = []
                scores = []
                hits = 0
                for w1, w2, score in gold:
                    if w1 in model.vocab and w2 in model.vocab:
                        hits += 1
                        sims.append(cosine_similarity(model.vector(w1), model.vector(w2)))
                        scores.append(score)
                coverage = hits / len(gold) if gold else 0.0
                r = _pearson(np.asarray(sims), np.asarray(scores)) if hits else None
                rows.append(TuneRow(c, mc, dd, r, coverage))
    scored = [row for row in rows if row.pearson_r is not None]
    best = max(scored, key=lambda row: row.pearson_r) if scored else None
    return TuneResult(tuple(rows), best)
