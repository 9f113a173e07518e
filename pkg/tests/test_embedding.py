"""CBOW embedding: vocabulary, training, gradients, neighbors, model files."""

import math

import numpy as np
import pytest

from greenlex.corpus import ProcessedDoc
from greenlex.embedding import (
    CbowModel,
    TrainConfig,
    Vocabulary,
    build_vocab,
    cbow_forward,
    corpus_loss,
    cosine_similarity,
    load_model,
    save_model,
    top_k_neighbors,
    train_cbow,
    tune_hyperparams,
)
from greenlex.errors import FormatError, TrainingDivergedError, ValidationError


def docs_from(*token_lists):
    return [ProcessedDoc(f"d{i}", tuple(toks)) for i, toks in enumerate(token_lists)]


def small_corpus(n_docs=30, n_words=12, doc_len=20, seed=0):
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(n_words)]
    return [
        ProcessedDoc(f"d{i}", tuple(words[j] for j in rng.integers(0, n_words, doc_len)))
        for i in range(n_docs)
    ]


def manual_model(w_in, w_out, counts):
    words = sorted(counts, key=lambda w: (-counts[w], w))
    vocab = Vocabulary(words, counts, 1)
    config = TrainConfig(d=w_in.shape[1], min_count=1)
    return CbowModel(vocab, np.asarray(w_in, float), np.asarray(w_out, float), config)


# ----------------------------------------------------------------- vocabulary


def test_vocab_orders_by_count_desc_then_lexicographic():
    docs = docs_from(["b", "b", "c", "c", "a", "a", "a", "d"])
    vocab = build_vocab(docs, min_count=1)
    assert vocab.words == ("a", "b", "c", "d")
    assert vocab.id_of("a") == 0
    assert "d" in vocab and "z" not in vocab


def test_vocab_min_count_filters():
    docs = docs_from(["a", "a", "b"])
    vocab = build_vocab(docs, min_count=2)
    assert vocab.words == ("a",)
    with pytest.raises(ValidationError):
        build_vocab(docs, min_count=5)


# -------------------------------------------------------------------- forward


def test_forward_hidden_state_is_context_mean():
    w_in = np.arange(12.0).reshape(4, 3)
    w_out = np.zeros((3, 4))
    model = manual_model(w_in, w_out, {"a": 4, "b": 3, "c": 2, "d": 1})
    out = cbow_forward(model, [0, 2], target_id=1)
    assert np.allclose(out.h, (w_in[0] + w_in[2]) / 2.0)
    # zero output weights make the prediction uniform
    assert np.allclose(out.probs, 0.25)
    assert math.isclose(out.loss, math.log(4.0))


def test_forward_loss_matches_manual_softmax():
    rng = np.random.default_rng(3)
    w_in = rng.normal(size=(5, 4))
    w_out = rng.normal(size=(4, 5))
    model = manual_model(w_in, w_out, {f"w{i}": 5 - i for i in range(5)})
    ctx = [0, 3, 3]  # duplicate context word counts twice in the mean
    out = cbow_forward(model, ctx, target_id=2)
    h = w_in[[0, 3, 3]].mean(axis=0)
    scores = h @ w_out
    probs = np.exp(scores) / np.exp(scores).sum()
    assert math.isclose(out.loss, -math.log(probs[2]), rel_tol=1e-12)
    assert np.allclose(out.probs, probs)


def fd_gradients(w_in, w_out, ctx, target, eps=1e-6):
    """Central finite differences of the full-softmax loss for both matrices."""

    def loss_at(a, b):
        h = a[ctx].mean(axis=0)
        scores = h @ b
        scores = scores - scores.max()
        return -(scores[target] - math.log(np.exp(scores).sum()))

    g_in = np.zeros_like(w_in)
    for i in range(w_in.shape[0]):
        for j in range(w_in.shape[1]):
            up, dn = w_in.copy(), w_in.copy()
            up[i, j] += eps
            dn[i, j] -= eps
            g_in[i, j] = (loss_at(up, w_out) - loss_at(dn, w_out)) / (2 * eps)
    g_out = np.zeros_like(w_out)
    for i in range(w_out.shape[0]):
        for j in range(w_out.shape[1]):
            up, dn = w_out.copy(), w_out.copy()
            up[i, j] += eps
            dn[i, j] -= eps
            g_out[i, j] = (loss_at(w_in, up) - loss_at(w_in, dn)) / (2 * eps)
    return g_in, g_out


def test_analytic_gradients_match_finite_differences_once():
    rng = np.random.default_rng(11)
    w_in = rng.normal(scale=0.4, size=(6, 3))
    w_out = rng.normal(scale=0.4, size=(3, 6))
    model = manual_model(w_in, w_out, {f"w{i}": 6 - i for i in range(6)})
    ctx = [1, 4, 4, 0]
    out = cbow_forward(model, ctx, target_id=5)
    fd_in, fd_out = fd_gradients(w_in, w_out, ctx, 5)
    assert np.allclose(out.grad_w_out, fd_out, atol=1e-8)
    assert np.allclose(out.grad_w_in(ctx, 6), fd_in, atol=1e-8)


# ------------------------------------------------------------------- training


def test_training_reduces_reference_loss():
    docs = small_corpus()
    config = TrainConfig(d=8, context=2, min_count=1, epochs=0, seed=4)
    untrained = train_cbow(docs, config)
    before = corpus_loss(untrained, docs)
    trained = train_cbow(docs, TrainConfig(d=8, context=2, min_count=1, epochs=5, seed=4))
    after = corpus_loss(trained, docs)
    assert after < before


def test_training_is_deterministic_per_seed():
    docs = small_corpus()
    config = TrainConfig(d=8, context=2, min_count=1, epochs=2, seed=9)
    m1 = train_cbow(docs, config)
    m2 = train_cbow(docs, config)
    assert np.array_equal(m1.w_in, m2.w_in)
    assert np.array_equal(m1.w_out, m2.w_out)
    m3 = train_cbow(docs, TrainConfig(d=8, context=2, min_count=1, epochs=2, seed=10))
    assert not np.array_equal(m1.w_in, m3.w_in)


def test_epoch_losses_are_recorded():
    docs = small_corpus()
    model = train_cbow(docs, TrainConfig(d=8, context=2, min_count=1, epochs=3, seed=1))
    assert len(model.epoch_losses) == 3
    assert all(math.isfinite(x) for x in model.epoch_losses)


def test_out_of_vocabulary_tokens_are_dropped_before_windowing():
    # tokens outside the vocabulary vanish before windows are formed: a doc
    # keeping two in-vocab tokens still yields positions, one does not
    vocab = build_vocab(docs_from(["left", "right"] * 3), min_count=1)
    model = train_cbow([], TrainConfig(d=4, context=1, min_count=1, epochs=0, seed=0), vocab=vocab)
    two_survivors = docs_from(["left", "rare", "right"])
    assert math.isclose(corpus_loss(model, two_survivors), math.log(2.0), rel_tol=1e-9)
    with pytest.raises(ValidationError, match="no training positions"):
        corpus_loss(model, docs_from(["rare", "left"]))


def collocated_corpus():
    pairs = [("cold", "ice"), ("hot", "fire"), ("wet", "rain"), ("dry", "sand")]
    return [
        ProcessedDoc(f"d{i}", pairs[i % 4] * 8) for i in range(40)
    ]


def test_negative_sampling_trains_and_reduces_loss():
    docs = collocated_corpus()
    config = TrainConfig(
        d=8, context=1, min_count=1, epochs=5, seed=4,
        loss="negative_sampling", negative_k=3, learning_rate=0.05,
    )
    trained = train_cbow(docs, config)
    untrained = train_cbow(docs, TrainConfig(d=8, context=1, min_count=1, epochs=0, seed=4))
    assert corpus_loss(trained, docs) < corpus_loss(untrained, docs)


def test_divergence_raises_with_location():
    docs = small_corpus(n_docs=6)
    config = TrainConfig(
        d=4, context=2, min_count=1, epochs=50, learning_rate=1e8, lr_floor=1e7, seed=0
    )
    with pytest.raises(TrainingDivergedError) as excinfo:
        train_cbow(docs, config)
    err = excinfo.value
    assert err.epoch >= 0 and err.step >= 0 and err.learning_rate > 0


def test_single_token_docs_contribute_no_steps():
    docs = docs_from(["only"], ["a", "b", "a", "b"])
    model = train_cbow(docs, TrainConfig(d=4, context=1, min_count=1, epochs=1, seed=0))
    assert set(model.vocab.words) == {"a", "b", "only"}


def test_zero_epochs_returns_initialized_model():
    docs = small_corpus()
    model = train_cbow(docs, TrainConfig(d=8, context=2, min_count=1, epochs=0, seed=4))
    assert model.epoch_losses == ()
    assert np.all(model.w_out == 0.0)
    assert np.all(np.abs(model.w_in) <= 0.5 / 8)


# ------------------------------------------------------------------ neighbors


def test_cosine_similarity_basics():
    assert math.isclose(cosine_similarity([1, 0], [2, 0]), 1.0)
    assert math.isclose(cosine_similarity([1, 0], [0, 3]), 0.0, abs_tol=1e-15)
    assert math.isclose(cosine_similarity([1, 0], [-1, 0]), -1.0)
    with pytest.raises(ValueError):
        cosine_similarity([0, 0], [1, 0])


def test_top_k_excludes_query_and_breaks_ties_lexicographically():
    # "b" and "c" sit at the same angle from "a"; tie broken by word
    w_in = np.array([[1.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 1.0]])
    model = manual_model(w_in, np.zeros((2, 4)), {"a": 4, "b": 3, "c": 2, "d": 1})
    result = top_k_neighbors(model, "a", k=3)
    assert [w for w, _ in result] == ["b", "c", "d"]
    assert math.isclose(result[0][1], result[1][1])
    assert top_k_neighbors(model, "a", k=10) == result  # capped at V - 1


def test_top_k_unknown_word_raises_keyerror():
    model = manual_model(np.eye(2), np.zeros((2, 2)), {"a": 2, "b": 1})
    with pytest.raises(KeyError):
        top_k_neighbors(model, "nope", k=1)


# ---------------------------------------------------------------- model files


def test_save_load_roundtrip_quantizes_to_f32(tmp_path):
    docs = small_corpus()
    model = train_cbow(docs, TrainConfig(d=8, context=2, min_count=1, epochs=2, seed=5))
    path = tmp_path / "model.bin"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.vocab.words == model.vocab.words
    assert loaded.vocab.counts == model.vocab.counts
    # disk format stores float32: equality holds after quantization
    assert np.array_equal(loaded.w_in, model.w_in.astype(np.float32).astype(np.float64))
    assert np.array_equal(loaded.w_out, model.w_out.astype(np.float32).astype(np.float64))


def test_save_is_byte_deterministic(tmp_path):
    docs = small_corpus()
    model = train_cbow(docs, TrainConfig(d=4, context=2, min_count=1, epochs=1, seed=5))
    p1, p2 = tmp_path / "m1.bin", tmp_path / "m2.bin"
    save_model(model, p1)
    save_model(model, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTAMODEL")
    with pytest.raises(FormatError, match="not a model file"):
        load_model(path)


def test_load_rejects_truncation_and_trailing_bytes(tmp_path):
    docs = small_corpus()
    model = train_cbow(docs, TrainConfig(d=4, context=2, min_count=1, epochs=1, seed=5))
    path = tmp_path / "m.bin"
    save_model(model, path)
    raw = path.read_bytes()

    truncated = tmp_path / "trunc.bin"
    truncated.write_bytes(raw[:-5])
    with pytest.raises(FormatError, match="EOF"):
        load_model(truncated)

    padded = tmp_path / "padded.bin"
    padded.write_bytes(raw + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        load_model(padded)


# --------------------------------------------------------------------- tuning


def test_tune_emits_one_row_per_combination_in_grid_order():
    docs = small_corpus(n_docs=20, n_words=8, doc_len=12)
    gold = [("w0", "w1", 0.5), ("w2", "w3", 0.1)]
    base = TrainConfig(d=4, context=2, min_count=1, epochs=1, seed=2)
    result = tune_hyperparams(docs, gold, contexts=[1, 2], min_counts=[1], dims=[4, 8], base_config=base)
    combos = [(r.context, r.min_count, r.d) for r in result.rows]
    assert combos == [(1, 1, 4), (1, 1, 8), (2, 1, 4), (2, 1, 8)]
    assert all(r.coverage == 1.0 for r in result.rows)


def test_tune_coverage_counts_in_vocab_pairs_only():
    docs = small_corpus(n_docs=20, n_words=6, doc_len=12)
    gold = [("w0", "w1", 0.9), ("w0", "nope", 0.2)]
    base = TrainConfig(d=4, context=2, min_count=1, epochs=1, seed=2)
    result = tune_hyperparams(docs, gold, contexts=[2], min_counts=[1], dims=[4], base_config=base)
    assert result.rows[0].coverage == 0.5
    # a single covered pair has no correlation
    assert result.rows[0].pearson_r is None


def test_tune_gold_equal_to_model_similarities_gives_perfect_r():
    docs = small_corpus(n_docs=25, n_words=10, doc_len=15, seed=3)
    base = TrainConfig(d=6, context=2, min_count=1, epochs=2, seed=7)
    reference = train_cbow(docs, base)
    pairs = [("w0", "w1"), ("w2", "w5"), ("w3", "w8"), ("w4", "w9"), ("w6", "w7")]
    gold = [
        (a, b, cosine_similarity(reference.vector(a), reference.vector(b))) for a, b in pairs
    ]
    result = tune_hyperparams(docs, gold, contexts=[2], min_counts=[1], dims=[6], base_config=base)
    assert result.best is not None
    assert abs(result.best.pearson_r - 1.0) < 1e-9
