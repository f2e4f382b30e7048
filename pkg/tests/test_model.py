import numpy as np
import pytest

from spellsearch.model import (
    Adam,
    CheckpointError,
    ModelConfig,
    TrainingDivergenceError,
    encode,
    encode_batch,
    embed,
    forward,
    init_params,
    load_checkpoint,
    loss_and_gradients,
    save_checkpoint,
    softmax,
    train,
)

TINY = ModelConfig(
    num_classes=5, max_seq_len=8, alphabet_size=12, hidden_size=8,
    num_layers=2, dense_size=16, batch_size=3, init_seed=3,
)


def random_batch(rng, config, n=3):
    x = np.zeros((n, config.max_seq_len, config.alphabet_size))
    for b in range(n):
        length = int(rng.integers(2, config.max_seq_len + 1))
        for t in range(length):
            x[b, t, rng.integers(0, config.alphabet_size)] = 1.0
    labels = rng.integers(0, config.num_classes, size=n)
    return x, labels


# ---------------------------------------------------------------------------
# encoding

def test_encode_pads_and_sets_one_hot():
    config = ModelConfig(num_classes=2, max_seq_len=4)
    out = encode("ab", config)
    assert out.shape == (4, 37)
    assert out[0].sum() == 1 and out[1].sum() == 1
    assert out[2:].sum() == 0


def test_encode_truncates():
    config = ModelConfig(num_classes=2, max_seq_len=5)
    long = "abcdefghij"
    out = encode(long, config)
    ref = encode(long[:5], config)
    assert np.array_equal(out, ref)


def test_encode_empty_is_all_zero():
    config = ModelConfig(num_classes=2, max_seq_len=4)
    assert encode("", config).sum() == 0


def test_encode_batch_mask():
    config = ModelConfig(num_classes=2, max_seq_len=6)
    batch = encode_batch(["ab", "abcd"], config, labels=[0, 1])
    assert batch.mask[0].sum() == 2
    assert batch.mask[1].sum() == 4
    assert batch.labels.tolist() == [0, 1]


# ---------------------------------------------------------------------------
# forward

def test_forward_shapes_and_softmax():
    rng = np.random.default_rng(0)
    params = init_params(TINY)
    x, _ = random_batch(rng, TINY)
    logits, emb = forward(params, x)
    assert logits.shape == (3, 5)
    assert emb.shape == (3, 16)
    p = softmax(logits)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-6)


def test_forward_zero_weights_uniform_softmax():
    params = init_params(TINY)
    for _, arr in params.items():
        arr[...] = 0.0
    rng = np.random.default_rng(1)
    x, _ = random_batch(rng, TINY)
    logits, _ = forward(params, x)
    assert np.allclose(softmax(logits), 0.2)


def test_forward_identical_rows_identical_embeddings():
    config = ModelConfig(num_classes=3, max_seq_len=6)
    params = init_params(config)
    batch = encode_batch(["same text", "same text"], config)
    _, emb = forward(params, batch.one_hot)
    assert np.array_equal(emb[0], emb[1])


def test_embedding_depends_only_on_truncated_text():
    config = ModelConfig(num_classes=3, max_seq_len=4)
    params = init_params(config)
    assert np.array_equal(
        embed(params, "abcdzzzz", config), embed(params, "abcd", config)
    )


# ---------------------------------------------------------------------------
# loss and gradients

def test_untrained_loss_near_log_classes():
    rng = np.random.default_rng(2)
    params = init_params(TINY)
    x, labels = random_batch(rng, TINY, n=16)
    loss, _ = loss_and_gradients(params, x, labels)
    assert abs(loss - np.log(5)) / np.log(5) < 0.10


def test_single_example_loss_is_neg_log_prob():
    rng = np.random.default_rng(3)
    params = init_params(TINY)
    x, labels = random_batch(rng, TINY, n=1)
    logits, _ = forward(params, x)
    p = softmax(logits)[0, labels[0]]
    loss, _ = loss_and_gradients(params, x, labels)
    assert loss == pytest.approx(-np.log(p), rel=1e-12)


def test_gradients_match_finite_differences():
    """Keystone numerical check: every parameter, central differences."""
    rng = np.random.default_rng(4)
    params = init_params(TINY)
    x, labels = random_batch(rng, TINY)
    _, grads = loss_and_gradients(params, x, labels)
    grad_map = dict(grads.items())
    eps = 1e-4
    worst = 0.0
    for name, arr in params.items():
        g = grad_map[name]
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + eps
            lp, _ = loss_and_gradients(params, x, labels)
            arr[ix] = orig - eps
            lm, _ = loss_and_gradients(params, x, labels)
            arr[ix] = orig
            numeric = (lp - lm) / (2 * eps)
            rel = abs(numeric - g[ix]) / max(1e-6, abs(numeric) + abs(g[ix]))
            worst = max(worst, rel)
    assert worst < 1e-4, worst


def test_divergence_raises():
    params = init_params(TINY)
    params.out_b[...] = np.inf
    rng = np.random.default_rng(5)
    x, labels = random_batch(rng, TINY)
    with pytest.raises(TrainingDivergenceError):
        loss_and_gradients(params, x, labels)


# ---------------------------------------------------------------------------
# training

def tiny_dataset(rng, n=40):
    texts, labels = [], []
    words = ["alpha", "beta", "gamma", "delta", "omega"]
    for _ in range(n):
        k = int(rng.integers(5))
        texts.append(words[k])
        labels.append(k)
    return list(zip(texts, labels))


def test_train_reduces_loss():
    rng = np.random.default_rng(6)
    config = ModelConfig(
        num_classes=5, max_seq_len=8, hidden_size=12, dense_size=16,
        batch_size=8, epochs=30, learning_rate=0.01, init_seed=0,
    )
    result = train(tiny_dataset(rng), config)
    assert result.loss_trace[-1] < 0.2 * result.loss_trace[0]


def test_train_deterministic():
    rng = np.random.default_rng(7)
    data = tiny_dataset(rng)
    config = ModelConfig(
        num_classes=5, max_seq_len=8, hidden_size=8, dense_size=12,
        batch_size=8, epochs=3, init_seed=42,
    )
    a = train(data, config)
    b = train(data, config)
    assert a.loss_trace == b.loss_trace
    for (_, x), (_, y) in zip(a.params.items(), b.params.items()):
        assert np.array_equal(x, y)


def test_train_zero_lr_keeps_init():
    rng = np.random.default_rng(8)
    config = ModelConfig(
        num_classes=5, max_seq_len=8, hidden_size=8, dense_size=12,
        batch_size=8, epochs=2, init_seed=9, learning_rate=0.0,
    )
    result = train(tiny_dataset(rng), config)
    init = init_params(config)
    for (_, trained), (_, fresh) in zip(result.params.items(), init.items()):
        assert np.array_equal(trained, fresh)


def test_train_label_out_of_range():
    config = ModelConfig(num_classes=2, max_seq_len=4)
    with pytest.raises(ValueError):
        train([("aa", 5)], config)


def test_adam_moves_toward_minimum():
    x = np.array([10.0])
    opt = Adam([x], lr=0.5)
    for _ in range(200):
        opt.step([2 * x])  # d/dx x^2
    assert abs(x[0]) < 1e-2


# ---------------------------------------------------------------------------
# checkpoints

def test_checkpoint_round_trip_bit_identical():
    params = init_params(TINY)
    blob = save_checkpoint(params, TINY, [1.5, 0.5])
    bundle = load_checkpoint(blob)
    assert bundle.config == TINY
    assert bundle.loss_trace == [1.5, 0.5]
    for (_, a), (_, b) in zip(params.items(), bundle.params.items()):
        assert np.array_equal(a, b)
    assert save_checkpoint(bundle.params, bundle.config, bundle.loss_trace) == blob


def test_checkpoint_truncated():
    blob = save_checkpoint(init_params(TINY), TINY)
    with pytest.raises(CheckpointError):
        load_checkpoint(blob[:-10])


def test_checkpoint_not_a_checkpoint():
    with pytest.raises(CheckpointError):
        load_checkpoint(b'{"format": "something-else"}\n')


def test_forward_inference_bit_identical_to_forward():
    from spellsearch.model import forward_inference

    rng = np.random.default_rng(12)
    params = init_params(TINY)
    x, _ = random_batch(rng, TINY, n=4)
    logits_a, emb_a = forward(params, x)
    logits_b, emb_b = forward_inference(params, x)
    assert np.array_equal(logits_a, logits_b)
    assert np.array_equal(emb_a, emb_b)
