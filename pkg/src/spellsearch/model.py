"""Character-level recurrent classifier and string embeddings.

One-hot character sequences run through stacked LSTM layers; the full
sequence of top-layer hidden states is flattened into a dense ReLU layer
(whose activation is the string embedding) followed by a softmax over
catalog classes.  Training is plain cross-entropy + Adam, implemented in
numpy with float64 throughout so runs are bit-reproducible under a seed.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .corpus import Alphabet, DEFAULT_ALPHABET


class TrainingDivergenceError(Exception):
    """Raised when the loss stops being finite."""


class CheckpointError(Exception):
    """Raised for malformed or truncated checkpoint data."""


@dataclass
class ModelConfig:
    num_classes: int
    max_seq_len: int = 32
    alphabet_size: int = 37
    hidden_size: int = 64
    num_layers: int = 2
    dense_size: int = 128
    batch_size: int = 128
    learning_rate: float = 1e-3
    epochs: int = 20
    init_seed: int = 0

    def __post_init__(self):
        for name in (
            "num_classes", "max_seq_len", "alphabet_size", "hidden_size",
            "num_layers", "dense_size", "batch_size", "epochs",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


# Reference dimensions at production scale (~23k classes); desk-scale work
# uses the defaults above.
FULL_SCALE = dict(
    max_seq_len=69,
    alphabet_size=37,
    hidden_size=256,
    num_layers=2,
    dense_size=512,
    batch_size=128,
    learning_rate=1e-3,
    epochs=50,
)


@dataclass
class LayerParams:
    w_x: np.ndarray  # (input_size, 4h), gate blocks ordered [i, f, g, o]
    w_h: np.ndarray  # (h, 4h)
    bias: np.ndarray  # (4h,)


@dataclass
class ModelParams:
    layers: list[LayerParams]
    dense_w: np.ndarray  # (s*h, dense)
    dense_b: np.ndarray
    out_w: np.ndarray  # (dense, classes)
    out_b: np.ndarray

    def items(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            out.append((f"layers.{i}.w_x", layer.w_x))
            out.append((f"layers.{i}.w_h", layer.w_h))
            out.append((f"layers.{i}.bias", layer.bias))
        out.append(("dense_w", self.dense_w))
        out.append(("dense_b", self.dense_b))
        out.append(("out_w", self.out_w))
        out.append(("out_b", self.out_b))
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            layers=[
                LayerParams(l.w_x.copy(), l.w_h.copy(), l.bias.copy())
                for l in self.layers
            ],
            dense_w=self.dense_w.copy(),
            dense_b=self.dense_b.copy(),
            out_w=self.out_w.copy(),
            out_b=self.out_b.copy(),
        )


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(config: ModelConfig) -> ModelParams:
    """Glorot-uniform weights, zero biases, forget-gate bias +1."""
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=config.init_seed, spawn_key=(0,)))
    )
    h = config.hidden_size
    layers = []
    in_size = config.alphabet_size
    for _ in range(config.num_layers):
        bias = np.zeros(4 * h)
        bias[h:2 * h] = 1.0
        layers.append(
            LayerParams(
                w_x=_glorot(rng, in_size, 4 * h),
                w_h=_glorot(rng, h, 4 * h),
                bias=bias,
            )
        )
        in_size = h
    flat = config.max_seq_len * h
    return ModelParams(
        layers=layers,
        dense_w=_glorot(rng, flat, config.dense_size),
        dense_b=np.zeros(config.dense_size),
        out_w=_glorot(rng, config.dense_size, config.num_classes),
        out_b=np.zeros(config.num_classes),
    )


# ---------------------------------------------------------------------------
# Encoding

@dataclass
class EncodedBatch:
    one_hot: np.ndarray  # (batch, s, f)
    labels: Optional[np.ndarray]
    mask: np.ndarray  # (batch, s) True at real characters


def encode(
    text: str, config: ModelConfig, alphabet: Alphabet = DEFAULT_ALPHABET
) -> np.ndarray:
    """One-hot a canonicalized string: right-pad with zero rows, truncate at s."""
    if config.alphabet_size != len(alphabet):
        raise ValueError("config alphabet_size does not match the alphabet")
    s = config.max_seq_len
    out = np.zeros((s, config.alphabet_size))
    for pos, ch in enumerate(text[:s]):
        out[pos, alphabet.index[ch]] = 1.0
    return out


def encode_batch(
    texts: Sequence[str],
    config: ModelConfig,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    labels: Optional[Sequence[int]] = None,
) -> EncodedBatch:
    n = len(texts)
    one_hot = np.zeros((n, config.max_seq_len, config.alphabet_size))
    mask = np.zeros((n, config.max_seq_len), dtype=bool)
    for row, text in enumerate(texts):
        for pos, ch in enumerate(text[:config.max_seq_len]):
            one_hot[row, pos, alphabet.index[ch]] = 1.0
            mask[row, pos] = True
    lab = None if labels is None else np.asarray(labels, dtype=np.int64)
    return EncodedBatch(one_hot=one_hot, labels=lab, mask=mask)


# ---------------------------------------------------------------------------
# Forward / backward

def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def softmax(logits: np.ndarray) -> np.ndarray:
    # non-finite logits flow through as nan; loss_and_gradients raises on them
    with np.errstate(invalid="ignore"):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _forward_layer(layer: LayerParams, x: np.ndarray) -> dict:
    """Run one LSTM layer over (batch, s, input); returns per-step caches."""
    b, s, _ = x.shape
    h = layer.w_h.shape[0]
    xproj = x.reshape(b * s, -1) @ layer.w_x
    xproj = xproj.reshape(b, s, 4 * h) + layer.bias
    gates = np.empty((b, s, 4 * h))
    h_prev_seq = np.empty((b, s, h))
    c_prev_seq = np.empty((b, s, h))
    c_seq = np.empty((b, s, h))
    tanh_c = np.empty((b, s, h))
    h_seq = np.empty((b, s, h))
    h_t = np.zeros((b, h))
    c_t = np.zeros((b, h))
    for t in range(s):
        h_prev_seq[:, t] = h_t
        c_prev_seq[:, t] = c_t
        z = xproj[:, t] + h_t @ layer.w_h
        i = _sigmoid(z[:, :h])
        f = _sigmoid(z[:, h:2 * h])
        g = np.tanh(z[:, 2 * h:3 * h])
        o = _sigmoid(z[:, 3 * h:])
        c_t = f * c_t + i * g
        tc = np.tanh(c_t)
        h_t = o * tc
        gates[:, t, :h] = i
        gates[:, t, h:2 * h] = f
        gates[:, t, 2 * h:3 * h] = g
        gates[:, t, 3 * h:] = o
        c_seq[:, t] = c_t
        tanh_c[:, t] = tc
        h_seq[:, t] = h_t
    return {
        "x": x, "gates": gates, "h_prev": h_prev_seq, "c_prev": c_prev_seq,
        "c": c_seq, "tanh_c": tanh_c, "h": h_seq,
    }


def _forward_full(params: ModelParams, one_hot: np.ndarray) -> dict:
    x = one_hot
    layer_caches = []
    for layer in params.layers:
        cache = _forward_layer(layer, x)
        layer_caches.append(cache)
        x = cache["h"]
    b = one_hot.shape[0]
    flat = x.reshape(b, -1)
    pre = flat @ params.dense_w + params.dense_b
    emb = np.maximum(pre, 0.0)
    logits = emb @ params.out_w + params.out_b
    return {
        "layers": layer_caches, "flat": flat, "pre": pre,
        "emb": emb, "logits": logits,
    }


def forward(
    params: ModelParams, one_hot: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Logits over classes and the dense-layer embeddings for a batch."""
    fw = _forward_full(params, one_hot)
    return fw["logits"], fw["emb"]


def forward_inference(
    params: ModelParams, one_hot: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Same outputs as :func:`forward` without building backprop caches.

    The low-latency path for serving; numerically identical to forward.
    """
    x = one_hot
    b, s, _ = x.shape
    for layer in params.layers:
        h = layer.w_h.shape[0]
        xproj = (x.reshape(b * s, -1) @ layer.w_x).reshape(b, s, 4 * h)
        xproj += layer.bias
        h_seq = np.empty((b, s, h))
        h_t = np.zeros((b, h))
        c_t = np.zeros((b, h))
        for t in range(s):
            z = xproj[:, t] + h_t @ layer.w_h
            i = _sigmoid(z[:, :h])
            f = _sigmoid(z[:, h:2 * h])
            g = np.tanh(z[:, 2 * h:3 * h])
            o = _sigmoid(z[:, 3 * h:])
            c_t = f * c_t + i * g
            h_t = o * np.tanh(c_t)
            h_seq[:, t] = h_t
        x = h_seq
    flat = x.reshape(b, -1)
    emb = np.maximum(flat @ params.dense_w + params.dense_b, 0.0)
    logits = emb @ params.out_w + params.out_b
    return logits, emb


def _backward_layer(
    layer: LayerParams, cache: dict, d_h: np.ndarray
) -> tuple[np.ndarray, LayerParams]:
    b, s, h = cache["h"].shape
    gates = cache["gates"]
    d_gates = np.empty_like(gates)
    dh_rec = np.zeros((b, h))
    dc_rec = np.zeros((b, h))
    for t in range(s - 1, -1, -1):
        i = gates[:, t, :h]
        f = gates[:, t, h:2 * h]
        g = gates[:, t, 2 * h:3 * h]
        o = gates[:, t, 3 * h:]
        tc = cache["tanh_c"][:, t]
        dh = d_h[:, t] + dh_rec
        dc = dh * o * (1.0 - tc * tc) + dc_rec
        d_gates[:, t, :h] = dc * g * i * (1.0 - i)
        d_gates[:, t, h:2 * h] = dc * cache["c_prev"][:, t] * f * (1.0 - f)
        d_gates[:, t, 2 * h:3 * h] = dc * i * (1.0 - g * g)
        d_gates[:, t, 3 * h:] = dh * tc * o * (1.0 - o)
        dh_rec = d_gates[:, t] @ layer.w_h.T
        dc_rec = dc * f
    dg_flat = d_gates.reshape(b * s, 4 * h)
    x_flat = cache["x"].reshape(b * s, -1)
    grads = LayerParams(
        w_x=x_flat.T @ dg_flat,
        w_h=cache["h_prev"].reshape(b * s, h).T @ dg_flat,
        bias=dg_flat.sum(axis=0),
    )
    d_x = (dg_flat @ layer.w_x.T).reshape(cache["x"].shape)
    return d_x, grads


def loss_and_gradients(
    params: ModelParams, one_hot: np.ndarray, labels: np.ndarray
) -> tuple[float, ModelParams]:
    """Mean cross-entropy and its gradient for every parameter."""
    fw = _forward_full(params, one_hot)
    b = one_hot.shape[0]
    logp = _log_softmax(fw["logits"])
    loss = float(-logp[np.arange(b), labels].mean())
    if not np.isfinite(loss):
        raise TrainingDivergenceError(f"non-finite loss {loss!r}")

    d_logits = softmax(fw["logits"])
    d_logits[np.arange(b), labels] -= 1.0
    d_logits /= b

    g_out_w = fw["emb"].T @ d_logits
    g_out_b = d_logits.sum(axis=0)
    d_emb = d_logits @ params.out_w.T
    d_pre = d_emb * (fw["pre"] > 0.0)
    g_dense_w = fw["flat"].T @ d_pre
    g_dense_b = d_pre.sum(axis=0)
    d_h = (d_pre @ params.dense_w.T).reshape(fw["layers"][-1]["h"].shape)

    layer_grads: list[LayerParams] = [None] * len(params.layers)
    for li in range(len(params.layers) - 1, -1, -1):
        d_h, layer_grads[li] = _backward_layer(
            params.layers[li], fw["layers"][li], d_h
        )

    grads = ModelParams(
        layers=layer_grads,
        dense_w=g_dense_w,
        dense_b=g_dense_b,
        out_w=g_out_w,
        out_b=g_out_b,
    )
    return loss, grads


# ---------------------------------------------------------------------------
# Training

class Adam:
    def __init__(
        self,
        arrays: Sequence[np.ndarray],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.arrays = list(arrays)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(a) for a in self.arrays]
        self.v = [np.zeros_like(a) for a in self.arrays]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for i, (p, g) in enumerate(zip(self.arrays, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / b1c
            v_hat = self.v[i] / b2c
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainResult:
    params: ModelParams
    loss_trace: list[float]


def train(
    dataset: Sequence,
    config: ModelConfig,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    log: Optional[callable] = None,
) -> TrainResult:
    """Train from scratch on (text, label) samples; deterministic per seed.

    ``dataset`` items may be ``SynthSample``-like objects (``.text`` /
    ``.label``) or plain (text, label) tuples.
    """
    texts, labels = [], []
    for item in dataset:
        if hasattr(item, "text"):
            texts.append(item.text)
            labels.append(item.label)
        else:
            texts.append(item[0])
            labels.append(item[1])
    if not texts:
        raise ValueError("training dataset is empty")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= config.num_classes:
        raise ValueError("labels out of range for num_classes")

    batch = encode_batch(texts, config, alphabet, labels)
    params = init_params(config)
    adam = Adam([a for _, a in params.items()], lr=config.learning_rate)
    shuffle_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=config.init_seed, spawn_key=(1,)))
    )

    n = len(texts)
    trace: list[float] = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            try:
                loss, grads = loss_and_gradients(
                    params, batch.one_hot[idx], batch.labels[idx]
                )
            except TrainingDivergenceError as exc:
                raise TrainingDivergenceError(
                    f"{exc} (epoch {epoch}, batch starting at {start})"
                ) from exc
            adam.step([a for _, a in grads.items()])
            total += loss * len(idx)
        trace.append(total / n)
        if log is not None:
            log(epoch, trace[-1])
    return TrainResult(params=params, loss_trace=trace)


# ---------------------------------------------------------------------------
# Embeddings

def embed(
    params: ModelParams,
    text: str,
    config: ModelConfig,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> np.ndarray:
    """Dense-layer activation for one string (the string's embedding)."""
    one_hot = encode(text, config, alphabet)[np.newaxis]
    _, emb = forward_inference(params, one_hot)
    return emb[0]


def embed_batch(
    params: ModelParams,
    texts: Sequence[str],
    config: ModelConfig,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    chunk: int = 512,
) -> np.ndarray:
    out = np.empty((len(texts), config.dense_size))
    for start in range(0, len(texts), chunk):
        part = texts[start:start + chunk]
        _, emb = forward_inference(
            params, encode_batch(part, config, alphabet).one_hot
        )
        out[start:start + len(part)] = emb
    return out


# ---------------------------------------------------------------------------
# Checkpoints

CHECKPOINT_FORMAT = "spellsearch-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class CheckpointBundle:
    params: ModelParams
    config: ModelConfig
    loss_trace: list[float]
    digest: str


def save_checkpoint(
    params: ModelParams, config: ModelConfig, loss_trace: Sequence[float] = ()
) -> bytes:
    """Header line (JSON) + little-endian float64 tensors in manifest order."""
    items = params.items()
    trace = [float(x) for x in loss_trace]
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "epochs_trained": len(trace),
        "loss_trace": trace,
        "loss_trace_digest": hashlib.sha256(
            json.dumps(trace).encode()
        ).hexdigest(),
        "blas_threads": os.environ.get("OMP_NUM_THREADS", "default"),
        "tensors": [[name, list(a.shape)] for name, a in items],
    }
    blob = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in items)
    return json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + blob


def load_checkpoint(data: bytes) -> CheckpointBundle:
    newline = data.find(b"\n")
    if newline < 0:
        raise CheckpointError("missing checkpoint header")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"bad checkpoint header: {exc}") from exc
    if header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not a checkpoint file")
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')!r}")
    config = ModelConfig(**header["config"])
    blob = data[newline + 1:]
    expected = sum(
        int(np.prod(shape)) for _, shape in header["tensors"]
    ) * 8
    if len(blob) != expected:
        raise CheckpointError(
            f"checkpoint payload is {len(blob)} bytes, expected {expected}"
        )
    arrays = {}
    offset = 0
    for name, shape in header["tensors"]:
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(
            blob, dtype="<f8", count=count, offset=offset
        ).astype(float).reshape(shape)
        offset += count * 8

    layers = []
    for i in range(config.num_layers):
        layers.append(
            LayerParams(
                w_x=arrays[f"layers.{i}.w_x"],
                w_h=arrays[f"layers.{i}.w_h"],
                bias=arrays[f"layers.{i}.bias"],
            )
        )
    params = ModelParams(
        layers=layers,
        dense_w=arrays["dense_w"],
        dense_b=arrays["dense_b"],
        out_w=arrays["out_w"],
        out_b=arrays["out_b"],
    )
    return CheckpointBundle(
        params=params,
        config=config,
        loss_trace=[float(x) for x in header.get("loss_trace", [])],
        digest=hashlib.sha256(data).hexdigest(),
    )
