"""Constraint encoding and a from-scratch multi-label MLP criticality model.

An input-output example is encoded as 40 character codes (20 per side, zero
padded). Each code indexes a learned 128x100 embedding table; the 40 embedded
vectors are mean-pooled into one 100-dimensional vector that feeds three
sigmoid hidden layers and a sigmoid output layer, one unit per grammar
terminal. Training is mini-batch Adam on mean binary cross-entropy with
inverted dropout after each hidden layer. A "flatten" pooling variant
(concatenating the 40 embeddings into 4000 inputs) is supported as a
configuration alternative.

Everything is deterministic per seed and implemented directly on numpy.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import IoConstraint

EMBED_VOCAB = 128
EMBED_DIM = 100
SIDE_WIDTH = 20
NUM_HIDDEN = 3
VAR_SEPARATOR = "\x1f"  # joins multi-variable inputs before encoding

WEIGHTS_SCHEMA = "grt.weights"
WEIGHTS_VERSION = 1


class ShapeMismatch(ValueError):
    pass


class NonFiniteLoss(RuntimeError):
    pass


class DegenerateShape(ValueError):
    pass


class WeightsFormatError(ValueError):
    pass


# --- Encoding -----------------------------------------------------------------


def _codes_for(s: str) -> list[int]:
    # UTF-8 byte view, truncated to the fixed width; bytes past the 7-bit
    # range collapse onto the last embedding row so codes always index it
    data = s.encode("utf-8")[:SIDE_WIDTH]
    return [b if b < EMBED_VOCAB else EMBED_VOCAB - 1 for b in data]


def encode(constraint: IoConstraint) -> np.ndarray:
    """Fixed-width integer codes: input side then output side, zero padded."""
    joined = VAR_SEPARATOR.join(constraint.inputs)
    codes = np.zeros(2 * SIDE_WIDTH, dtype=np.int64)
    for offset, s in ((0, joined), (SIDE_WIDTH, constraint.output)):
        cs = _codes_for(s)
        codes[offset : offset + len(cs)] = cs
    return codes


def encode_batch(constraints: Sequence[IoConstraint]) -> np.ndarray:
    return np.stack([encode(c) for c in constraints])


# --- Layer sizing ---------------------------------------------------------------


def hidden_layer_sizes(input_size: int, output_size: int, num_hidden: int = NUM_HIDDEN) -> list[int]:
    """Geometrically interpolated hidden sizes between input and output width.

    The interpolation exponent for the n-th hidden layer is n over the total
    layer count plus one, and each size is rounded half-up (minimum 1).
    """
    if input_size < 1 or output_size < 1:
        raise DegenerateShape("layer sizes must be positive")
    total_layers = num_hidden + 2
    ratio = output_size / input_size
    sizes = []
    for n in range(1, num_hidden + 1):
        exact = input_size * ratio ** (n / (total_layers + 1))
        rounded = math.floor(exact + 0.5)
        if rounded < 1:
            raise DegenerateShape(f"hidden layer {n} rounds to {rounded}")
        sizes.append(rounded)
    return sizes


# --- Model ------------------------------------------------------------------------


@dataclass
class ModelWeights:
    embedding: np.ndarray
    hidden: list[tuple[np.ndarray, np.ndarray]]
    output: tuple[np.ndarray, np.ndarray]
    layer_dims: tuple[int, ...]
    terminal_names: tuple[str, ...]
    pooling: str = "mean"
    epoch_losses: list[float] | None = None  # set by train(); not serialized


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 15
    batch_size: int = 200
    # 1e-3 leaves the embedding path unlearned within 15 epochs at this data
    # scale: predictions collapse to per-bit base rates. 3e-3 reaches
    # input-dependent predictions in the same budget.
    learning_rate: float = 3e-3
    dropout_rate: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    pooling: str = "mean"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size, learning_rate must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")


def _input_dim(pooling: str) -> int:
    if pooling == "mean":
        return EMBED_DIM
    if pooling == "flatten":
        return EMBED_DIM * 2 * SIDE_WIDTH
    raise ValueError(f"unknown pooling mode {pooling!r}")


def init_weights(
    terminal_names: Sequence[str],
    seed: int = 0,
    num_hidden: int = NUM_HIDDEN,
    pooling: str = "mean",
) -> ModelWeights:
    """Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)); zero biases."""
    n_out = len(terminal_names)
    if n_out < 1:
        raise DegenerateShape("need at least one terminal")
    in_dim = _input_dim(pooling)
    dims = [in_dim, *hidden_layer_sizes(in_dim, n_out, num_hidden), n_out]
    rng = np.random.default_rng([seed, 0])

    def glorot(fan_in, fan_out, shape):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, shape)

    embedding = glorot(EMBED_VOCAB, EMBED_DIM, (EMBED_VOCAB, EMBED_DIM))
    hidden = [
        (glorot(dims[i], dims[i + 1], (dims[i], dims[i + 1])), np.zeros(dims[i + 1]))
        for i in range(num_hidden)
    ]
    output = (
        glorot(dims[-2], dims[-1], (dims[-2], dims[-1])),
        np.zeros(dims[-1]),
    )
    return ModelWeights(embedding, hidden, output, tuple(dims), tuple(terminal_names), pooling)


def _params(weights: ModelWeights):
    yield "embedding", weights.embedding
    for i, (W, b) in enumerate(weights.hidden):
        yield f"hidden.{i}.W", W
        yield f"hidden.{i}.b", b
    yield "output.W", weights.output[0]
    yield "output.b", weights.output[1]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _check_shapes(weights: ModelWeights, codes: np.ndarray) -> None:
    if codes.ndim != 2 or codes.shape[1] != 2 * SIDE_WIDTH:
        raise ShapeMismatch(f"codes must be (batch, {2 * SIDE_WIDTH}), got {codes.shape}")
    if weights.embedding.shape != (EMBED_VOCAB, EMBED_DIM):
        raise ShapeMismatch(f"embedding must be {(EMBED_VOCAB, EMBED_DIM)}")
    dims = weights.layer_dims
    if dims[0] != _input_dim(weights.pooling):
        raise ShapeMismatch("first layer width does not match pooling mode")
    mats = [W.shape for W, _ in weights.hidden] + [weights.output[0].shape]
    expected = [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
    if mats != expected:
        raise ShapeMismatch(f"layer shapes {mats} do not chain as {expected}")


def _pool(weights: ModelWeights, codes: np.ndarray) -> np.ndarray:
    emb = weights.embedding[codes]  # (B, 40, EMBED_DIM)
    if weights.pooling == "mean":
        return emb.mean(axis=1)
    return emb.reshape(emb.shape[0], -1)


def _forward_all(weights, codes, dropout_rate=0.0, rng=None):
    """Forward pass keeping everything backprop needs."""
    hs = [_pool(weights, codes)]  # layer inputs (post-dropout)
    pre = []  # sigmoid outputs before dropout
    masks = []
    for W, b in weights.hidden:
        a = _sigmoid(hs[-1] @ W + b)
        pre.append(a)
        if dropout_rate > 0.0 and rng is not None:
            mask = (rng.random(a.shape) >= dropout_rate) / (1.0 - dropout_rate)
            masks.append(mask)
            hs.append(a * mask)
        else:
            masks.append(None)
            hs.append(a)
    Wo, bo = weights.output
    logits = hs[-1] @ Wo + bo
    return hs, pre, masks, logits, _sigmoid(logits)


def forward(
    weights: ModelWeights,
    codes: np.ndarray,
    train_mode: bool = False,
    dropout_rate: float = 0.2,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Per-terminal criticality probabilities, in (0, 1).

    Dropout fires only in train mode (supply an rng for reproducibility);
    evaluation mode is deterministic.
    """
    codes = np.asarray(codes)
    single = codes.ndim == 1
    batch = codes[None, :] if single else codes
    _check_shapes(weights, batch)
    if train_mode:
        if rng is None:
            rng = np.random.default_rng(0)
        _, _, _, _, probs = _forward_all(weights, batch, dropout_rate, rng)
    else:
        _, _, _, _, probs = _forward_all(weights, batch)
    return probs[0] if single else probs


def bce_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy, computed stably from logits."""
    per_elem = np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))
    return float(per_elem.mean())


def loss_and_grads(
    weights: ModelWeights,
    codes: np.ndarray,
    labels: np.ndarray,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
):
    """Mean BCE loss and its analytic gradients for every parameter."""
    codes = np.asarray(codes)
    labels = np.asarray(labels, dtype=np.float64)
    _check_shapes(weights, codes)
    if labels.shape != (codes.shape[0], weights.layer_dims[-1]):
        raise ShapeMismatch(f"labels must be {(codes.shape[0], weights.layer_dims[-1])}")
    hs, pre, masks, logits, probs = _forward_all(weights, codes, dropout_rate, rng)
    loss = bce_loss(logits, labels)

    grads: dict[str, np.ndarray] = {}
    dlogits = (probs - labels) / labels.size
    Wo, _ = weights.output
    grads["output.W"] = hs[-1].T @ dlogits
    grads["output.b"] = dlogits.sum(axis=0)
    dh = dlogits @ Wo.T
    for l in reversed(range(len(weights.hidden))):
        W, _ = weights.hidden[l]
        da = dh * masks[l] if masks[l] is not None else dh
        dz = da * pre[l] * (1.0 - pre[l])
        grads[f"hidden.{l}.W"] = hs[l].T @ dz
        grads[f"hidden.{l}.b"] = dz.sum(axis=0)
        dh = dz @ W.T

    demb = np.zeros_like(weights.embedding)
    n_pos = 2 * SIDE_WIDTH
    if weights.pooling == "mean":
        contrib = np.repeat(dh / n_pos, n_pos, axis=0)
    else:
        contrib = dh.reshape(-1, EMBED_DIM)
    np.add.at(demb, codes.reshape(-1), contrib)
    grads["embedding"] = demb
    return loss, grads


def train(dataset, config: TrainConfig, terminal_names: Sequence[str]) -> ModelWeights:
    """Mini-batch Adam on mean BCE; returns the weights after the last epoch.

    The dataset is put into a canonical order before the seeded shuffle, so
    permuting the input list changes nothing. Per-epoch mean losses end up in
    ``weights.epoch_losses``.
    """
    if not dataset:
        raise ValueError("empty training dataset")
    order = sorted(
        range(len(dataset)),
        key=lambda i: (
            dataset[i].program_id,
            dataset[i].constraint.inputs,
            dataset[i].constraint.output,
        ),
    )
    codes = encode_batch([dataset[i].constraint for i in order])
    labels = np.array([dataset[i].label for i in order], dtype=np.float64)
    if labels.shape[1] != len(terminal_names):
        raise ShapeMismatch(
            f"labels have {labels.shape[1]} bits for {len(terminal_names)} terminals"
        )

    weights = init_weights(terminal_names, seed=config.seed, pooling=config.pooling)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    dropout_rng = np.random.default_rng([config.seed, 2])

    m = {name: np.zeros_like(p) for name, p in _params(weights)}
    v = {name: np.zeros_like(p) for name, p in _params(weights)}
    step = 0
    n = len(order)
    epoch_losses = []
    for _ in range(config.epochs):
        perm = shuffle_rng.permutation(n)
        total, seen = 0.0, 0
        for lo in range(0, n, config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            loss, grads = loss_and_grads(
                weights, codes[idx], labels[idx], config.dropout_rate, dropout_rng
            )
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at step {step}")
            step += 1
            bc1 = 1.0 - config.beta1 ** step
            bc2 = 1.0 - config.beta2 ** step
            for name, p in _params(weights):
                g = grads[name]
                m[name] = config.beta1 * m[name] + (1.0 - config.beta1) * g
                v[name] = config.beta2 * v[name] + (1.0 - config.beta2) * g * g
                p -= config.learning_rate * (m[name] / bc1) / (np.sqrt(v[name] / bc2) + config.eps)
            total += loss * len(idx)
            seen += len(idx)
        epoch_losses.append(total / seen)
    weights.epoch_losses = epoch_losses
    return weights


def predict_bits(weights: ModelWeights, constraint: IoConstraint, threshold: float = 0.5) -> np.ndarray:
    """Binary criticality vector: 1 where the probability reaches the threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    probs = forward(weights, encode(constraint))
    return (probs >= threshold).astype(np.int64)


# --- Weights file ------------------------------------------------------------------


def terminal_order_hash(terminal_names: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(terminal_names).encode("utf-8")).hexdigest()


def save_weights(path, weights: ModelWeights) -> None:
    """Versioned JSON header line, then float64 little-endian arrays in order."""
    header = {
        "schema": WEIGHTS_SCHEMA,
        "version": WEIGHTS_VERSION,
        "n_terminals": len(weights.terminal_names),
        "terminal_hash": terminal_order_hash(weights.terminal_names),
        "layer_dims": list(weights.layer_dims),
        "pooling": weights.pooling,
        "embedding_shape": [EMBED_VOCAB, EMBED_DIM],
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, separators=(",", ":")) + "\n").encode("utf-8"))
        for _, arr in _params(weights):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_weights(path, terminal_names: Sequence[str]) -> ModelWeights:
    """Load weights, refusing any file whose terminal ordering hash mismatches."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise WeightsFormatError(f"{path}: bad header: {exc}") from exc
    if header.get("schema") != WEIGHTS_SCHEMA or header.get("version") != WEIGHTS_VERSION:
        raise WeightsFormatError(f"{path}: unsupported schema/version")
    if header.get("terminal_hash") != terminal_order_hash(terminal_names):
        raise WeightsFormatError(
            f"{path}: terminal ordering hash does not match the grammar"
        )
    if header.get("n_terminals") != len(terminal_names):
        raise WeightsFormatError(f"{path}: terminal count mismatch")
    dims = tuple(header["layer_dims"])
    pooling = header.get("pooling", "mean")
    if dims[0] != _input_dim(pooling) or dims[-1] != len(terminal_names):
        raise WeightsFormatError(f"{path}: inconsistent layer dims {dims}")

    shapes = [("embedding", (EMBED_VOCAB, EMBED_DIM))]
    for i in range(len(dims) - 2):
        shapes.append((f"hidden.{i}.W", (dims[i], dims[i + 1])))
        shapes.append((f"hidden.{i}.b", (dims[i + 1],)))
    shapes.append(("output.W", (dims[-2], dims[-1])))
    shapes.append(("output.b", (dims[-1],)))

    expected = sum(int(np.prod(s)) for _, s in shapes) * 8
    if len(blob) != expected:
        raise WeightsFormatError(f"{path}: expected {expected} payload bytes, got {len(blob)}")
    arrays = {}
    offset = 0
    for name, shape in shapes:
        count = int(np.prod(shape))
        arrays[name] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
            .reshape(shape)
            .copy()
        )
        offset += count * 8
    n_hidden = len(dims) - 2
    return ModelWeights(
        embedding=arrays["embedding"],
        hidden=[(arrays[f"hidden.{i}.W"], arrays[f"hidden.{i}.b"]) for i in range(n_hidden)],
        output=(arrays["output.W"], arrays["output.b"]),
        layer_dims=dims,
        terminal_names=tuple(terminal_names),
        pooling=pooling,
    )
