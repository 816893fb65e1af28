"""Small fully-connected binary classifiers with exact input gradients.

One network per artist ("is this painting by artist k?"), trained with
plain mini-batch gradient descent on the logistic loss.  Everything is
float64 numpy and deterministic given the config seed.  The activation
is tanh so the logit is smooth in the input -- the polarization step
differentiates it.

Checkpoint byte layout (see docs/formats.md):

    magic  b"SSYMMLP1"                 8 bytes
    u32    layer count L               little-endian
    u32    activation code (0 = tanh)
    L x (u32 in_dim, u32 out_dim)
    L x (weights f64 row-major (out_dim, in_dim), bias f64 (out_dim,))
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CheckpointError, DataError, NumericError

_MAGIC = b"SSYMMLP1"
_ACTIVATIONS = ("tanh",)

DEFAULT_HIDDEN = (384, 384, 384, 384)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    weight_decay: float = 1e-5

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise DataError(f"batch size must be >= 1, got {self.batch_size}")
        if self.weight_decay < 0:
            raise DataError("weight decay must be >= 0")


@dataclass
class MlpModel:
    """Weights `w[i]` of shape (out, in), biases `b[i]` of shape (out,).

    The last layer has a single output: the pre-sigmoid logit.  The
    decision boundary is logit == 0.
    """

    weights: list
    biases: list
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise DataError(f"unknown activation {self.activation!r}")
        if not self.weights or len(self.weights) != len(self.biases):
            raise DataError("weights/biases layer mismatch")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise DataError(f"layer {i}: bad shapes {w.shape} / {b.shape}")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise DataError(
                    f"layer {i}: input dim {w.shape[1]} does not chain from "
                    f"previous output {self.weights[i - 1].shape[0]}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"layer {i}: non-finite parameters")
        if self.weights[-1].shape[0] != 1:
            raise DataError("final layer must have a single (logit) output")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def layer_dims(self) -> tuple:
        return (self.input_dim,) + tuple(w.shape[0] for w in self.weights)


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    final_accuracy: float = 0.0


def init_mlp(
    input_dim: int,
    hidden=DEFAULT_HIDDEN,
    seed: int = 0,
    zero: bool = False,
) -> MlpModel:
    """He-scaled random init (std sqrt(2/fan_in)), zero biases.

    Args:
        input_dim: flattened input length, >= 1.
        hidden: widths of the hidden layers; may be empty for a linear probe.
        seed: RNG seed; the same seed yields identical parameters.
        zero: test hook -- all weights zero (forward logit is then 0).
    """
    if input_dim < 1:
        raise DataError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(seed)
    dims = [input_dim, *hidden, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if zero:
            w = np.zeros((fan_out, fan_in))
        else:
            w = rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in)
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases)


def _check_input(m: MlpModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.input_dim:
        raise DataError(
            f"input length {x.shape[-1]} does not match model input_dim {m.input_dim}"
        )
    return x


def _forward_cached(m: MlpModel, xs: np.ndarray):
    """Batched forward pass; returns per-layer activations (input first)."""
    acts = [xs]
    h = xs
    for i, (w, b) in enumerate(zip(m.weights, m.biases)):
        z = h @ w.T + b
        h = z if i == len(m.weights) - 1 else np.tanh(z)
        acts.append(h)
    return acts


def forward_logits(m: MlpModel, xs) -> np.ndarray:
    """Logits for a (n, input_dim) batch."""
    xs = _check_input(m, np.atleast_2d(xs))
    return _forward_cached(m, xs)[-1][:, 0]


def forward_logit(m: MlpModel, x) -> float:
    """Pre-sigmoid logit for a single flat input."""
    x = _check_input(m, x)
    if x.ndim != 1:
        raise DataError(f"forward_logit expects a flat vector, got shape {x.shape}")
    return float(forward_logits(m, x[np.newaxis])[0])


def input_gradients(m: MlpModel, xs) -> np.ndarray:
    """Exact reverse-mode d(logit)/d(input) for a (n, input_dim) batch."""
    xs = _check_input(m, np.atleast_2d(xs))
    acts = _forward_cached(m, xs)
    grad = np.ones((xs.shape[0], 1))
    for i in range(len(m.weights) - 1, -1, -1):
        grad = grad @ m.weights[i]
        if i > 0:
            grad = grad * (1.0 - acts[i] ** 2)  # d tanh
    return grad


def input_gradient(m: MlpModel, x) -> np.ndarray:
    """Exact gradient of the logit with respect to one flat input."""
    x = _check_input(m, x)
    if x.ndim != 1:
        raise DataError(f"input_gradient expects a flat vector, got shape {x.shape}")
    return input_gradients(m, x[np.newaxis])[0]


def _logistic_loss(logits: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y z, computed stably
    return float(np.mean(np.maximum(logits, 0) - logits * y + np.log1p(np.exp(-np.abs(logits)))))


def train_binary(m: MlpModel, images, labels, cfg: TrainConfig):
    """Mini-batch gradient descent on the logistic loss.

    Args:
        m: initial model (not mutated).
        images: (n, input_dim) float array of flattened images.
        labels: (n,) array of 0/1 labels; both classes must appear.
        cfg: optimizer settings; `cfg.seed` drives the shuffling.

    Returns:
        (trained MlpModel, TrainHistory).  The history records per-epoch
        mean pre-update batch loss/accuracy; `final_accuracy` is the
        training accuracy of the returned model.
    """
    xs = _check_input(m, np.atleast_2d(np.asarray(images, dtype=np.float64)))
    y = np.asarray(labels, dtype=np.float64).ravel()
    if xs.shape[0] != y.shape[0]:
        raise DataError(f"{xs.shape[0]} images vs {y.shape[0]} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0 or 1")
    if y.min() == y.max():
        raise DataError("training set contains a single class")

    weights = [w.copy() for w in m.weights]
    biases = [b.copy() for b in m.biases]
    model = MlpModel(weights=weights, biases=biases, activation=m.activation)
    rng = np.random.default_rng(cfg.seed)
    n = xs.shape[0]
    history = TrainHistory()
    n_layers = len(weights)

    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_hits = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = xs[idx], y[idx]
            acts = _forward_cached(model, xb)
            logits = acts[-1][:, 0]
            epoch_loss += _logistic_loss(logits, yb) * idx.size
            epoch_hits += float(np.sum((logits > 0) == (yb == 1)))
            # Backprop: d loss / d logit = sigmoid(z) - y, averaged.
            delta = (1.0 / (1.0 + np.exp(-logits)) - yb)[:, np.newaxis] / idx.size
            for i in range(n_layers - 1, -1, -1):
                grad_w = delta.T @ acts[i]
                grad_b = delta.sum(axis=0)
                if i > 0:
                    delta = (delta @ weights[i]) * (1.0 - acts[i] ** 2)
                weights[i] -= cfg.learning_rate * (
                    grad_w + cfg.weight_decay * weights[i]
                )
                biases[i] -= cfg.learning_rate * grad_b
        history.loss.append(epoch_loss / n)
        history.accuracy.append(epoch_hits / n)

    final_logits = forward_logits(model, xs)
    history.final_accuracy = float(np.mean((final_logits > 0) == (y == 1)))
    return model, history


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(m: MlpModel, path) -> None:
    """Serialize to the documented binary layout (little-endian f64)."""
    parts = [_MAGIC, struct.pack("<II", len(m.weights), 0)]
    for w in m.weights:
        parts.append(struct.pack("<II", w.shape[1], w.shape[0]))
    for w, b in zip(m.weights, m.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path) -> MlpModel:
    """Inverse of `save_checkpoint`; validates magic, dims and length."""
    p = Path(path)
    if not p.is_file():
        raise CheckpointError(f"checkpoint not found: {p}")
    data = p.read_bytes()
    if data[:8] != _MAGIC:
        raise CheckpointError(f"{p}: bad checkpoint magic {data[:8]!r}")
    if len(data) < 16:
        raise CheckpointError(f"{p}: truncated checkpoint header")
    n_layers, act_code = struct.unpack_from("<II", data, 8)
    if act_code != 0:
        raise CheckpointError(f"{p}: unknown activation code {act_code}")
    if n_layers < 1 or n_layers > 1024:
        raise CheckpointError(f"{p}: implausible layer count {n_layers}")
    pos = 16
    dims = []
    for _ in range(n_layers):
        if pos + 8 > len(data):
            raise CheckpointError(f"{p}: truncated layer table")
        in_dim, out_dim = struct.unpack_from("<II", data, pos)
        dims.append((in_dim, out_dim))
        pos += 8
    weights, biases = [], []
    for i, (in_dim, out_dim) in enumerate(dims):
        wn, bn = 8 * in_dim * out_dim, 8 * out_dim
        if pos + wn + bn > len(data):
            raise CheckpointError(f"{p}: truncated parameters for layer {i}")
        w = np.frombuffer(data, dtype="<f8", count=in_dim * out_dim, offset=pos)
        pos += wn
        b = np.frombuffer(data, dtype="<f8", count=out_dim, offset=pos)
        pos += bn
        weights.append(w.reshape(out_dim, in_dim).copy())
        biases.append(b.copy())
    if pos != len(data):
        raise CheckpointError(f"{p}: {len(data) - pos} trailing bytes")
    return MlpModel(weights=weights, biases=biases)


# ---------------------------------------------------------------------------
# One-vs-rest corpus protocol
# ---------------------------------------------------------------------------


def balanced_negatives(rng, n_positive: int, pool_size: int) -> np.ndarray:
    """Seeded 1:1 negative draw: indices into the other-artists pool.

    Sampling is without replacement when the pool allows, with
    replacement otherwise.
    """
    if pool_size < 1:
        raise DataError("negative pool is empty")
    replace = pool_size < n_positive
    return rng.choice(pool_size, size=n_positive, replace=replace)
