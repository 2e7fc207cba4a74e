"""From-scratch multi-layer perceptron: forward, backprop, SGD, dropout.

The network is a stack of dense layers.  Hidden layers apply an affine map
followed by ReLU and, in train mode, inverted dropout (surviving units are
scaled by 1/(1-rate) so eval-time forward needs no rescaling).  The final
layer applies an affine map and a max-subtracted softmax.  Training is
plain stochastic gradient descent on cross-entropy loss; all arithmetic is
float64 and every random choice draws from seeded SplitMix64 streams, so
identical (seed, data, hyperparams) reproduce identical parameters bit for
bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .rng import SplitMix64

# Loss clamps probabilities at this floor before taking logs.
PROB_EPS = 1e-12

# Substream tags for deriving independent RNG streams from one seed.
_INIT_STREAM = 0
_DROPOUT_STREAM = 1

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Corrupt, mis-versioned, or shape-inconsistent model file."""


class NumericError(RuntimeError):
    """Non-finite loss or gradient encountered during training."""


@dataclass
class Hyperparams:
    """Training configuration.

    embed_dim and window shape the input; the rest drive the optimizer.
    learning_rate, batch_size, hidden_dim and seed are this
    implementation's knobs and are recorded in every saved model.
    """

    embed_dim: int
    window: int = 1
    layer_count: int = 2
    dropout_rate: float = 0.0
    epochs: int = 10
    learning_rate: float = 0.01
    batch_size: int = 1
    hidden_dim: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 1:
            raise ValueError(f"embed_dim must be >= 1, got {self.embed_dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.layer_count < 1:
            raise ValueError(f"layer_count must be >= 1, got {self.layer_count}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")

    @property
    def input_dim(self) -> int:
        return 2 * self.window * self.embed_dim


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MlpModel:
    layers: list[DenseLayer]
    input_dim: int
    num_classes: int
    hyperparams: Hyperparams
    label_set_name: str | None = None

    def validate_shapes(self) -> None:
        if not self.layers:
            raise ModelFormatError("model has no layers")
        if self.layers[0].in_dim != self.input_dim:
            raise ModelFormatError(
                f"first layer expects {self.layers[0].in_dim} inputs, model declares "
                f"{self.input_dim}"
            )
        for i in range(1, len(self.layers)):
            if self.layers[i].in_dim != self.layers[i - 1].out_dim:
                raise ModelFormatError(
                    f"layer {i} input {self.layers[i].in_dim} does not chain from layer "
                    f"{i - 1} output {self.layers[i - 1].out_dim}"
                )
        if self.layers[-1].out_dim != self.num_classes:
            raise ModelFormatError(
                f"output layer has {self.layers[-1].out_dim} units, model declares "
                f"{self.num_classes} classes"
            )


@dataclass
class ForwardCache:
    """Per-layer activations and masks captured by a forward pass."""

    inputs: list[np.ndarray]
    relu_masks: list[np.ndarray]
    dropout_masks: list[np.ndarray | None]
    probs: np.ndarray
    mode: str


@dataclass
class LayerGrads:
    dW: np.ndarray
    db: np.ndarray


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    accuracy: float


def build_model(input_dim: int, num_classes: int, hp: Hyperparams) -> MlpModel:
    """Create an L-layer MLP with Glorot-uniform weights and zero biases.

    L = 1 is a bare affine + softmax, i.e. multinomial logistic regression.
    Initialization draws from SplitMix64 substream 0 of hp.seed.
    """
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    dims = (
        [input_dim]
        + [hp.hidden_dim] * (hp.layer_count - 1)
        + [num_classes]
    )
    rng = SplitMix64.for_stream(hp.seed, _INIT_STREAM)
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform_array(fan_out * fan_in, -limit, limit).reshape(fan_out, fan_in)
        layers.append(DenseLayer(w, np.zeros(fan_out)))
    model = MlpModel(layers, input_dim, num_classes, hp)
    model.validate_shapes()
    return model


def relu(z: np.ndarray) -> np.ndarray:
    """Elementwise max(z, 0)."""
    return np.maximum(z, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax via max subtraction."""
    shifted = logits - np.max(logits)
    exps = np.exp(shifted)
    return exps / np.sum(exps)


def one_hot(num_classes: int, index: int) -> np.ndarray:
    y = np.zeros(num_classes)
    y[index] = 1.0
    return y


def cross_entropy(y_true: np.ndarray, probs: np.ndarray) -> float:
    """-sum(y * log(p)) with p clamped at 1e-12; for one-hot y this is
    -log(p[true class])."""
    if y_true.shape != probs.shape:
        raise ValueError(f"shape mismatch: y_true {y_true.shape} vs probs {probs.shape}")
    return float(-np.sum(y_true * np.log(np.maximum(probs, PROB_EPS))))


def dropout_mask(dim: int, rate: float, rng: SplitMix64) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability `rate`, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(dim)
    survived = rng.floats(dim) >= rate
    return survived / (1.0 - rate)


def forward(
    model: MlpModel,
    x: np.ndarray,
    mode: str = "eval",
    rng: SplitMix64 | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """One forward pass; returns class probabilities and the cache that
    backward() needs.

    Train mode applies inverted dropout after each hidden ReLU (requires
    `rng` when the dropout rate is positive); eval mode is deterministic.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"input has shape {x.shape}, model expects ({model.input_dim},)")
    rate = model.hyperparams.dropout_rate
    if mode == "train" and rate > 0.0 and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")

    inputs: list[np.ndarray] = []
    relu_masks: list[np.ndarray] = []
    dropout_masks: list[np.ndarray | None] = []
    h = x
    for layer in model.layers[:-1]:
        inputs.append(h)
        z = layer.weights @ h + layer.bias
        relu_masks.append(z > 0.0)
        h = relu(z)
        if mode == "train" and rate > 0.0:
            mask = dropout_mask(h.shape[0], rate, rng)
            h = h * mask
            dropout_masks.append(mask)
        else:
            dropout_masks.append(None)
    inputs.append(h)
    out = model.layers[-1]
    probs = softmax(out.weights @ h + out.bias)
    return probs, ForwardCache(inputs, relu_masks, dropout_masks, probs, mode)


def backward(model: MlpModel, cache: ForwardCache, y_true: np.ndarray) -> list[LayerGrads]:
    """Gradients of cross-entropy w.r.t. every layer's weights and bias.

    Uses the softmax + cross-entropy shortcut (output delta = probs - y)
    and replays the ReLU and dropout masks recorded in the cache.
    """
    if cache is None or cache.mode != "train":
        raise ValueError("backward needs the cache of a train-mode forward pass")
    y_true = np.asarray(y_true, dtype=np.float64)
    if y_true.shape != cache.probs.shape:
        raise ValueError(
            f"y_true shape {y_true.shape} does not match probs {cache.probs.shape}"
        )
    grads: list[LayerGrads | None] = [None] * len(model.layers)
    delta = cache.probs - y_true
    for i in range(len(model.layers) - 1, -1, -1):
        grads[i] = LayerGrads(np.outer(delta, cache.inputs[i]), delta.copy())
        if i > 0:
            delta = model.layers[i].weights.T @ delta
            if cache.dropout_masks[i - 1] is not None:
                delta = delta * cache.dropout_masks[i - 1]
            delta = delta * cache.relu_masks[i - 1]
    return grads  # type: ignore[return-value]


def sgd_step(model: MlpModel, grads: list[LayerGrads], learning_rate: float) -> None:
    """In-place p <- p - lr * grad; aborts on non-finite gradients."""
    if len(grads) != len(model.layers):
        raise ValueError(f"got {len(grads)} gradients for {len(model.layers)} layers")
    for i, (layer, g) in enumerate(zip(model.layers, grads)):
        if g.dW.shape != layer.weights.shape or g.db.shape != layer.bias.shape:
            raise ValueError(f"layer {i}: gradient shape mismatch")
        if not (np.isfinite(g.dW).all() and np.isfinite(g.db).all()):
            raise NumericError(
                f"non-finite gradient in layer {i} "
                f"(|dW|_max={np.max(np.abs(g.dW))}, |db|_max={np.max(np.abs(g.db))})"
            )
        layer.weights -= learning_rate * g.dW
        layer.bias -= learning_rate * g.db


def predict(model: MlpModel, x: np.ndarray) -> tuple[int, np.ndarray]:
    """Eval-mode class prediction; argmax ties go to the lowest index."""
    probs, _ = forward(model, x, mode="eval")
    return int(np.argmax(probs)), probs


def train(
    model: MlpModel,
    instances: list[tuple[np.ndarray, int]],
    hp: Hyperparams,
) -> list[EpochStats]:
    """Run exactly hp.epochs of SGD over (feature, label) pairs, in place.

    Epoch e visits instances in the order given by a Fisher-Yates shuffle
    seeded with hp.seed + e; dropout draws from SplitMix64 substream 1 of
    hp.seed.  Gradients are averaged within each batch.  Returns per-epoch
    mean loss and accuracy measured on the training passes themselves.
    """
    if not instances:
        raise ValueError("cannot train on an empty instance list")
    feats = [np.asarray(f, dtype=np.float64) for f, _ in instances]
    labels = [int(lab) for _, lab in instances]
    for i, f in enumerate(feats):
        if f.shape != (model.input_dim,):
            raise ValueError(
                f"instance {i} has dim {f.shape}, model expects ({model.input_dim},)"
            )
    for i, lab in enumerate(labels):
        if not 0 <= lab < model.num_classes:
            raise ValueError(f"instance {i} label {lab} outside [0, {model.num_classes})")

    n = len(instances)
    drop_rng = SplitMix64.for_stream(hp.seed, _DROPOUT_STREAM)
    log: list[EpochStats] = []
    for epoch in range(hp.epochs):
        order = list(range(n))
        SplitMix64(hp.seed + epoch).shuffle(order)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, hp.batch_size):
            batch = order[start : start + hp.batch_size]
            acc: list[LayerGrads] | None = None
            for idx in batch:
                probs, cache = forward(model, feats[idx], mode="train", rng=drop_rng)
                loss = -math.log(max(probs[labels[idx]], PROB_EPS))
                if not math.isfinite(loss):
                    raise NumericError(
                        f"non-finite loss at epoch {epoch}, batch starting at {start}"
                    )
                total_loss += loss
                correct += int(np.argmax(probs)) == labels[idx]
                grads = backward(model, cache, one_hot(model.num_classes, labels[idx]))
                if acc is None:
                    acc = grads
                else:
                    for a, g in zip(acc, grads):
                        a.dW += g.dW
                        a.db += g.db
            assert acc is not None
            if len(batch) > 1:
                scale = 1.0 / len(batch)
                for a in acc:
                    a.dW *= scale
                    a.db *= scale
            sgd_step(model, acc, hp.learning_rate)
        log.append(EpochStats(epoch, total_loss / n, correct / n))
    return log


# --- serialization --------------------------------------------------------
#
# Model files are versioned JSON.  Parameters are stored as C99 hex floats
# (float.hex()) so a save/load round trip is bit exact.


def _array_to_hex(a: np.ndarray) -> list[str]:
    return [float(v).hex() for v in a.ravel()]


def _array_from_hex(values: list[str], shape: tuple[int, ...]) -> np.ndarray:
    try:
        flat = np.array([float.fromhex(v) for v in values])
    except (ValueError, TypeError):
        raise ModelFormatError("unparseable hex float in model file") from None
    if flat.size != int(np.prod(shape)):
        raise ModelFormatError(
            f"parameter block has {flat.size} values, expected shape {shape}"
        )
    return flat.reshape(shape)


def model_to_dict(model: MlpModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "mlp",
        "input_dim": model.input_dim,
        "num_classes": model.num_classes,
        "label_set": model.label_set_name,
        "hyperparams": asdict(model.hyperparams),
        "layers": [
            {
                "out_dim": layer.out_dim,
                "in_dim": layer.in_dim,
                "weights": _array_to_hex(layer.weights),
                "bias": _array_to_hex(layer.bias),
            }
            for layer in model.layers
        ],
    }


def model_from_dict(obj: dict) -> MlpModel:
    if not isinstance(obj, dict) or obj.get("kind") != "mlp":
        raise ModelFormatError("not an mlp model object")
    if obj.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {obj.get('format_version')!r}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    try:
        hp = Hyperparams(**obj["hyperparams"])
        layers = [
            DenseLayer(
                _array_from_hex(entry["weights"], (entry["out_dim"], entry["in_dim"])),
                _array_from_hex(entry["bias"], (entry["out_dim"],)),
            )
            for entry in obj["layers"]
        ]
        model = MlpModel(
            layers,
            int(obj["input_dim"]),
            int(obj["num_classes"]),
            hp,
            obj.get("label_set"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from None
    model.validate_shapes()
    return model


def save_model(model: MlpModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path: str | Path) -> MlpModel:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc.msg}") from None
    return model_from_dict(obj)
