"""Flat-vector differentiable classifiers: softmax regression and a
one-hidden-layer tanh MLP, with exact analytic gradients.

Parameters live in a single float64 vector so clipping, noising, and
averaging stay simple vector arithmetic.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .datasets import Samples

__all__ = [
    "ModelKind",
    "ModelArch",
    "ModelParams",
    "init_params",
    "loss_and_grad",
    "sgd_step",
    "eval_test_loss",
    "params_to_bytes",
    "params_from_bytes",
]


class ModelKind(Enum):
    LOGISTIC_REGRESSION = "lr"
    MLP = "mlp"


@dataclass(frozen=True)
class ModelArch:
    kind: ModelKind
    feature_dim: int
    num_classes: int
    hidden_units: int = 0

    def __post_init__(self):
        if self.feature_dim < 1 or self.num_classes < 2:
            raise ValueError("need feature_dim >= 1 and num_classes >= 2")
        if self.kind is ModelKind.MLP and self.hidden_units < 1:
            raise ValueError("MLP needs hidden_units >= 1")

    @property
    def param_count(self) -> int:
        d, c, h = self.feature_dim, self.num_classes, self.hidden_units
        if self.kind is ModelKind.LOGISTIC_REGRESSION:
            return d * c + c
        return d * h + h + h * c + c

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, biases belonging to their layer."""
        d, c, h = self.feature_dim, self.num_classes, self.hidden_units
        if self.kind is ModelKind.LOGISTIC_REGRESSION:
            return [(d, c)]
        return [(d, h), (h, c)]


@dataclass(frozen=True)
class ModelParams:
    arch: ModelArch
    weights: np.ndarray

    def __post_init__(self):
        if self.weights.shape != (self.arch.param_count,):
            raise ValueError(
                f"weights length {self.weights.shape} != {self.arch.param_count}"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")


def init_params(arch: ModelArch, seed: int) -> ModelParams:
    """Uniform fan-balanced init: every layer parameter (weights and
    biases alike) drawn from [-s, s] with s = sqrt(6/(fan_in+fan_out))."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x1417)))
    chunks = []
    for fan_in, fan_out in arch.layer_shapes():
        s = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-s, s, size=fan_in * fan_out + fan_out))
    return ModelParams(arch=arch, weights=np.concatenate(chunks))


def _split_lr(arch: ModelArch, w: np.ndarray):
    d, c = arch.feature_dim, arch.num_classes
    return w[: d * c].reshape(d, c), w[d * c :]


def _split_mlp(arch: ModelArch, w: np.ndarray):
    d, c, h = arch.feature_dim, arch.num_classes, arch.hidden_units
    o = 0
    W1 = w[o : o + d * h].reshape(d, h)
    o += d * h
    b1 = w[o : o + h]
    o += h
    W2 = w[o : o + h * c].reshape(h, c)
    o += h * c
    b2 = w[o:]
    return W1, b1, W2, b2


def _softmax_ce(logits: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and the softmax/one-hot residual (P - Y)/n."""
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    sz = ez.sum(axis=1)
    n = len(y)
    idx = np.arange(n)
    loss = float(np.mean(np.log(sz) - z[idx, y]))
    resid = ez / sz[:, None]
    resid[idx, y] -= 1.0
    resid /= n
    return loss, resid


def loss_grad_arrays(arch: ModelArch, w: np.ndarray, X: np.ndarray, y: np.ndarray):
    """Core loss/gradient on raw arrays (hot path for the simulator)."""
    if X.shape[1] != arch.feature_dim:
        raise ValueError(f"feature dim {X.shape[1]} != arch dim {arch.feature_dim}")
    if arch.kind is ModelKind.LOGISTIC_REGRESSION:
        W, b = _split_lr(arch, w)
        loss, resid = _softmax_ce(X @ W + b, y)
        grad = np.concatenate([(X.T @ resid).ravel(), resid.sum(axis=0)])
        return loss, grad
    W1, b1, W2, b2 = _split_mlp(arch, w)
    H = np.tanh(X @ W1 + b1)
    loss, resid = _softmax_ce(H @ W2 + b2, y)
    gH = (resid @ W2.T) * (1.0 - H * H)
    grad = np.concatenate(
        [(X.T @ gH).ravel(), gH.sum(axis=0), (H.T @ resid).ravel(), resid.sum(axis=0)]
    )
    return loss, grad


def loss_and_grad(params: ModelParams, batch: Samples) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its exact gradient."""
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    return loss_grad_arrays(params.arch, params.weights, batch.features, batch.labels)


def sgd_step(params: ModelParams, grad: np.ndarray, eta: float) -> ModelParams:
    """One plain gradient step w - eta * g."""
    if grad.shape != params.weights.shape:
        raise ValueError("gradient/weight length mismatch")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return ModelParams(arch=params.arch, weights=params.weights - eta * grad)


def eval_loss_arrays(arch: ModelArch, w: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    if arch.kind is ModelKind.LOGISTIC_REGRESSION:
        W, b = _split_lr(arch, w)
        logits = X @ W + b
    else:
        W1, b1, W2, b2 = _split_mlp(arch, w)
        logits = np.tanh(X @ W1 + b1) @ W2 + b2
    loss, _ = _softmax_ce(logits, y)
    return loss


def eval_test_loss(params: ModelParams, test_set: Samples) -> float:
    """Mean cross-entropy over the whole test set."""
    if len(test_set) == 0:
        raise ValueError("test set must be non-empty")
    return eval_loss_arrays(params.arch, params.weights, test_set.features, test_set.labels)


_HEADER = struct.Struct("<4sBIIIQ")
_MAGIC = b"MPAR"
_KIND_CODE = {ModelKind.LOGISTIC_REGRESSION: 0, ModelKind.MLP: 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def params_to_bytes(params: ModelParams) -> bytes:
    """Checkpoint blob: small header plus little-endian float64 weights."""
    a = params.arch
    header = _HEADER.pack(
        _MAGIC, _KIND_CODE[a.kind], a.feature_dim, a.num_classes, a.hidden_units,
        a.param_count,
    )
    return header + params.weights.astype("<f8").tobytes()


def params_from_bytes(blob: bytes) -> ModelParams:
    magic, kind_code, d, c, h, count = _HEADER.unpack(blob[: _HEADER.size])
    if magic != _MAGIC:
        raise ValueError(f"bad checkpoint magic {magic!r}")
    arch = ModelArch(kind=_CODE_KIND[kind_code], feature_dim=d, num_classes=c, hidden_units=h)
    if count != arch.param_count:
        raise ValueError(f"weight count {count} != arch count {arch.param_count}")
    weights = np.frombuffer(blob[_HEADER.size :], dtype="<f8", count=count).astype(np.float64)
    return ModelParams(arch=arch, weights=weights)
