"""Multinomial logistic regression trained by full-batch gradient descent.

Objective (N instances, C classes)::

    loss(W, b) = mean_i[ -log softmax(W x_i + b)[y_i] ] + l2 * ||W||_F^2

The bias is not regularized. Optimization starts from all-zero parameters
and takes gradient steps with Armijo backtracking (initial step 1, halve
until sufficient decrease).
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .corpus import CANONICAL_ORDER, AspectLabel, canonical_labels
from .embeddings import EmbeddedInstance
from .errors import DimensionMismatch, EmptyData, SingleClassData, UnknownClassLabel

ARMIJO_C = 1e-4
SHRINK = 0.5
MAX_BACKTRACKS = 60
# exp(-1000) underflows to 0, so a degenerate model puts probability 1.0 on its class
_DEGENERATE_LOGIT = 1000.0


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 1e-4
    max_iters: int = 1000
    grad_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SoftmaxModel:
    weights: np.ndarray = field(repr=False)  # (num_classes, dim)
    bias: np.ndarray = field(repr=False)  # (num_classes,)
    classes: tuple[AspectLabel, ...]

    def __post_init__(self):
        c = len(self.classes)
        if c < 2:
            raise ValueError("a softmax model needs at least two classes")
        if self.weights.ndim != 2 or self.weights.shape[0] != c or self.bias.shape != (c,):
            raise ValueError("weights/bias shapes do not match the class list")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, classes: Sequence[AspectLabel], dim: int) -> "SoftmaxModel":
        c = len(classes)
        return cls(np.zeros((c, dim)), np.zeros(c), tuple(classes))

    def to_json(self, config: TrainConfig | None = None) -> dict:
        out = {
            "classes": [c.value for c in self.classes],
            "dim": self.dim,
            "weights": [float(w) for w in self.weights.ravel()],
            "bias": [float(b) for b in self.bias],
        }
        if config is not None:
            out["train_config"] = config.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SoftmaxModel":
        classes = tuple(AspectLabel(c) for c in obj["classes"])
        weights = np.array(obj["weights"], dtype=np.float64).reshape(len(classes), obj["dim"])
        return cls(weights, np.array(obj["bias"], dtype=np.float64), classes)


@dataclass(frozen=True)
class TrainTrace:
    iterations_run: int
    final_loss: float
    final_grad_norm: float
    converged: bool
    losses: tuple[float, ...] = field(default=(), repr=False)
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "iterations_run": self.iterations_run,
            "final_loss": self.final_loss,
            "final_grad_norm": self.final_grad_norm,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }


def _design(data: Sequence[EmbeddedInstance], classes: Sequence[AspectLabel], dim: int):
    index = {c: i for i, c in enumerate(classes)}
    X = np.empty((len(data), dim))
    y = np.empty(len(data), dtype=np.intp)
    for i, inst in enumerate(data):
        if inst.vector.shape != (dim,):
            raise DimensionMismatch(
                f"instance {inst.id!r} has dim {inst.vector.shape[0]}, expected {dim}"
            )
        if inst.label not in index:
            raise UnknownClassLabel(f"label {inst.label.value!r} of {inst.id!r} not in model classes")
        X[i] = inst.vector
        y[i] = index[inst.label]
    return X, y


def _logits(W, b, X):
    return X @ W.T + b


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _loss(W, b, X, y, l2):
    logp = _log_softmax(_logits(W, b, X))
    nll = -logp[np.arange(len(y)), y].sum() / len(y)
    return float(nll + l2 * np.sum(W * W))


def _loss_grad(W, b, X, y, l2):
    logp = _log_softmax(_logits(W, b, X))
    n = len(y)
    loss = float(-logp[np.arange(n), y].sum() / n + l2 * np.sum(W * W))
    resid = np.exp(logp)
    resid[np.arange(n), y] -= 1.0
    gW = resid.T @ X / n + 2.0 * l2 * W
    gb = resid.sum(axis=0) / n
    return loss, gW, gb


def loss_and_gradient(
    model: SoftmaxModel, data: Sequence[EmbeddedInstance], l2_lambda: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Regularized cross-entropy and its exact gradient ``(loss, dW, db)``."""
    if not data:
        raise EmptyData("no instances")
    X, y = _design(data, model.classes, model.dim)
    return _loss_grad(model.weights, model.bias, X, y, l2_lambda)


def _canonical_order(data: Sequence[EmbeddedInstance]) -> list[EmbeddedInstance]:
    # Full-batch sums are then independent of caller order, bit for bit.
    return sorted(data, key=lambda inst: (inst.id, inst.language))


def train(
    data: Sequence[EmbeddedInstance],
    classes: Sequence[AspectLabel] | None = None,
    config: TrainConfig = TrainConfig(),
) -> tuple[SoftmaxModel, TrainTrace]:
    """Fit a softmax model; ``classes`` defaults to the labels present, canonical order.

    If only one label occurs, a ``SingleClassData`` warning is emitted and the
    returned model predicts that label with probability 1.
    """
    if not data:
        raise EmptyData("cannot train on zero instances")
    present = canonical_labels(inst.label for inst in data)
    classes = tuple(classes) if classes is not None else tuple(present)
    dim = data[0].vector.shape[0]
    ordered = _canonical_order(data)

    if len(present) == 1:
        warnings.warn(
            f"training data only contains {present[0].value!r}; returning a constant model",
            SingleClassData,
            stacklevel=2,
        )
        if len(classes) < 2:
            filler = next(lab for lab in CANONICAL_ORDER if lab not in classes)
            classes = tuple(canonical_labels(set(classes) | {filler}))
        _design(ordered, classes, dim)
        bias = np.zeros(len(classes))
        bias[classes.index(present[0])] = _DEGENERATE_LOGIT
        model = SoftmaxModel(np.zeros((len(classes), dim)), bias, classes)
        return model, TrainTrace(0, 0.0, 0.0, True, degenerate=True)

    X, y = _design(ordered, classes, dim)
    l2 = config.l2_lambda
    W = np.zeros((len(classes), dim))
    b = np.zeros(len(classes))

    loss, gW, gb = _loss_grad(W, b, X, y, l2)
    losses = [loss]
    iters = 0
    while True:
        gnorm = max(float(np.abs(gW).max(initial=0.0)), float(np.abs(gb).max()))
        if gnorm <= config.grad_tol or iters >= config.max_iters:
            break
        sq = float(np.sum(gW * gW) + np.sum(gb * gb))
        step = 1.0
        for _ in range(MAX_BACKTRACKS):
            W_new = W - step * gW
            b_new = b - step * gb
            trial = _loss(W_new, b_new, X, y, l2)
            if trial <= loss - ARMIJO_C * step * sq:
                break
            step *= SHRINK
        else:
            break  # no acceptable step at machine precision
        W, b = W_new, b_new
        loss, gW, gb = _loss_grad(W, b, X, y, l2)
        losses.append(loss)
        iters += 1

    model = SoftmaxModel(W, b, classes)
    trace = TrainTrace(iters, loss, gnorm, gnorm <= config.grad_tol, tuple(losses))
    return model, trace


def _check_dim(model: SoftmaxModel, n: int) -> None:
    if n != model.dim:
        raise DimensionMismatch(f"vector has dim {n}, model expects {model.dim}")


def predict_proba(model: SoftmaxModel, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    _check_dim(model, vector.shape[-1])
    z = model.weights @ vector + model.bias
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def predict_proba_batch(model: SoftmaxModel, X: np.ndarray) -> np.ndarray:
    _check_dim(model, X.shape[1])
    return np.exp(_log_softmax(_logits(model.weights, model.bias, X)))


def predict(model: SoftmaxModel, vector: np.ndarray) -> AspectLabel:
    # np.argmax returns the first maximum, i.e. the lowest class index
    return model.classes[int(np.argmax(predict_proba(model, vector)))]


def predict_many(model: SoftmaxModel, instances: Sequence[EmbeddedInstance]) -> list[AspectLabel]:
    if not instances:
        return []
    X = np.stack([inst.vector for inst in instances])
    idx = np.argmax(predict_proba_batch(model, X), axis=1)
    return [model.classes[i] for i in idx]
