"""Multi-head training driver with early stopping.

Each head is an independent layer chain ending in Softmax; heads share
the input batch but nothing else, so every head gets its own gradients,
Adam state and focal configuration.  Validation loss (mean over heads)
drives early stopping; the weights returned are those of the best epoch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from attentive.tensornet.adam import adam_init, adam_step
from attentive.tensornet.layers import (
    LayerSpec,
    ParameterSet,
    Softmax,
    backward,
    forward,
)
from attentive.tensornet.loss import (
    FocalConfig,
    focal_loss_batch,
    inverse_frequency_alpha,
)


class ConfigError(ValueError):
    """Unusable training configuration or dataset."""


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int
    batch_size: int = 64
    early_stop_patience: int = 5
    rng_seed: int = 42
    focal: FocalConfig | None = None  # None: gamma=2, inverse-frequency alpha per head

    def __post_init__(self):
        if self.max_epochs <= 0 or self.batch_size <= 0 or self.early_stop_patience <= 0:
            raise ConfigError("max_epochs, batch_size and early_stop_patience must be positive")
        if self.early_stop_patience > self.max_epochs:
            raise ConfigError("patience cannot exceed max_epochs")


@dataclass
class MultiHeadModel:
    head_names: tuple[str, ...]
    specs: tuple[tuple[LayerSpec, ...], ...]
    params: list[ParameterSet]

    def __post_init__(self):
        if not (len(self.head_names) == len(self.specs) == len(self.params)):
            raise ConfigError("head_names, specs and params must align")
        for chain in self.specs:
            if not chain or not isinstance(chain[-1], Softmax):
                raise ConfigError("every head must end in Softmax")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    head_accuracy: tuple[float, ...] = field(default=())


def _copy_params(params: ParameterSet) -> ParameterSet:
    return {i: {k: a.copy() for k, a in layer.items()} for i, layer in params.items()}


def _n_classes(specs: Sequence[LayerSpec]) -> int:
    # terminal Softmax follows a Dense; its out_dim is the class count
    for spec in reversed(specs):
        if hasattr(spec, "out_dim"):
            return spec.out_dim
    raise ConfigError("head has no Dense layer before Softmax")


def evaluate(
    model: MultiHeadModel,
    x: np.ndarray,
    y: np.ndarray,
    focal_cfgs: Sequence[FocalConfig],
    batch_size: int = 256,
) -> tuple[float, tuple[float, ...]]:
    """Mean loss over samples and heads, plus per-head accuracy."""
    n = x.shape[0]
    n_heads = len(model.head_names)
    loss_sum = 0.0
    correct = np.zeros(n_heads)
    for start in range(0, n, batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        for h in range(n_heads):
            probs, _ = forward(list(model.specs[h]), model.params[h], xb)
            losses, _ = focal_loss_batch(probs, yb[:, h], focal_cfgs[h])
            loss_sum += losses.sum()
            correct[h] += (probs.argmax(axis=1) == yb[:, h]).sum()
    return loss_sum / (n * n_heads), tuple(correct / n)


def train(
    model: MultiHeadModel,
    train_set: tuple[np.ndarray, np.ndarray],
    val_set: tuple[np.ndarray, np.ndarray],
    cfg: TrainConfig,
    epoch_callback: Callable[[EpochStats], bool] | None = None,
) -> tuple[list[ParameterSet], list[EpochStats]]:
    """Train all heads; return (best-epoch params, per-epoch history).

    Stops after `early_stop_patience` epochs without validation-loss
    improvement, or when `epoch_callback` (called with each epoch's
    stats) returns True.  `model.params` is left at the best epoch.
    Deterministic for fixed (seed, data, config) on a single thread.
    """
    x_train, y_train = train_set
    x_val, y_val = val_set
    if len(x_train) == 0 or len(x_val) == 0:
        raise ConfigError("training and validation sets must be non-empty")
    y_train = np.asarray(y_train, dtype=np.intp)
    y_val = np.asarray(y_val, dtype=np.intp)
    if y_train.ndim == 1:
        y_train = y_train[:, None]
    if y_val.ndim == 1:
        y_val = y_val[:, None]
    n_heads = len(model.head_names)
    if y_train.shape[1] != n_heads:
        raise ConfigError(f"targets have {y_train.shape[1]} heads, model has {n_heads}")

    focal_cfgs = []
    for h in range(n_heads):
        if cfg.focal is not None:
            focal_cfgs.append(cfg.focal)
        else:
            alpha = inverse_frequency_alpha(y_train[:, h], _n_classes(model.specs[h]))
            focal_cfgs.append(FocalConfig(gamma=2.0, alpha=alpha))

    rng = np.random.default_rng(cfg.rng_seed)
    adam_states = [adam_init(model.params[h]) for h in range(n_heads)]
    n = x_train.shape[0]

    best_val = np.inf
    best_params = [_copy_params(p) for p in model.params]
    epochs_without_improvement = 0
    history: list[EpochStats] = []

    for epoch in range(1, cfg.max_epochs + 1):
        perm = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            xb = x_train[idx]
            yb = y_train[idx]
            for h in range(n_heads):
                specs = list(model.specs[h])
                probs, cache = forward(specs, model.params[h], xb)
                losses, grad_logits = focal_loss_batch(probs, yb[:, h], focal_cfgs[h])
                loss_sum += losses.sum()
                # focal gradient is w.r.t. logits: backprop starts below Softmax
                grads, _ = backward(
                    specs[:-1],
                    model.params[h],
                    cache[:-1],
                    grad_logits / len(idx),
                    need_input_grad=False,
                )
                adam_step(model.params[h], grads, adam_states[h])
        train_loss = loss_sum / (n * n_heads)
        val_loss, val_acc = evaluate(model, x_val, y_val, focal_cfgs)
        stats = EpochStats(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss, head_accuracy=val_acc
        )
        history.append(stats)

        if val_loss < best_val:
            best_val = val_loss
            best_params = [_copy_params(p) for p in model.params]
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1

        if epoch_callback is not None and epoch_callback(stats):
            break
        if epochs_without_improvement >= cfg.early_stop_patience:
            break

    model.params = [_copy_params(p) for p in best_params]
    return best_params, history


def history_to_csv(history: Sequence[EpochStats], head_names: Sequence[str], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["epoch", "trainLoss", "valLoss"] + [f"acc_{name.lower()}" for name in head_names]
        )
        for row in history:
            writer.writerow(
                [row.epoch, repr(row.train_loss), repr(row.val_loss)]
                + [repr(a) for a in row.head_accuracy]
            )
