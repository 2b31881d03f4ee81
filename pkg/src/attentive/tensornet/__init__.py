"""Minimal dense/convolutional network engine.

Six layer types (Conv2D, MaxPool2D, Dense, ReLU, Flatten, Softmax) with
exact reverse-mode gradients, an alpha-balanced categorical focal loss
fused with the terminal softmax, bias-corrected Adam, and an
early-stopping training driver.  Everything runs in float64 and is
bit-deterministic for a fixed seed.
"""

from attentive.tensornet.layers import (
    Conv2D,
    Dense,
    DimensionError,
    Flatten,
    LayerSpec,
    MaxPool2D,
    ParameterSet,
    ReLU,
    Softmax,
    backward,
    forward,
    init_params,
    param_count,
)
from attentive.tensornet.loss import FocalConfig, focal_loss, focal_loss_batch
from attentive.tensornet.adam import AdamState, adam_init, adam_step
from attentive.tensornet.train import (
    EpochStats,
    MultiHeadModel,
    TrainConfig,
    history_to_csv,
    train,
)
from attentive.tensornet.weights_io import (
    WeightsFormatError,
    load_tensors,
    save_tensors,
)

__all__ = [
    "AdamState",
    "Conv2D",
    "Dense",
    "DimensionError",
    "EpochStats",
    "Flatten",
    "FocalConfig",
    "LayerSpec",
    "MaxPool2D",
    "MultiHeadModel",
    "ParameterSet",
    "ReLU",
    "Softmax",
    "TrainConfig",
    "WeightsFormatError",
    "adam_init",
    "adam_step",
    "backward",
    "focal_loss",
    "focal_loss_batch",
    "forward",
    "history_to_csv",
    "init_params",
    "load_tensors",
    "param_count",
    "save_tensors",
    "train",
]
