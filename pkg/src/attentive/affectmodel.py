"""Four-parallel-branch affective-state classifier.

One branch per state (boredom, engagement, confusion, frustration — this
order is fixed everywhere), each ending in a 4-way softmax over the
intensity levels 0..3.  The concatenated output is a 4x4 row-stochastic
matrix.  The default branch topology lands at 120,860 parameters per
branch (483,440 total).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from attentive.tensornet.layers import (
    Conv2D,
    Dense,
    Flatten,
    LayerSpec,
    MaxPool2D,
    ParameterSet,
    ReLU,
    Softmax,
    forward,
    init_params,
    param_count,
)
from attentive.tensornet.train import MultiHeadModel
from attentive.tensornet.weights_io import load_tensors, save_tensors

N_LEVELS = 4


class AffectiveState(IntEnum):
    BOREDOM = 0
    ENGAGEMENT = 1
    CONFUSION = 2
    FRUSTRATION = 3


AFFECTIVE_STATES = tuple(s.name.lower() for s in AffectiveState)

LEVEL_VALUES = np.arange(N_LEVELS, dtype=np.float64)  # very low .. very high


def _quad_conv64() -> tuple[LayerSpec, ...]:
    return (
        Conv2D(1, 8, 3, stride=1, pad=1),
        ReLU(),
        MaxPool2D(2, 2),
        Conv2D(8, 16, 3, stride=1, pad=1),
        ReLU(),
        MaxPool2D(2, 2),
        Conv2D(16, 32, 3, stride=1, pad=1),
        ReLU(),
        MaxPool2D(2, 2),
        Flatten(),
        Dense(32 * 8 * 8, 56),
        ReLU(),
        Dense(56, N_LEVELS),
        Softmax(),
    )


# Registered branch topologies; alternates can be added without touching
# the save/load or prediction paths.
TOPOLOGIES: dict[str, callable] = {"quad_conv64": _quad_conv64}

DEFAULT_TOPOLOGY = "quad_conv64"


@dataclass
class AffectModel:
    topology: str
    specs: tuple[LayerSpec, ...]
    params: list[ParameterSet]  # one ParameterSet per branch
    seed: int | None = None

    @property
    def n_params(self) -> int:
        return param_count(list(self.specs)) * len(self.params)

    def as_multihead(self) -> MultiHeadModel:
        return MultiHeadModel(
            head_names=AFFECTIVE_STATES,
            specs=tuple(self.specs for _ in AFFECTIVE_STATES),
            params=self.params,
        )


def build_model(seed: int, topology: str = DEFAULT_TOPOLOGY) -> AffectModel:
    """Four independent He-uniform-initialized branches from one seed."""
    specs = TOPOLOGIES[topology]()
    rng = np.random.default_rng(seed)
    params = [init_params(list(specs), rng) for _ in AFFECTIVE_STATES]
    return AffectModel(topology=topology, specs=specs, params=params, seed=seed)


def predict_batch(model: AffectModel, x: np.ndarray) -> np.ndarray:
    """(N, 1, 64, 64) inputs -> (N, 4, 4) row-stochastic predictions."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    rows = [forward(list(model.specs), p, x)[0] for p in model.params]
    return np.stack(rows, axis=1)


def predict(model: AffectModel, face: np.ndarray) -> np.ndarray:
    """Single 64x64 face in [0, 1] -> 4x4 probability matrix."""
    face = np.asarray(face, dtype=np.float64)
    if face.shape != (64, 64):
        raise ValueError(f"expected a 64x64 face, got {face.shape}")
    return predict_batch(model, face[None, None, :, :])[0]


def probs_to_levels(probs: np.ndarray) -> np.ndarray:
    """Per-row argmax; ties break toward the lower level."""
    return np.argmax(np.asarray(probs), axis=-1)


def probs_to_intensities(probs: np.ndarray) -> np.ndarray:
    """Expected intensity per state: sum of level * probability, in [0, 3]."""
    return np.asarray(probs, dtype=np.float64) @ LEVEL_VALUES


def aggregate_clip_probs(frame_probs: list[np.ndarray], mode: str = "mean") -> np.ndarray:
    """Clip-level 4x4 matrix from per-frame matrices.

    "mean" averages the probability matrices (the default); "majority"
    votes with per-frame argmax levels and returns the winning level as a
    one-hot row (ties toward the lower level).
    """
    stack = np.stack(frame_probs)
    if mode == "mean":
        return stack.mean(axis=0)
    if mode == "majority":
        out = np.zeros((N_LEVELS, N_LEVELS))
        levels = np.argmax(stack, axis=-1)  # (frames, states)
        for s in range(N_LEVELS):
            counts = np.bincount(levels[:, s], minlength=N_LEVELS)
            out[s, counts.argmax()] = 1.0
        return out
    raise ValueError(f"unknown aggregation mode {mode!r}")


def save_weights(model: AffectModel, path: str) -> None:
    tensors = {
        f"b{bi}.l{li}.{key}": arr
        for bi, params in enumerate(model.params)
        for li, layer in sorted(params.items())
        for key, arr in layer.items()
    }
    save_tensors(path, tensors, meta={"topology": model.topology, "seed": model.seed})


def load_weights(path: str) -> AffectModel:
    tensors, meta = load_tensors(path)
    topology = meta.get("topology", DEFAULT_TOPOLOGY)
    if topology not in TOPOLOGIES:
        raise ValueError(f"weights reference unregistered topology {topology!r}")
    specs = TOPOLOGIES[topology]()
    params: list[ParameterSet] = [{} for _ in AFFECTIVE_STATES]
    for name, arr in tensors.items():
        branch, layer, key = name.split(".")
        params[int(branch[1:])].setdefault(int(layer[1:]), {})[key] = arr
    return AffectModel(topology=topology, specs=specs, params=params, seed=meta.get("seed"))


def write_model_card(
    path: str,
    model: AffectModel,
    train_config_digest: str | None = None,
    val_accuracy: dict[str, float] | None = None,
) -> None:
    """JSON card next to the weights: architecture, seed, config digest, accuracy."""
    card = {
        "architecture": model.topology,
        "seed": model.seed,
        "n_params": model.n_params,
        "train_config_digest": train_config_digest,
        "val_accuracy": val_accuracy,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(card, fh, indent=2, sort_keys=True)


def config_digest(cfg) -> str:
    """Stable digest of a training config for the model card."""
    payload = json.dumps(
        {
            "max_epochs": cfg.max_epochs,
            "batch_size": cfg.batch_size,
            "early_stop_patience": cfg.early_stop_patience,
            "rng_seed": cfg.rng_seed,
            "focal": None
            if cfg.focal is None
            else {"gamma": cfg.focal.gamma, "alpha": list(cfg.focal.alpha)},
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
