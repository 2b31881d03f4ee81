"""Bias-corrected Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from attentive.tensornet.layers import ParameterSet


@dataclass
class AdamState:
    m: ParameterSet
    v: ParameterSet
    step: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def _zeros_like_params(params: ParameterSet) -> ParameterSet:
    return {i: {k: np.zeros_like(a) for k, a in layer.items()} for i, layer in params.items()}


def adam_init(params: ParameterSet, lr: float = 0.001, **kwargs) -> AdamState:
    return AdamState(m=_zeros_like_params(params), v=_zeros_like_params(params), lr=lr, **kwargs)


def adam_step(
    params: ParameterSet, grads: ParameterSet, state: AdamState
) -> tuple[ParameterSet, AdamState]:
    """One in-place update; returns the same objects for chaining."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.step
    bias2 = 1.0 - b2**state.step
    for i, layer in grads.items():
        for key, g in layer.items():
            m = state.m[i][key]
            v = state.v[i][key]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params[i][key] -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.epsilon)
    return params, state
