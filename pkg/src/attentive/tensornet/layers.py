"""Layer forward/backward passes.

Conventions: batched activations are (N, C, H, W) for spatial layers and
(N, D) after Flatten/Dense.  Dense weights are (in_dim, out_dim) so the
forward pass is ``x @ W + b``.  Convolutions are cross-correlations (no
kernel flip) computed by im2col + GEMM; their input gradients scatter
the column gradients back with k*k non-overlapping strided adds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

ParameterSet = dict[int, dict[str, np.ndarray]]


class DimensionError(ValueError):
    """Input shape incompatible with a layer."""


@dataclass(frozen=True)
class Conv2D:
    in_ch: int
    out_ch: int
    k: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class MaxPool2D:
    k: int
    stride: int


@dataclass(frozen=True)
class Dense:
    in_dim: int
    out_dim: int


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Softmax:
    pass


LayerSpec = Union[Conv2D, MaxPool2D, Dense, ReLU, Flatten, Softmax]


def _validate_spec(spec: LayerSpec) -> None:
    if isinstance(spec, Conv2D):
        if min(spec.in_ch, spec.out_ch, spec.k, spec.stride) <= 0 or spec.pad < 0:
            raise ValueError(f"bad Conv2D spec {spec}")
    elif isinstance(spec, MaxPool2D):
        if spec.k <= 0 or spec.stride <= 0:
            raise ValueError(f"bad MaxPool2D spec {spec}")
    elif isinstance(spec, Dense):
        if spec.in_dim <= 0 or spec.out_dim <= 0:
            raise ValueError(f"bad Dense spec {spec}")


def init_params(specs: list[LayerSpec], rng: np.random.Generator) -> ParameterSet:
    """He-uniform weights (bound sqrt(6/fan_in)), zero biases."""
    params: ParameterSet = {}
    for i, spec in enumerate(specs):
        _validate_spec(spec)
        if isinstance(spec, Conv2D):
            fan_in = spec.in_ch * spec.k * spec.k
            bound = np.sqrt(6.0 / fan_in)
            params[i] = {
                "W": rng.uniform(-bound, bound, (spec.out_ch, spec.in_ch, spec.k, spec.k)),
                "b": np.zeros(spec.out_ch),
            }
        elif isinstance(spec, Dense):
            bound = np.sqrt(6.0 / spec.in_dim)
            params[i] = {
                "W": rng.uniform(-bound, bound, (spec.in_dim, spec.out_dim)),
                "b": np.zeros(spec.out_dim),
            }
    return params


def param_count(specs: list[LayerSpec]) -> int:
    total = 0
    for spec in specs:
        if isinstance(spec, Conv2D):
            total += spec.out_ch * spec.in_ch * spec.k * spec.k + spec.out_ch
        elif isinstance(spec, Dense):
            total += spec.in_dim * spec.out_dim + spec.out_dim
    return total


def _conv_cols(x: np.ndarray, spec: Conv2D) -> tuple[np.ndarray, int, int]:
    """im2col: (N, C, H, W) -> (N*Ho*Wo, C*k*k) plus output spatial dims."""
    n, c, h, w = x.shape
    if spec.pad:
        x = np.pad(x, ((0, 0), (0, 0), (spec.pad, spec.pad), (spec.pad, spec.pad)))
    windows = sliding_window_view(x, (spec.k, spec.k), axis=(2, 3))
    windows = windows[:, :, :: spec.stride, :: spec.stride]
    n_, c_, ho, wo = windows.shape[:4]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * spec.k * spec.k)
    return np.ascontiguousarray(cols), ho, wo


def forward(
    specs: list[LayerSpec], params: ParameterSet, x: np.ndarray
) -> tuple[np.ndarray, list]:
    """Run the layer chain; cache holds what backward needs per layer."""
    x = np.asarray(x, dtype=np.float64)
    cache: list = []
    for i, spec in enumerate(specs):
        if isinstance(spec, Conv2D):
            if x.ndim != 4 or x.shape[1] != spec.in_ch:
                raise DimensionError(
                    f"layer {i} ({spec!r}) expects (N,{spec.in_ch},H,W), got {x.shape}"
                )
            cols, ho, wo = _conv_cols(x, spec)
            wm = params[i]["W"].reshape(spec.out_ch, -1)
            out = cols @ wm.T + params[i]["b"]
            n = x.shape[0]
            cache.append((cols, x.shape, ho, wo))
            x = out.reshape(n, ho, wo, spec.out_ch).transpose(0, 3, 1, 2)
        elif isinstance(spec, MaxPool2D):
            if x.ndim != 4:
                raise DimensionError(f"layer {i} (MaxPool2D) expects 4-D input, got {x.shape}")
            if spec.k == 2 and spec.stride == 2 and x.shape[2] % 2 == 0 and x.shape[3] % 2 == 0:
                # first-max semantics via comparison chains; no argmax pass
                a = x[:, :, 0::2, 0::2]
                b = x[:, :, 0::2, 1::2]
                c = x[:, :, 1::2, 0::2]
                d = x[:, :, 1::2, 1::2]
                iab = a < b
                icd = c < d
                ab = np.where(iab, b, a)
                cd = np.where(icd, d, c)
                sel_cd = ab < cd
                cache.append(("fast2", iab, icd, sel_cd, x.shape))
                x = np.where(sel_cd, cd, ab)
            else:
                windows = sliding_window_view(x, (spec.k, spec.k), axis=(2, 3))
                windows = windows[:, :, :: spec.stride, :: spec.stride]
                n, c, ho, wo = windows.shape[:4]
                flat = windows.reshape(n, c, ho, wo, spec.k * spec.k)
                idx = flat.argmax(axis=4)
                cache.append(("general", idx, x.shape))
                x = np.take_along_axis(flat, idx[..., None], axis=4)[..., 0]
        elif isinstance(spec, Dense):
            if x.ndim != 2 or x.shape[1] != spec.in_dim:
                raise DimensionError(
                    f"layer {i} ({spec!r}) expects (N,{spec.in_dim}), got {x.shape}"
                )
            cache.append(x)
            x = x @ params[i]["W"] + params[i]["b"]
        elif isinstance(spec, ReLU):
            mask = x > 0
            cache.append(mask)
            x = x * mask
        elif isinstance(spec, Flatten):
            cache.append(x.shape)
            x = x.reshape(x.shape[0], -1)
        elif isinstance(spec, Softmax):
            shifted = x - x.max(axis=-1, keepdims=True)
            e = np.exp(shifted)
            x = e / e.sum(axis=-1, keepdims=True)
            cache.append(x)
        else:
            raise TypeError(f"unknown layer spec {spec!r}")
    return x, cache


def backward(
    specs: list[LayerSpec],
    params: ParameterSet,
    cache: list,
    grad_out: np.ndarray,
    need_input_grad: bool = True,
) -> tuple[ParameterSet, np.ndarray | None]:
    """Exact reverse-mode gradients for every layer.

    `cache` must come from a forward over the same specs; a length
    mismatch means the two calls diverged.
    """
    if len(cache) != len(specs):
        raise ValueError(f"cache holds {len(cache)} entries for {len(specs)} layers")
    grads: ParameterSet = {}
    g = np.asarray(grad_out, dtype=np.float64)
    for i in range(len(specs) - 1, -1, -1):
        spec = specs[i]
        last = i == 0 and not need_input_grad
        if isinstance(spec, Conv2D):
            cols, x_shape, ho, wo = cache[i]
            n = x_shape[0]
            g2 = g.transpose(0, 2, 3, 1).reshape(n * ho * wo, spec.out_ch)
            grads[i] = {
                "W": (g2.T @ cols).reshape(spec.out_ch, spec.in_ch, spec.k, spec.k),
                "b": g2.sum(axis=0),
            }
            if not last:
                wm = params[i]["W"].reshape(spec.out_ch, -1)
                gcols = (g2 @ wm).reshape(n, ho, wo, spec.in_ch, spec.k, spec.k)
                gcols = gcols.transpose(0, 3, 1, 2, 4, 5)
                hp = x_shape[2] + 2 * spec.pad
                wp = x_shape[3] + 2 * spec.pad
                gpad = np.zeros((n, spec.in_ch, hp, wp))
                s = spec.stride
                for ky in range(spec.k):
                    for kx in range(spec.k):
                        gpad[:, :, ky : ky + s * ho : s, kx : kx + s * wo : s] += gcols[
                            :, :, :, :, ky, kx
                        ]
                g = gpad[
                    :, :, spec.pad : hp - spec.pad, spec.pad : wp - spec.pad
                ] if spec.pad else gpad
        elif isinstance(spec, MaxPool2D):
            if not last:
                if cache[i][0] == "fast2":
                    _, iab, icd, sel_cd, x_shape = cache[i]
                    gin = np.zeros(x_shape)
                    g_ab = np.where(sel_cd, 0.0, g)
                    g_cd = np.where(sel_cd, g, 0.0)
                    gin[:, :, 0::2, 0::2] = np.where(iab, 0.0, g_ab)
                    gin[:, :, 0::2, 1::2] = np.where(iab, g_ab, 0.0)
                    gin[:, :, 1::2, 0::2] = np.where(icd, 0.0, g_cd)
                    gin[:, :, 1::2, 1::2] = np.where(icd, g_cd, 0.0)
                    g = gin
                else:
                    _, idx, x_shape = cache[i]
                    gin = np.zeros(x_shape)
                    ni, ci, hi, wi = np.indices(idx.shape, sparse=False)
                    ys = hi * spec.stride + idx // spec.k
                    xs = wi * spec.stride + idx % spec.k
                    np.add.at(gin, (ni, ci, ys, xs), g)
                    g = gin
        elif isinstance(spec, Dense):
            x_in = cache[i]
            grads[i] = {"W": x_in.T @ g, "b": g.sum(axis=0)}
            if not last:
                g = g @ params[i]["W"].T
        elif isinstance(spec, ReLU):
            if not last:
                g = g * cache[i]
        elif isinstance(spec, Flatten):
            if not last:
                g = g.reshape(cache[i])
        elif isinstance(spec, Softmax):
            p = cache[i]
            g = p * (g - (g * p).sum(axis=-1, keepdims=True))
    return grads, (None if not need_input_grad else g)
