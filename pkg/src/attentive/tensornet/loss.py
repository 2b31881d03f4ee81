"""Alpha-balanced categorical focal loss, fused with the terminal softmax.

For target class t with softmax probability p_t,

    loss = alpha[t] * (1 - p_t)^gamma * (-ln p_t)

which collapses to plain categorical cross-entropy at gamma=0 with unit
alpha.  Gradients are taken with respect to the pre-softmax logits; the
analytic fusion keeps the p_t division cancelled so probabilities at the
clamp floor never produce NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

P_CLAMP = 1e-12


@dataclass(frozen=True)
class FocalConfig:
    gamma: float = 2.0
    alpha: np.ndarray = field(default_factory=lambda: np.ones(4))

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise ValueError("alpha must be a finite positive vector")
        object.__setattr__(self, "alpha", alpha)


def focal_loss_batch(
    probs: np.ndarray, targets: np.ndarray, cfg: FocalConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample losses and logit gradients for (N, C) probabilities.

    The returned gradient is d(loss_n)/d(logit_nc); sum or average over
    the batch is the caller's choice.
    """
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.intp)
    n, c = probs.shape
    alpha = cfg.alpha
    if alpha.shape[0] != c:
        raise ValueError(f"alpha has {alpha.shape[0]} classes, probs have {c}")

    pt = probs[np.arange(n), targets]
    pt_c = np.maximum(pt, P_CLAMP)
    u = 1.0 - pt
    a = alpha[targets]

    losses = a * u**cfg.gamma * (-np.log(pt_c))

    # d loss / d p_t, with the (1-p_t)^gamma / p_t term already multiplied
    # through by p_t (the softmax jacobian contributes the cancelling p_t).
    if cfg.gamma == 0.0:
        scale = -np.ones(n)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            term = cfg.gamma * u ** (cfg.gamma - 1.0) * pt * np.log(pt_c)
        scale = np.where(u > 0.0, term, 0.0) - u**cfg.gamma
    coeff = a * scale  # multiplies (delta_tj - p_j)

    grad = -coeff[:, None] * probs
    grad[np.arange(n), targets] += coeff
    return losses, grad


def focal_loss(
    probs: np.ndarray, target: int, cfg: FocalConfig
) -> tuple[float, np.ndarray]:
    """Single-sample convenience wrapper around :func:`focal_loss_batch`."""
    probs = np.asarray(probs, dtype=np.float64)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {total}, expected 1")
    losses, grads = focal_loss_batch(probs[None, :], np.array([target]), cfg)
    return float(losses[0]), grads[0]


def inverse_frequency_alpha(targets: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class weights proportional to 1/frequency, normalized to mean 1.

    Absent classes get the weight of a single-count class so the vector
    stays finite and positive.
    """
    counts = np.bincount(np.asarray(targets, dtype=np.intp), minlength=n_classes)
    counts = np.maximum(counts, 1).astype(np.float64)
    inv = 1.0 / counts
    return inv * (n_classes / inv.sum())
