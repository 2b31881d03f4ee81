"""Attentiveness index: weighted combination of the four state intensities.

The shipped default weights are (-0.598, 1.539, 0.334, -0.085) for
boredom, engagement, confusion and frustration; engagement dominates
positively, boredom is the strongest negative.  The raw index over
intensities in [0, 3] therefore spans exactly [-2.049, 5.619], which is
also the default display normalization range.

Refitting solves an interceptless least squares of mean instructor
scores on the four intensities via QR (never the normal equations), and
reports residual norm, R-squared and the design's condition number.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

STATE_SYMBOLS = ("B", "E", "C", "F")


@dataclass(frozen=True)
class AttentionWeights:
    boredom: float
    engagement: float
    confusion: float
    frustration: float

    def as_array(self) -> np.ndarray:
        return np.array([self.boredom, self.engagement, self.confusion, self.frustration])


@dataclass(frozen=True)
class AnnotationRecord:
    clip_id: str
    intensities: tuple[float, float, float, float]
    scores: tuple[float, ...]
    source: str = "labels"  # intensities derived from "labels" or "model"

    def __post_init__(self):
        if not self.scores:
            raise ValueError(f"clip {self.clip_id!r}: scores must be non-empty")
        if any(s < 1 or s > 10 for s in self.scores):
            raise ValueError(f"clip {self.clip_id!r}: scores must lie in [1, 10]")

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.scores))


@dataclass(frozen=True)
class IndexConfig:
    weights: AttentionWeights
    raw_min: float
    raw_max: float

    def __post_init__(self):
        if not self.raw_min < self.raw_max:
            raise ValueError("raw_min must be strictly below raw_max")


@dataclass(frozen=True)
class FitReport:
    residual_norm: float
    r_squared: float
    condition_number: float
    n_records: int


class SingularDesignError(ValueError):
    """Design matrix is rank-deficient; carries the deficient direction."""

    def __init__(self, message: str, null_direction: np.ndarray):
        super().__init__(message)
        self.null_direction = null_direction


def default_paper_weights() -> AttentionWeights:
    return AttentionWeights(
        boredom=-0.598, engagement=1.539, confusion=0.334, frustration=-0.085
    )


def analytic_raw_range(w: AttentionWeights, lo: float = 0.0, hi: float = 3.0) -> tuple[float, float]:
    """Exact range of the raw index when every intensity spans [lo, hi]."""
    arr = w.as_array()
    raw_min = float(np.where(arr < 0, arr * hi, arr * lo).sum())
    raw_max = float(np.where(arr > 0, arr * hi, arr * lo).sum())
    return raw_min, raw_max


def default_index_config() -> IndexConfig:
    w = default_paper_weights()
    raw_min, raw_max = analytic_raw_range(w)
    return IndexConfig(weights=w, raw_min=raw_min, raw_max=raw_max)


def evaluate_index(intensities, w: AttentionWeights) -> float:
    """Raw index: the exact linear combination of the four intensities."""
    x = np.asarray(intensities, dtype=np.float64)
    if x.shape != (4,):
        raise ValueError(f"expected 4 intensities, got shape {x.shape}")
    return float(x @ w.as_array())


def normalize_index(raw: float, cfg: IndexConfig) -> float:
    """Clamp-affine map of the raw index into [0, 1]."""
    span = cfg.raw_max - cfg.raw_min
    return float(np.clip((raw - cfg.raw_min) / span, 0.0, 1.0))


def _solve_least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """min ||a x - b|| via Householder QR with back substitution."""
    q, r = np.linalg.qr(a)
    rhs = q.T @ b
    n = r.shape[1]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (rhs[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
    return x


def fit_weights(records: list[AnnotationRecord]) -> tuple[AttentionWeights, FitReport]:
    """Interceptless OLS of mean scores on intensities.

    Requires at least 4 records with non-collinear intensity vectors;
    rank deficiency raises :class:`SingularDesignError` naming the
    direction the data fails to pin down.
    """
    if len(records) < 4:
        raise ValueError(f"need at least 4 records, got {len(records)}")
    a = np.array([rec.intensities for rec in records], dtype=np.float64)
    b = np.array([rec.mean_score for rec in records])

    singular = np.linalg.svd(a, compute_uv=False)
    if singular[-1] <= 1e-10 * singular[0]:
        _, _, vt = np.linalg.svd(a)
        direction = vt[-1]
        labels = ", ".join(
            f"{c:+.3f}*{s}" for c, s in zip(direction, STATE_SYMBOLS)
        )
        raise SingularDesignError(
            f"design matrix is rank-deficient: the combination ({labels}) is "
            "unidentifiable from these records",
            null_direction=direction,
        )

    x = _solve_least_squares(a, b)
    residual = a @ x - b
    ss_res = float(residual @ residual)
    ss_tot = float(((b - b.mean()) ** 2).sum())
    report = FitReport(
        residual_norm=float(np.sqrt(ss_res)),
        r_squared=1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        condition_number=float(singular[0] / singular[-1]),
        n_records=len(records),
    )
    return AttentionWeights(*x), report


def load_annotations(csv_path: str) -> list[AnnotationRecord]:
    """Annotation CSV: clipId, B, E, C, F, score1..scoreK (K may vary per row)."""
    records = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 6 or [h.strip() for h in header[:5]] != [
            "clipId", "B", "E", "C", "F",
        ]:
            raise ValueError(f"{csv_path}: expected header clipId,B,E,C,F,score1..")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 6:
                raise ValueError(f"{csv_path}:{lineno}: needs at least one score")
            intensities = tuple(float(v) for v in row[1:5])
            if any(v < 0 or v > 3 for v in intensities):
                raise ValueError(f"{csv_path}:{lineno}: intensities must lie in [0, 3]")
            scores = tuple(float(v) for v in row[5:] if v.strip() != "")
            records.append(
                AnnotationRecord(clip_id=row[0].strip(), intensities=intensities,
                                 scores=scores)
            )
    return records


def save_fitted_weights(path: str, w: AttentionWeights, report: FitReport) -> None:
    payload = {
        "weights": {
            "boredom": w.boredom,
            "engagement": w.engagement,
            "confusion": w.confusion,
            "frustration": w.frustration,
        },
        "fit": {
            "residual_norm": report.residual_norm,
            "r_squared": report.r_squared,
            "condition_number": report.condition_number,
            "n_records": report.n_records,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
