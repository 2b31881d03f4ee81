"""Labeled clip datasets: DAiSEE-style loading and synthetic stand-ins.

On-disk layout mirrors a pre-extracted DAiSEE tree:

    <root>/Labels/{Train,Validation,Test}Labels.csv
    <root>/<Split>/<clipId>/frame_0000.pgm ...

Label CSVs carry the header ``ClipID,Boredom,Engagement,Confusion,Frustration``
with levels 0..3.  Because the real corpus is licensed, a deterministic
synthetic generator with the same 4-state/4-level label schema (and, by
default, the same published skew) stands in for desk-scale experiments.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from attentive.facegate import Cascade, gate_frame
from attentive.facegate.images import read_pgm

SPLITS = ("Train", "Validation", "Test")

# Published DAiSEE label distribution: state -> split -> counts per level 0..3.
DAISEE_DISTRIBUTION = {
    "boredom": {
        "Train": (2433, 1696, 1073, 156),
        "Validation": (446, 376, 475, 132),
        "Test": (823, 584, 338, 39),
    },
    "engagement": {
        "Train": (34, 213, 2617, 2494),
        "Validation": (23, 143, 813, 450),
        "Test": (4, 84, 882, 814),
    },
    "confusion": {
        "Train": (3616, 1245, 431, 66),
        "Validation": (942, 322, 153, 12),
        "Test": (1200, 427, 136, 21),
    },
    "frustration": {
        "Train": (4183, 941, 191, 43),
        "Validation": (1058, 271, 81, 19),
        "Test": (1388, 316, 57, 23),
    },
}

LABEL_HEADER = ("ClipID", "Boredom", "Engagement", "Confusion", "Frustration")


class LabelError(ValueError):
    """Malformed or out-of-range label data."""


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    split: str
    labels: tuple[int, int, int, int]


@dataclass
class Manifest:
    root: str
    records: list[ClipRecord]
    frames_per_clip_hint: int = 300

    def clip_dir(self, record: ClipRecord) -> str:
        return os.path.join(self.root, record.split, record.clip_id)


@dataclass(frozen=True)
class FrameSample:
    face: np.ndarray  # (64, 64) in [0, 1]
    labels: tuple[int, int, int, int]
    clip_id: str


def load_labels(csv_path: str, split: str) -> list[ClipRecord]:
    """Parse one split's label CSV; validates range and uniqueness."""
    if split not in SPLITS:
        raise LabelError(f"unknown split {split!r}")
    records: list[ClipRecord] = []
    seen: set[str] = set()
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(LABEL_HEADER):
            raise LabelError(f"{csv_path}: expected header {','.join(LABEL_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise LabelError(f"{csv_path}:{lineno}: expected 5 columns")
            clip_id = row[0].strip()
            if clip_id in seen:
                raise LabelError(f"{csv_path}:{lineno}: duplicate clipId {clip_id!r}")
            seen.add(clip_id)
            try:
                labels = tuple(int(v) for v in row[1:])
            except ValueError as exc:
                raise LabelError(f"{csv_path}:{lineno}: non-integer label ({clip_id})") from exc
            if any(lv < 0 or lv > 3 for lv in labels):
                raise LabelError(
                    f"{csv_path}:{lineno}: label out of range 0..3 for clip {clip_id!r}"
                )
            records.append(ClipRecord(clip_id=clip_id, split=split, labels=labels))
    return records


def write_labels(csv_path: str, records: list[ClipRecord]) -> None:
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LABEL_HEADER)
        for rec in records:
            writer.writerow([rec.clip_id, *rec.labels])


def load_manifest(root: str, splits: tuple[str, ...] = SPLITS) -> Manifest:
    """Read every split's label CSV and check the clip directories exist."""
    records: list[ClipRecord] = []
    for split in splits:
        path = os.path.join(root, "Labels", f"{split}Labels.csv")
        if not os.path.exists(path):
            continue
        for rec in load_labels(path, split):
            if not os.path.isdir(os.path.join(root, split, rec.clip_id)):
                raise LabelError(f"clip directory missing for {rec.clip_id!r} ({split})")
            records.append(rec)
    return Manifest(root=root, records=records)


def sample_frames(
    manifest: Manifest,
    record: ClipRecord,
    cascade: Cascade,
    every_k: int = 30,
) -> tuple[list[FrameSample], int]:
    """Gate every k-th frame of a clip; returns (samples, invalid_count).

    Frames without a detectable face are discarded.  An empty sample list
    marks the clip unusable; that is reported, not raised.
    """
    clip_dir = manifest.clip_dir(record)
    frames = sorted(f for f in os.listdir(clip_dir) if f.endswith(".pgm"))
    if not frames:
        raise LabelError(f"clip {record.clip_id!r} has no frames")
    samples: list[FrameSample] = []
    invalid = 0
    for name in frames[::every_k]:
        img = read_pgm(os.path.join(clip_dir, name))
        face = gate_frame(cascade, img)
        if face is None:
            invalid += 1
            continue
        samples.append(FrameSample(face=face, labels=record.labels, clip_id=record.clip_id))
    return samples, invalid


# ---------------------------------------------------------------------------
# Synthetic stand-in dataset
# ---------------------------------------------------------------------------

# Each state owns one quadrant (row, col) of the 64x64 image; the stripe
# orientation inside a centered 16x16 patch encodes the level.
_QUADRANT = {0: (0, 0), 1: (0, 32), 2: (32, 0), 3: (32, 32)}
_PATCH = 16
_LO, _HI = 0.0, 1.0


@dataclass(frozen=True)
class SyntheticSpec:
    samples: int
    counts: np.ndarray  # (4 states, 4 levels) label counts; each row sums to `samples`
    noise_std: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (4, 4) or np.any(counts < 0):
            raise ValueError("counts must be a non-negative 4x4 table")
        if np.any(counts.sum(axis=1) != self.samples):
            raise ValueError("each state's level counts must sum to `samples`")
        if not np.any(counts > 0, axis=1).all():
            raise ValueError("every state needs at least one positive count")
        object.__setattr__(self, "counts", counts)


@dataclass
class SyntheticDataset:
    x: np.ndarray  # (n, 1, 64, 64) float64 in [0, 1]
    y: np.ndarray  # (n, 4) int levels
    spec: SyntheticSpec = field(repr=False, default=None)


def scale_counts(row, total: int) -> tuple[int, ...]:
    """Rescale a count row to a new total, largest-remainder rounding."""
    row = np.asarray(row, dtype=np.float64)
    raw = row / row.sum() * total
    base = np.floor(raw).astype(int)
    remainder = total - base.sum()
    order = np.argsort(-(raw - base))
    base[order[:remainder]] += 1
    return tuple(int(v) for v in base)


def daisee_style_counts(samples: int, split: str = "Train") -> np.ndarray:
    """4x4 count table with the published skew rescaled to `samples`."""
    return np.array(
        [scale_counts(DAISEE_DISTRIBUTION[state][split], samples)
         for state in DAISEE_DISTRIBUTION]
    )


def _stripe_patch(level: int) -> np.ndarray:
    r, c = np.mgrid[0:_PATCH, 0:_PATCH]
    if level == 0:
        bands = r // 2
    elif level == 1:
        bands = c // 2
    elif level == 2:
        bands = (r + c) // 2
    else:
        bands = (r - c) // 2
    return np.where(bands % 2 == 0, _HI, _LO)


def generate_synthetic(spec: SyntheticSpec) -> SyntheticDataset:
    """Deterministic quadrant-stripe dataset with exact label counts."""
    n = spec.samples
    label_rng = np.random.default_rng([spec.rng_seed, 1])
    noise_rng = np.random.default_rng([spec.rng_seed, 2])

    y = np.empty((n, 4), dtype=np.int64)
    for state in range(4):
        levels = np.repeat(np.arange(4), spec.counts[state])
        y[:, state] = label_rng.permutation(levels)

    patches = np.stack([_stripe_patch(level) for level in range(4)])
    x = np.full((n, 1, 64, 64), 0.5)
    off = (32 - _PATCH) // 2
    for state in range(4):
        qr, qc = _QUADRANT[state]
        r0, c0 = qr + off, qc + off
        x[:, 0, r0 : r0 + _PATCH, c0 : c0 + _PATCH] = patches[y[:, state]]
    if spec.noise_std > 0:
        x += noise_rng.normal(0.0, spec.noise_std, size=x.shape)
        np.clip(x, 0.0, 1.0, out=x)
    return SyntheticDataset(x=x, y=y, spec=spec)


def split_summary(manifest: Manifest) -> dict[str, dict[str, list[int]]]:
    """Counts per (state, level, split): summary[state][split] = [n0..n3]."""
    states = tuple(DAISEE_DISTRIBUTION)
    summary = {
        state: {split: [0, 0, 0, 0] for split in SPLITS} for state in states
    }
    for rec in manifest.records:
        for si, state in enumerate(states):
            summary[state][rec.split][rec.labels[si]] += 1
    return summary


def write_split_summary(manifest: Manifest, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(split_summary(manifest), fh, indent=2, sort_keys=True)
