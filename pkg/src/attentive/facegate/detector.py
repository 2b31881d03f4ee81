"""Multi-scale sliding-window face detection and crop normalization.

Window semantics: at scale ``s`` the base window becomes
``round(base_w*s) x round(base_h*s)`` and every feature rect scales the
same way (each edge rounded).  A stump routes left when

    feature_sum / window_area  <  threshold * window_std

where ``window_std`` is the pixel standard deviation of the whole window
(1.0 when variance is non-positive), and a stage passes when the sum of
its stump outputs reaches the stage threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from attentive.facegate.cascade import Cascade
from attentive.facegate.images import FACE_SIZE, bilinear_resize
from attentive.facegate.integral import IntegralImage, compute_integral


@dataclass(frozen=True)
class DetectParams:
    scale_factor: float = 1.1
    min_neighbors: int = 3
    min_size: int = 24


@dataclass(frozen=True)
class DetectionBox:
    x: int
    y: int
    w: int
    h: int
    neighbor_count: int = 1

    @property
    def area(self) -> int:
        return self.w * self.h


class InvalidRegionError(ValueError):
    """Raised for degenerate or out-of-image crop boxes."""


def _scale_rect(rect: tuple[int, int, int, int, float], scale: float) -> tuple[int, int, int, int, float]:
    # Edges are scaled and rounded independently so scaled rects stay inside
    # the scaled window and abutting rects stay abutting.
    x, y, w, h, weight = rect
    x0 = int(round(x * scale))
    y0 = int(round(y * scale))
    x1 = int(round((x + w) * scale))
    y1 = int(round((y + h) * scale))
    return (x0, y0, x1 - x0, y1 - y0, weight)


def evaluate_window(cascade: Cascade, ii: IntegralImage, x: int, y: int, scale: float) -> bool:
    """Run the full stage cascade on one window; True iff every stage passes."""
    ww = int(round(cascade.base_width * scale))
    wh = int(round(cascade.base_height * scale))
    if x < 0 or y < 0 or x + ww > ii.width or y + wh > ii.height:
        raise ValueError(
            f"window ({x},{y},{ww},{wh}) exceeds image {ii.width}x{ii.height}"
        )
    inv_area = 1.0 / (ww * wh)
    std = ii.window_std(x, y, ww, wh)

    for stage in cascade.stages:
        total = 0.0
        for weak in stage.weak:
            feature_sum = 0.0
            for rect in weak.feature.rects:
                rx, ry, rw, rh, weight = _scale_rect(rect, scale)
                feature_sum += weight * ii.rect_sum(x + rx, y + ry, rw, rh)
            value = feature_sum * inv_area
            total += weak.left_value if value < weak.threshold * std else weak.right_value
        if total < stage.stage_threshold:
            return False
    return True


def _vector_rect_sums(
    table: np.ndarray, xs: np.ndarray, ys: np.ndarray, rx: int, ry: int, rw: int, rh: int
) -> np.ndarray:
    x0 = xs + rx
    y0 = ys + ry
    return (
        table[y0 + rh, x0 + rw]
        - table[y0, x0 + rw]
        - table[y0 + rh, x0]
        + table[y0, x0]
    )


def _scan_scale(cascade: Cascade, ii: IntegralImage, scale: float) -> list[tuple[int, int, int, int]]:
    """All windows at one scale that pass the cascade (vectorized stages).

    Produces exactly the windows for which :func:`evaluate_window` is True;
    positions advance by max(1, round(scale)) pixels.
    """
    ww = int(round(cascade.base_width * scale))
    wh = int(round(cascade.base_height * scale))
    if ww > ii.width or wh > ii.height or ww <= 0 or wh <= 0:
        return []
    step = max(1, int(round(scale)))
    grid_x = np.arange(0, ii.width - ww + 1, step)
    grid_y = np.arange(0, ii.height - wh + 1, step)
    xs, ys = np.meshgrid(grid_x, grid_y)
    xs = xs.ravel()
    ys = ys.ravel()

    inv_area = 1.0 / (ww * wh)
    sums = _vector_rect_sums(ii.table, xs, ys, 0, 0, ww, wh)
    sq_sums = _vector_rect_sums(ii.sq_table, xs, ys, 0, 0, ww, wh)
    means = sums * inv_area
    variances = sq_sums * inv_area - means * means
    stds = np.where(variances > 0, np.sqrt(np.maximum(variances, 0)), 1.0)

    for stage in cascade.stages:
        if xs.size == 0:
            return []
        totals = np.zeros(xs.shape, dtype=np.float64)
        for weak in stage.weak:
            feature_sums = np.zeros(xs.shape, dtype=np.float64)
            for rect in weak.feature.rects:
                rx, ry, rw, rh, weight = _scale_rect(rect, scale)
                feature_sums += weight * _vector_rect_sums(ii.table, xs, ys, rx, ry, rw, rh)
            values = feature_sums * inv_area
            totals += np.where(
                values < weak.threshold * stds, weak.left_value, weak.right_value
            )
        keep = totals >= stage.stage_threshold
        xs, ys, stds = xs[keep], ys[keep], stds[keep]

    return [(int(x), int(y), ww, wh) for x, y in zip(xs, ys)]


def _iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    ix = max(a[0], b[0])
    iy = max(a[1], b[1])
    ix2 = min(a[0] + a[2], b[0] + b[2])
    iy2 = min(a[1] + a[3], b[1] + b[3])
    iw = max(0, ix2 - ix)
    ih = max(0, iy2 - iy)
    inter = iw * ih
    union = a[2] * a[3] + b[2] * b[3] - inter
    return inter / union if union > 0 else 0.0


def _group_hits(hits: list[tuple[int, int, int, int]], min_neighbors: int) -> list[DetectionBox]:
    """Union-find grouping: boxes with IoU >= 0.3 are neighbors.

    Each group is represented by the coordinate-wise mean box; groups
    smaller than min_neighbors are dropped.
    """
    n = len(hits)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if _iou(hits[i], hits[j]) >= 0.3:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict[int, list[tuple[int, int, int, int]]] = {}
    for i, hit in enumerate(hits):
        groups.setdefault(find(i), []).append(hit)

    boxes = []
    for members in groups.values():
        if len(members) < min_neighbors:
            continue
        arr = np.array(members, dtype=np.float64)
        mx, my, mw, mh = (int(round(v)) for v in arr.mean(axis=0))
        boxes.append(DetectionBox(x=mx, y=my, w=mw, h=mh, neighbor_count=len(members)))

    boxes.sort(key=lambda b: (-b.area, b.y, b.x))
    return boxes


def detect_faces(
    cascade: Cascade, img: np.ndarray, params: DetectParams = DetectParams()
) -> list[DetectionBox]:
    """Multi-scale scan; grouped boxes sorted by area descending."""
    img = np.asarray(img)
    ii = compute_integral(img)
    hits: list[tuple[int, int, int, int]] = []
    scale = 1.0
    while True:
        ww = int(round(cascade.base_width * scale))
        wh = int(round(cascade.base_height * scale))
        if ww > ii.width or wh > ii.height:
            break
        if min(ww, wh) >= params.min_size:
            hits.extend(_scan_scale(cascade, ii, scale))
        scale *= params.scale_factor
    return _group_hits(hits, params.min_neighbors)


def extract_and_normalize(img: np.ndarray, box: DetectionBox) -> np.ndarray:
    """Crop, bilinear-resize to 64x64 and scale into [0, 1]."""
    img = np.asarray(img)
    if box.w <= 0 or box.h <= 0:
        raise InvalidRegionError(f"degenerate box {box}")
    h, w = img.shape
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise InvalidRegionError(f"box {box} outside {w}x{h} image")
    crop = img[box.y : box.y + box.h, box.x : box.x + box.w]
    return bilinear_resize(crop, FACE_SIZE, FACE_SIZE) / 255.0


def gate_frame(
    cascade: Cascade, img: np.ndarray, params: DetectParams = DetectParams()
) -> np.ndarray | None:
    """Preprocessed largest face, or None when the frame has no detectable face.

    Ties on area go to the topmost, then leftmost box.  None is the
    invalid-frame marker, not an error.
    """
    boxes = detect_faces(cascade, img, params)
    if not boxes:
        return None
    best = min(boxes, key=lambda b: (-b.area, b.y, b.x))
    return extract_and_normalize(img, best)
