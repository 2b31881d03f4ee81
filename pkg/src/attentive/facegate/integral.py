"""Integral images for O(1) rectangle sums.

The tables carry one extra leading row and column of zeros so that the
sum over any rectangle needs exactly four lookups and no bounds special
cases.  Both the plain and the squared table are kept: the squared one
feeds per-window variance normalization in the detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntegralImage:
    """Cumulative-sum tables of shape (h+1, w+1); entry (y, x) sums pixels above-left."""

    table: np.ndarray
    sq_table: np.ndarray
    width: int
    height: int

    def rect_sum(self, x: int, y: int, w: int, h: int) -> int:
        """Sum of pixels in the rectangle [x, x+w) x [y, y+h)."""
        t = self.table
        return int(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def rect_sq_sum(self, x: int, y: int, w: int, h: int) -> int:
        """Sum of squared pixels in the rectangle [x, x+w) x [y, y+h)."""
        t = self.sq_table
        return int(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def window_std(self, x: int, y: int, w: int, h: int) -> float:
        """Pixel standard deviation inside a window; 1.0 when variance <= 0."""
        area = w * h
        mean = self.rect_sum(x, y, w, h) / area
        var = self.rect_sq_sum(x, y, w, h) / area - mean * mean
        return float(np.sqrt(var)) if var > 0 else 1.0


def compute_integral(img: np.ndarray) -> IntegralImage:
    """Build plain and squared integral tables for a 2-D intensity array.

    Tables use int64 so sums of 255^2-valued pixels stay exact for any
    image size this pipeline sees.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected 2-D grayscale array, got shape {img.shape}")
    h, w = img.shape
    px = img.astype(np.int64)

    table = np.zeros((h + 1, w + 1), dtype=np.int64)
    sq_table = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(px, axis=0), axis=1, out=table[1:, 1:])
    np.cumsum(np.cumsum(px * px, axis=0), axis=1, out=sq_table[1:, 1:])
    return IntegralImage(table=table, sq_table=sq_table, width=w, height=h)
