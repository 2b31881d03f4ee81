"""Synthetic face-like test pattern.

Draws the coarse luminance structure the vendored cascade keys on:
bright forehead and cheeks, a dark eye band with a brighter nose bridge,
a bright nose column and a dark mouth over a brighter chin.  Used by
demos and service tests as a deterministic detectable frame; it is not a
rendering of any real face.
"""

from __future__ import annotations

import numpy as np


def synthetic_face_image(
    width: int = 96,
    height: int = 96,
    face: tuple[int, int, int, int] | None = None,
    background: int = 110,
) -> np.ndarray:
    """uint8 grayscale image with one face-like pattern at `face` = (x, y, w, h)."""
    img = np.full((height, width), background, dtype=np.uint8)
    if face is None:
        side = int(min(width, height) * 0.6)
        face = ((width - side) // 2, (height - side) // 2, side, side)
    fx, fy, fw, fh = face
    if fw < 12 or fh < 12:
        raise ValueError("face box too small to draw the pattern")

    def band(x0: float, y0: float, x1: float, y1: float, value: int) -> None:
        c0, r0 = fx + int(round(x0 * fw)), fy + int(round(y0 * fh))
        c1, r1 = fx + int(round(x1 * fw)), fy + int(round(y1 * fh))
        img[max(r0, 0) : min(r1, height), max(c0, 0) : min(c1, width)] = value

    band(0.0, 0.0, 1.0, 1.0, 180)          # skin
    band(0.0, 0.04, 1.0, 0.21, 172)        # forehead
    band(0.10, 0.21, 0.42, 0.375, 52)      # left eye
    band(0.58, 0.21, 0.90, 0.375, 52)      # right eye
    band(0.42, 0.21, 0.58, 0.375, 168)     # nose bridge
    band(0.04, 0.375, 0.96, 0.54, 188)     # cheeks
    band(0.08, 0.42, 0.33, 0.67, 150)      # left of nose
    band(0.67, 0.42, 0.92, 0.67, 150)      # right of nose
    band(0.33, 0.42, 0.67, 0.67, 192)      # nose column
    band(0.25, 0.71, 0.75, 0.83, 64)       # mouth
    band(0.17, 0.83, 0.83, 0.96, 176)      # chin
    return img
