"""Grayscale image ingestion and resampling.

Images are plain 2-D uint8 numpy arrays (row-major, values 0..255).
Supported on-disk formats are binary PGM (P5), binary PPM (P6) and raw
width*height byte blobs; RGB input is collapsed to luma on ingestion.
"""

from __future__ import annotations

import numpy as np

# Classifier input side length; crops are resampled to FACE_SIZE x FACE_SIZE.
FACE_SIZE = 64

# Luma weights for RGB -> gray collapse, rounded to the nearest integer.
_LUMA = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """Raised when an image file or blob cannot be decoded."""


def _read_pnm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated ASCII integers, honoring '#' comments.

    Returns the tokens and the offset of the first byte after the single
    whitespace character that terminates the header.
    """
    tokens: list[int] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ImageFormatError("truncated PNM header")
        try:
            tokens.append(int(data[start:i]))
        except ValueError as exc:
            raise ImageFormatError(f"bad PNM header token {data[start:i]!r}") from exc
    return tokens, i + 1  # skip exactly one whitespace after maxval


def read_pgm(source: bytes | str) -> np.ndarray:
    """Decode a binary PGM (P5) into a (h, w) uint8 array."""
    data = source if isinstance(source, bytes) else open(source, "rb").read()
    if not data.startswith(b"P5"):
        raise ImageFormatError("not a binary PGM (missing P5 magic)")
    (width, height, maxval), offset = _read_pnm_tokens(data[2:], 3)
    if maxval <= 0 or maxval > 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}")
    pixels = data[2 + offset : 2 + offset + width * height]
    if len(pixels) < width * height:
        raise ImageFormatError("PGM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def read_ppm(source: bytes | str) -> np.ndarray:
    """Decode a binary PPM (P6) into a (h, w, 3) uint8 array."""
    data = source if isinstance(source, bytes) else open(source, "rb").read()
    if not data.startswith(b"P6"):
        raise ImageFormatError("not a binary PPM (missing P6 magic)")
    (width, height, maxval), offset = _read_pnm_tokens(data[2:], 3)
    if maxval <= 0 or maxval > 255:
        raise ImageFormatError(f"unsupported PPM maxval {maxval}")
    pixels = data[2 + offset : 2 + offset + width * height * 3]
    if len(pixels) < width * height * 3:
        raise ImageFormatError("PPM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3).copy()


def write_pgm(path: str, img: np.ndarray) -> None:
    """Write a (h, w) uint8 array as binary PGM (P5)."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError(f"expected 2-D grayscale array, got shape {img.shape}")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def read_raw_gray(blob: bytes, width: int, height: int) -> np.ndarray:
    """Interpret a raw byte blob as a width*height grayscale image."""
    if len(blob) != width * height:
        raise ImageFormatError(
            f"raw blob holds {len(blob)} bytes, expected {width * height}"
        )
    return np.frombuffer(blob, dtype=np.uint8).reshape(height, width).copy()


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Collapse (h, w, 3) RGB to grayscale with luma weights, rounded to int."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) RGB array, got shape {rgb.shape}")
    gray = (
        _LUMA[0] * rgb[:, :, 0].astype(np.float64)
        + _LUMA[1] * rgb[:, :, 1]
        + _LUMA[2] * rgb[:, :, 2]
    )
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resample a 2-D array to (out_h, out_w) with half-pixel-centered bilinear.

    Source coordinates are sampled at pixel centers: the destination pixel
    (i, j) maps to ((i + 0.5) * h/out_h - 0.5, (j + 0.5) * w/out_w - 0.5),
    clamped to the valid range.  Works on any float or integer dtype and
    returns float64.
    """
    if out_h <= 0 or out_w <= 0:
        raise ValueError("output dimensions must be positive")
    src = np.asarray(img, dtype=np.float64)
    h, w = src.shape

    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)

    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]

    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy) + bottom * fy
