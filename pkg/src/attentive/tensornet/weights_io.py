"""Versioned binary weights container.

Layout: 4-byte magic ``ATNW``, uint32 LE version, uint32 LE manifest
length, UTF-8 JSON manifest (ordered list of {"name", "shape"}), then
each tensor's float64 little-endian data in manifest order.  A ``.json``
sidecar next to the file mirrors the manifest for eyeballing.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"ATNW"
VERSION = 1


class WeightsFormatError(ValueError):
    """Unreadable or incompatible weights file."""


def save_tensors(path: str, tensors: dict[str, np.ndarray], meta: dict | None = None) -> None:
    manifest = {
        "meta": meta or {},
        "tensors": [
            {"name": name, "shape": list(np.asarray(arr).shape)}
            for name, arr in tensors.items()
        ],
    }
    manifest_bytes = json.dumps(manifest).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(manifest_bytes)))
        fh.write(manifest_bytes)
        for name, arr in tensors.items():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump({"version": VERSION, **manifest}, fh, indent=2)


def load_tensors(path: str) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise WeightsFormatError(f"bad magic {data[:4]!r}")
    if len(data) < 12:
        raise WeightsFormatError("truncated header")
    version, manifest_len = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise WeightsFormatError(f"unsupported version {version}")
    try:
        manifest = json.loads(data[12 : 12 + manifest_len])
    except json.JSONDecodeError as exc:
        raise WeightsFormatError("corrupt manifest") from exc

    tensors: dict[str, np.ndarray] = {}
    offset = 12 + manifest_len
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        chunk = data[offset : offset + nbytes]
        if len(chunk) < nbytes:
            raise WeightsFormatError(f"tensor {entry['name']!r} truncated")
        tensors[entry["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise WeightsFormatError(f"{len(data) - offset} trailing bytes")
    return tensors, manifest.get("meta", {})
