"""Binary weights container round trips and failure modes."""

import json

import numpy as np
import pytest

from attentive.tensornet.weights_io import WeightsFormatError, load_tensors, save_tensors


@pytest.fixture
def tensors():
    rng = np.random.default_rng(0)
    return {
        "b0.l0.W": rng.standard_normal((8, 1, 3, 3)),
        "b0.l0.b": rng.standard_normal(8),
        "b1.l4.W": rng.standard_normal((16, 4)),
    }


def test_round_trip_bit_exact(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    loaded, meta = load_tensors(path)
    assert list(loaded) == list(tensors)
    for name in tensors:
        np.testing.assert_array_equal(loaded[name], tensors[name])


def test_sidecar_mirrors_shapes(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    sidecar = json.load(open(path + ".json"))
    assert sidecar["version"] == 1
    assert {t["name"]: tuple(t["shape"]) for t in sidecar["tensors"]} == {
        k: v.shape for k, v in tensors.items()
    }


def test_corrupt_magic(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    raw = bytearray(open(path, "rb").read())
    raw[:4] = b"XXXX"
    open(path, "wb").write(bytes(raw))
    with pytest.raises(WeightsFormatError, match="magic"):
        load_tensors(path)


def test_truncated_file(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    raw = open(path, "rb").read()
    open(path, "wb").write(raw[: len(raw) - 16])
    with pytest.raises(WeightsFormatError, match="truncated"):
        load_tensors(path)


def test_version_mismatch(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    raw = bytearray(open(path, "rb").read())
    raw[4] = 99
    open(path, "wb").write(bytes(raw))
    with pytest.raises(WeightsFormatError, match="version"):
        load_tensors(path)


def test_trailing_bytes_rejected(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors)
    with open(path, "ab") as fh:
        fh.write(b"\x00" * 8)
    with pytest.raises(WeightsFormatError, match="trailing"):
        load_tensors(path)


def test_meta_round_trip(tmp_path, tensors):
    path = str(tmp_path / "w.atnw")
    save_tensors(path, tensors, meta={"topology": "quad_conv64", "seed": 7})
    _, meta = load_tensors(path)
    assert meta == {"topology": "quad_conv64", "seed": 7}
