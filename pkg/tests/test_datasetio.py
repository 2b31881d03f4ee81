"""Label parsing, synthetic generation determinism, split accounting."""

import os

import numpy as np
import pytest

from attentive.datasetio import (
    DAISEE_DISTRIBUTION,
    ClipRecord,
    LabelError,
    Manifest,
    SyntheticSpec,
    daisee_style_counts,
    generate_synthetic,
    load_labels,
    load_manifest,
    sample_frames,
    scale_counts,
    split_summary,
    write_labels,
)
from attentive.facegate import load_cascade, reference_cascade_path, write_pgm
from attentive.facegate.synthetic import synthetic_face_image


def write_csv(path, rows, header="ClipID,Boredom,Engagement,Confusion,Frustration"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


class TestLoadLabels:
    def test_basic_row(self, tmp_path):
        path = str(tmp_path / "l.csv")
        write_csv(path, ["c1,0,3,1,0"])
        records = load_labels(path, "Train")
        assert records == [ClipRecord("c1", "Train", (0, 3, 1, 0))]

    def test_out_of_range_label(self, tmp_path):
        path = str(tmp_path / "l.csv")
        write_csv(path, ["c1,0,4,1,0"])
        with pytest.raises(LabelError, match="c1"):
            load_labels(path, "Train")

    def test_duplicate_clip_id(self, tmp_path):
        path = str(tmp_path / "l.csv")
        write_csv(path, ["c1,0,1,1,0", "c1,1,1,1,1"])
        with pytest.raises(LabelError, match="duplicate"):
            load_labels(path, "Train")

    def test_bad_header(self, tmp_path):
        path = str(tmp_path / "l.csv")
        write_csv(path, ["c1,0,1,1,0"], header="clip,b,e,c,f")
        with pytest.raises(LabelError, match="header"):
            load_labels(path, "Train")

    def test_round_trip(self, tmp_path):
        records = [
            ClipRecord("a", "Test", (0, 1, 2, 3)),
            ClipRecord("b", "Test", (3, 2, 1, 0)),
        ]
        path = str(tmp_path / "l.csv")
        write_labels(path, records)
        assert load_labels(path, "Test") == records


@pytest.fixture(scope="module")
def daisee_labels_root():
    root = os.environ.get("DAISEE_ROOT")
    if not root or not os.path.exists(os.path.join(root, "Labels", "TrainLabels.csv")):
        pytest.skip("real DAiSEE labels not present")
    return root


def test_real_daisee_engagement_train_counts(daisee_labels_root):
    records = load_labels(
        os.path.join(daisee_labels_root, "Labels", "TrainLabels.csv"), "Train"
    )
    counts = np.bincount([r.labels[1] for r in records], minlength=4)
    np.testing.assert_array_equal(counts, (34, 213, 2617, 2494))


def test_real_daisee_boredom_test_counts(daisee_labels_root):
    records = load_labels(
        os.path.join(daisee_labels_root, "Labels", "TestLabels.csv"), "Test"
    )
    counts = np.bincount([r.labels[0] for r in records], minlength=4)
    np.testing.assert_array_equal(counts, (823, 584, 338, 39))


class TestSyntheticGeneration:
    def test_exact_daisee_engagement_histogram(self):
        total = sum(DAISEE_DISTRIBUTION["engagement"]["Train"])
        counts = np.array(
            [scale_counts(DAISEE_DISTRIBUTION[s]["Train"], total) for s in DAISEE_DISTRIBUTION]
        )
        ds = generate_synthetic(SyntheticSpec(total, counts, noise_std=0.0, rng_seed=0))
        hist = np.bincount(ds.y[:, 1], minlength=4)
        np.testing.assert_array_equal(hist, (34, 213, 2617, 2494))

    def test_label_counts_exact_for_all_states(self):
        counts = daisee_style_counts(500)
        ds = generate_synthetic(SyntheticSpec(500, counts, rng_seed=3))
        for s in range(4):
            np.testing.assert_array_equal(np.bincount(ds.y[:, s], minlength=4), counts[s])

    def test_noiseless_same_labels_same_quadrants(self):
        ds = generate_synthetic(SyntheticSpec(100, daisee_style_counts(100), noise_std=0.0,
                                              rng_seed=1))
        same = [i for i in range(100) if tuple(ds.y[i]) == tuple(ds.y[0])]
        assert len(same) >= 2
        np.testing.assert_array_equal(ds.x[same[0]], ds.x[same[1]])

    def test_seed_determinism(self):
        spec = SyntheticSpec(80, daisee_style_counts(80), rng_seed=9)
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_values_in_unit_interval(self):
        ds = generate_synthetic(SyntheticSpec(50, daisee_style_counts(50), noise_std=0.3,
                                              rng_seed=2))
        assert ds.x.min() >= 0.0 and ds.x.max() <= 1.0

    def test_spec_validation(self):
        counts = daisee_style_counts(100)
        with pytest.raises(ValueError, match="sum"):
            SyntheticSpec(99, counts)
        bad = counts.copy()
        bad[0] = (0, 0, 0, 0)
        with pytest.raises(ValueError):
            SyntheticSpec(100, bad)

    def test_scale_counts_preserves_total_and_order(self):
        row = (34, 213, 2617, 2494)
        scaled = scale_counts(row, 2000)
        assert sum(scaled) == 2000
        assert np.argsort(scaled).tolist() == np.argsort(row).tolist()


class TestManifestAndFrames:
    @pytest.fixture
    def dataset_root(self, tmp_path):
        root = tmp_path / "ds"
        (root / "Labels").mkdir(parents=True)
        face = synthetic_face_image(96, 96, face=(16, 16, 64, 64))
        flat = np.full((96, 96), 110, dtype=np.uint8)
        clips = {"good": [face] * 10, "blank": [flat] * 6}
        rows = []
        for clip_id, frames in clips.items():
            clip_dir = root / "Train" / clip_id
            clip_dir.mkdir(parents=True)
            for i, frame in enumerate(frames):
                write_pgm(str(clip_dir / f"frame_{i:04d}.pgm"), frame)
            rows.append(ClipRecord(clip_id, "Train", (0, 3, 1, 0)))
        write_labels(str(root / "Labels" / "TrainLabels.csv"), rows)
        return str(root)

    def test_manifest_loads_and_checks_dirs(self, dataset_root):
        manifest = load_manifest(dataset_root)
        assert {r.clip_id for r in manifest.records} == {"good", "blank"}

    def test_manifest_missing_dir_fails(self, dataset_root):
        os.rename(os.path.join(dataset_root, "Train", "good"),
                  os.path.join(dataset_root, "Train", "gone"))
        with pytest.raises(LabelError, match="good"):
            load_manifest(dataset_root)

    def test_sample_every_frame(self, dataset_root):
        manifest = load_manifest(dataset_root)
        cascade = load_cascade(reference_cascade_path())
        rec = next(r for r in manifest.records if r.clip_id == "good")
        samples, invalid = sample_frames(manifest, rec, cascade, every_k=1)
        assert len(samples) == 10 and invalid == 0
        assert all(s.labels == (0, 3, 1, 0) for s in samples)
        assert all(s.face.shape == (64, 64) for s in samples)

    def test_sample_every_third(self, dataset_root):
        manifest = load_manifest(dataset_root)
        cascade = load_cascade(reference_cascade_path())
        rec = next(r for r in manifest.records if r.clip_id == "good")
        samples, _ = sample_frames(manifest, rec, cascade, every_k=3)
        assert len(samples) == 4  # frames 0, 3, 6, 9

    def test_blank_clip_unusable(self, dataset_root):
        manifest = load_manifest(dataset_root)
        cascade = load_cascade(reference_cascade_path())
        rec = next(r for r in manifest.records if r.clip_id == "blank")
        samples, invalid = sample_frames(manifest, rec, cascade, every_k=1)
        assert samples == [] and invalid == 6

    def test_split_summary_counts(self, dataset_root):
        summary = split_summary(load_manifest(dataset_root))
        assert summary["engagement"]["Train"] == [0, 0, 0, 2]
        assert summary["boredom"]["Train"] == [2, 0, 0, 0]
        assert summary["confusion"]["Validation"] == [0, 0, 0, 0]

    def test_split_summary_empty_manifest(self):
        summary = split_summary(Manifest(root=".", records=[]))
        assert all(sum(v) == 0 for state in summary.values() for v in state.values())
