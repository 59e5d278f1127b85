import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from ssqlab import (
    SampledSignal,
    SSTParams,
    StftParams,
    ValidationError,
    WindowSpec,
    default_scale_grid,
    sst_stft,
)
from ssqlab.io import (
    MultichannelRecord,
    SegmentPlan,
    export_image,
    preprocess_batch,
    read_manifest,
    segment,
)
from ssqlab.io.pipeline import _batched_stft_family


def small_record(rng, channels=2, samples=2000, fs=400.0, label="interictal"):
    return MultichannelRecord(rng.standard_normal((channels, samples)), fs, label=label)


class TestSegment:
    def test_reference_segmentation_arithmetic(self):
        plan = SegmentPlan(window_samples=5000, hop_samples=224)
        assert plan.count(240000) == 1050

    def test_single_segment_when_equal(self):
        plan = SegmentPlan(window_samples=100, hop_samples=10)
        assert plan.count(100) == 1

    def test_disjoint_tiling(self):
        plan = SegmentPlan(window_samples=50, hop_samples=50)
        assert plan.count(150) == 3

    def test_record_shorter_than_window(self, rng):
        rec = small_record(rng, samples=400)
        with pytest.raises(ValidationError, match="shorter"):
            segment(rec, SegmentPlan(window_samples=500, hop_samples=100))

    def test_segment_values_match_slices(self, rng):
        rec = small_record(rng, channels=3, samples=1000)
        plan = SegmentPlan(window_samples=300, hop_samples=70)
        segs = segment(rec, plan)
        assert segs.shape == (3, plan.count(1000), 300)
        for ch in range(3):
            for i in range(segs.shape[1]):
                start = i * 70
                assert np.array_equal(segs[ch, i], rec.channels[ch, start:start + 300])

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(10, 5000),
        window=st.integers(1, 600),
        hop=st.integers(1, 600),
    )
    def test_count_matches_enumeration(self, n, window, hop):
        if hop > window or window > n:
            return
        plan = SegmentPlan(window_samples=window, hop_samples=hop)
        brute = sum(1 for start in range(0, n, hop) if start + window <= n)
        assert plan.count(n) == brute


class TestBatchedTransformEquivalence:
    def test_batched_sst_stft_matches_library_per_segment(self, rng):
        # Dual route: the pipeline's batched frame gather against the plain
        # one-segment composition, default thresholds included.
        fs = 400.0
        rec = small_record(rng, channels=1, samples=1400, fs=fs)
        plan = SegmentPlan(window_samples=500, hop_samples=224)
        segs = segment(rec, plan)[0]
        sp = StftParams(window=WindowSpec(32, 4.0), hop_samples=224)
        imgs = _batched_stft_family(segs, fs, "sst-stft", sp, SSTParams())
        for i in range(segs.shape[0]):
            sig = SampledSignal(segs[i], fs, is_real=True)
            T = sst_stft(sig, sp)
            assert np.allclose(imgs[i], np.abs(T.values).astype(np.float32), atol=2e-6)

    def test_batched_stft_matches_library(self, rng):
        from ssqlab import stft

        fs = 400.0
        rec = small_record(rng, channels=1, samples=1200, fs=fs)
        plan = SegmentPlan(window_samples=400, hop_samples=200)
        segs = segment(rec, plan)[0]
        sp = StftParams(window=WindowSpec(32, 4.0), hop_samples=100)
        imgs = _batched_stft_family(segs, fs, "stft", sp, SSTParams())
        for i in range(segs.shape[0]):
            plane = stft(SampledSignal(segs[i], fs, is_real=True), sp)
            assert np.allclose(imgs[i], np.abs(plane.values).astype(np.float32), atol=2e-6)


class TestPreprocessBatch:
    def test_counts_and_manifest_order(self, rng, tmp_path):
        rec = small_record(rng, channels=2, samples=1500)
        plan = SegmentPlan(window_samples=500, hop_samples=250)
        tensor = preprocess_batch(
            [("recA", rec)], plan, transform="sst-stft", out_dir=tmp_path
        )
        n_seg = plan.count(1500)
        assert len(tensor.entries) == 2 * n_seg
        keys = [(e.record_id, e.channel, e.segment_index) for e in tensor.entries]
        assert keys == sorted(keys)
        offsets = [e.byte_offset for e in tensor.entries]
        assert offsets == sorted(offsets)
        entries, meta, failures = read_manifest(tmp_path)
        assert len(entries) == len(tensor.entries)
        assert meta["transform"] == "sst-stft"
        assert failures == []

    def test_deterministic_across_runs_and_workers(self, rng, tmp_path):
        rec = small_record(rng, channels=3, samples=1800)
        plan = SegmentPlan(window_samples=600, hop_samples=300)

        def digest(out):
            tensor = preprocess_batch(
                [("r0", rec)], plan, transform="sst-stft", out_dir=out,
                workers=out_workers[out],
            )
            blob = (out / "images.f32").read_bytes()
            manifest = (out / "manifest.tsv").read_bytes()
            return hashlib.sha256(blob + manifest).hexdigest()

        d1, d2, d3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        out_workers = {d1: 1, d2: 1, d3: 4}
        h = [digest(d) for d in (d1, d2, d3)]
        assert h[0] == h[1] == h[2]

    def test_partial_failure_isolated(self, rng, tmp_path):
        good = small_record(rng, channels=1, samples=1500)
        short = small_record(rng, channels=1, samples=100)
        plan = SegmentPlan(window_samples=500, hop_samples=500)
        tensor = preprocess_batch(
            [("good", good), ("short", short)], plan,
            transform="stft", out_dir=tmp_path,
        )
        assert [rid for rid, _ in tensor.failures] == ["short"]
        assert {e.record_id for e in tensor.entries} == {"good"}
        _, _, failures = read_manifest(tmp_path)
        assert failures and failures[0][0] == "short"

    def test_all_failed_raises(self, rng):
        short = small_record(rng, channels=1, samples=10)
        with pytest.raises(ValidationError, match="every record failed"):
            preprocess_batch([short], SegmentPlan(500, 500), transform="stft")

    def test_mismatched_rates_rejected(self, rng):
        a = small_record(rng, fs=400.0)
        b = small_record(rng, fs=205.0)
        with pytest.raises(ValidationError, match="sample rate"):
            preprocess_batch([a, b], SegmentPlan(500, 250))

    def test_sst_and_stft_share_dimensions(self, rng):
        rec = small_record(rng, channels=1, samples=1200)
        plan = SegmentPlan(window_samples=600, hop_samples=600)
        lin = preprocess_batch([rec], plan, transform="stft")
        sq = preprocess_batch([rec], plan, transform="sst-stft")
        assert lin.images.shape == sq.images.shape

    def test_cwt_branch_smoke(self, rng):
        rec = small_record(rng, channels=1, samples=700, fs=205.0)
        plan = SegmentPlan(window_samples=600, hop_samples=600)
        params = default_scale_grid(205.0, 600, voices_per_octave=8)
        tensor = preprocess_batch(
            [rec], plan, transform="sst-cwt", cwt_params=params
        )
        assert tensor.images.shape[0] == 1
        assert tensor.rows == len(params.scales())

    def test_labels_propagate(self, rng, tmp_path):
        rec = small_record(rng, channels=1, samples=1000, label="preictal")
        plan = SegmentPlan(window_samples=500, hop_samples=500)
        tensor = preprocess_batch([rec], plan, transform="stft", out_dir=tmp_path)
        assert all(e.label == "preictal" for e in tensor.entries)
        entries, _, _ = read_manifest(tmp_path)
        assert all(e.label == "preictal" for e in entries)


class TestManifestValidation:
    def _tensor(self, rng, tmp_path):
        rec = small_record(rng, channels=1, samples=1000)
        plan = SegmentPlan(window_samples=500, hop_samples=500)
        return preprocess_batch([rec], plan, transform="stft", out_dir=tmp_path)

    def test_detects_nonmonotonic_offsets(self, rng, tmp_path):
        self._tensor(rng, tmp_path)
        mpath = tmp_path / "manifest.tsv"
        lines = mpath.read_text().splitlines()
        data = [ln for ln in lines if ln and not ln.startswith("#") and not ln.startswith("record_id")]
        swapped = lines.copy()
        i1 = lines.index(data[0])
        i2 = lines.index(data[1])
        swapped[i1], swapped[i2] = swapped[i2], swapped[i1]
        mpath.write_text("\n".join(swapped) + "\n")
        with pytest.raises(ValidationError, match="strictly increasing"):
            read_manifest(tmp_path)

    def test_detects_blob_size_mismatch(self, rng, tmp_path):
        self._tensor(rng, tmp_path)
        blob = tmp_path / "images.f32"
        blob.write_bytes(blob.read_bytes() + b"\0\0\0\0")
        with pytest.raises(ValidationError, match="size"):
            read_manifest(tmp_path)


class TestExportImage:
    def test_zero_plane_uniform_black(self, tmp_path):
        path = tmp_path / "z.pgm"
        export_image(np.zeros((16, 8)), path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n8 16\n255\n")
        assert set(data.split(b"255\n", 1)[1]) == {0}

    def test_tone_sst_is_single_bright_row(self, tmp_path, tone_50hz, hop1_stft_params):
        T = sst_stft(tone_50hz, hop1_stft_params)
        path = tmp_path / "t.pgm"
        export_image(T, path, normalize="max")
        header, payload = path.read_bytes().split(b"255\n", 1)
        img = np.frombuffer(payload, dtype=np.uint8).reshape(T.n_bins, T.n_frames)
        row_mass = img.astype(float).sum(axis=1)
        top = int(np.argmax(row_mass))
        # Image is flipped: row index counts down from the highest frequency.
        expected = T.n_bins - 1 - int(np.argmin(np.abs(T.eta_axis_hz - 50.0)))
        assert top == expected
        assert row_mass[top] > 0.97 * row_mass.sum()

    def test_dims_follow_plane(self, tmp_path, tone_50hz, hop1_stft_params):
        T = sst_stft(tone_50hz, hop1_stft_params)
        path = tmp_path / "t.pgm"
        export_image(T, path)
        header = path.read_bytes().split(b"\n", 2)
        assert header[1].decode() == f"{T.n_frames} {T.n_bins}"

    def test_png_written(self, tmp_path, tone_50hz, hop1_stft_params):
        from PIL import Image

        T = sst_stft(tone_50hz, hop1_stft_params)
        path = tmp_path / "t.png"
        export_image(T, path, scale="log")
        with Image.open(path) as im:
            assert im.size == (T.n_frames, T.n_bins)
            assert im.mode == "L"

    def test_empty_plane_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            export_image(np.zeros((0, 0)), tmp_path / "x.pgm")
