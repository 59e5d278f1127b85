"""Segmentation of multichannel records into per-segment TFR image tensors.

Records are cut into overlapping fixed-length segments, every segment of
every channel is pushed through the chosen transform, and the magnitude
images are packed into one float32 blob addressed by a TSV manifest
ordered (record, channel, segment). Output bytes are identical across
reruns and across worker counts: channels are computed in any order but
assembled canonically, and each result depends only on its own inputs.

The STFT-family transforms are batched across all segments of a channel
(one FFT call per channel instead of thousands), which is exactly
equivalent to transforming each zero-padded segment on its own.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..linear_tfr import CwtParams, StftParams, cwt_pair, default_scale_grid
from ..signal_model import SampledSignal
from ..synchrosqueeze import SSTParams, phase_transform, synchrosqueeze
from ..windows_wavelets import WindowSpec, dpss_window, window_derivative
from .formats import MultichannelRecord

__all__ = [
    "SegmentPlan",
    "SegmentTensor",
    "ManifestEntry",
    "TRANSFORMS",
    "segment",
    "preprocess_batch",
    "write_segment_tensor",
    "read_manifest",
]

TRANSFORMS = ("stft", "cwt", "sst-stft", "sst-cwt")

_MANIFEST_NAME = "manifest.tsv"
_IMAGES_NAME = "images.f32"


@dataclass(frozen=True)
class SegmentPlan:
    """Sliding segmentation: segment i covers samples [i*hop, i*hop+window)."""

    window_samples: int = 5000
    hop_samples: int = 224
    drop_incomplete_tail: bool = True

    def __post_init__(self):
        if self.window_samples < 1 or self.hop_samples < 1:
            raise ValidationError("window and hop must be positive")
        if self.hop_samples > self.window_samples:
            raise ValidationError("hop must not exceed the segment window")

    def count(self, n_samples: int) -> int:
        if n_samples < self.window_samples:
            raise ValidationError(
                f"record of {n_samples} samples is shorter than the "
                f"{self.window_samples}-sample segment window"
            )
        return (n_samples - self.window_samples) // self.hop_samples + 1


@dataclass(frozen=True)
class ManifestEntry:
    record_id: str
    channel: int
    segment_index: int
    label: str
    byte_offset: int


@dataclass(frozen=True)
class SegmentTensor:
    """Stacked per-segment magnitude images plus their manifest."""

    images: np.ndarray  # float32 [n_images, rows, cols]
    entries: list[ManifestEntry]
    transform: str
    failures: list[tuple[str, str]]  # (record_id, message)

    @property
    def rows(self) -> int:
        return self.images.shape[1]

    @property
    def cols(self) -> int:
        return self.images.shape[2]


def segment(rec: MultichannelRecord, plan: SegmentPlan) -> np.ndarray:
    """Per-channel segment windows, shape ``[channels, n_segments, window]``.

    Returns a strided view; no copies are made.
    """
    n_seg = plan.count(rec.n_samples)
    win = np.lib.stride_tricks.sliding_window_view(rec.channels, plan.window_samples, axis=1)
    return win[:, :: plan.hop_samples][:, :n_seg]


def _batched_stft_family(
    segs: np.ndarray,
    fs: float,
    transform: str,
    sp: StftParams,
    sq: SSTParams,
) -> np.ndarray:
    """Magnitude images for all segments of one channel at once.

    Frames are gathered from each segment padded by half a window of
    zeros, matching the one-segment transform exactly.
    """
    n_seg, win = segs.shape
    w = dpss_window(sp.window)
    L = len(w)
    if win < L:
        raise ValidationError(f"segment window {win} is shorter than the analysis window {L}")
    c = w.center_index
    nfft = sp.resolved_fft_length()
    padded = np.zeros((n_seg, win + L - 1))
    padded[:, c:c + win] = segs
    slid = np.lib.stride_tricks.sliding_window_view(padded, L, axis=1)
    frames = slid[:, :: sp.hop_samples]  # [n_seg, n_frames, L]
    n_frames = frames.shape[1]
    flat = frames.reshape(-1, L)

    nu = np.fft.rfftfreq(nfft)
    demod = np.exp(2j * np.pi * nu * c)
    S = np.fft.rfft(flat * w.taps, n=nfft, axis=1) * demod
    freqs = nu * fs
    if transform == "stft":
        return np.abs(S).astype(np.float32).reshape(n_seg, n_frames, -1).transpose(0, 2, 1)

    dtaps = window_derivative(w, fs)
    Sd = np.fft.rfft(flat * dtaps, n=nfft, axis=1) * demod
    dS = -Sd + 2j * np.pi * freqs[None, :] * S

    mag = np.abs(S)
    if sq.gamma_abs is not None:
        gamma = np.full((mag.shape[0], 1), sq.gamma_abs)
    else:
        # Relative threshold is per segment: each segment is squeezed as its
        # own plane, exactly as the one-signal composition would.
        rel = 1e-8 if sq.gamma_rel is None else sq.gamma_rel
        per_seg = mag.reshape(n_seg, -1).max(axis=1)
        gamma = np.repeat(rel * per_seg, n_frames)[:, None]
    strong = mag > gamma
    om = np.zeros(S.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(
            dS.imag * S.real - dS.real * S.imag,
            2.0 * np.pi * mag * mag,
            out=om,
            where=strong,
        )
    nyq = fs / 2.0
    valid = strong & np.isfinite(om) & (om >= 0.0) & (om <= nyq * (1 + 1e-6))

    lo, hi = sq.freq_range if sq.freq_range is not None else (float(freqs[1]), nyq)
    n_out = sq.n_out_bins or len(freqs)
    eta = np.linspace(lo, hi, n_out)
    step = eta[1] - eta[0]
    in_range = valid & (om >= lo - step / 2) & (om <= hi + step / 2)
    q = np.clip(np.round((om - lo) / step).astype(np.int64), 0, n_out - 1)
    T = np.zeros((flat.shape[0], n_out), dtype=np.complex128)
    rows, cols = np.nonzero(in_range)
    np.add.at(T, (rows, q[rows, cols]), S[rows, cols] * (fs / nfft))
    return np.abs(T).astype(np.float32).reshape(n_seg, n_frames, n_out).transpose(0, 2, 1)


def _cwt_family(
    segs: np.ndarray,
    fs: float,
    transform: str,
    cp: CwtParams | None,
    sq: SSTParams,
) -> np.ndarray:
    """Per-segment wavelet images (looped; the scale dimension dominates)."""
    n_seg, win = segs.shape
    params = cp or default_scale_grid(fs, win)
    images = None
    for i in range(n_seg):
        sig = SampledSignal(segs[i], fs, is_real=True)
        if transform == "cwt":
            plane = cwt_pair(sig, params, want_derivative=False)[0]
            img = np.abs(plane.values).astype(np.float32)
        else:
            plane, dplane = cwt_pair(sig, params)
            pm = phase_transform(plane, dplane, gamma=sq.resolve_gamma(plane))
            img = np.abs(synchrosqueeze(plane, pm, sq).values).astype(np.float32)
        if images is None:
            images = np.empty((n_seg,) + img.shape, dtype=np.float32)
        images[i] = img
    return images


def _transform_channel(segs, fs, transform, sp, cp, sq):
    if transform in ("stft", "sst-stft"):
        return _batched_stft_family(segs, fs, transform, sp, sq)
    return _cwt_family(segs, fs, transform, cp, sq)


def _worker_cap(workers: int | None) -> int:
    cap = os.environ.get("SSQLAB_THREADS")
    if workers is None:
        workers = int(cap) if cap else 1
    elif cap:
        workers = min(workers, int(cap))
    return max(1, workers)


def preprocess_batch(
    records,
    plan: SegmentPlan,
    transform: str = "sst-stft",
    stft_params: StftParams | None = None,
    cwt_params: CwtParams | None = None,
    sst_params: SSTParams | None = None,
    out_dir=None,
    workers: int | None = None,
) -> SegmentTensor:
    """Run the chosen transform over every (record, channel, segment).

    Parameters
    ----------
    records : sequence of MultichannelRecord or (record_id, record) pairs
        Ids default to ``rec0000``-style counters. Sample rates must agree.
    plan : SegmentPlan
        Segment window/hop.
    transform : {"stft", "cwt", "sst-stft", "sst-cwt"}
    out_dir : path, optional
        When given, the image blob and manifest are written there.
    workers : int, optional
        Parallelism over (record, channel) tasks; capped by the
        ``SSQLAB_THREADS`` environment variable. Output does not depend on
        the worker count.

    A record that fails validation is skipped and reported in
    ``failures`` (and in the manifest); the rest of the batch proceeds.
    """
    if transform not in TRANSFORMS:
        raise ValidationError(f"unknown transform {transform!r}; choose from {TRANSFORMS}")
    named: list[tuple[str, MultichannelRecord]] = []
    for i, item in enumerate(records):
        if isinstance(item, MultichannelRecord):
            named.append((f"rec{i:04d}", item))
        else:
            rid, rec = item
            named.append((str(rid), rec))
    if not named:
        raise ValidationError("no records given")
    fs_set = {rec.sample_rate_hz for _, rec in named}
    if len(fs_set) != 1:
        raise ValidationError(f"records disagree on sample rate: {sorted(fs_set)}")
    fs = fs_set.pop()
    sp = stft_params or StftParams(window=WindowSpec(32, 4.0), hop_samples=224)
    sq = sst_params or SSTParams()

    tasks = []  # (order key, record_id, label, channel, segments)
    failures: list[tuple[str, str]] = []
    for rid, rec in named:
        try:
            segs = segment(rec, plan)
        except ValidationError as exc:
            failures.append((rid, str(exc)))
            continue
        label = rec.label or ""
        for ch in range(rec.channel_count):
            tasks.append((rid, label, ch, segs[ch]))

    workers = _worker_cap(workers)

    def run(task):
        rid, label, ch, segs = task
        return _transform_channel(segs, fs, transform, sp, cwt_params, sq)

    if workers == 1 or len(tasks) <= 1:
        results = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, tasks))

    entries: list[ManifestEntry] = []
    images: list[np.ndarray] = []
    offset = 0
    shape = None
    for (rid, label, ch, segs), imgs in zip(tasks, results):
        if shape is None:
            shape = imgs.shape[1:]
        elif imgs.shape[1:] != shape:
            raise ValidationError(
                f"inconsistent image dimensions across records: {imgs.shape[1:]} vs {shape}"
            )
        nbytes = int(np.prod(shape)) * 4
        for si in range(imgs.shape[0]):
            entries.append(ManifestEntry(rid, ch, si, label, offset))
            offset += nbytes
        images.append(imgs)
    if not images:
        raise ValidationError(
            "every record failed: " + "; ".join(f"{r}: {m}" for r, m in failures)
        )
    tensor = SegmentTensor(
        images=np.concatenate(images, axis=0),
        entries=entries,
        transform=transform,
        failures=failures,
    )
    if out_dir is not None:
        write_segment_tensor(tensor, out_dir)
    return tensor


def write_segment_tensor(tensor: SegmentTensor, out_dir) -> None:
    """Write the image blob and its manifest into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    blob = tensor.images.astype("<f4").tobytes()
    (out / _IMAGES_NAME).write_bytes(blob)
    lines = [
        "# ssqlab-manifest\tversion=1",
        f"# transform={tensor.transform}\trows={tensor.rows}\tcols={tensor.cols}\tdtype=float32",
        f"# images={_IMAGES_NAME}",
        "record_id\tchannel\tsegment_index\tlabel\tbyte_offset",
    ]
    for e in tensor.entries:
        lines.append(f"{e.record_id}\t{e.channel}\t{e.segment_index}\t{e.label}\t{e.byte_offset}")
    for rid, msg in tensor.failures:
        lines.append(f"#! record={rid}\terror={msg}")
    (out / _MANIFEST_NAME).write_text("\n".join(lines) + "\n")


def read_manifest(out_dir):
    """Read a manifest back; validates offsets against the image blob.

    Returns ``(entries, meta, failures)`` where meta holds transform/rows/
    cols. Every image must be addressed exactly once by strictly
    increasing offsets.
    """
    out = Path(out_dir)
    mpath = out / _MANIFEST_NAME if out.is_dir() else out
    if not mpath.exists():
        raise ValidationError(f"no manifest at {mpath}")
    meta: dict[str, str] = {}
    entries: list[ManifestEntry] = []
    failures: list[tuple[str, str]] = []
    header_seen = False
    for lineno, line in enumerate(mpath.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#!"):
            fields = dict(p.partition("=")[::2] for p in line[2:].strip().split("\t"))
            failures.append((fields.get("record", "?"), fields.get("error", "?")))
            continue
        if line.startswith("#"):
            for part in line[1:].strip().split("\t"):
                if "=" in part:
                    k, _, v = part.partition("=")
                    meta[k] = v
            continue
        cells = line.split("\t")
        if cells[0] == "record_id":
            header_seen = True
            continue
        if len(cells) != 5:
            raise ValidationError(f"{mpath}: line {lineno}: expected 5 columns")
        entries.append(
            ManifestEntry(cells[0], int(cells[1]), int(cells[2]), cells[3], int(cells[4]))
        )
    if not header_seen:
        raise ValidationError(f"{mpath}: missing column header line")
    try:
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except KeyError as exc:
        raise ValidationError(f"{mpath}: missing meta field {exc}") from None
    stride = rows * cols * 4
    offsets = [e.byte_offset for e in entries]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise ValidationError(f"{mpath}: byte offsets are not strictly increasing")
    if offsets and offsets != list(range(0, stride * len(offsets), stride)):
        raise ValidationError(f"{mpath}: offsets do not tile the image stride {stride}")
    keys = {(e.record_id, e.channel, e.segment_index) for e in entries}
    if len(keys) != len(entries):
        raise ValidationError(f"{mpath}: duplicate manifest entries")
    blob = mpath.parent / meta.get("images", _IMAGES_NAME)
    if blob.exists():
        expect = stride * len(entries)
        actual = blob.stat().st_size
        if actual != expect:
            raise ValidationError(
                f"{blob}: size {actual} does not match manifest ({expect} bytes)"
            )
    return entries, meta, failures
