#!/usr/bin/env python3
"""Batch-preprocessing demo on a synthetic multichannel recording.

Builds a 16-channel record shaped like a 10-minute 400 Hz clip (band-limited
noise plus a few drifting oscillations), slices it with the default
5000/224 segmentation, runs the squeezed short-time transform per channel
per segment, and writes the image blob + manifest. Rerun with a different
--workers value to confirm the output bytes do not change.

Usage: python scripts/eeg_batch_demo.py [--out-dir out/batch] [--minutes 2]
"""

import argparse
import hashlib
import time
from pathlib import Path

import numpy as np

from ssqlab import StftParams, WindowSpec
from ssqlab.io import MultichannelRecord, SegmentPlan, preprocess_batch, read_manifest


def synthetic_record(minutes: float, fs: float = 400.0, channels: int = 16,
                     seed: int = 42) -> MultichannelRecord:
    rng = np.random.default_rng(seed)
    n = int(minutes * 60 * fs)
    t = np.arange(n) / fs
    data = np.empty((channels, n))
    for ch in range(channels):
        drift = 8.0 + 3.0 * np.sin(2 * np.pi * 0.01 * t + ch)
        phase = 2 * np.pi * np.cumsum(drift) / fs
        data[ch] = (
            0.7 * np.sin(phase)
            + 0.4 * np.sin(2 * np.pi * (25 + ch) * t)
            + rng.standard_normal(n)
        )
    return MultichannelRecord(data, fs, label="interictal")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out/batch")
    ap.add_argument("--minutes", type=float, default=2.0)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--transform", default="sst-stft",
                    choices=("stft", "cwt", "sst-stft", "sst-cwt"))
    args = ap.parse_args()

    rec = synthetic_record(args.minutes)
    plan = SegmentPlan(window_samples=5000, hop_samples=224)
    out = Path(args.out_dir)

    t0 = time.perf_counter()
    tensor = preprocess_batch(
        [("demo", rec)], plan, transform=args.transform,
        stft_params=StftParams(window=WindowSpec(32, 4.0), hop_samples=224),
        out_dir=out, workers=args.workers,
    )
    elapsed = time.perf_counter() - t0

    entries, meta, failures = read_manifest(out)
    blob_hash = hashlib.sha256((out / "images.f32").read_bytes()).hexdigest()
    print(f"{len(entries)} images of {meta['rows']}x{meta['cols']} "
          f"({args.transform}) in {elapsed:.1f}s with {args.workers} worker(s)")
    print(f"segments/channel: {len(entries) // rec.channel_count}, "
          f"failures: {len(failures)}")
    print(f"images.f32 sha256: {blob_hash}")
    print(f"outputs under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
