"""Command-line front end.

Subcommands map one-to-one onto the library operations: ``synth`` writes
test signals, ``transform``/``ssq`` produce TFR1 planes, ``ridges``/
``reconstruct`` work on squeezed planes, ``metrics`` reports concentration
numbers, ``preprocess`` runs the batch segmentation pipeline, and
``render`` rasterizes planes. Exit codes: 0 success, 2 validation/usage
error, 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io as ssqio
from .errors import ValidationError
from .linear_tfr import CwtParams, StftParams, cwt, default_scale_grid, stft
from .metrics import concentration_report, report_kv_lines, write_reports_csv
from .ridge_reconstruct import extract_ridges, reconstruct_mode_cwt, reconstruct_mode_stft
from .signal_model import SampledSignal, add_awgn, mcs_preset, synthesize_mcs, true_if_tracks_at
from .synchrosqueeze import SSTParams, SSTPlane, sst_cwt, sst_stft
from .windows_wavelets import MorseWaveletSpec, WindowSpec, cwt_reconstruction_constant, dpss_window


def _common_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("analysis parameters")
    g.add_argument("--fs", type=float, default=None, help="sample rate in Hz (CSV inputs)")
    g.add_argument("--window-len", type=int, default=32, help="analysis window length in samples")
    g.add_argument("--nw", type=float, default=4.0, help="window time-half-bandwidth product")
    g.add_argument("--gmw-gamma", type=float, default=3.0, help="wavelet symmetry parameter")
    g.add_argument("--gmw-beta", type=float, default=60.0, help="wavelet decay parameter")
    g.add_argument("--hop", type=int, default=224, help="frame hop in samples")
    g.add_argument("--voices", type=int, default=32, help="wavelet voices per octave")
    g.add_argument("--gamma-rel", type=float, default=1e-8,
                   help="squeezing threshold relative to max coefficient")
    g.add_argument("--gamma-abs", type=float, default=None,
                   help="absolute squeezing threshold (overrides --gamma-rel)")
    g.add_argument("--kernel", choices=("hard", "gaussian"), default="hard")
    g.add_argument("--epsilon", type=float, default=0.0,
                   help="gaussian kernel width in Hz (requires --kernel gaussian)")
    g.add_argument("--seed", type=int, default=0, help="noise seed")


def _stft_params(args) -> StftParams:
    return StftParams(
        window=WindowSpec(args.window_len, args.nw),
        hop_samples=args.hop,
    )


def _wavelet(args) -> MorseWaveletSpec:
    return MorseWaveletSpec(args.gmw_gamma, args.gmw_beta)


def _cwt_params(args, fs: float, n: int) -> CwtParams:
    return default_scale_grid(fs, n, wavelet=_wavelet(args), voices_per_octave=args.voices)


def _sst_params(args) -> SSTParams:
    return SSTParams(
        gamma_rel=None if args.gamma_abs is not None else args.gamma_rel,
        gamma_abs=args.gamma_abs,
        epsilon_width=args.epsilon,
        kernel=args.kernel,
    )


def _load_signal(args) -> SampledSignal:
    path = Path(args.input)
    if path.suffix.lower() == ".csv":
        rec = ssqio.read_record(path, sample_rate_hz=args.fs)
        if rec.channel_count != 1:
            raise ValidationError("transform subcommands expect a single-channel input")
        return rec.channel_signal(0)
    return ssqio.read_signal(path)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_synth(args) -> int:
    spec = mcs_preset(args.preset)
    sig = synthesize_mcs(spec)
    snr = math.inf if args.snr is None else args.snr
    sig = add_awgn(sig, snr, args.seed)
    if not args.complex:
        sig = SampledSignal(sig.samples.real, sig.sample_rate_hz, sig.start_time_s, is_real=True)
    ssqio.write_signal(sig, args.output)
    print(f"wrote {len(sig)} samples at {sig.sample_rate_hz:g} Hz to {args.output}")
    return 0


def _cmd_transform(args) -> int:
    sig = _load_signal(args)
    if args.branch == "stft":
        plane = stft(sig, _stft_params(args))
    else:
        plane = cwt(sig, _cwt_params(args, sig.sample_rate_hz, len(sig)))
    ssqio.write_tfr(plane, args.output)
    print(f"wrote {plane.kind} plane {plane.values.shape} to {args.output}")
    return 0


def _cmd_ssq(args) -> int:
    sig = _load_signal(args)
    p = _sst_params(args)
    if args.branch == "stft":
        plane = sst_stft(sig, _stft_params(args), p, workers=args.workers)
    else:
        plane = sst_cwt(sig, _cwt_params(args, sig.sample_rate_hz, len(sig)), p,
                        workers=args.workers)
    ssqio.write_tfr(plane, args.output)
    d = plane.diagnostics
    print(
        f"wrote {plane.kind} plane {plane.values.shape} to {args.output} "
        f"(deposited {d.deposited}, dropped {d.dropped_out_of_range})"
    )
    return 0


def _require_sst(plane) -> SSTPlane:
    if not isinstance(plane, SSTPlane):
        raise ValidationError("input must be a squeezed (sst-*) TFR1 file")
    return plane


def _cmd_ridges(args) -> int:
    plane = _require_sst(ssqio.read_tfr(args.input))
    ridges = extract_ridges(plane, args.k, penalty=args.penalty, max_jump=args.max_jump)
    ssqio.write_ridges_csv(ridges, plane.time_axis_s, np.abs(plane.values), args.output)
    print(f"wrote {len(ridges)} ridges to {args.output}")
    return 0


def _cmd_reconstruct(args) -> int:
    plane = _require_sst(ssqio.read_tfr(args.input))
    ridges = extract_ridges(plane, args.k, penalty=args.penalty, max_jump=args.max_jump)
    out_stem = Path(args.output)
    fs = plane.provenance.sample_rate_hz
    for i, ridge in enumerate(ridges):
        if plane.provenance.source_kind == "stft":
            win = dpss_window(WindowSpec(args.window_len, args.nw))
            mode = reconstruct_mode_stft(plane, ridge, args.d_bins or 8, win, component_index=i)
        else:
            c_psi = cwt_reconstruction_constant(_wavelet(args))
            mode = reconstruct_mode_cwt(plane, ridge, args.d_bins or 4, c_psi, component_index=i)
        path = out_stem.with_name(f"{out_stem.name}.mode{i}.rawf32")
        ssqio.write_signal(SampledSignal(mode.samples, fs, is_real=False), path)
        print(f"mode {i}: median freq {np.median(ridge.freq_track_hz):.3f} Hz -> {path}")
    return 0


def _cmd_metrics(args) -> int:
    plane = ssqio.read_tfr(args.input)
    tracks = None
    if args.preset:
        spec = mcs_preset(args.preset)
        tracks = true_if_tracks_at(spec, plane.time_axis_s)
    rep = concentration_report(
        plane,
        label=Path(args.input).name,
        if_tracks_hz=tracks,
        halfwidth_bins=args.halfwidth if tracks is not None else None,
        order=args.order,
    )
    for line in report_kv_lines(rep):
        print(line)
    if args.csv:
        write_reports_csv([rep], args.csv)
    return 0


def _cmd_preprocess(args) -> int:
    records = []
    for p in args.inputs:
        rec = ssqio.read_record(p, sample_rate_hz=args.fs)
        records.append((Path(p).stem, rec))
    plan = ssqio.SegmentPlan(window_samples=args.window, hop_samples=args.seg_hop)
    fs = records[0][1].sample_rate_hz
    cwt_params = None
    if args.transform in ("cwt", "sst-cwt"):
        cwt_params = default_scale_grid(fs, args.window, wavelet=_wavelet(args),
                                        voices_per_octave=args.voices)
    tensor = ssqio.preprocess_batch(
        records,
        plan,
        transform=args.transform,
        stft_params=StftParams(window=WindowSpec(args.window_len, args.nw),
                               hop_samples=args.stft_hop),
        cwt_params=cwt_params,
        sst_params=_sst_params(args),
        out_dir=args.out_dir,
        workers=args.workers,
    )
    per_channel: dict[tuple[str, int], int] = {}
    for e in tensor.entries:
        key = (e.record_id, e.channel)
        per_channel[key] = per_channel.get(key, 0) + 1
    segs = sorted(set(per_channel.values()))
    print(
        f"{len(tensor.entries)} images ({tensor.rows}x{tensor.cols}) from "
        f"{len(records)} record(s); segments per channel: "
        f"{segs[0] if len(segs) == 1 else segs}"
    )
    for rid, msg in tensor.failures:
        print(f"record {rid} failed: {msg}", file=sys.stderr)
    return 0


def _cmd_render(args) -> int:
    plane = ssqio.read_tfr(args.input)
    ssqio.export_image(plane, args.output, scale=args.scale, normalize=args.normalize)
    print(f"rendered {args.input} -> {args.output}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssqlab",
        description="Synchrosqueezed time-frequency analysis toolbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a named test signal")
    p.add_argument("--preset", required=True, help="preset name, e.g. paper-3comp")
    p.add_argument("--snr", type=float, default=None, help="SNR in dB (omit for clean)")
    p.add_argument("--complex", action="store_true", help="keep the complex signal (I/Q)")
    p.add_argument("-o", "--output", required=True)
    _common_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("transform", help="forward STFT or CWT to a TFR1 file")
    p.add_argument("--branch", choices=("stft", "cwt"), required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    _common_flags(p)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("ssq", help="synchrosqueezed STFT or CWT to a TFR1 file")
    p.add_argument("--branch", choices=("stft", "cwt"), required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=int, default=1)
    _common_flags(p)
    p.set_defaults(func=_cmd_ssq)

    p = sub.add_parser("ridges", help="extract ridges from a squeezed plane")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-k", type=int, default=1, help="number of ridges")
    p.add_argument("--penalty", type=float, default=2.0)
    p.add_argument("--max-jump", type=int, default=16)
    _common_flags(p)
    p.set_defaults(func=_cmd_ridges)

    p = sub.add_parser("reconstruct", help="extract ridges and rebuild modes")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True, help="output stem for mode files")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--d-bins", type=int, default=None, help="band halfwidth in bins")
    p.add_argument("--penalty", type=float, default=2.0)
    p.add_argument("--max-jump", type=int, default=16)
    _common_flags(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="concentration report for a TFR1 plane")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--preset", default=None,
                   help="preset supplying ground-truth tracks for energy fraction")
    p.add_argument("--halfwidth", type=int, default=1)
    p.add_argument("--order", type=float, default=3.0)
    p.add_argument("--csv", default=None, help="also write the report as CSV")
    _common_flags(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("preprocess", help="segment records into TFR image tensors")
    p.add_argument("inputs", nargs="+", help="record files (CSV or rawf32)")
    p.add_argument("--transform", choices=ssqio.pipeline.TRANSFORMS, default="sst-stft")
    p.add_argument("--window", type=int, default=5000, help="segment window in samples")
    p.add_argument("--seg-hop", "--hop", dest="seg_hop", type=int, default=224,
                   help="segment hop in samples")
    p.add_argument("--stft-hop", type=int, default=224, help="frame hop inside a segment")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=None)
    g = p.add_argument_group("analysis parameters")
    g.add_argument("--fs", type=float, default=None)
    g.add_argument("--window-len", type=int, default=32)
    g.add_argument("--nw", type=float, default=4.0)
    g.add_argument("--gmw-gamma", type=float, default=3.0)
    g.add_argument("--gmw-beta", type=float, default=60.0)
    g.add_argument("--voices", type=int, default=32)
    g.add_argument("--gamma-rel", type=float, default=1e-8)
    g.add_argument("--gamma-abs", type=float, default=None)
    g.add_argument("--kernel", choices=("hard", "gaussian"), default="hard")
    g.add_argument("--epsilon", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("render", help="rasterize a TFR1 plane to PGM/PNG")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--normalize", choices=("percentile99", "max"), default="percentile99")
    _common_flags(p)
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures: I/O, numerics
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
