"""On-disk formats: CSV / raw-float32 records, TFR1 planes, ridge CSVs.

rawf32 is a little-endian float32 channel-major blob with a text sidecar
header (``<path>.hdr``) carrying version, channel count, sample count,
sample rate and an optional label. TFR1 is a self-describing binary
container for transform planes: magic, kind tag, axes as float64, payload
as complex64 or float32. Both round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..linear_tfr import TFRPlane
from ..signal_model import SampledSignal
from ..synchrosqueeze import SSTPlane, SSTProvenance

__all__ = [
    "MultichannelRecord",
    "read_record",
    "write_record",
    "read_signal",
    "write_signal",
    "read_tfr",
    "write_tfr",
    "write_ridges_csv",
]

_TFR_MAGIC = b"TFR1"
_TFR_KINDS = ("stft", "cwt", "sst-stft", "sst-cwt")
_FLAG_COMPLEX = 1
_FLAG_SCALE_AXIS = 2
_FLAG_REAL_SIGNAL = 4


@dataclass(frozen=True)
class MultichannelRecord:
    """A multichannel recording: ``channels[channel][sample]`` plus rate."""

    channels: np.ndarray
    sample_rate_hz: float
    label: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.channels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("channels must be a non-empty 2-D [channel, sample] array")
        if self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz must be positive")
        object.__setattr__(self, "channels", np.ascontiguousarray(arr))

    @property
    def channel_count(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    def channel_signal(self, idx: int) -> SampledSignal:
        return SampledSignal(self.channels[idx], self.sample_rate_hz, is_real=True)


# ---------------------------------------------------------------------------
# CSV records


def _read_csv_record(path: Path, sample_rate_hz: float | None, label: str | None):
    if sample_rate_hz is None:
        raise ValidationError("reading a CSV record requires sample_rate_hz")
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if width is None:
                # First row may be a header: accept it silently if any cell
                # fails to parse as a number.
                try:
                    vals = [float(c) for c in row]
                except ValueError:
                    width = len(row)
                    continue
                width = len(row)
                rows.append(vals)
                _check_csv_vals(vals, lineno)
                continue
            if len(row) != width:
                raise ValidationError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {width}"
                )
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ValidationError(f"{path}: row {lineno}: {exc}") from None
            _check_csv_vals(vals, lineno)
            rows.append(vals)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=np.float64).T  # columns are channels
    return MultichannelRecord(data, sample_rate_hz, label)


def _check_csv_vals(vals, lineno):
    for col, v in enumerate(vals):
        if not np.isfinite(v):
            raise ValidationError(f"non-finite sample at row {lineno}, column {col + 1}")


def _write_csv_record(rec: MultichannelRecord, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"ch{i}" for i in range(rec.channel_count)])
        for sample in rec.channels.T:
            writer.writerow([repr(float(v)) for v in sample])


# ---------------------------------------------------------------------------
# rawf32 records


def _hdr_path(path: Path) -> Path:
    return path.with_name(path.name + ".hdr")


def _write_rawf32(rec: MultichannelRecord, path: Path) -> None:
    blob = rec.channels.astype("<f4").tobytes()
    path.write_bytes(blob)
    lines = [
        "version=1",
        f"channels={rec.channel_count}",
        f"samples={rec.n_samples}",
        f"sample_rate_hz={rec.sample_rate_hz!r}",
        f"label={rec.label if rec.label is not None else ''}",
    ]
    _hdr_path(path).write_text("\n".join(lines) + "\n")


def _read_rawf32(path: Path) -> MultichannelRecord:
    hdr = _hdr_path(path)
    if not hdr.exists():
        raise ValidationError(f"missing sidecar header {hdr}")
    fields: dict[str, str] = {}
    for lineno, line in enumerate(hdr.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{hdr}: malformed line {lineno}: {line!r}")
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    try:
        if fields["version"] != "1":
            raise ValidationError(f"{hdr}: unsupported version {fields['version']!r}")
        channels = int(fields["channels"])
        samples = int(fields["samples"])
        fs = float(fields["sample_rate_hz"])
    except KeyError as exc:
        raise ValidationError(f"{hdr}: missing header field {exc}") from None
    label = fields.get("label") or None
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size != channels * samples:
        raise ValidationError(
            f"{path}: expected {channels * samples} float32 values, found {raw.size}"
        )
    data = raw.reshape(channels, samples).astype(np.float64)
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise ValidationError(
            f"{path}: non-finite sample at channel {bad[0]}, index {bad[1]}"
        )
    return MultichannelRecord(data, fs, label)


def read_record(
    path,
    fmt: str | None = None,
    sample_rate_hz: float | None = None,
    label: str | None = None,
) -> MultichannelRecord:
    """Read a CSV (columns = channels) or rawf32 record.

    Format is inferred from the extension when not given. CSV needs the
    sample rate supplied; rawf32 carries it in the sidecar header.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "rawf32"
    if fmt == "csv":
        return _read_csv_record(path, sample_rate_hz, label)
    if fmt == "rawf32":
        return _read_rawf32(path)
    raise ValidationError(f"unknown record format {fmt!r}")


def write_record(rec: MultichannelRecord, path, fmt: str | None = None) -> None:
    """Write a record as CSV or rawf32 (+ sidecar header)."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "rawf32"
    if fmt == "csv":
        _write_csv_record(rec, path)
    elif fmt == "rawf32":
        _write_rawf32(rec, path)
    else:
        raise ValidationError(f"unknown record format {fmt!r}")


# ---------------------------------------------------------------------------
# Single signals (synth output, reconstructed modes) via rawf32


def write_signal(sig: SampledSignal, path) -> None:
    """Store a signal as rawf32: one channel if real, I/Q pair if complex."""
    if sig.is_real:
        rec = MultichannelRecord(
            sig.samples[None, :], sig.sample_rate_hz, label="real"
        )
    else:
        rec = MultichannelRecord(
            np.vstack([sig.samples.real, sig.samples.imag]),
            sig.sample_rate_hz,
            label="complex-iq",
        )
    _write_rawf32(rec, Path(path))


def read_signal(path) -> SampledSignal:
    """Inverse of :func:`write_signal` (label selects real vs I/Q)."""
    rec = _read_rawf32(Path(path))
    if rec.label == "complex-iq":
        if rec.channel_count != 2:
            raise ValidationError("complex-iq signal file must have 2 channels")
        return SampledSignal(
            rec.channels[0] + 1j * rec.channels[1], rec.sample_rate_hz, is_real=False
        )
    if rec.channel_count != 1:
        raise ValidationError(
            f"expected a single-channel signal file, found {rec.channel_count} channels"
        )
    return SampledSignal(rec.channels[0], rec.sample_rate_hz, is_real=True)


# ---------------------------------------------------------------------------
# TFR1 planes

_HEADER = struct.Struct("<4sI16sII QQ d")


def write_tfr(plane, path) -> None:
    """Serialize a TFRPlane or SSTPlane to the TFR1 container."""
    path = Path(path)
    if isinstance(plane, SSTPlane):
        kind = plane.kind
        freq_axis = plane.eta_axis_hz
        scale_axis = None
        is_real = plane.provenance.signal_is_real
        fs = plane.provenance.sample_rate_hz
    elif isinstance(plane, TFRPlane):
        kind = plane.kind
        freq_axis = plane.freq_axis_hz
        scale_axis = plane.scale_axis
        is_real = plane.signal_is_real
        fs = plane.sample_rate_hz
    else:
        raise ValidationError(f"cannot serialize {type(plane).__name__}")
    values = plane.values
    is_complex = np.iscomplexobj(values)
    flags = 0
    if is_complex:
        flags |= _FLAG_COMPLEX
    if scale_axis is not None:
        flags |= _FLAG_SCALE_AXIS
    if is_real:
        flags |= _FLAG_REAL_SIGNAL
    rows, cols = values.shape
    header = _HEADER.pack(
        _TFR_MAGIC, 1, kind.encode("ascii").ljust(16, b"\0"), flags, 0,
        rows, cols, fs,
    )
    parts = [
        header,
        np.ascontiguousarray(freq_axis, dtype="<f8").tobytes(),
        np.ascontiguousarray(plane.time_axis_s, dtype="<f8").tobytes(),
    ]
    if scale_axis is not None:
        parts.append(np.ascontiguousarray(scale_axis, dtype="<f8").tobytes())
    payload = values.astype("<c8" if is_complex else "<f4")
    parts.append(np.ascontiguousarray(payload).tobytes())
    path.write_bytes(b"".join(parts))


def read_tfr(path):
    """Read a TFR1 file back into a TFRPlane or SSTPlane.

    Planes written as ``sst-*`` come back as SSTPlane with file-level
    provenance (squeezing parameters are not stored on disk, so
    ``provenance.params`` and ``diagnostics`` are None).
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size or blob[:4] != _TFR_MAGIC:
        raise ValidationError(f"{path}: not a TFR1 file")
    magic, version, kind_raw, flags, _pad, rows, cols, fs = _HEADER.unpack_from(blob)
    if version != 1:
        raise ValidationError(f"{path}: unsupported TFR1 version {version}")
    kind = kind_raw.rstrip(b"\0").decode("ascii")
    if kind not in _TFR_KINDS:
        raise ValidationError(f"{path}: unknown kind tag {kind!r}")
    is_complex = bool(flags & _FLAG_COMPLEX)
    has_scale = bool(flags & _FLAG_SCALE_AXIS)
    is_real = bool(flags & _FLAG_REAL_SIGNAL)
    off = _HEADER.size

    def take(n, dtype):
        nonlocal off
        nbytes = n * np.dtype(dtype).itemsize
        if off + nbytes > len(blob):
            raise ValidationError(f"{path}: truncated TFR1 payload")
        arr = np.frombuffer(blob, dtype=dtype, count=n, offset=off)
        off += nbytes
        return arr

    freq_axis = take(rows, "<f8").astype(np.float64)
    time_axis = take(cols, "<f8").astype(np.float64)
    scale_axis = take(rows, "<f8").astype(np.float64) if has_scale else None
    values = take(rows * cols, "<c8" if is_complex else "<f4").reshape(rows, cols)
    if off != len(blob):
        raise ValidationError(f"{path}: {len(blob) - off} trailing bytes")

    if kind.startswith("sst-"):
        return SSTPlane(
            values=values.copy(),
            eta_axis_hz=freq_axis,
            time_axis_s=time_axis,
            provenance=SSTProvenance(
                source_kind=kind.removeprefix("sst-"),
                params=None,
                sample_rate_hz=fs,
                signal_is_real=is_real,
            ),
            diagnostics=None,
        )
    return TFRPlane(
        values=values.copy(),
        time_axis_s=time_axis,
        freq_axis_hz=freq_axis,
        kind=kind,
        sample_rate_hz=fs,
        signal_is_real=is_real,
        scale_axis=scale_axis,
    )


# ---------------------------------------------------------------------------
# Ridge export


def write_ridges_csv(ridges, time_axis_s, magnitudes, path) -> None:
    """Write extracted ridges as CSV rows of (frame, time, freq, magnitude).

    ``magnitudes`` is the plane magnitude matrix the ridges were pulled
    from; a leading ``ridge`` column disambiguates when several tracks are
    exported together.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ridge", "frame_index", "time_s", "freq_hz", "magnitude"])
        for ri, ridge in enumerate(ridges):
            for m, (q, f_hz) in enumerate(zip(ridge.bin_track, ridge.freq_track_hz)):
                writer.writerow(
                    [ri, m, repr(float(time_axis_s[m])), repr(float(f_hz)),
                     repr(float(magnitudes[q, m]))]
                )
