"""Phase transform and synchrosqueezing for both transform branches.

The phase transform divides a plane's time derivative by the plane itself
to estimate, at every cell, the instantaneous frequency of whatever
dominates that cell. Synchrosqueezing then moves each coefficient (times
its integration measure) to the output bin nearest that estimate, which
collapses the smeared linear transform onto sharp frequency tracks while
keeping the complex values that mode reconstruction integrates later.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linear_tfr import CwtParams, StftParams, TFRPlane, cwt_pair, stft_pair
from .signal_model import SampledSignal

__all__ = [
    "PhaseMap",
    "SSTParams",
    "SSTDiagnostics",
    "SSTProvenance",
    "SSTPlane",
    "phase_transform",
    "synchrosqueeze",
    "sst_stft",
    "sst_cwt",
]

_NYQUIST_SLACK = 1e-6  # relative tolerance above fs/2 still considered valid


@dataclass(frozen=True)
class PhaseMap:
    """Per-cell instantaneous-frequency estimates plus their validity mask.

    Masked-in entries are finite, non-negative and at most a hair above
    Nyquist; everything else (weak cells, exact zeros, non-finite ratios)
    is masked out so no NaN can propagate.
    """

    omega_hat_hz: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        if self.omega_hat_hz.shape != self.valid_mask.shape:
            raise ValidationError("phase map and mask shapes differ")


@dataclass(frozen=True)
class SSTParams:
    """Squeezing controls.

    The threshold may be absolute (``gamma_abs``) or relative to the largest
    coefficient magnitude (``gamma_rel``, the default). ``freq_range``
    defaults per branch: first positive bin to Nyquist for STFT planes, the
    scale-grid coverage for CWT planes. The hard kernel deposits into the
    single nearest bin; the gaussian kernel spreads a unit-mass profile of
    width ``epsilon_width`` (Hz), truncated at four widths.
    """

    gamma_rel: float | None = 1e-8
    gamma_abs: float | None = None
    freq_range: tuple[float, float] | None = None
    epsilon_width: float = 0.0
    kernel: str = "hard"
    n_out_bins: int | None = None
    out_bin_spacing: str | None = None  # "linear" | "logarithmic" | None (by branch)

    def __post_init__(self):
        if self.kernel not in ("hard", "gaussian"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "hard" and self.epsilon_width != 0.0:
            raise ValidationError("hard kernel requires epsilon_width == 0")
        if self.kernel == "gaussian" and self.epsilon_width <= 0.0:
            raise ValidationError("gaussian kernel requires epsilon_width > 0")
        if self.gamma_abs is not None and self.gamma_abs < 0:
            raise ValidationError("gamma_abs must be non-negative")
        if self.gamma_rel is not None and self.gamma_rel < 0:
            raise ValidationError("gamma_rel must be non-negative")
        if self.freq_range is not None:
            lo, hi = self.freq_range
            if not (0 <= lo < hi):
                raise ValidationError("freq_range must satisfy 0 <= lo < hi")
        if self.out_bin_spacing not in (None, "linear", "logarithmic"):
            raise ValidationError(f"unknown out_bin_spacing {self.out_bin_spacing!r}")
        if self.n_out_bins is not None and self.n_out_bins < 2:
            raise ValidationError("n_out_bins must be >= 2")

    def resolve_gamma(self, plane: TFRPlane) -> float:
        mx = float(np.abs(plane.values).max()) if plane.values.size else 0.0
        if self.gamma_abs is not None:
            return self.gamma_abs
        rel = 1e-8 if self.gamma_rel is None else self.gamma_rel
        return rel * mx


@dataclass(frozen=True)
class SSTDiagnostics:
    """Counts and mass bookkeeping from one squeezing run.

    ``deposited_abs_mass`` accumulates ``|coefficient| * measure`` per
    deposit, so with the hard kernel it must equal the masked-in, in-range
    source mass exactly (reassignment moves, never rescales).
    """

    total_cells: int
    masked_in: int
    deposited: int
    dropped_out_of_range: int
    deposited_abs_mass: float


@dataclass(frozen=True)
class SSTProvenance:
    """What produced an SST plane: source kind, params, signal facts.

    ``params`` is None for planes loaded from disk (the file format does
    not store squeezing parameters).
    """

    source_kind: str  # "stft" | "cwt"
    params: SSTParams | None
    sample_rate_hz: float
    signal_is_real: bool


@dataclass(frozen=True)
class SSTPlane:
    """Synchrosqueezed plane on the output frequency grid ``eta_axis_hz``."""

    values: np.ndarray
    eta_axis_hz: np.ndarray
    time_axis_s: np.ndarray
    provenance: SSTProvenance
    diagnostics: SSTDiagnostics | None

    def __post_init__(self):
        if self.values.shape != (len(self.eta_axis_hz), len(self.time_axis_s)):
            raise ValidationError("SSTPlane axes do not match matrix dimensions")
        d = np.diff(self.eta_axis_hz)
        if len(d) and not np.all(d > 0):
            raise ValidationError("eta_axis_hz must be strictly increasing")

    @property
    def kind(self) -> str:
        return "sst-" + self.provenance.source_kind

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def phase_transform(
    plane: TFRPlane,
    dplane: TFRPlane,
    gamma: float | None = None,
    gamma_rel: float | None = None,
) -> PhaseMap:
    """Instantaneous-frequency estimate ``Re[dplane / (2*pi*i*plane)]``.

    Parameters
    ----------
    plane, dplane : TFRPlane
        A transform and its exact time derivative; same shape and kind.
    gamma : float, optional
        Absolute magnitude threshold below which cells are masked out.
    gamma_rel : float, optional
        Relative threshold (fraction of the max magnitude); used when
        ``gamma`` is not given. Defaults to 1e-8.

    Cells whose estimate is negative or more than a sliver above Nyquist
    are masked out along with sub-threshold and non-finite cells.
    """
    if plane.values.shape != dplane.values.shape:
        raise ValidationError("plane and dplane shapes differ")
    if plane.kind != dplane.kind:
        raise ValidationError(
            f"plane kinds differ: {plane.kind!r} vs {dplane.kind!r}"
        )
    mag = np.abs(plane.values)
    if gamma is None:
        rel = 1e-8 if gamma_rel is None else gamma_rel
        gamma = rel * (float(mag.max()) if mag.size else 0.0)
    strong = mag > gamma
    omega = np.zeros(plane.values.shape, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(
            dplane.values.imag * plane.values.real
            - dplane.values.real * plane.values.imag,
            2.0 * np.pi * (mag * mag),
            out=omega,
            where=strong,
        )
    nyq = plane.sample_rate_hz / 2.0
    valid = strong & np.isfinite(omega) & (omega >= 0.0) & (omega <= nyq * (1 + _NYQUIST_SLACK))
    omega[~valid] = 0.0
    return PhaseMap(omega_hat_hz=omega, valid_mask=valid)


def _default_freq_range(plane: TFRPlane) -> tuple[float, float]:
    f = plane.freq_axis_hz
    if plane.kind == "stft":
        pos = f[f > 0]
        lo = float(pos[0]) if pos.size else float(f[0])
        return lo, plane.sample_rate_hz / 2.0
    return float(f[0]), float(f[-1])


def _output_axis(plane: TFRPlane, p: SSTParams) -> tuple[np.ndarray, str]:
    lo, hi = p.freq_range if p.freq_range is not None else _default_freq_range(plane)
    spacing = p.out_bin_spacing
    if spacing is None:
        spacing = "linear" if plane.kind == "stft" else "logarithmic"
    n = p.n_out_bins
    if (
        plane.kind == "cwt"
        and p.freq_range is None
        and p.n_out_bins is None
        and p.out_bin_spacing in (None, "logarithmic")
    ):
        # Natural choice: squeeze onto the scale center frequencies themselves.
        return plane.freq_axis_hz.copy(), "logarithmic"
    if n is None:
        n = plane.n_bins
    if spacing == "linear":
        return np.linspace(lo, hi, n), spacing
    return np.geomspace(lo, hi, n), spacing


def _row_measure(plane: TFRPlane) -> float:
    """Integration measure attached to each source row.

    STFT rows are linearly spaced: measure is the bin width in Hz. CWT rows
    sit on a geometric scale grid: measure is the constant log-scale step.
    """
    f = plane.freq_axis_hz
    if plane.kind == "stft":
        return float(f[1] - f[0]) if len(f) > 1 else plane.sample_rate_hz / 2.0
    return float(np.log(f[1] / f[0])) if len(f) > 1 else 1.0


def _nearest_bins(eta: np.ndarray, spacing: str, om: np.ndarray) -> np.ndarray:
    if spacing == "linear":
        step = eta[1] - eta[0]
        return np.round((om - eta[0]) / step).astype(np.int64)
    step = np.log(eta[1] / eta[0])
    with np.errstate(divide="ignore"):
        return np.round(np.log(om / eta[0]) / step).astype(np.int64)


def _deposit_hard(values, om, cols, eta, spacing, measure, out):
    q = np.clip(_nearest_bins(eta, spacing, om), 0, len(eta) - 1)
    np.add.at(out, (q, cols), values * measure)
    return float(np.sum(np.abs(values)) * measure), len(values)


def _deposit_gaussian(values, om, cols, eta, spacing, measure, out, eps):
    q0 = np.clip(_nearest_bins(eta, spacing, om), 0, len(eta) - 1)
    # Enough neighbors to cover the 4*eps truncation; the nearest bin is
    # always included so the profile never collapses to nothing.
    min_step = float(np.min(np.diff(eta))) if len(eta) > 1 else 1.0
    reach = min(int(np.ceil(4.0 * eps / min_step)) + 1, len(eta) - 1)
    offsets = np.arange(-reach, reach + 1)
    w = np.zeros((len(values), len(offsets)))
    qs = np.zeros((len(values), len(offsets)), dtype=np.int64)
    for oi, off in enumerate(offsets):
        raw = q0 + off
        qq = np.clip(raw, 0, len(eta) - 1)
        dist = np.abs(eta[qq] - om)
        wcol = np.exp(-0.5 * (dist / eps) ** 2)
        wcol[dist > 4.0 * eps] = 0.0
        wcol[qq != raw] = 0.0  # clipped index duplicates an edge bin: skip
        if off == 0:
            wcol = np.maximum(wcol, 1e-300)  # nearest bin always participates
        w[:, oi] = wcol
        qs[:, oi] = qq
    w /= w.sum(axis=1, keepdims=True)
    total = 0.0
    for oi in range(len(offsets)):
        sel = w[:, oi] > 0
        if not np.any(sel):
            continue
        vals = values[sel] * (w[sel, oi] * measure)
        np.add.at(out, (qs[sel, oi], cols[sel]), vals)
        total += float(np.sum(np.abs(vals)))
    return total, len(values)


def synchrosqueeze(
    plane: TFRPlane,
    pm: PhaseMap,
    p: SSTParams | None = None,
    workers: int = 1,
) -> SSTPlane:
    """Reassign masked-in coefficients to their estimated frequencies.

    Each masked-in coefficient, times the row measure (bin width for STFT,
    log-scale step for CWT), is deposited at the output bin(s) selected by
    its phase-transform estimate. Estimates outside ``freq_range`` are
    dropped and counted. Columns are partitioned across workers, each frame
    owned by exactly one, so the result is bit-identical for any worker
    count.

    Returns
    -------
    SSTPlane
        Complex squeezed plane plus diagnostics (deposit counts and the
        accumulated ``|value| * measure`` mass).
    """
    p = p or SSTParams()
    if pm.omega_hat_hz.shape != plane.values.shape:
        raise ValidationError("phase map was not derived from this plane")
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    eta, spacing = _output_axis(plane, p)
    measure = _row_measure(plane)
    lo, hi = p.freq_range if p.freq_range is not None else _default_freq_range(plane)

    mask = pm.valid_mask
    n_masked = int(mask.sum())
    out = np.zeros((len(eta), plane.n_frames), dtype=np.complex128)

    rows, cols = np.nonzero(mask)
    om = pm.omega_hat_hz[rows, cols]
    vals = plane.values[rows, cols]
    # Half-bin slack at the edges so estimates that still round to an edge
    # bin are kept; anything farther out is dropped and counted.
    if spacing == "linear":
        half = (eta[1] - eta[0]) / 2.0 if len(eta) > 1 else 0.0
        in_range = (om >= eta[0] - half) & (om <= eta[-1] + half)
    else:
        ratio = np.sqrt(eta[1] / eta[0]) if len(eta) > 1 else 1.0
        in_range = (om >= eta[0] / ratio) & (om <= eta[-1] * ratio)
    in_range &= (om >= 0)
    dropped = int((~in_range).sum())
    rows, cols, om, vals = rows[in_range], cols[in_range], om[in_range], vals[in_range]

    def run_chunk(frame_lo: int, frame_hi: int, target: np.ndarray):
        sel = (cols >= frame_lo) & (cols < frame_hi)
        if not np.any(sel):
            return 0.0, 0
        sub_cols = cols[sel] - frame_lo
        if p.kernel == "hard":
            return _deposit_hard(
                vals[sel], om[sel], sub_cols, eta, spacing, measure, target
            )
        return _deposit_gaussian(
            vals[sel], om[sel], sub_cols, eta, spacing, measure, target,
            p.epsilon_width,
        )

    n_frames = plane.n_frames
    workers = min(workers, max(1, n_frames))
    bounds = np.linspace(0, n_frames, workers + 1).astype(int)
    chunks = [(bounds[i], bounds[i + 1]) for i in range(workers) if bounds[i] < bounds[i + 1]]
    total_mass = 0.0
    n_dep = 0
    if len(chunks) <= 1:
        total_mass, n_dep = run_chunk(0, n_frames, out)
    else:
        targets = [out[:, a:b] for a, b in chunks]
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            futs = [
                ex.submit(run_chunk, a, b, tgt)
                for (a, b), tgt in zip(chunks, targets)
            ]
            for f in futs:
                m, c = f.result()
                total_mass += m
                n_dep += c

    return SSTPlane(
        values=out,
        eta_axis_hz=eta,
        time_axis_s=plane.time_axis_s.copy(),
        provenance=SSTProvenance(
            source_kind=plane.kind,
            params=p,
            sample_rate_hz=plane.sample_rate_hz,
            signal_is_real=plane.signal_is_real,
        ),
        diagnostics=SSTDiagnostics(
            total_cells=plane.values.size,
            masked_in=n_masked,
            deposited=n_dep,
            dropped_out_of_range=dropped,
            deposited_abs_mass=total_mass,
        ),
    )


def sst_stft(
    x: SampledSignal,
    sp: StftParams,
    p: SSTParams | None = None,
    workers: int = 1,
) -> SSTPlane:
    """STFT -> derivative STFT -> phase transform -> squeeze, in one call."""
    p = p or SSTParams()
    plane, dplane = stft_pair(x, sp)
    pm = phase_transform(plane, dplane, gamma=p.resolve_gamma(plane))
    return synchrosqueeze(plane, pm, p, workers=workers)


def sst_cwt(
    x: SampledSignal,
    cp: CwtParams,
    p: SSTParams | None = None,
    workers: int = 1,
) -> SSTPlane:
    """CWT -> derivative CWT -> phase transform -> squeeze, in one call."""
    p = p or SSTParams()
    plane, dplane = cwt_pair(x, cp)
    pm = phase_transform(plane, dplane, gamma=p.resolve_gamma(plane))
    return synchrosqueeze(plane, pm, p, workers=workers)
