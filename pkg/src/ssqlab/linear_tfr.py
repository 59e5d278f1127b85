"""Forward short-time Fourier and continuous wavelet transforms.

Both transforms come in pairs: the plane itself and its exact time
derivative, which the phase transform in :mod:`ssqlab.synchrosqueeze`
divides to estimate instantaneous frequency.

Conventions
-----------
STFT frames are centered on multiples of the hop and the phase origin sits
at the window center, ``S[k, m] = sum_n x[n] h[n - m*hop] exp(-2j*pi*f_k*
(n - m*hop) / fs)``. With this convention the phase transform of a pure
tone equals the tone frequency at every bin, and the full frequency sum of
a frame recovers ``fs * h_center * x[m*hop]``, which fixes the
reconstruction constant used downstream.

The CWT is computed per scale as an inverse FFT of the full signal spectrum
times the (analytic) wavelet response, so its time axis is the sample grid
and boundaries wrap periodically. Real-flagged signals keep the wavelet's
built-in factor 2 (analytic continuation); complex signals use half the
response so a unit analytic tone has ridge magnitude ~1 either way.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .signal_model import SampledSignal
from .windows_wavelets import (
    DiscreteWindow,
    MorseWaveletSpec,
    WindowSpec,
    dpss_window,
    gmw_freq_response,
    window_derivative,
)

__all__ = [
    "TFRPlane",
    "StftParams",
    "CwtParams",
    "stft",
    "stft_time_derivative",
    "stft_pair",
    "cwt",
    "cwt_time_derivative",
    "cwt_pair",
    "default_scale_grid",
    "scale_to_center_freq_hz",
    "stft_boundary_frames",
    "cwt_boundary_samples",
]


@dataclass(frozen=True)
class TFRPlane:
    """Complex time-frequency matrix with explicit axes.

    ``values`` is indexed ``[frequency-or-scale bin][frame]`` with
    ``freq_axis_hz`` strictly increasing. For CWT planes ``scale_axis``
    holds the scales in the same row order (so it decreases).
    """

    values: np.ndarray
    time_axis_s: np.ndarray
    freq_axis_hz: np.ndarray
    kind: str
    sample_rate_hz: float
    signal_is_real: bool
    scale_axis: np.ndarray | None = None

    def __post_init__(self):
        if self.values.shape != (len(self.freq_axis_hz), len(self.time_axis_s)):
            raise ValidationError("TFRPlane axes do not match matrix dimensions")
        if self.kind not in ("stft", "cwt"):
            raise ValidationError(f"unknown TFR kind {self.kind!r}")
        d = np.diff(self.freq_axis_hz)
        if len(d) and not np.all(d > 0):
            raise ValidationError("freq_axis_hz must be strictly increasing")

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StftParams:
    """Short-time transform parameters.

    ``fft_length`` defaults to the next power of two at or above four times
    the window length, which keeps bin spacing fine enough for nearest-bin
    concentration claims.
    """

    window: WindowSpec
    hop_samples: int = 1
    fft_length: int | None = None

    def __post_init__(self):
        if self.hop_samples < 1:
            raise ValidationError("hop_samples must be >= 1")
        if self.fft_length is not None:
            L = self.window.length_samples
            n = self.fft_length
            if n < L:
                raise ValidationError("fft_length must be >= window length")
            if n & (n - 1):
                raise ValidationError("fft_length must be a power of two")

    def resolved_fft_length(self) -> int:
        if self.fft_length is not None:
            return self.fft_length
        return 1 << int(np.ceil(np.log2(4 * self.window.length_samples)))


@dataclass(frozen=True)
class CwtParams:
    """Wavelet transform parameters: wavelet, voices, geometric scale grid.

    Scales run from ``scale_min`` upward by the fixed ratio
    ``2**(1/voices_per_octave)``; use :func:`default_scale_grid` to build
    one from a frequency range.
    """

    wavelet: MorseWaveletSpec
    voices_per_octave: int = 32
    scale_min: float = 1.0
    scale_max: float = 64.0

    def __post_init__(self):
        if self.voices_per_octave < 1:
            raise ValidationError("voices_per_octave must be >= 1")
        if not (0 < self.scale_min < self.scale_max):
            raise ValidationError("require 0 < scale_min < scale_max")

    def scales(self) -> np.ndarray:
        """Geometric scale grid, ascending, anchored at ``scale_min``."""
        v = self.voices_per_octave
        n = int(np.ceil(v * np.log2(self.scale_max / self.scale_min)))
        n = max(n, 1)
        return self.scale_min * 2.0 ** (np.arange(n) / v)


def scale_to_center_freq_hz(spec: MorseWaveletSpec, scale, sample_rate_hz: float):
    """Center frequency (response peak) of the wavelet at the given scale."""
    return spec.peak_omega * sample_rate_hz / (2.0 * np.pi * np.asarray(scale, dtype=float))


def default_scale_grid(
    sample_rate_hz: float,
    n_samples: int,
    wavelet: MorseWaveletSpec | None = None,
    voices_per_octave: int = 32,
    freq_min_hz: float | None = None,
    freq_max_hz: float | None = None,
) -> CwtParams:
    """Build CWT parameters whose scales cover a sensible frequency band.

    The default band runs from ``4 * fs / n`` (about four periods per
    record) up to ``0.45 * fs``. The grid is anchored so the smallest scale
    hits ``freq_max_hz`` exactly; the low end lands within one voice step of
    ``freq_min_hz``.
    """
    if n_samples < 16:
        raise ValidationError("need at least 16 samples for a scale grid")
    wavelet = wavelet or MorseWaveletSpec()
    f_lo = 4.0 * sample_rate_hz / n_samples if freq_min_hz is None else freq_min_hz
    f_hi = 0.45 * sample_rate_hz if freq_max_hz is None else freq_max_hz
    if not (0 < f_lo < f_hi):
        raise ValidationError("require 0 < freq_min < freq_max")
    a_min = float(scale_to_center_freq_hz(wavelet, 1.0, sample_rate_hz)) / f_hi
    a_max = float(scale_to_center_freq_hz(wavelet, 1.0, sample_rate_hz)) / f_lo
    return CwtParams(
        wavelet=wavelet,
        voices_per_octave=voices_per_octave,
        scale_min=a_min,
        scale_max=a_max,
    )


def _resolve_window(spec: WindowSpec) -> DiscreteWindow:
    return dpss_window(spec)


def _frame_matrix(x: np.ndarray, L: int, hop: int) -> tuple[np.ndarray, np.ndarray]:
    """Window-length slices of the half-window zero-padded signal.

    Frame m is centered on sample ``m * hop``; returns (frames, centers).
    """
    N = len(x)
    c = L // 2
    pad = np.concatenate([np.zeros(c, x.dtype), x, np.zeros(L - 1 - c, x.dtype)])
    centers = np.arange(0, N, hop)
    frames = np.lib.stride_tricks.sliding_window_view(pad, L)[centers]
    return frames, centers


def stft_pair(
    x: SampledSignal, p: StftParams, want_derivative: bool = True
) -> tuple[TFRPlane, TFRPlane | None]:
    """Compute the STFT and (optionally) its exact time derivative together.

    One framing pass serves both planes, which is what the synchrosqueezing
    composition wants.
    """
    if len(x.samples) < p.window.length_samples:
        raise ValidationError(
            f"window of {p.window.length_samples} samples exceeds signal "
            f"length {len(x.samples)}"
        )
    w = _resolve_window(p.window)
    L = len(w)
    c = w.center_index
    fs = x.sample_rate_hz
    nfft = p.resolved_fft_length()
    frames, centers = _frame_matrix(x.samples, L, p.hop_samples)

    if x.is_real:
        nu = np.fft.rfftfreq(nfft)  # cycles/sample, [0, 1/2]
        fft = lambda a: np.fft.rfft(a, n=nfft, axis=1)
    else:
        nu = np.fft.fftfreq(nfft)
        fft = lambda a: np.fft.fft(a, n=nfft, axis=1)
    demod = np.exp(2j * np.pi * nu * c)  # move phase origin to window center

    S = fft(frames * w.taps) * demod
    freqs = nu * fs
    order = np.argsort(freqs, kind="stable")
    times = x.start_time_s + centers / fs

    def mk(vals):
        return TFRPlane(
            values=np.ascontiguousarray(vals.T[order]),
            time_axis_s=times,
            freq_axis_hz=freqs[order],
            kind="stft",
            sample_rate_hz=fs,
            signal_is_real=x.is_real,
        )

    plane = mk(S)
    if not want_derivative:
        return plane, None
    dtaps = window_derivative(w, fs)
    Sd = fft(frames * dtaps) * demod
    # d/dt of the frame-centered convention: derivative-window term plus the
    # modulation term from the moving phase origin.
    dS = -Sd + 2j * np.pi * freqs[None, :] * S
    return plane, mk(dS)


def stft(x: SampledSignal, p: StftParams) -> TFRPlane:
    """Short-time Fourier transform on the frame grid ``m * hop``.

    Real-flagged input yields one-sided bins in ``[0, fs/2]``; complex input
    yields the full two-sided axis, stored increasing. The signal is
    zero-padded by half a window at each end, so frames within two window
    lengths of the edges are boundary-affected.
    """
    return stft_pair(x, p, want_derivative=False)[0]


def stft_time_derivative(x: SampledSignal, p: StftParams) -> TFRPlane:
    """Exact d/dt of :func:`stft` under the stated convention."""
    return stft_pair(x, p, want_derivative=True)[1]


def cwt_pair(
    x: SampledSignal, p: CwtParams, want_derivative: bool = True
) -> tuple[TFRPlane, TFRPlane | None]:
    """Compute the CWT and (optionally) its spectral time derivative together."""
    if len(x.samples) < 2:
        raise ValidationError("CWT needs at least 2 samples")
    fs = x.sample_rate_hz
    scales = p.scales()
    center = scale_to_center_freq_hz(p.wavelet, scales, fs)
    keep = center <= fs / 2.0
    if not np.all(keep):
        warnings.warn(
            f"dropping {int((~keep).sum())} scales with center frequency "
            f"above Nyquist ({fs / 2:g} Hz)",
            stacklevel=3,
        )
        scales = scales[keep]
        center = center[keep]
    if scales.size == 0:
        raise ValidationError("scale grid has no scales at or below Nyquist")

    N = len(x.samples)
    X = np.fft.fft(x.samples)
    xi = 2.0 * np.pi * np.fft.fftfreq(N)  # rad/sample, signed
    f_hz = xi * fs / (2.0 * np.pi)
    # Analytic filter: the response is zero for xi <= 0. For real input the
    # built-in peak value 2 plays the role of the one-sided doubling; for
    # complex input the response is halved so a unit tone still peaks at ~1.
    gain = 1.0 if x.is_real else 0.5
    out = np.empty((len(scales), N), dtype=np.complex128)
    dout = np.empty_like(out) if want_derivative else None
    # Row-blocked evaluation: each output row depends only on its own scale,
    # so results are identical however the rows are scheduled.
    block = max(1, int(2e6 // max(N, 1)))
    for i0 in range(0, len(scales), block):
        sl = slice(i0, min(i0 + block, len(scales)))
        filt = gmw_freq_response_matrix(p.wavelet, scales[sl], xi) * gain
        prod = X[None, :] * filt
        out[sl] = np.fft.ifft(prod, axis=1)
        if want_derivative:
            dout[sl] = np.fft.ifft(prod * (2j * np.pi * f_hz)[None, :], axis=1)

    order = np.argsort(center, kind="stable")  # ascending frequency

    def mk(vals):
        return TFRPlane(
            values=np.ascontiguousarray(vals[order]),
            time_axis_s=x.times(),
            freq_axis_hz=center[order],
            kind="cwt",
            sample_rate_hz=fs,
            signal_is_real=x.is_real,
            scale_axis=scales[order],
        )

    return mk(out), (mk(dout) if want_derivative else None)


def gmw_freq_response_matrix(
    spec: MorseWaveletSpec, scales: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    """Wavelet response sampled at ``scales[:, None] * xi[None, :]``."""
    arg = np.asarray(scales, dtype=float)[:, None] * np.asarray(xi, dtype=float)[None, :]
    return gmw_freq_response(spec, arg.ravel()).reshape(arg.shape)


def cwt(x: SampledSignal, p: CwtParams) -> TFRPlane:
    """Continuous wavelet transform of the whole record (no framing).

    One inverse FFT per scale; the time axis is the sample grid and the
    record wraps periodically, so roughly two wavelet durations at each end
    of every row are boundary-affected.
    """
    return cwt_pair(x, p, want_derivative=False)[0]


def cwt_time_derivative(x: SampledSignal, p: CwtParams) -> TFRPlane:
    """Exact spectral d/dt of :func:`cwt` (ramp applied in frequency)."""
    return cwt_pair(x, p, want_derivative=True)[1]


def stft_boundary_frames(p: StftParams, sample_rate_hz: float) -> int:
    """Frames within two window durations of either record edge."""
    return int(np.ceil(2 * p.window.length_samples / p.hop_samples))


def cwt_boundary_samples(
    wavelet: MorseWaveletSpec, scale: float, sample_rate_hz: float
) -> int:
    """Samples within two wavelet durations of the edge, at one scale.

    The effective duration is taken as four standard deviations of the
    near-Gaussian envelope, whose log-frequency spread is
    ``1/sqrt(beta*gamma)``.
    """
    sigma_u = 1.0 / np.sqrt(wavelet.beta_decay * wavelet.gamma_symmetry)
    f_c = float(scale_to_center_freq_hz(wavelet, scale, sample_rate_hz))
    sigma_t = 1.0 / (2.0 * np.pi * f_c * sigma_u)
    return int(np.ceil(2 * 4 * sigma_t * sample_rate_hz))
