"""Sampled signals and synthesis of multicomponent AM/FM test signals.

A multicomponent signal is a sum of modes ``A_k(t) * exp(2j*pi*phi_k(t))``
with polynomial amplitude and phase laws. Phase polynomials are expressed in
cycles, so the instantaneous frequency of a component is simply the
derivative of its phase polynomial, in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ValidationError

__all__ = [
    "SampledSignal",
    "ComponentSpec",
    "MCSSpec",
    "synthesize_mcs",
    "component_signal",
    "true_if_tracks",
    "true_if_tracks_at",
    "add_awgn",
    "mcs_preset",
    "PRESET_NAMES",
]


@dataclass(frozen=True)
class SampledSignal:
    """A uniformly sampled time series.

    ``samples`` may be real or complex; ``is_real`` records which convention
    downstream transforms should apply (one-sided spectra and the
    reconstruction factor 2 are tied to this flag, not to the dtype).
    """

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0
    is_real: bool | None = None

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("signal must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValidationError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        real = self.is_real
        if real is None:
            real = not np.iscomplexobj(arr)
        if real:
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise ValidationError("signal flagged real has nonzero imaginary part")
                arr = arr.real
            arr = np.ascontiguousarray(arr, dtype=np.float64)
        else:
            arr = np.ascontiguousarray(arr, dtype=np.complex128)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "is_real", bool(real))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        return self.start_time_s + np.arange(len(self.samples)) / self.sample_rate_hz


@dataclass(frozen=True)
class ComponentSpec:
    """One AM/FM mode: polynomial amplitude and polynomial phase (in cycles).

    Coefficients are in ascending-power order over time in seconds, so
    ``phase_poly=(0, 50)`` is a 50 Hz tone and the instantaneous frequency
    is the derivative polynomial evaluated in Hz.
    """

    amplitude_poly: tuple[float, ...] = (1.0,)
    phase_poly: tuple[float, ...] = (0.0, 1.0)

    def amplitude(self, t) -> np.ndarray:
        return Polynomial(self.amplitude_poly)(np.asarray(t, dtype=float))

    def phase_cycles(self, t) -> np.ndarray:
        return Polynomial(self.phase_poly)(np.asarray(t, dtype=float))

    def inst_freq_hz(self, t) -> np.ndarray:
        return Polynomial(self.phase_poly).deriv()(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class MCSSpec:
    """A multicomponent signal: components plus duration and sample rate."""

    components: tuple[ComponentSpec, ...]
    duration_s: float
    sample_rate_hz: float

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValidationError("MCSSpec requires at least one component")
        if self.duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ValidationError("duration_s and sample_rate_hz must be positive")
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate_hz


def _check_component(idx: int, comp: ComponentSpec, spec: MCSSpec) -> None:
    # Validate on an oversampled grid so polynomial excursions between
    # sample points are caught as well.
    t = np.linspace(0.0, spec.duration_s, 8 * spec.n_samples + 1)
    f = comp.inst_freq_hz(t)
    nyq = spec.sample_rate_hz / 2.0
    bad = np.nonzero((f <= 0) | (f >= nyq))[0]
    if bad.size:
        j = bad[0]
        raise ValidationError(
            f"component {idx}: instantaneous frequency {f[j]:.6g} Hz at "
            f"t={t[j]:.6g} s is outside (0, {nyq:g}) Hz"
        )
    a = comp.amplitude(t)
    bad = np.nonzero(a < 0)[0]
    if bad.size:
        j = bad[0]
        raise ValidationError(
            f"component {idx}: amplitude {a[j]:.6g} at t={t[j]:.6g} s is negative"
        )


def component_signal(comp: ComponentSpec, times: np.ndarray) -> np.ndarray:
    """Evaluate one mode ``A(t) * exp(2j*pi*phi(t))`` exactly at ``times``.

    Used both by the synthesizer and as ground truth on transform time grids,
    so truth values never go through resampling.
    """
    t = np.asarray(times, dtype=float)
    return comp.amplitude(t) * np.exp(2j * np.pi * comp.phase_cycles(t))


def synthesize_mcs(spec: MCSSpec) -> SampledSignal:
    """Synthesize the complex multicomponent signal described by ``spec``.

    Returns
    -------
    SampledSignal
        Complex signal of ``round(duration_s * sample_rate_hz)`` samples;
        the sum over components of ``A_k(t_n) * exp(2j*pi*phi_k(t_n))``.

    Raises
    ------
    ValidationError
        If any component's instantaneous frequency leaves ``(0, fs/2)`` or
        its amplitude goes negative anywhere on the synthesis interval.
    """
    for idx, comp in enumerate(spec.components):
        _check_component(idx, comp, spec)
    t = spec.sample_times()
    x = np.zeros(spec.n_samples, dtype=np.complex128)
    for comp in spec.components:
        x += component_signal(comp, t)
    return SampledSignal(x, spec.sample_rate_hz, is_real=False)


def true_if_tracks(spec: MCSSpec) -> np.ndarray:
    """Per-component instantaneous frequency in Hz on the sample grid.

    Returns an array of shape ``[n_components, n_samples]`` holding the
    analytic derivative of each phase polynomial.
    """
    return true_if_tracks_at(spec, spec.sample_times())


def true_if_tracks_at(spec: MCSSpec, times: np.ndarray) -> np.ndarray:
    """Like :func:`true_if_tracks` but on an arbitrary time grid."""
    t = np.asarray(times, dtype=float)
    return np.stack([c.inst_freq_hz(t) for c in spec.components])


def add_awgn(x: SampledSignal, snr_db: float, seed: int) -> SampledSignal:
    """Add white Gaussian noise at the requested signal-to-noise ratio.

    Noise is complex circular for complex signals and real for real-flagged
    signals, so the flag survives. ``snr_db=inf`` returns the input
    unchanged. Deterministic for a fixed seed.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return x
    p_sig = float(np.mean(np.abs(x.samples) ** 2))
    p_noise = p_sig / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    n = len(x.samples)
    if x.is_real:
        w = math.sqrt(p_noise) * rng.standard_normal(n)
    else:
        w = math.sqrt(p_noise / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return SampledSignal(x.samples + w, x.sample_rate_hz, x.start_time_s, is_real=x.is_real)


# Built-in 3-component test signal: two polynomial-IF modes plus a linear
# chirp, 10 s at 205 Hz, unit amplitudes. IF tracks (10+0.15t^2, 45+0.12t^2,
# 76+1.1t Hz) stay inside (0, 102.5) Hz and never cross.
_PAPER_3COMP = MCSSpec(
    components=(
        ComponentSpec(amplitude_poly=(1.0,), phase_poly=(0.0, 10.0, 0.0, 0.05)),
        ComponentSpec(amplitude_poly=(1.0,), phase_poly=(0.0, 45.0, 0.0, 0.04)),
        ComponentSpec(amplitude_poly=(1.0,), phase_poly=(0.0, 76.0, 0.55)),
    ),
    duration_s=10.0,
    sample_rate_hz=205.0,
)

_PRESETS: dict[str, MCSSpec] = {"paper-3comp": _PAPER_3COMP}

PRESET_NAMES = tuple(_PRESETS)


def mcs_preset(name: str) -> MCSSpec:
    """Look up a named built-in signal spec (e.g. ``"paper-3comp"``)."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(_PRESETS)}"
        ) from None
