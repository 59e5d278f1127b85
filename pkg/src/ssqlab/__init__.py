"""Synchrosqueezing lab: sharpened time-frequency analysis and mode recovery.

STFT- and CWT-based synchrosqueezing with phase-transform frequency
estimation, penalized ridge extraction, calibrated mode reconstruction,
concentration metrics, and a batch pipeline that turns multichannel
recordings into TFR image tensors.
"""

from .errors import ValidationError
from .signal_model import (
    ComponentSpec,
    MCSSpec,
    SampledSignal,
    add_awgn,
    component_signal,
    mcs_preset,
    synthesize_mcs,
    true_if_tracks,
    true_if_tracks_at,
)
from .windows_wavelets import (
    DiscreteWindow,
    MorseWaveletSpec,
    WindowSpec,
    cwt_reconstruction_constant,
    dpss_window,
    gmw_freq_response,
    window_derivative,
)
from .linear_tfr import (
    CwtParams,
    StftParams,
    TFRPlane,
    cwt,
    cwt_time_derivative,
    default_scale_grid,
    stft,
    stft_time_derivative,
)
from .synchrosqueeze import (
    PhaseMap,
    SSTParams,
    SSTPlane,
    phase_transform,
    sst_cwt,
    sst_stft,
    synchrosqueeze,
)
from .ridge_reconstruct import (
    ModeEstimate,
    Ridge,
    extract_ridges,
    reconstruct_mode_cwt,
    reconstruct_mode_stft,
)
from .metrics import relative_l2_error, renyi_entropy, ridge_energy_fraction

__version__ = "0.1.0"

__all__ = [
    "ValidationError",
    "SampledSignal",
    "ComponentSpec",
    "MCSSpec",
    "synthesize_mcs",
    "component_signal",
    "true_if_tracks",
    "true_if_tracks_at",
    "add_awgn",
    "mcs_preset",
    "WindowSpec",
    "DiscreteWindow",
    "MorseWaveletSpec",
    "dpss_window",
    "window_derivative",
    "gmw_freq_response",
    "cwt_reconstruction_constant",
    "TFRPlane",
    "StftParams",
    "CwtParams",
    "stft",
    "stft_time_derivative",
    "cwt",
    "cwt_time_derivative",
    "default_scale_grid",
    "PhaseMap",
    "SSTParams",
    "SSTPlane",
    "phase_transform",
    "synchrosqueeze",
    "sst_stft",
    "sst_cwt",
    "Ridge",
    "ModeEstimate",
    "extract_ridges",
    "reconstruct_mode_stft",
    "reconstruct_mode_cwt",
    "renyi_entropy",
    "ridge_energy_fraction",
    "relative_l2_error",
]
