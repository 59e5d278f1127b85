import numpy as np
import pytest

from ssqlab import (
    ComponentSpec,
    MCSSpec,
    StftParams,
    WindowSpec,
    mcs_preset,
    synthesize_mcs,
)


@pytest.fixture(scope="session")
def preset_spec():
    return mcs_preset("paper-3comp")


@pytest.fixture(scope="session")
def preset_signal(preset_spec):
    return synthesize_mcs(preset_spec)


@pytest.fixture(scope="session")
def win32_spec():
    return WindowSpec(32, 4.0)


@pytest.fixture(scope="session")
def hop1_stft_params(win32_spec):
    return StftParams(window=win32_spec, hop_samples=1)


def tone_spec(freq_hz: float, duration_s: float = 10.0, fs: float = 205.0) -> MCSSpec:
    return MCSSpec(
        components=(ComponentSpec(phase_poly=(0.0, freq_hz)),),
        duration_s=duration_s,
        sample_rate_hz=fs,
    )


@pytest.fixture(scope="session")
def tone_50hz():
    return synthesize_mcs(tone_spec(50.0))


def interior(n: int, fraction: float = 0.8) -> slice:
    skip = int(round(n * (1 - fraction) / 2))
    return slice(skip, n - skip)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
