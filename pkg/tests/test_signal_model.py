import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from ssqlab import (
    ComponentSpec,
    MCSSpec,
    SampledSignal,
    ValidationError,
    add_awgn,
    synthesize_mcs,
    true_if_tracks,
)
from conftest import tone_spec


class TestSampledSignal:
    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            SampledSignal(np.array([]), 205.0)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValidationError):
            SampledSignal(np.ones(4), 0.0)

    def test_real_flag_rejects_imaginary_content(self):
        with pytest.raises(ValidationError):
            SampledSignal(np.array([1 + 1j, 2.0]), 10.0, is_real=True)

    def test_real_flag_inferred_from_dtype(self):
        assert SampledSignal(np.ones(4), 10.0).is_real
        assert not SampledSignal(np.ones(4, complex), 10.0).is_real

    def test_times(self):
        s = SampledSignal(np.ones(4), 2.0, start_time_s=1.0)
        assert np.allclose(s.times(), [1.0, 1.5, 2.0, 2.5])


class TestSynthesize:
    def test_pure_tone_is_constant_modulus(self):
        x = synthesize_mcs(tone_spec(50.0))
        assert len(x) == 2050
        assert np.max(np.abs(np.abs(x.samples) - 1.0)) < 1e-12

    def test_preset_shape_and_if_range(self, preset_spec, preset_signal):
        assert len(preset_signal) == 2050
        tracks = true_if_tracks(preset_spec)
        assert tracks.shape == (3, 2050)
        assert np.all(tracks > 0)
        assert np.all(tracks < 205.0 / 2)

    def test_nyquist_violation_reports_component_and_time(self):
        spec = MCSSpec(
            components=(
                ComponentSpec(phase_poly=(0.0, 50.0)),
                ComponentSpec(phase_poly=(0.0, 110.0)),
            ),
            duration_s=1.0,
            sample_rate_hz=205.0,
        )
        with pytest.raises(ValidationError, match="component 1.*110.*102.5"):
            synthesize_mcs(spec)

    def test_negative_amplitude_rejected(self):
        spec = MCSSpec(
            components=(ComponentSpec(amplitude_poly=(1.0, -0.5), phase_poly=(0.0, 20.0)),),
            duration_s=10.0,
            sample_rate_hz=205.0,
        )
        with pytest.raises(ValidationError, match="amplitude"):
            synthesize_mcs(spec)

    def test_empty_components_rejected(self):
        with pytest.raises(ValidationError):
            MCSSpec(components=(), duration_s=1.0, sample_rate_hz=205.0)

    def test_two_component_linearity_is_exact(self):
        c1 = ComponentSpec(phase_poly=(0.0, 20.0, 0.3))
        c2 = ComponentSpec(amplitude_poly=(0.5,), phase_poly=(0.1, 60.0))
        both = synthesize_mcs(MCSSpec((c1, c2), 2.0, 205.0))
        one = synthesize_mcs(MCSSpec((c1,), 2.0, 205.0))
        two = synthesize_mcs(MCSSpec((c2,), 2.0, 205.0))
        assert np.array_equal(both.samples, one.samples + two.samples)

    @settings(max_examples=25, deadline=None)
    @given(
        f1=st.floats(5.0, 40.0),
        f2=st.floats(45.0, 95.0),
        chirp=st.floats(-0.4, 0.4),
    )
    def test_linearity_property(self, f1, f2, chirp):
        c1 = ComponentSpec(phase_poly=(0.0, f1, chirp))
        c2 = ComponentSpec(phase_poly=(0.0, f2))
        both = synthesize_mcs(MCSSpec((c1, c2), 1.0, 205.0))
        one = synthesize_mcs(MCSSpec((c1,), 1.0, 205.0))
        two = synthesize_mcs(MCSSpec((c2,), 1.0, 205.0))
        assert np.array_equal(both.samples, one.samples + two.samples)


class TestTrueIfTracks:
    def test_linear_phase_gives_constant(self):
        tracks = true_if_tracks(tone_spec(50.0))
        assert np.all(tracks == 50.0)

    def test_polynomial_derivative(self):
        spec = MCSSpec(
            components=(ComponentSpec(phase_poly=(0.0, 10.0, 2.0)),),
            duration_s=10.0,
            sample_rate_hz=205.0,
        )
        t = spec.sample_times()
        assert np.allclose(true_if_tracks(spec)[0], 10.0 + 4.0 * t, rtol=0, atol=1e-12)

    @pytest.mark.parametrize(
        "phase_poly",
        [
            (0.0, 10.0, 0.05, 0.005),
            (0.3, 5.0, 0.2, 0.01, 0.001),  # degree 4
            (0.0, 45.0, 0.0, 0.04),
        ],
    )
    def test_matches_centered_finite_differences(self, phase_poly):
        spec = MCSSpec(
            components=(ComponentSpec(phase_poly=phase_poly),),
            duration_s=10.0,
            sample_rate_hz=205.0,
        )
        track = true_if_tracks(spec)[0]
        t = spec.sample_times()
        phi = ComponentSpec(phase_poly=phase_poly).phase_cycles(t)
        dt = 1.0 / spec.sample_rate_hz
        fd = (phi[2:] - phi[:-2]) / (2 * dt)
        rel = np.abs(track[1:-1] - fd) / np.abs(track[1:-1])
        assert rel.max() < 1e-6

    def test_preset_tracks_match_finite_differences(self, preset_spec):
        tracks = true_if_tracks(preset_spec)
        t = preset_spec.sample_times()
        dt = 1.0 / preset_spec.sample_rate_hz
        for comp, track in zip(preset_spec.components, tracks):
            phi = comp.phase_cycles(t)
            fd = (phi[2:] - phi[:-2]) / (2 * dt)
            assert np.max(np.abs(track[1:-1] - fd) / np.abs(track[1:-1])) < 1e-6


class TestAddAwgn:
    def test_infinite_snr_returns_input(self, tone_50hz):
        out = add_awgn(tone_50hz, np.inf, seed=3)
        assert out is tone_50hz

    def test_snr_zero_noise_power(self):
        x = synthesize_mcs(tone_spec(20.0, duration_s=600.0, fs=205.0))  # 123000 samples
        noisy = add_awgn(x, 0.0, seed=11)
        p_sig = np.mean(np.abs(x.samples) ** 2)
        p_noise = np.mean(np.abs(noisy.samples - x.samples) ** 2)
        assert abs(p_noise / p_sig - 1.0) < 0.01

    def test_same_seed_bit_identical(self, tone_50hz):
        a = add_awgn(tone_50hz, 10.0, seed=7)
        b = add_awgn(tone_50hz, 10.0, seed=7)
        assert np.array_equal(a.samples, b.samples)

    def test_different_seed_differs(self, tone_50hz):
        a = add_awgn(tone_50hz, 10.0, seed=7)
        b = add_awgn(tone_50hz, 10.0, seed=8)
        assert not np.array_equal(a.samples, b.samples)

    def test_real_signal_stays_real(self):
        x = SampledSignal(np.sin(np.linspace(0, 20, 500)), 50.0)
        noisy = add_awgn(x, 5.0, seed=0)
        assert noisy.is_real
        assert not np.iscomplexobj(noisy.samples)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), snr=st.floats(-5.0, 40.0))
    def test_determinism_property(self, seed, snr):
        x = SampledSignal(np.ones(256, complex), 100.0)
        a = add_awgn(x, snr, seed)
        b = add_awgn(x, snr, seed)
        assert np.array_equal(a.samples, b.samples)
