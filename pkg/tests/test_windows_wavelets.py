import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import eigh
from scipy.special import gammaln

from ssqlab import (
    DiscreteWindow,
    MorseWaveletSpec,
    ValidationError,
    WindowSpec,
    cwt_reconstruction_constant,
    dpss_window,
    gmw_freq_response,
    window_derivative,
)
from ssqlab.windows_wavelets import _spectral_derivative

FS = 205.0


def sinc_kernel_dpss(length: int, nw: float):
    """Independent oracle: top eigenvector of the dense sinc concentration kernel."""
    W = nw / length
    i = np.arange(length)
    diff = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.sin(2 * np.pi * W * diff) / (np.pi * diff)
    K[np.diag_indices(length)] = 2 * W
    vals, vecs = eigh(K)
    taps = vecs[:, -1]
    if taps[length // 2] < 0:
        taps = -taps
    return taps / np.linalg.norm(taps), float(vals[-1])


class TestDpss:
    def test_matches_dense_kernel_oracle(self):
        w = dpss_window(WindowSpec(32, 4.0))
        oracle, eigval = sinc_kernel_dpss(32, 4.0)
        assert np.max(np.abs(w.taps - oracle)) < 1e-8
        assert eigval > 0.99999

    @pytest.mark.parametrize("length,nw", [(16, 3.0), (32, 4.0), (63, 3.5), (128, 5.0)])
    def test_symmetry_and_normalization(self, length, nw):
        w = dpss_window(WindowSpec(length, nw))
        assert np.max(np.abs(w.taps - w.taps[::-1])) < 1e-12
        assert abs(np.sum(w.taps**2) - 1.0) <= 1e-12
        assert w.center_tap > 0

    @pytest.mark.parametrize("length", [16, 32, 64, 256])
    @pytest.mark.parametrize("nw", [3.0, 4.0, 6.0])
    def test_concentration_against_oracle(self, length, nw):
        if nw >= length / 2:
            pytest.skip("invalid NW for this length")
        w = dpss_window(WindowSpec(length, nw))
        _, eigval = sinc_kernel_dpss(length, nw)
        assert eigval >= 0.999
        # Rayleigh quotient of our taps in the oracle kernel matches too.
        W = nw / length
        i = np.arange(length)
        diff = i[:, None] - i[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            K = np.sin(2 * np.pi * W * diff) / (np.pi * diff)
        K[np.diag_indices(length)] = 2 * W
        assert w.taps @ K @ w.taps >= 0.999

    def test_rejects_bad_specs(self):
        with pytest.raises(ValidationError):
            WindowSpec(1, 0.4)
        with pytest.raises(ValidationError):
            WindowSpec(32, 16.0)
        with pytest.raises(ValidationError):
            WindowSpec(32, 0.0)
        with pytest.raises(ValidationError):
            WindowSpec(32, 4.0, kind="hann")


class TestWindowDerivative:
    def test_constant_window_has_zero_derivative(self):
        taps = np.ones(32) / np.sqrt(32)
        rect = DiscreteWindow(taps, _spectral_derivative(taps), 1.0)
        d = window_derivative(rect, FS)
        assert np.max(np.abs(d)) <= 1e-6 * FS

    def test_antisymmetry(self):
        w = dpss_window(WindowSpec(32, 4.0))
        d = window_derivative(w, FS)
        assert np.max(np.abs(d + d[::-1])) < 1e-8

    def test_matches_finite_difference_oracle(self):
        # Sixth-order centered stencil keeps the oracle's own truncation
        # error well below the tolerance being checked.
        w = dpss_window(WindowSpec(32, 4.0))
        d = window_derivative(w, FS)
        stencil = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
        fd = np.convolve(w.taps, stencil[::-1], mode="same") * FS
        inner = slice(3, len(w.taps) - 3)
        rel = np.max(np.abs(d[inner] - fd[inner])) / np.max(np.abs(d))
        assert rel < 1e-3

    def test_derivative_sums_to_zero(self):
        w = dpss_window(WindowSpec(32, 4.0))
        d = window_derivative(w, FS)
        assert abs(np.sum(d)) <= 1e-6 * FS * np.max(np.abs(w.taps))

    def test_rejects_bad_rate(self):
        w = dpss_window(WindowSpec(32, 4.0))
        with pytest.raises(ValidationError):
            window_derivative(w, 0.0)


class TestMorseWavelet:
    def test_zero_at_origin_and_below(self):
        spec = MorseWaveletSpec()
        assert gmw_freq_response(spec, 0.0) == 0.0
        assert gmw_freq_response(spec, -1.0) == 0.0

    def test_peak_location_matches_numeric_argmax(self):
        spec = MorseWaveletSpec(3.0, 60.0)
        expected = (60.0 / 3.0) ** (1.0 / 3.0)
        assert abs(spec.peak_omega - expected) < 1e-12
        grid = np.linspace(1e-3, 4 * expected, 200001)
        vals = gmw_freq_response(spec, grid)
        assert abs(grid[np.argmax(vals)] - expected) < 2 * (grid[1] - grid[0])

    def test_peak_value_exactly_two(self):
        spec = MorseWaveletSpec(3.0, 60.0)
        assert gmw_freq_response(spec, spec.peak_omega) == 2.0

    def test_unimodal(self):
        # Grid stops where the response is still representable in float64;
        # past that the true strict decrease underflows to a flat zero.
        spec = MorseWaveletSpec(3.0, 60.0)
        grid = np.linspace(1e-4, 2.2 * spec.peak_omega, 10000)
        vals = gmw_freq_response(spec, grid)
        assert np.all(vals > 0)
        peak = int(np.argmax(vals))
        assert np.all(np.diff(vals[: peak + 1]) > 0)
        assert np.all(np.diff(vals[peak:]) < 0)

    def test_rejects_nonpositive_params(self):
        with pytest.raises(ValidationError):
            MorseWaveletSpec(0.0, 60.0)
        with pytest.raises(ValidationError):
            MorseWaveletSpec(3.0, -1.0)


class TestReconstructionConstant:
    def test_positive_and_finite(self):
        c = cwt_reconstruction_constant(MorseWaveletSpec(3.0, 60.0))
        assert np.isfinite(c) and c > 0

    def test_two_resolution_quadrature_oracle(self):
        # Composite-Simpson oracle on a log grid at two refinements.
        spec = MorseWaveletSpec(3.0, 60.0)

        def simpson_log(n):
            u = np.linspace(np.log(spec.peak_omega) - 12, np.log(spec.peak_omega) + 4, n)
            w = np.exp(u)
            f = gmw_freq_response(spec, w)  # integrand (psi/w) * dw = psi d(log w)
            from scipy.integrate import simpson

            return simpson(f, x=u)

        coarse = simpson_log(2001)
        fine = simpson_log(4001)
        assert abs(fine - coarse) / abs(fine) < 1e-9
        c = cwt_reconstruction_constant(spec)
        assert abs(c - fine) / fine < 1e-9

    def test_closed_form_gamma_identity(self):
        # For this family the integral reduces to a Gamma-function expression;
        # an independent closed-form check on top of the quadrature oracle.
        g, b = 3.0, 60.0
        r = b / g
        expected = (2.0 / g) * np.exp(r + gammaln(r) - r * np.log(r))
        c = cwt_reconstruction_constant(MorseWaveletSpec(g, b))
        assert abs(c - expected) / expected < 1e-10

    def test_amplitude_linearity(self):
        spec = MorseWaveletSpec(3.0, 60.0)
        wp = spec.peak_omega
        doubled, _ = quad(
            lambda w: 2.0 * gmw_freq_response(spec, w) / w,
            0, 8 * wp, points=[wp], limit=200,
        )
        tail, _ = quad(lambda w: 2.0 * gmw_freq_response(spec, w) / w, 8 * wp, np.inf)
        single = cwt_reconstruction_constant(spec)
        assert abs((doubled + tail) - 2.0 * single) / (2.0 * single) < 1e-9

    def test_beta_changes_constant(self):
        a = cwt_reconstruction_constant(MorseWaveletSpec(3.0, 60.0))
        b = cwt_reconstruction_constant(MorseWaveletSpec(3.0, 120.0))
        assert abs(a - b) / a > 1e-3
