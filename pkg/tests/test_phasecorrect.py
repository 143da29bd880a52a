import functools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from support import FS, same_bits
from tfreassign.analysis import AnalysisConfig, analyze
from tfreassign.phasecorrect import (
    correct_phase_for_frequency,
    correct_phase_for_time,
    frequency_corrected_phases,
)
from tfreassign.reassign import wrap
from tfreassign.signal_io import SignalSpec, generate

F0 = 1000.0
PHASE0 = 0.7
PEAK_BIN = round(F0 * 4096 / FS)


@functools.lru_cache(maxsize=None)
def sinusoid_analysis(amplitude=1.0):
    x = generate(SignalSpec("sinusoid", 1.0, amplitude=amplitude, frequency=F0, phase=PHASE0))
    return x, analyze(x, AnalysisConfig(fft_size=4096)).spectrogram


def peak_points(s):
    return np.nonzero((s.bin == PEAK_BIN) & ~s.grid.boundary[s.frame])[0]


class TestFrequencyCorrection:
    def test_bin_center_identity(self):
        phases = np.array([0.1, -2.0, 0.4, 1.3])
        out, fallback = correct_phase_for_frequency(phases, 2, 2 * 0.5, 0.5)
        assert out == 0.4 and not fallback

    def test_linear_interpolation(self):
        phases = np.array([0.0, 0.2, 0.6, 0.0])
        out, _ = correct_phase_for_frequency(phases, 1, 1.25, 1.0)
        assert out == pytest.approx(0.3)
        out, _ = correct_phase_for_frequency(phases, 2, 1.5, 1.0)
        assert out == pytest.approx(0.4)

    def test_wrap_across_pi(self):
        phases = np.array([0.0, 3.0, -3.0, 0.0])
        out, fallback = correct_phase_for_frequency(phases, 1, 1.5, 1.0)
        unwrapped = 3.0 + 0.5 * (2 * np.pi - 6.0)
        assert not fallback
        assert out == pytest.approx(wrap(unwrapped))
        for nb in (3.0, -3.0):
            assert abs(wrap(out - nb)) < np.pi

    @pytest.mark.parametrize("omega", [0.4, 3.6])
    def test_outside_bracket_falls_back(self, omega):
        phases = np.array([0.0, 0.2, 0.6, 0.9, 0.0])
        out, fallback = correct_phase_for_frequency(phases, 2, omega, 1.0)
        assert fallback and out == 0.6

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(5)
        mwt = rng.uniform(-np.pi, np.pi, (3, 16))
        frames = np.array([0, 1, 2, 2, 1])
        bins = np.array([3, 7, 0, 15, 9])
        omega = (bins + rng.uniform(-1.5, 1.5, 5)) * 0.25
        vec, flags = frequency_corrected_phases(mwt, frames, bins, omega, 0.25)
        for i in range(5):
            ref, flag = correct_phase_for_frequency(mwt[frames[i]], bins[i], omega[i], 0.25)
            assert vec[i] == pytest.approx(ref) and flags[i] == flag

    def test_sinusoid_true_phase_at_frame_center(self):
        x, s = sinusoid_analysis()
        g = s.grid
        sel = peak_points(s)
        # frequency step only: the result refers to the frame center
        mwt = np.angle(np.exp(1j * (s.corrected_phase - s.omega_hat * (s.t_hat - s.nominal_time))))
        true = 2 * np.pi * F0 * g.frame_times[s.frame[sel]] + PHASE0
        err = np.abs(wrap(mwt[sel] - true))
        assert len(sel) > 300
        assert np.max(err) < 0.05


class TestTimeCorrection:
    def test_identity(self):
        assert float(correct_phase_for_time(0.3, 2 * np.pi * 500, 0.25, 0.25)) == 0.3

    @given(st.floats(-np.pi, np.pi), st.floats(1.0, 2e4), st.floats(-0.05, 0.05))
    def test_wrapped_shift(self, phase, omega, dt):
        out = correct_phase_for_time(phase, omega, 1.0 + dt, 1.0)
        assert -np.pi < out <= np.pi
        assert abs(np.sin(out) - np.sin(phase + omega * dt)) < 1e-6

    def test_five_ms_shift(self):
        omega = 2 * np.pi * 1000
        out = correct_phase_for_time(0.0, omega, 0.505, 0.5)
        assert out == pytest.approx(wrap(omega * 0.005), abs=1e-9)

    def test_impulse_resynthesis_peak(self):
        index = 22050 + round(0.005 * FS)
        y = generate(SignalSpec("impulse", 1.0, index=index))
        s = analyze(y, AnalysisConfig(fft_size=4096)).spectrogram
        m = int(np.argmin(np.abs(s.grid.frame_times - 0.5)))
        j = np.nonzero((s.frame == m) & (s.bin == PEAK_BIN))[0][0]
        assert s.t_hat[j] - s.nominal_time[j] > 0.004
        # an oscillator cos(w (t - t_hat) + phase) peaks where its argument is 0
        period = 2 * np.pi / s.omega_hat[j]
        peak = s.t_hat[j] - s.corrected_phase[j] / s.omega_hat[j]
        peak += period * np.round((s.t_hat[j] - peak) / period)
        assert abs(peak - index / FS) < 0.05e-3

    def test_adjacent_frame_advance(self):
        _, s = sinusoid_analysis()
        sel = peak_points(s)
        assert np.all(np.diff(s.frame[sel]) == 1)
        hop_s = s.grid.hop / FS
        d = wrap(np.diff(s.corrected_phase[sel]) - s.omega_hat[sel][1:] * hop_s)
        assert np.max(np.abs(d)) < 0.02


class TestResynthesis:
    def test_cross_correlation(self):
        x, s = sinusoid_analysis()
        n_half = s.grid.window_length // 2
        worst = 1.0
        for i in peak_points(s):
            c = int(round(s.t_hat[i] * FS))
            n = np.arange(c - n_half, c + n_half + 1)
            if n[0] < 0 or n[-1] >= len(x):
                continue
            y = np.cos(s.omega_hat[i] * (n / FS - s.t_hat[i]) + s.corrected_phase[i])
            seg = x.samples[n]
            worst = min(worst, np.dot(y, seg) / np.linalg.norm(y) / np.linalg.norm(seg))
        assert worst > 0.99

    @pytest.mark.parametrize("amplitude", [0.5, 4.0])
    def test_amplitude_invariant(self, amplitude):
        _, a = sinusoid_analysis()
        _, b = sinusoid_analysis(amplitude)
        np.testing.assert_array_equal(a.frame, b.frame)
        assert same_bits(a.corrected_phase, b.corrected_phase)

    def test_fallback_counted(self):
        _, s = sinusoid_analysis()
        assert 0 <= s.meta["phase_fallback"] <= len(s)
