"""Fourier machinery: DFT, per-frame transforms and the STFT set.

Two phase conventions appear here. The *moving-window* transform ``X_t(w)``
is referenced to the center of the analysis frame; the short-time Fourier
transform ``X(t, w)`` is referenced to absolute time zero. They differ by
``exp(j w t)``. Everything stored in a :class:`StftSet` uses the STFT
convention.

Windows are applied time-reversed, so a frame computes
``sum_tau x(tau) h(t - tau) exp(-j w tau)``. For the even base window this
changes nothing; for the odd auxiliary windows (``h_T``, ``h_D``) it is what
makes the reassignment formulas hold with their textbook signs.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft

from .windows import WindowSet


@dataclass(frozen=True)
class SampledSignal:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ValueError("signal samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate

    def scaled(self, factor):
        return SampledSignal(self.samples * factor, self.sample_rate)


def next_pow2(n):
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True)
class StftGrid:
    """Frame/bin layout for a signal of ``n_samples`` samples.

    The signal is extended with ``window_length // 2`` zeros on each side.
    Frame ``m`` starts at original sample ``m * hop - pad`` and its center
    lies ``(window_length - 1) / 2`` samples later, which for odd windows is
    exactly sample ``m * hop``.
    """

    n_samples: int
    sample_rate: float
    window_length: int
    hop: int
    fft_size: int

    def __post_init__(self):
        if self.hop < 1:
            raise ValueError("hop must be >= 1")
        if self.window_length < 3:
            raise ValueError("window_length must be >= 3")
        if self.fft_size < self.window_length:
            raise ValueError("fft_size must be >= window_length")
        if self.n_samples < 1:
            raise ValueError("signal must contain at least one sample")

    @classmethod
    def for_signal(cls, n_samples, sample_rate, window_length, hop=None, fft_size=None):
        if hop is None:
            hop = max(1, int(round(window_length / 8)))
        if fft_size is None:
            fft_size = next_pow2(2 * window_length)
        return cls(int(n_samples), float(sample_rate), int(window_length), int(hop), int(fft_size))

    @property
    def pad(self):
        return self.window_length // 2

    @property
    def center(self):
        return (self.window_length - 1) / 2.0

    @property
    def n_frames(self):
        padded = self.n_samples + 2 * self.pad
        if padded < self.window_length:
            return 1
        return 1 + (padded - self.window_length) // self.hop

    @property
    def frame_starts(self):
        return np.arange(self.n_frames) * self.hop - self.pad

    @property
    def frame_times(self):
        return (self.frame_starts + self.center) / self.sample_rate

    @property
    def bin_freqs(self):
        """Radian frequency of every bin, ``2 pi k fs / N_f``."""
        return 2.0 * np.pi * np.arange(self.fft_size) * self.sample_rate / self.fft_size

    @property
    def bin_spacing(self):
        return 2.0 * np.pi * self.sample_rate / self.fft_size

    @property
    def boundary(self):
        """True for frames whose window hangs over either end of the signal."""
        starts = self.frame_starts
        return (starts < 0) | (starts + self.window_length > self.n_samples)

    @property
    def n_positive(self):
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class StftSet:
    grid: StftGrid
    X: np.ndarray
    X_Th: np.ndarray
    X_Dh: np.ndarray
    X_TDh: Optional[np.ndarray] = None
    X_T2h: Optional[np.ndarray] = None
    X_D2h: Optional[np.ndarray] = None
    offset: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.n_frames, self.grid.fft_size)
        for name in ("X", "X_Th", "X_Dh", "X_TDh", "X_T2h", "X_D2h"):
            arr = getattr(self, name)
            if arr is not None and arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")

    @property
    def frame_times(self):
        return self.grid.frame_times + self.offset / self.grid.sample_rate


def dft(x):
    """Discrete Fourier transform ``X(k) = sum_m x(m) exp(-j 2 pi k m / N)``."""
    x = np.asarray(x)
    if x.size == 0:
        raise ValueError("dft of an empty sequence")
    return scipy.fft.fft(x)


def idft(X):
    return scipy.fft.ifft(np.asarray(X))


def _center_factor(fft_size, center):
    # exp(j w_k c T): moves the phase reference from frame start to frame center
    k = np.arange(fft_size)
    two_c = int(round(2 * center))
    return np.exp(2j * np.pi * ((k * two_c) % (2 * fft_size)) / (2 * fft_size))


def stft_frame(signal: SampledSignal, window, frame_start, fft_size):
    """Moving-window transform of one frame, referenced to the frame center.

    ``frame_start`` indexes the original signal; samples outside it read as
    zero, so any start is valid.
    """
    window = np.asarray(window, dtype=float)
    N = len(window)
    if fft_size < N:
        raise ValueError("fft_size must be >= window length")
    x = signal.samples
    seg = np.zeros(N)
    lo = max(frame_start, 0)
    hi = min(frame_start + N, len(x))
    if hi > lo:
        seg[lo - frame_start : hi - frame_start] = x[lo:hi]
    if not np.all(np.isfinite(seg)):
        raise ValueError("frame contains non-finite samples")
    buf = np.zeros(fft_size)
    buf[:N] = seg * window[::-1]
    return scipy.fft.fft(buf) * _center_factor(fft_size, (N - 1) / 2.0)


def mwt_to_stft_phase(frame, frame_time, bin_freqs):
    """Convert moving-window phase to STFT phase: multiply by ``exp(-j w t)``."""
    return np.asarray(frame) * np.exp(-1j * np.asarray(bin_freqs) * frame_time)


def stft_to_mwt_phase(frame, frame_time, bin_freqs):
    return np.asarray(frame) * np.exp(1j * np.asarray(bin_freqs) * frame_time)


def _segments(signal: SampledSignal, grid: StftGrid, offset=0):
    N = grid.window_length
    starts = grid.frame_starts + offset
    margin = N + abs(offset) + grid.pad
    padded = np.zeros(len(signal) + 2 * margin)
    padded[margin : margin + len(signal)] = signal.samples
    view = np.lib.stride_tricks.sliding_window_view(padded, N)
    return view[starts + margin]


def frame_phase_factor(grid: StftGrid, offset=0, sign=-1):
    """``exp(sign * j * w_k * t_m)`` for every frame center and bin.

    The product ``w_k t_m`` is reduced modulo 2 pi in integer arithmetic, so
    the factor stays exact for long signals.
    """
    Nf = grid.fft_size
    k = np.arange(Nf)
    two_c = int(round(2 * grid.center))
    two_t = (2 * (grid.frame_starts + offset) + two_c) % (2 * Nf)
    idx = np.outer(two_t, k) % (2 * Nf)
    return np.exp(sign * 1j * np.pi * idx / Nf)


def _stft_factor(grid: StftGrid, offset):
    # exp(-j w_k s T) for integer frame start s: the FFT is referenced to s
    Nf = grid.fft_size
    k = np.arange(Nf)
    s = (grid.frame_starts + offset) % Nf
    idx = np.outer(s, k) % Nf
    return np.exp(-2j * np.pi * idx / Nf)


def windowed_stft(signal: SampledSignal, grid: StftGrid, window, offset=0, workers=1):
    """STFT-convention transform of every grid frame under one window.

    ``offset`` shifts every frame by that many samples (used by the
    finite-difference estimators).
    """
    window = np.asarray(window, dtype=float)
    if len(window) != grid.window_length:
        raise ValueError("window length does not match grid")
    segs = _segments(signal, grid, offset)
    spec = scipy.fft.fft(segs * window[::-1], n=grid.fft_size, axis=1, workers=workers)
    return spec * _stft_factor(grid, offset)


def stft_set(
    signal: SampledSignal,
    windows: WindowSet,
    grid: StftGrid,
    higher_order=False,
    offset=0,
    workers=1,
) -> StftSet:
    """Transforms of ``signal`` under ``h``, ``h_T`` and ``h_D``.

    With ``higher_order`` the transforms under ``h_TD``, ``h_T2`` and
    ``h_D2`` are computed as well. All share the same segments and the
    same phase reference.
    """
    if windows.length != grid.window_length:
        raise ValueError("window set length does not match grid")
    if abs(windows.sample_period * signal.sample_rate - 1.0) > 1e-9:
        raise ValueError("window sample period does not match signal sample rate")
    segs = _segments(signal, grid, offset)
    factor = _stft_factor(grid, offset)

    def run(w):
        out = scipy.fft.fft(segs * w[::-1], n=grid.fft_size, axis=1, workers=workers)
        return out * factor

    kw = {}
    if higher_order:
        kw = dict(X_TDh=run(windows.h_TD), X_T2h=run(windows.h_T2), X_D2h=run(windows.h_D2))
    return StftSet(
        grid=grid,
        X=run(windows.h),
        X_Th=run(windows.h_T),
        X_Dh=run(windows.h_D),
        offset=offset,
        **kw,
    )
