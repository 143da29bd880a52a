"""Shared helpers and independent oracles for the test suite."""

import functools

import numpy as np

from tfreassign import (
    SignalSpec,
    StftGrid,
    WindowSpec,
    build_window_set,
    generate,
    stft_set,
)

FS = 44100.0
IMPULSE_INDEX = 5000


def direct_dft(x, n=None):
    """O(N^2) direct sum, the oracle for every FFT-based result."""
    x = np.asarray(x, dtype=complex)
    if n is not None:
        x = np.concatenate([x, np.zeros(n - len(x))])
    N = len(x)
    m = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(m, m) / N) @ x


def setup(signal, length=1001, beta=12.0, fft_size=4096, hop=None, kind="kaiser", higher_order=True):
    ws = build_window_set(WindowSpec(kind, length, kaiser_beta=beta, sample_period=1.0 / signal.sample_rate))
    grid = StftGrid.for_signal(len(signal), signal.sample_rate, length, hop, fft_size)
    return ws, grid, stft_set(signal, ws, grid, higher_order=higher_order)


@functools.lru_cache(maxsize=None)
def sinusoid(freq=1000.0, duration=1.0, phase=0.0):
    return generate(SignalSpec("sinusoid", duration, frequency=freq, phase=phase))


@functools.lru_cache(maxsize=None)
def impulse(index=IMPULSE_INDEX, duration=1.0):
    return generate(SignalSpec("impulse", duration, index=index))


@functools.lru_cache(maxsize=None)
def chirp(f0=500.0, f1=1500.0, duration=1.0):
    return generate(SignalSpec("chirp", duration, frequency=f0, end_frequency=f1))


PLUCK_F0 = 73.4
PLUCK_ONSET = 0.1
PLUCK_DECAY = 1.0
PLUCK_PARTIALS = 10


@functools.lru_cache(maxsize=None)
def pluck():
    """Bass-like pluck: 10 harmonics of 73.4 Hz, partial k decaying as exp(-t k / 1 s)."""
    return generate(
        SignalSpec(
            "pluck",
            2.0,
            frequency=PLUCK_F0,
            partials=PLUCK_PARTIALS,
            decay=PLUCK_DECAY,
            onset=PLUCK_ONSET,
        )
    )


def inner_frames(grid):
    return ~grid.boundary


def positive_db(X):
    """Power in dB relative to the frame maximum over non-negative bins."""
    n_pos = X.shape[1] // 2 + 1
    P = np.abs(X) ** 2
    ref = P[:, :n_pos].max(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10 * np.log10(P / ref)
    db[:, n_pos:] = -np.inf
    return db


def main_lobe(mag, k):
    """Bins between the nulls on either side of local maximum ``k``."""
    lo, hi = k, k
    while lo > 0 and mag[lo - 1] < mag[lo]:
        lo -= 1
    while hi < len(mag) - 1 and mag[hi + 1] < mag[hi]:
        hi += 1
    return lo, hi


def same_bits(a, b):
    """Bit-for-bit equality of two float arrays, cheap to report on failure."""
    a, b = np.ascontiguousarray(a), np.ascontiguousarray(b)
    return a.shape == b.shape and bool(np.array_equal(a.view(np.uint64), b.view(np.uint64)))
