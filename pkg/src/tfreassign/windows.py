"""Analysis windows and the auxiliary windows used for reassignment.

Every array in a :class:`WindowSet` is indexed ``0 .. N-1`` with the time
origin at the window center ``(N - 1) / 2``, so sample ``n`` sits at time
``(n - center) * T``.
"""

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np


class WindowKind(enum.Enum):
    KAISER = "kaiser"
    HANN = "hann"


@dataclass(frozen=True)
class WindowSpec:
    kind: WindowKind
    length: int
    kaiser_beta: float = 12.0
    sample_period: float = 1.0 / 44100.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", WindowKind(self.kind.lower()))
        if int(self.length) != self.length or self.length < 3:
            raise ValueError(f"window length must be an integer >= 3, got {self.length}")
        object.__setattr__(self, "length", int(self.length))
        if not self.kaiser_beta >= 0:
            raise ValueError(f"kaiser_beta must be >= 0, got {self.kaiser_beta}")
        if not self.sample_period > 0:
            raise ValueError(f"sample_period must be > 0, got {self.sample_period}")


@dataclass(frozen=True)
class WindowSet:
    """The base window ``h`` and its five derived windows.

    ``h_T = t h``, ``h_D = dh/dt``, ``h_TD = t dh/dt``, ``h_T2 = t^2 h`` and
    ``h_D2 = d^2h/dt^2``, with ``t`` measured in seconds from the center.
    """

    h: np.ndarray
    h_T: np.ndarray
    h_D: np.ndarray
    h_TD: np.ndarray
    h_T2: np.ndarray
    h_D2: np.ndarray
    sample_period: float

    @property
    def length(self):
        return len(self.h)

    @property
    def center_index(self):
        return (len(self.h) - 1) / 2.0

    def ramp(self):
        return time_ramp(len(self.h), self.sample_period)

    def arrays(self):
        """Return the six windows in canonical order as a dict."""
        return {
            "h": self.h,
            "h_T": self.h_T,
            "h_D": self.h_D,
            "h_TD": self.h_TD,
            "h_T2": self.h_T2,
            "h_D2": self.h_D2,
        }


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Sums ``((x/2)^m / m!)^2`` until a term drops below 1e-16 of the running
    sum. Accepts scalars or arrays of non-negative reals.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise ValueError("bessel_i0 requires finite, non-negative input")
    half_sq = (x / 2.0) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    m = 0
    while True:
        m += 1
        term = term * half_sq / (m * m)
        total = total + term
        if np.all(term <= 1e-16 * total):
            break
    if total.ndim == 0:
        return float(total)
    return total


def make_window(spec: WindowSpec) -> np.ndarray:
    N = spec.length
    n = np.arange(N, dtype=float)
    if spec.kind is WindowKind.HANN:
        h = 0.5 * (1.0 - np.cos(2.0 * np.pi * n / (N - 1)))
        # cos rounding leaves ~1e-17 at the ends and asymmetry between halves
        h = 0.5 * (h + h[::-1])
        return h
    arg = 2.0 * n / (N - 1) - 1.0
    r = np.sqrt(np.clip(1.0 - arg * arg, 0.0, None))
    h = bessel_i0(spec.kaiser_beta * r) / bessel_i0(spec.kaiser_beta)
    return 0.5 * (h + h[::-1])


def time_ramp(length, sample_period):
    """Seconds relative to the window center for each sample index."""
    return (np.arange(length, dtype=float) - (length - 1) / 2.0) * sample_period


def derivative_window(h, sample_period, symmetric=None):
    """Time derivative of a window via the Fourier derivative theorem.

    The window is transformed, multiplied by ``j*omega`` with *signed*
    frequencies in rad/s, and transformed back. The Nyquist bin is dropped
    for even transform lengths.

    Parameters
    ----------
    h : array_like
        Window samples.
    sample_period : float
        Seconds per sample.
    symmetric : bool, optional
        A symmetric window of length N repeats its first sample at the end,
        so its natural period is N - 1 samples. When True the derivative is
        taken over that period and the last sample is copied from the first.
        When False the whole length N is treated as one period. The default
        detects the repeated endpoint (``h[0] == h[-1]``).

    Returns
    -------
    ndarray
        ``dh/dt`` in amplitude per second.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or len(h) < 2:
        raise ValueError("window must be a 1-D array with at least 2 samples")
    if not np.all(np.isfinite(h)):
        raise ValueError("window contains non-finite samples")
    peak = np.max(np.abs(h))
    if peak > 0 and (abs(h[0]) > 1e-3 * peak or abs(h[-1]) > 1e-3 * peak):
        warnings.warn(
            "window does not taper to zero; FFT derivative will be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    if symmetric is None:
        symmetric = len(h) > 2 and h[0] == h[-1]
    N = len(h)
    period = N - 1 if symmetric else N
    seg = h[:period]
    H = np.fft.fft(seg)
    omega = 2.0 * np.pi * np.fft.fftfreq(period, d=sample_period)
    if period % 2 == 0:
        omega[period // 2] = 0.0
    d = np.fft.ifft(1j * omega * H)
    scale = np.max(np.abs(d.real))
    if scale > 0 and np.max(np.abs(d.imag)) > 1e-9 * scale:
        raise ArithmeticError("derivative window has a non-negligible imaginary part")
    out = d.real
    if symmetric:
        out = np.concatenate([out, out[:1]])
    return out


def build_window_set(spec: WindowSpec) -> WindowSet:
    h = make_window(spec)
    T = spec.sample_period
    ramp = time_ramp(spec.length, T)
    h_D = derivative_window(h, T, symmetric=True)
    h_D2 = derivative_window(h_D, T, symmetric=True)
    return WindowSet(
        h=h,
        h_T=ramp * h,
        h_D=h_D,
        h_TD=ramp * h_D,
        h_T2=ramp * ramp * h,
        h_D2=h_D2,
        sample_period=T,
    )


def samples_for_duration(duration_s, sample_rate):
    """Odd window length for a duration: twice the rounded half-length, plus one."""
    if not duration_s > 0:
        raise ValueError("window duration must be positive")
    return 2 * int(math.floor(duration_s * sample_rate / 2.0 + 0.5)) + 1
