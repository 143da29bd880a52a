"""Reassigned time-frequency coordinates.

Two backends produce the same :class:`ReassignedSpectrogram`:

* ``transform`` evaluates the group delay and channelized instantaneous
  frequency from three transforms (``h``, ``t h`` and ``dh/dt``);
* ``fd`` differences the spectral phase between frames one sample apart and
  between adjacent bins, using cross-spectral products so that the phase
  differences come out unwrapped.
"""

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .spectral import SampledSignal, StftGrid, StftSet, frame_phase_factor, windowed_stft

DEFAULT_THRESHOLD_DB = -70.0


class Backend(enum.Enum):
    TRANSFORM = "transform"
    FINITE_DIFFERENCE = "fd"


class ReassignedPoint(NamedTuple):
    nominal_time: float
    nominal_freq: float
    t_hat: float
    omega_hat: float
    magnitude: float
    power_db: float
    phase: float
    corrected_phase: float
    mixed_partial: float


_POINT_FIELDS = (
    "frame",
    "bin",
    "nominal_time",
    "nominal_freq",
    "t_hat",
    "omega_hat",
    "magnitude",
    "power_db",
    "phase",
    "corrected_phase",
    "mixed_partial",
)


@dataclass(frozen=True)
class ReassignedSpectrogram:
    """Reassigned points stored column-wise, ordered by frame then bin.

    ``phase`` is the raw STFT phase of the cell. ``corrected_phase`` and
    ``mixed_partial`` are NaN until filled in by the phase-correction and
    phase-derivative steps.
    """

    grid: StftGrid
    frame: np.ndarray
    bin: np.ndarray
    nominal_time: np.ndarray
    nominal_freq: np.ndarray
    t_hat: np.ndarray
    omega_hat: np.ndarray
    magnitude: np.ndarray
    power_db: np.ndarray
    phase: np.ndarray
    corrected_phase: np.ndarray
    mixed_partial: np.ndarray
    threshold_db: float
    backend: Backend
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frame)

    def points(self):
        for i in range(len(self)):
            yield ReassignedPoint(
                float(self.nominal_time[i]),
                float(self.nominal_freq[i]),
                float(self.t_hat[i]),
                float(self.omega_hat[i]),
                float(self.magnitude[i]),
                float(self.power_db[i]),
                float(self.phase[i]),
                float(self.corrected_phase[i]),
                float(self.mixed_partial[i]),
            )

    def select(self, keep):
        """Subset of points where boolean array ``keep`` is True."""
        keep = np.asarray(keep, dtype=bool)
        cols = {name: getattr(self, name)[keep] for name in _POINT_FIELDS}
        return replace(self, **cols)

    def with_columns(self, **cols):
        return replace(self, **cols)

    def dense(self, name, fill=np.nan):
        """Scatter a point column back onto the (frames, bins) grid."""
        out = np.full((self.grid.n_frames, self.grid.fft_size), fill, dtype=float)
        out[self.frame, self.bin] = getattr(self, name)
        return out


def power_mask(X, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False):
    """Cells whose power is within ``threshold_db`` of their frame's maximum.

    Frames with zero (or non-finite) maximum emit nothing.
    """
    if threshold_db > 0:
        raise ValueError("threshold_db must be <= 0")
    P = np.abs(X) ** 2
    n_pos = X.shape[1] // 2 + 1
    if not include_negative:
        P = P.copy()
        P[:, n_pos:] = 0.0
    frame_max = P.max(axis=1, keepdims=True)
    ok = np.isfinite(frame_max) & (frame_max > 0)
    gate = frame_max * 10.0 ** (threshold_db / 10.0)
    return ok & (P > 0) & (P >= gate)


def _frame_power_db(X, mask, include_negative):
    P = np.abs(X) ** 2
    n_pos = X.shape[1] // 2 + 1
    ref = P if include_negative else P[:, :n_pos]
    frame_max = ref.max(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mask, 10.0 * np.log10(P / frame_max), -np.inf)


def _build(grid, X, mask, t_hat, omega_hat, threshold_db, backend, include_negative):
    frames, bins = np.nonzero(mask)
    db = _frame_power_db(X, mask, include_negative)
    n = len(frames)
    return ReassignedSpectrogram(
        grid=grid,
        frame=frames,
        bin=bins,
        nominal_time=grid.frame_times[frames],
        nominal_freq=grid.bin_freqs[bins],
        t_hat=t_hat[frames, bins],
        omega_hat=omega_hat[frames, bins],
        magnitude=np.abs(X[frames, bins]),
        power_db=db[frames, bins],
        phase=np.angle(X[frames, bins]),
        corrected_phase=np.full(n, np.nan),
        mixed_partial=np.full(n, np.nan),
        threshold_db=threshold_db,
        backend=backend,
    )


def reassignment_fields(stfts: StftSet, mask):
    """Dense ``t_hat`` and ``omega_hat`` arrays (NaN outside ``mask``)."""
    X = stfts.X
    P = np.where(mask, np.abs(X) ** 2, 1.0)
    conj = np.conj(X)
    t = stfts.frame_times[:, None]
    w = stfts.grid.bin_freqs[None, :]
    t_hat = t - np.real(stfts.X_Th * conj) / P
    omega_hat = w + np.imag(stfts.X_Dh * conj) / P
    t_hat = np.where(mask, t_hat, np.nan)
    omega_hat = np.where(mask, omega_hat, np.nan)
    return t_hat, omega_hat


def reassign_transform(
    stfts: StftSet, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False
) -> ReassignedSpectrogram:
    """Reassign every above-threshold cell from three aligned transforms.

    ``t_hat = t - Re{X_Th X* / |X|^2}`` and
    ``omega_hat = w + Im{X_Dh X* / |X|^2}``.
    """
    if stfts.X_Th is None or stfts.X_Dh is None:
        raise ValueError("transform reassignment needs X_Th and X_Dh")
    mask = power_mask(stfts.X, threshold_db, include_negative)
    t_hat, omega_hat = reassignment_fields(stfts, mask)
    return _build(
        stfts.grid, stfts.X, mask, t_hat, omega_hat, threshold_db, Backend.TRANSFORM, include_negative
    )


def cross_time(X_later, X_earlier):
    """Cross-spectral surface between two frames: ``X(t+dt) X*(t)``."""
    return X_later * np.conj(X_earlier)


def cross_freq(X_mwt):
    """Cross-spectral surface between adjacent bins, attributed to k + 1/2.

    Column ``k`` holds ``X(k+1) X*(k)``; the last column wraps to bin 0.
    """
    return np.roll(X_mwt, -1, axis=1) * np.conj(X_mwt)


def wrap(phase):
    """Wrap to (-pi, pi]. Values already in range pass through unchanged."""
    phase = np.asarray(phase, dtype=float)
    out = np.mod(phase + np.pi, 2.0 * np.pi) - np.pi
    out = np.where(out == -np.pi, np.pi, out)
    return np.where((phase > -np.pi) & (phase <= np.pi), phase, out)


def mean_half_steps(before, after):
    """Mean phase difference from the cross products on either side of a cell.

    A product that is exactly zero (a neighbor frame or bin carries no
    energy) drops out and the other side is used alone.
    """
    a = np.abs(before) > 0
    b = np.abs(after) > 0
    pa = np.where(a, np.angle(before), 0.0)
    pb = np.where(b, np.angle(after), 0.0)
    count = a.astype(int) + b.astype(int)
    return np.where(count > 0, (pa + pb) / np.maximum(count, 1), 0.0)


def fd_phase_slopes(signal: SampledSignal, window, grid: StftGrid, workers=1):
    """Finite-difference phase slopes on the grid.

    Returns ``X`` (STFT convention), the time slope ``d phi / dt`` in rad/s
    and the local frequency slope ``d phi_t / d omega`` of the frame-centered
    phase in seconds (equal to ``t - t_hat``). Each slope is the mean of the
    two half-step differences on either side of the cell.
    """
    T = 1.0 / grid.sample_rate
    X_prev = windowed_stft(signal, grid, window, offset=-1, workers=workers)
    X = windowed_stft(signal, grid, window, offset=0, workers=workers)
    X_next = windowed_stft(signal, grid, window, offset=1, workers=workers)
    dphi_dt = mean_half_steps(cross_time(X, X_prev), cross_time(X_next, X)) / T

    X_mwt = X * frame_phase_factor(grid, sign=1)
    up = cross_freq(X_mwt)  # k + 1/2
    down = np.roll(up, 1, axis=1)  # k - 1/2
    # one-sided at DC and Nyquist, where the neighbor across is a mirror image
    nyq = grid.fft_size // 2
    down[:, 0] = 0.0
    up[:, nyq] = 0.0
    dphi_dw_local = mean_half_steps(down, up) / grid.bin_spacing
    return X, dphi_dt, dphi_dw_local


def reassign_finite_difference(
    signal: SampledSignal,
    window,
    grid: StftGrid,
    threshold_db=DEFAULT_THRESHOLD_DB,
    include_negative=False,
    workers=1,
) -> ReassignedSpectrogram:
    """Reassign cells from finite differences of the spectral phase.

    ``omega_hat = w + d phi/dt`` with the time slope taken between frames one
    sample apart; ``t_hat = t - d phi_t/d omega`` with the frequency slope
    taken between adjacent bins of the frame-centered transform.
    """
    window = np.asarray(window, dtype=float)
    X, dphi_dt, dphi_dw_local = fd_phase_slopes(signal, window, grid, workers)
    mask = power_mask(X, threshold_db, include_negative)
    t = grid.frame_times[:, None]
    t_hat = np.where(mask, t - dphi_dw_local, np.nan)
    omega_hat = np.where(mask, grid.bin_freqs[None, :] + dphi_dt, np.nan)
    return _build(
        grid, X, mask, t_hat, omega_hat, threshold_db, Backend.FINITE_DIFFERENCE, include_negative
    )


def parabolic_peak(mag_frame, k_peak, bin_spacing):
    """Peak frequency from a parabola through log-magnitudes at k-1, k, k+1.

    Returns radians per second given ``bin_spacing`` in rad/s.
    """
    mag = np.asarray(mag_frame, dtype=float)
    k = int(k_peak)
    if k < 1 or k >= len(mag) - 1:
        raise ValueError("k_peak needs a neighbor on each side")
    a, b, c = mag[k - 1], mag[k], mag[k + 1]
    if a <= 0 or c <= 0:
        raise ValueError("neighbors of k_peak must be positive")
    if b < a or b < c or (b == a and b == c):
        raise ValueError(f"bin {k} is not a local maximum")
    la, lb, lc = np.log(a), np.log(b), np.log(c)
    denom = la - 2.0 * lb + lc
    offset = 0.0 if denom == 0 else 0.5 * (la - lc) / denom
    return (k + offset) * bin_spacing
