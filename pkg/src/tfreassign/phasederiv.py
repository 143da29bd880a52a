"""Mixed and second-order partial derivatives of the STFT phase.

The transform formulas need the extra windows ``t dh/dt``, ``t^2 h`` and
``d^2h/dt^2`` (see :func:`spectral.stft_set` with ``higher_order=True``).
:func:`phase_partials_fd` is an independent finite-difference route used as
an oracle.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .reassign import (
    DEFAULT_THRESHOLD_DB,
    cross_freq,
    cross_time,
    mean_half_steps,
    power_mask,
    wrap,
)
from .spectral import SampledSignal, StftGrid, StftSet, frame_phase_factor, windowed_stft


class ConfigurationError(ValueError):
    """A transform required by a formula was not computed."""


@dataclass(frozen=True)
class PhaseDerivField:
    grid: StftGrid
    d2_dt_domega: np.ndarray
    valid: np.ndarray
    d2_domega2: Optional[np.ndarray] = None
    d2_dt2: Optional[np.ndarray] = None


def _require(stfts, *names):
    missing = [n for n in names if getattr(stfts, n) is None]
    if missing:
        raise ConfigurationError(
            f"missing transform(s) {', '.join(missing)}; compute the STFT set with higher_order=True"
        )


def _ratio(A, X, mask):
    # A X* / |X|^2 on valid cells, NaN elsewhere
    P = np.where(mask, np.abs(X) ** 2, 1.0)
    return np.where(mask, A * np.conj(X) / P, np.nan)


def mixed_partial(stfts: StftSet, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False):
    """``d^2 phi / dt d omega`` from four transforms (dimensionless).

    ``Re{X_TDh X* / |X|^2} - Re{X_Th X_Dh / X^2}``. About -1 near a
    sinusoid, about 0 near an impulse.
    """
    _require(stfts, "X_Th", "X_Dh", "X_TDh")
    X = stfts.X
    mask = power_mask(X, threshold_db, include_negative)
    safe = np.where(mask, X, 1.0)
    value = np.real(_ratio(stfts.X_TDh, X, mask)) - np.real(stfts.X_Th * stfts.X_Dh / safe**2)
    value = np.where(mask, value, np.nan)
    return PhaseDerivField(grid=stfts.grid, d2_dt_domega=value, valid=mask)


def second_partial_freq(stfts: StftSet, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False):
    """``d^2 phi / d omega^2`` in s^2; NaN outside the power gate."""
    _require(stfts, "X_Th", "X_T2h")
    mask = power_mask(stfts.X, threshold_db, include_negative)
    r = _ratio(stfts.X_Th, stfts.X, mask)
    q = _ratio(stfts.X_T2h, stfts.X, mask)
    return np.imag(r * r) - np.imag(q)


def second_partial_time(stfts: StftSet, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False):
    """``d^2 phi / dt^2`` in rad/s^2 (the local chirp rate); NaN outside the gate."""
    _require(stfts, "X_Dh", "X_D2h")
    mask = power_mask(stfts.X, threshold_db, include_negative)
    d = _ratio(stfts.X_Dh, stfts.X, mask)
    q = _ratio(stfts.X_D2h, stfts.X, mask)
    return np.imag(q) - np.imag(d * d)


def phase_derivatives(stfts: StftSet, threshold_db=DEFAULT_THRESHOLD_DB, include_negative=False):
    """All three second-order fields in one :class:`PhaseDerivField`."""
    field = mixed_partial(stfts, threshold_db, include_negative)
    return PhaseDerivField(
        grid=field.grid,
        d2_dt_domega=field.d2_dt_domega,
        valid=field.valid,
        d2_domega2=second_partial_freq(stfts, threshold_db, include_negative),
        d2_dt2=second_partial_time(stfts, threshold_db, include_negative),
    )


@dataclass(frozen=True)
class FdPartials:
    """Finite-difference phase derivatives on the grid (NaN outside ``valid``).

    ``dphi_domega`` uses the STFT phase (it equals ``-t_hat``);
    ``dphi_domega_local`` uses the frame-centered phase (``t - t_hat``).
    ``d2_dt_domega_mwt`` is the mixed partial of the frame-centered phase,
    which exceeds the STFT one by exactly one.
    """

    grid: StftGrid
    valid: np.ndarray
    dphi_dt: np.ndarray
    dphi_domega: np.ndarray
    dphi_domega_local: np.ndarray
    d2_dt_domega: np.ndarray
    d2_dt_domega_mwt: np.ndarray
    d2_domega2: np.ndarray
    d2_dt2: np.ndarray


def _angle(c):
    # NaN where the cross product vanishes, so second differences stay honest
    return np.where(np.abs(c) > 0, np.angle(c), np.nan)


def _bin_steps(X):
    """Cross products attributed to k - 1/2 and k + 1/2 (zero across DC/Nyquist)."""
    up = cross_freq(X)
    down = np.roll(up, 1, axis=1)
    nyq = X.shape[1] // 2
    down[:, 0] = 0.0
    up[:, nyq] = 0.0
    return down, up


def _mixed_fd(X_next, X_prev, T, dw):
    # time difference of each half-bin slope, then averaged onto the bin
    d_next, u_next = _bin_steps(X_next)
    d_prev, u_prev = _bin_steps(X_prev)
    lower = wrap(_angle(d_next) - _angle(d_prev))
    upper = wrap(_angle(u_next) - _angle(u_prev))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        both = np.nanmean(np.stack([lower, upper]), axis=0)
    return both / (T * dw)


def _mixed_fd_with_fallback(X, T, dw):
    """Central time difference; one-sided where a shifted frame is empty."""
    central = _mixed_fd(X[1], X[-1], 2 * T, dw)
    forward = _mixed_fd(X[1], X[0], T, dw)
    backward = _mixed_fd(X[0], X[-1], T, dw)
    out = np.where(np.isnan(central), forward, central)
    return np.where(np.isnan(out), backward, out)


def phase_partials_fd(
    signal: SampledSignal,
    window,
    grid: StftGrid,
    threshold_db=DEFAULT_THRESHOLD_DB,
    include_negative=False,
    workers=1,
) -> FdPartials:
    """Central finite differences of the spectral phase.

    Time steps are one sample (frames shifted by -1, 0, +1); frequency steps
    are one bin. Each difference is formed as the argument of a
    cross-spectral product, which is the same as differencing the phases and
    folding the result back into (-pi, pi].
    """
    window = np.asarray(window, dtype=float)
    T = 1.0 / grid.sample_rate
    dw = grid.bin_spacing
    X = {s: windowed_stft(signal, grid, window, offset=s, workers=workers) for s in (-1, 0, 1)}
    mwt = {s: X[s] * frame_phase_factor(grid, offset=s, sign=1) for s in (-1, 0, 1)}
    mask = power_mask(X[0], threshold_db, include_negative)

    back = cross_time(X[0], X[-1])
    fwd = cross_time(X[1], X[0])
    dphi_dt = mean_half_steps(back, fwd) / T
    d2_dt2 = wrap(_angle(fwd) - _angle(back)) / T**2

    down, up = _bin_steps(mwt[0])
    local = mean_half_steps(down, up) / dw
    d2_domega2 = wrap(_angle(up) - _angle(down)) / dw**2

    mixed = _mixed_fd_with_fallback(X, T, dw)
    mixed_mwt = _mixed_fd_with_fallback(mwt, T, dw)

    t = grid.frame_times[:, None]

    def gate(a):
        return np.where(mask, a, np.nan)

    return FdPartials(
        grid=grid,
        valid=mask,
        dphi_dt=gate(dphi_dt),
        dphi_domega=gate(local - t),
        dphi_domega_local=gate(local),
        d2_dt_domega=gate(mixed),
        d2_dt_domega_mwt=gate(mixed_mwt),
        d2_domega2=gate(d2_domega2),
        d2_dt2=gate(d2_dt2),
    )
