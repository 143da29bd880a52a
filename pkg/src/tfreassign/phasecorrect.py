"""Phase correction of reassigned points.

The frame-centered phase of a cell is the phase of the channel's dominant
component at the frame center, but only at the bin frequency. Two steps move
it to the reassigned coordinates: interpolate across bins to ``omega_hat``,
then advance by the phase travelled between the frame center and ``t_hat``
(assuming constant frequency over that interval).
"""

import numpy as np

from .reassign import ReassignedSpectrogram, wrap
from .spectral import StftSet, frame_phase_factor


def correct_phase_for_frequency(frame_phases, k, omega_hat, bin_spacing):
    """Phase at ``omega_hat`` by linear interpolation between bracketing bins.

    ``frame_phases`` are the frame-centered (moving-window) phases of one
    frame. The neighbor phases are unwrapped relative to bin ``k`` before
    interpolating. Returns ``(phase, fallback)``; ``fallback`` is True when
    ``omega_hat`` lies outside ``[w_{k-1}, w_{k+1}]`` and the bin's own phase
    is returned instead.
    """
    phases = np.asarray(frame_phases, dtype=float)
    pos = omega_hat / bin_spacing
    if not (k - 1 <= pos <= k + 1) or k - 1 < 0 or k + 1 >= len(phases):
        return float(wrap(phases[k])), True
    base = phases[k]
    if pos >= k:
        other = base + wrap(phases[k + 1] - base)
        frac = pos - k
    else:
        other = base + wrap(phases[k - 1] - base)
        frac = k - pos
    return float(wrap(base + frac * (other - base))), False


def correct_phase_for_time(phase, omega_hat, t_hat, nominal_time):
    """Advance ``phase`` by ``omega_hat * (t_hat - nominal_time)``, wrapped."""
    return wrap(np.asarray(phase) + np.asarray(omega_hat) * (np.asarray(t_hat) - np.asarray(nominal_time)))


def frequency_corrected_phases(mwt_phase, frames, bins, omega_hat, bin_spacing):
    """Vectorised :func:`correct_phase_for_frequency` over many points."""
    n_bins = mwt_phase.shape[1]
    pos = omega_hat / bin_spacing
    inside = (pos >= bins - 1) & (pos <= bins + 1) & (bins >= 1) & (bins + 1 < n_bins)
    base = mwt_phase[frames, bins]
    upper = pos >= bins
    nb = np.clip(np.where(upper, bins + 1, bins - 1), 0, n_bins - 1)
    other = base + wrap(mwt_phase[frames, nb] - base)
    frac = np.abs(pos - bins)
    interp = base + frac * (other - base)
    return wrap(np.where(inside, interp, base)), ~inside


def correct_phases(spec: ReassignedSpectrogram, stfts: StftSet) -> ReassignedSpectrogram:
    """Fill ``corrected_phase``: frequency interpolation, then time travel.

    ``meta['phase_fallback']`` counts points whose reassigned frequency fell
    outside the bracketing bins.
    """
    grid = spec.grid
    mwt = stfts.X * frame_phase_factor(grid, offset=stfts.offset, sign=1)
    mwt_phase = np.angle(mwt)
    freq_phase, fallback = frequency_corrected_phases(
        mwt_phase, spec.frame, spec.bin, spec.omega_hat, grid.bin_spacing
    )
    corrected = correct_phase_for_time(freq_phase, spec.omega_hat, spec.t_hat, spec.nominal_time)
    meta = dict(spec.meta)
    meta["phase_fallback"] = int(np.count_nonzero(fallback))
    return spec.with_columns(corrected_phase=corrected, meta=meta)
