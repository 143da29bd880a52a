"""Despeckling reassigned spectrograms with the mixed phase derivative.

In STFT phase convention a cell dominated by a sinusoid has
``d^2 phi / dt d omega`` near -1 (all channels agree on one frequency) and a
cell dominated by an impulse has it near 0 (all frames agree on one time).
"""

import enum
from dataclasses import dataclass

import numpy as np

from .phasederiv import PhaseDerivField
from .reassign import ReassignedSpectrogram
from .spectral import StftGrid

DEFAULT_TOLERANCE = 0.2
DEFAULT_CONSENSUS_RADIUS = 2


class CellClass(enum.IntEnum):
    NEITHER = 0
    SINUSOID = 1
    IMPULSE = 2

    @classmethod
    def parse(cls, text):
        return cls[text.strip().upper()]


@dataclass(frozen=True)
class PruneMask:
    grid: StftGrid
    classes: np.ndarray  # CellClass values, (frames, bins)
    tol_sin: float
    tol_imp: float


def classify_values(mixed, tol_sin=DEFAULT_TOLERANCE, tol_imp=DEFAULT_TOLERANCE):
    """Class codes for an array of mixed-partial values. NaN is NEITHER."""
    mixed = np.asarray(mixed, dtype=float)
    for tol in (tol_sin, tol_imp):
        if not 0 < tol <= 0.5:
            raise ValueError(f"tolerance must be in (0, 0.5], got {tol}")
    res_sin = np.abs(1.0 + mixed)
    res_imp = np.abs(mixed)
    with np.errstate(invalid="ignore"):
        is_sin = res_sin <= tol_sin
        is_imp = res_imp <= tol_imp
    both = is_sin & is_imp
    out = np.full(mixed.shape, CellClass.NEITHER, dtype=np.int8)
    out[is_sin & ~is_imp] = CellClass.SINUSOID
    out[is_imp & ~is_sin] = CellClass.IMPULSE
    out[both] = np.where(res_sin[both] <= res_imp[both], CellClass.SINUSOID, CellClass.IMPULSE)
    return out


def classify(field: PhaseDerivField, tol_sin=DEFAULT_TOLERANCE, tol_imp=DEFAULT_TOLERANCE):
    mixed = np.where(field.valid, field.d2_dt_domega, np.nan)
    return PruneMask(field.grid, classify_values(mixed, tol_sin, tol_imp), tol_sin, tol_imp)


def point_classes(spec: ReassignedSpectrogram, mask: PruneMask):
    return mask.classes[spec.frame, spec.bin]


def despeckle(spec: ReassignedSpectrogram, mask: PruneMask, keep) -> ReassignedSpectrogram:
    """Keep only points whose cell class is in ``keep``."""
    if mask.grid != spec.grid:
        raise ValueError("prune mask and spectrogram are on different grids")
    keep = {CellClass(k) for k in keep}
    classes = point_classes(spec, mask)
    selected = np.isin(classes, [int(k) for k in keep])
    out = spec.select(selected)
    meta = dict(out.meta)
    meta.update(tol_sin=mask.tol_sin, tol_imp=mask.tol_imp, keep=sorted(k.name.lower() for k in keep))
    return out.with_columns(meta=meta)


@dataclass(frozen=True)
class ConsensusStats:
    frame: np.ndarray
    bin: np.ndarray
    stdev: np.ndarray  # rad/s
    radius: int


def frequency_consensus(spec: ReassignedSpectrogram, radius=DEFAULT_CONSENSUS_RADIUS):
    """Spread of reassigned frequency across neighboring channels.

    For each emitted cell, the standard deviation of ``omega_hat`` over bins
    ``k - r .. k + r`` of the same frame. Cells whose neighborhood includes
    a missing or out-of-range bin are left out.
    """
    if radius < 1:
        raise ValueError("consensus radius must be >= 1")
    dense = spec.dense("omega_hat")
    width = 2 * radius + 1
    windows = np.lib.stride_tricks.sliding_window_view(dense, width, axis=1)
    # windows[:, j] covers bins j .. j + 2r, centered on bin j + r
    frames, bins = spec.frame, spec.bin
    inside = (bins >= radius) & (bins < dense.shape[1] - radius)
    frames, bins = frames[inside], bins[inside]
    neigh = windows[frames, bins - radius]
    ok = np.all(np.isfinite(neigh), axis=1)
    return ConsensusStats(frames[ok], bins[ok], np.std(neigh[ok], axis=1), radius)
