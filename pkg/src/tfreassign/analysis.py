"""One-call analysis: window, grid, reassignment, mixed partial, phase correction."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .phasecorrect import correct_phases
from .phasederiv import mixed_partial
from .prune import DEFAULT_TOLERANCE, PruneMask, classify
from .reassign import (
    DEFAULT_THRESHOLD_DB,
    Backend,
    ReassignedSpectrogram,
    reassign_finite_difference,
    reassign_transform,
)
from .spectral import SampledSignal, StftGrid, stft_set
from .windows import WindowSpec, build_window_set, samples_for_duration


@dataclass(frozen=True)
class AnalysisConfig:
    window: str = "kaiser"
    length: Optional[int] = 1001
    length_ms: Optional[float] = None  # overrides length when given
    beta: float = 12.0
    hop: Optional[int] = None
    fft_size: Optional[int] = None
    threshold_db: float = DEFAULT_THRESHOLD_DB
    backend: Backend = Backend.TRANSFORM
    tol_sin: float = DEFAULT_TOLERANCE
    tol_imp: float = DEFAULT_TOLERANCE
    workers: int = 1

    def window_length(self, sample_rate):
        if self.length_ms is not None:
            return samples_for_duration(self.length_ms / 1000.0, sample_rate)
        return int(self.length)


@dataclass(frozen=True)
class Analysis:
    spectrogram: ReassignedSpectrogram
    mask: PruneMask
    classes: np.ndarray  # per point, CellClass values


def analyze(signal: SampledSignal, config: AnalysisConfig = AnalysisConfig()) -> Analysis:
    """Reassign ``signal`` and annotate every point with its mixed partial,
    corrected phase and cell class.

    The mixed partial always comes from the transform formulas; ``backend``
    only selects how ``t_hat`` and ``omega_hat`` are computed.
    """
    N = config.window_length(signal.sample_rate)
    wspec = WindowSpec(config.window, N, kaiser_beta=config.beta, sample_period=1.0 / signal.sample_rate)
    windows = build_window_set(wspec)
    grid = StftGrid.for_signal(len(signal), signal.sample_rate, N, config.hop, config.fft_size)
    stfts = stft_set(signal, windows, grid, higher_order=True, workers=config.workers)
    backend = Backend(config.backend)
    if backend is Backend.TRANSFORM:
        spec = reassign_transform(stfts, config.threshold_db)
    else:
        spec = reassign_finite_difference(
            signal, windows.h, grid, config.threshold_db, workers=config.workers
        )
    field = mixed_partial(stfts, config.threshold_db)
    mask = classify(field, config.tol_sin, config.tol_imp)
    spec = spec.with_columns(mixed_partial=field.d2_dt_domega[spec.frame, spec.bin])
    spec = correct_phases(spec, stfts)
    return Analysis(spec, mask, mask.classes[spec.frame, spec.bin])
