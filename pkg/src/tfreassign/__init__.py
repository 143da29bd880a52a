"""Reassigned spectrograms with mixed-partial despeckling and phase correction."""

from .analysis import Analysis, AnalysisConfig, analyze
from .phasecorrect import correct_phase_for_frequency, correct_phase_for_time, correct_phases
from .phasederiv import (
    ConfigurationError,
    FdPartials,
    PhaseDerivField,
    mixed_partial,
    phase_derivatives,
    phase_partials_fd,
    second_partial_freq,
    second_partial_time,
)
from .prune import CellClass, ConsensusStats, PruneMask, classify, despeckle, frequency_consensus
from .reassign import (
    Backend,
    ReassignedPoint,
    ReassignedSpectrogram,
    parabolic_peak,
    reassign_finite_difference,
    reassign_transform,
)
from .render import RasterImage, rasterize, write_pgm
from .signal_io import SignalKind, SignalSpec, WavError, generate, read_wav, write_wav
from .spectral import SampledSignal, StftGrid, StftSet, dft, idft, stft_frame, stft_set, windowed_stft
from .windows import WindowKind, WindowSet, WindowSpec, bessel_i0, build_window_set, make_window

__version__ = "0.1.0"
