"""WAV input/output and the synthetic test corpus.

The reader parses RIFF chunks directly so that each kind of bad file maps to
its own exception. Only little-endian PCM16 and IEEE float32 are supported.
"""

import enum
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .spectral import SampledSignal

FORMAT_PCM = 0x0001
FORMAT_FLOAT = 0x0003
FORMAT_EXTENSIBLE = 0xFFFE


class WavError(Exception):
    """Base class for WAV reading problems."""


class MalformedHeaderError(WavError):
    pass


class UnsupportedFormatError(WavError):
    pass


class TruncatedDataError(WavError):
    pass


def _chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        yield cid, pos + 8, size
        pos += 8 + size + (size & 1)


def read_wav(path) -> SampledSignal:
    """Read the first channel of a PCM16 or float32 WAV file.

    PCM samples are divided by 32768.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeaderError(f"{path}: not a little-endian RIFF/WAVE file")
    fmt = None
    payload = None
    for cid, start, size in _chunks(data):
        if cid == b"fmt ":
            if size < 16 or start + 16 > len(data):
                raise MalformedHeaderError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, start)
            if fmt[0] == FORMAT_EXTENSIBLE:
                if size < 40 or start + 40 > len(data):
                    raise MalformedHeaderError(f"{path}: extensible fmt chunk too short")
                (sub,) = struct.unpack_from("<H", data, start + 24)
                fmt = (sub,) + fmt[1:]
        elif cid == b"data":
            if fmt is None:
                raise MalformedHeaderError(f"{path}: data chunk before fmt chunk")
            available = len(data) - start
            if size > available:
                raise TruncatedDataError(f"{path}: data chunk claims {size} bytes, {available} present")
            payload = data[start : start + size]
            break
    if fmt is None:
        raise MalformedHeaderError(f"{path}: no fmt chunk")
    if payload is None:
        raise TruncatedDataError(f"{path}: no data chunk")

    tag, channels, rate, _, block_align, bits = fmt
    if channels < 1 or rate < 1:
        raise MalformedHeaderError(f"{path}: {channels} channels at {rate} Hz")
    if tag == FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == FORMAT_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedFormatError(f"{path}: format tag {tag:#06x} with {bits} bits per sample")
    if block_align != channels * dtype.itemsize:
        raise MalformedHeaderError(f"{path}: block align {block_align} inconsistent with format")
    if len(payload) % block_align:
        raise TruncatedDataError(f"{path}: data ends mid-frame")
    frames = np.frombuffer(payload, dtype=dtype).reshape(-1, channels)
    samples = frames[:, 0].astype(np.float64) * scale
    return SampledSignal(samples, float(rate))


def write_wav(signal: SampledSignal, path, sample_format="float32"):
    """Write a mono WAV file as ``float32`` or ``pcm16`` (clipped, rounded)."""
    rate = int(round(signal.sample_rate))
    if rate != signal.sample_rate:
        raise ValueError("WAV files need an integer sample rate")
    x = signal.samples
    if sample_format == "float32":
        body = x.astype("<f4").tobytes()
        tag, bits = FORMAT_FLOAT, 32
    elif sample_format == "pcm16":
        q = np.clip(np.round(x * 32768.0), -32768, 32767)
        body = q.astype("<i2").tobytes()
        tag, bits = FORMAT_PCM, 16
    else:
        raise ValueError(f"unknown sample format {sample_format!r}")
    align = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, rate, rate * align, align, bits)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    if len(body) & 1:
        chunks += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)


class SignalKind(enum.Enum):
    SINUSOID = "sinusoid"
    LINEAR_CHIRP = "chirp"
    IMPULSE = "impulse"
    HARMONIC_PLUCK = "pluck"
    WHITE_NOISE = "noise"
    MIXTURE = "mixture"


@dataclass(frozen=True)
class SignalSpec:
    """Parameters of one synthetic signal.

    Only the fields relevant to ``kind`` are used:

    * sinusoid: ``frequency``, ``phase``
    * chirp: ``frequency`` (start) and ``end_frequency``
    * impulse: ``index``
    * pluck: ``frequency`` (fundamental), ``partials``, ``decay`` (of the
      fundamental; partial k decays with ``decay / k``), ``onset`` in seconds
    * noise: ``seed``
    * mixture: ``components``, summed sample by sample
    """

    kind: SignalKind
    duration: float
    sample_rate: float = 44100.0
    amplitude: float = 1.0
    frequency: float = 1000.0
    end_frequency: Optional[float] = None
    phase: float = 0.0
    index: int = 0
    partials: int = 10
    decay: float = 0.5
    onset: float = 0.0
    seed: int = 0
    components: Sequence["SignalSpec"] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kind", SignalKind(self.kind))
        object.__setattr__(self, "components", tuple(self.components))
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        nyq = self.sample_rate / 2
        kind = self.kind
        if kind is SignalKind.SINUSOID and not 0 <= self.frequency < nyq:
            raise ValueError(f"frequency {self.frequency} Hz aliases at rate {self.sample_rate}")
        if kind is SignalKind.LINEAR_CHIRP:
            if self.end_frequency is None:
                raise ValueError("chirp needs end_frequency")
            for f in (self.frequency, self.end_frequency):
                if not 0 <= f < nyq:
                    raise ValueError(f"frequency {f} Hz aliases at rate {self.sample_rate}")
        if kind is SignalKind.HARMONIC_PLUCK:
            if self.partials < 1 or not self.frequency > 0 or not self.decay > 0:
                raise ValueError("pluck needs partials >= 1, frequency > 0 and decay > 0")
            if self.partials * self.frequency >= nyq:
                raise ValueError(
                    f"partial {self.partials} at {self.partials * self.frequency} Hz aliases"
                )
        if kind is SignalKind.IMPULSE and not 0 <= self.index < self.n_samples:
            raise ValueError("impulse index outside the signal")
        if kind is SignalKind.MIXTURE:
            for c in self.components:
                if c.sample_rate != self.sample_rate:
                    raise ValueError("mixture components must share the sample rate")

    @property
    def n_samples(self):
        return max(1, int(round(self.duration * self.sample_rate)))


def _noise(n, seed):
    # PCG64 is a fully specified generator: same stream on every platform
    rng = np.random.Generator(np.random.PCG64(seed))
    return 2.0 * rng.random(n) - 1.0


def _samples(spec: SignalSpec):
    n = spec.n_samples
    fs = spec.sample_rate
    t = np.arange(n) / fs
    a = spec.amplitude
    kind = spec.kind
    if kind is SignalKind.SINUSOID:
        return a * np.cos(2 * np.pi * spec.frequency * t + spec.phase)
    if kind is SignalKind.LINEAR_CHIRP:
        rate = (spec.end_frequency - spec.frequency) / spec.duration
        return a * np.cos(2 * np.pi * (spec.frequency * t + 0.5 * rate * t * t))
    if kind is SignalKind.IMPULSE:
        x = np.zeros(n)
        x[spec.index] = a
        return x
    if kind is SignalKind.HARMONIC_PLUCK:
        x = np.zeros(n)
        start = int(np.ceil(spec.onset * fs - 1e-9))
        tt = t[start:] - spec.onset
        for k in range(1, spec.partials + 1):
            x[start:] += (a / k) * np.exp(-tt * k / spec.decay) * np.cos(2 * np.pi * k * spec.frequency * tt)
        return x
    if kind is SignalKind.WHITE_NOISE:
        return a * _noise(n, spec.seed)
    x = np.zeros(n)
    for c in spec.components:
        y = _samples(c)
        m = min(n, len(y))
        x[:m] += y[:m]
    return a * x


def generate(spec: SignalSpec) -> SampledSignal:
    """Closed-form samples of ``spec`` (deterministic, including noise)."""
    return SampledSignal(_samples(spec), spec.sample_rate)
