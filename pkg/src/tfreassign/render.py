"""Rasterizing reassigned points into an 8-bit grayscale PGM image."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_FLOOR_DB = -80.0


@dataclass(frozen=True)
class RasterImage:
    """Accumulated linear power per pixel. Row 0 is the highest frequency."""

    cells: np.ndarray  # (height, width)
    t_range: tuple
    f_range: tuple  # Hz
    dropped: int = 0

    def __post_init__(self):
        if self.cells.ndim != 2 or min(self.cells.shape) < 1:
            raise ValueError("raster must be at least 1x1")

    @property
    def height(self):
        return self.cells.shape[0]

    @property
    def width(self):
        return self.cells.shape[1]

    def gray(self, floor_db=DEFAULT_FLOOR_DB):
        """Map to 0..255 over ``[floor_db, 0]`` dB relative to the brightest pixel."""
        if not floor_db < 0:
            raise ValueError("floor_db must be negative")
        peak = self.cells.max()
        if not peak > 0:
            return np.zeros(self.cells.shape, dtype=np.uint8)
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(self.cells / peak)
        level = np.clip((db - floor_db) / -floor_db, 0.0, 1.0)
        return np.round(255.0 * level).astype(np.uint8)


def _pixel(values, lo, hi, count):
    # [lo, hi] split into `count` equal cells; hi itself lands in the last one
    inside = (values >= lo) & (values <= hi)
    pos = np.floor((np.where(inside, values, lo) - lo) / (hi - lo) * count).astype(np.int64)
    return np.clip(pos, 0, count - 1), inside


def rasterize(t, f_hz, power, width, height, t_range, f_range):
    """Accumulate ``power`` at ``(t, f_hz)`` into a ``height`` x ``width`` grid.

    Points outside the ranges (or with non-finite coordinates) are dropped and
    counted in ``RasterImage.dropped``.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    t0, t1 = map(float, t_range)
    f0, f1 = map(float, f_range)
    if not (t1 > t0 and f1 > f0):
        raise ValueError("time and frequency ranges must be increasing")
    t = np.asarray(t, dtype=float)
    f_hz = np.asarray(f_hz, dtype=float)
    power = np.asarray(power, dtype=float)
    col, in_t = _pixel(t, t0, t1, width)
    row, in_f = _pixel(f_hz, f0, f1, height)
    ok = in_t & in_f & np.isfinite(power)
    cells = np.zeros((height, width))
    # sequential accumulation keeps the sums independent of threading
    np.add.at(cells, (height - 1 - row[ok], col[ok]), power[ok])
    return RasterImage(cells, (t0, t1), (f0, f1), int(np.count_nonzero(~ok)))


def pgm_bytes(gray):
    gray = np.asarray(gray, dtype=np.uint8)
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes()


def write_pgm(path, gray):
    Path(path).write_bytes(pgm_bytes(gray))


def read_pgm(path):
    """Read a binary (P5, maxval 255) PGM written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P5" or parts[3] != b"255":
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = int(parts[1]), int(parts[2])
    body = data[len(data) - w * h :]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)
