import numpy as np
import pytest

from support import FS, impulse, setup, sinusoid
from tfreassign.reassign import reassign_transform
from tfreassign.render import RasterImage, pgm_bytes, rasterize, read_pgm, write_pgm

# the abrupt start and end of a finite signal are broadband events of their
# own; line-geometry checks look at the interior only
INTERIOR = (0.05, 0.95)


def render_points(signal, width=800, height=600):
    _, g, S = setup(signal, higher_order=False)
    r = reassign_transform(S)
    return rasterize(r.t_hat, r.omega_hat / (2 * np.pi), r.magnitude**2, width, height, INTERIOR, (0.0, FS / 2))


class TestRasterize:
    def test_single_point(self):
        img = rasterize([0.5], [1000.0], [2.0], 10, 8, (0, 1), (0, 4000))
        gray = img.gray()
        assert np.count_nonzero(gray) == 1
        assert gray[8 - 1 - 2, 5] == 255
        assert img.dropped == 0

    def test_edges_and_drops(self):
        img = rasterize([0.0, 1.0, 1.5, np.nan], [0.0, 10.0, 5.0, 5.0], [1, 1, 1, 1], 4, 2, (0, 1), (0, 10))
        assert img.dropped == 2
        assert img.cells[1, 0] == 1 and img.cells[0, 3] == 1

    def test_power_accumulates(self):
        img = rasterize([0.1, 0.11, 0.9], [1.0, 1.0, 1.0], [1.0, 3.0, 4.0], 2, 1, (0, 1), (0, 2))
        assert img.cells.tolist() == [[4.0, 4.0]]

    def test_empty_is_floor(self):
        img = rasterize([], [], [], 5, 4, (0, 1), (0, 1))
        assert not img.gray().any() and img.gray().shape == (4, 5)

    def test_gray_scale(self):
        # -40 dB sits halfway up an 80 dB range: 255 * 0.5 rounds to 128
        img = RasterImage(np.array([[1.0, 1e-4, 1e-9, 0.0]]), (0, 1), (0, 1))
        assert img.gray(-80.0).tolist() == [[255, 128, 0, 0]]
        with pytest.raises(ValueError):
            img.gray(0.0)

    @pytest.mark.parametrize("bad", [dict(width=0), dict(t_range=(1, 1)), dict(f_range=(2, 1))])
    def test_rejects(self, bad):
        kw = dict(width=4, height=4, t_range=(0, 1), f_range=(0, 1))
        kw.update(bad)
        with pytest.raises(ValueError):
            rasterize([0.5], [0.5], [1.0], **kw)


class TestGeometry:
    def test_sinusoid_one_row(self):
        nz = render_points(sinusoid(1000.0)).gray() > 0
        assert nz.sum() > 100
        assert nz.sum(axis=1).max() >= 0.95 * nz.sum()

    def test_impulse_one_column(self):
        # 22000 samples keeps the impulse clear of a pixel boundary
        nz = render_points(impulse(22000)).gray() > 0
        assert nz.sum() > 100
        assert nz.sum(axis=0).max() >= 0.95 * nz.sum()


class TestPgm:
    def test_header_and_round_trip(self, tmp_path):
        gray = np.arange(12, dtype=np.uint8).reshape(3, 4)
        assert pgm_bytes(gray).startswith(b"P5\n4 3\n255\n")
        path = tmp_path / "a.pgm"
        write_pgm(path, gray)
        np.testing.assert_array_equal(read_pgm(path), gray)

    def test_read_rejects(self, tmp_path):
        path = tmp_path / "b.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0")
        with pytest.raises(ValueError):
            read_pgm(path)
