"""Raster semantics: three-state cells, edit log, write threshold, exports."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magchip.geometry import Disk, Rectangle, ShapeError, Stroke
from magchip.pattern import (
    EditError,
    EditOp,
    FilmSpec,
    FilmSpecError,
    apply_edit,
    create_uniform,
    default_film,
    faraday_image,
    power_threshold,
    replay,
    scan_stroke,
    to_pgm,
)
from tests.conftest import reversing_stamp


class TestFilmSpec:
    def test_default_film_dimensions(self, film):
        assert film.shape == (2000, 2000)
        assert film.thickness == pytest.approx(1.8e-6)
        assert film.remanence == pytest.approx(20e-3)

    def test_cell_centers_span_extent(self, film):
        x, y = film.cell_centers()
        assert x[0] == pytest.approx(-film.extent[0] / 2 + film.cell_size / 2)
        assert x[-1] == pytest.approx(film.extent[0] / 2 - film.cell_size / 2)
        assert len(x) == 2000 and len(y) == 2000

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(thickness=0.0),
            dict(remanence=-1e-3),
            dict(coercive_field=0.0),
            dict(cell_size=0.0),
            dict(extent=(10e-6, 4e-3)),  # narrower than 10 cells
        ],
    )
    def test_invalid_spec_rejected(self, kwargs):
        base = dict(
            thickness=1.8e-6,
            remanence=20e-3,
            coercive_field=10e-3,
            extent=(4e-3, 4e-3),
            cell_size=2e-6,
        )
        base.update(kwargs)
        with pytest.raises(FilmSpecError):
            FilmSpec(**base)


class TestUniformAndStamp:
    def test_uniform_polarity(self, small_film):
        for pol in (-1, +1):
            p = create_uniform(small_film, pol)
            assert (p.cells == pol).all()
            assert p.cells.dtype == np.int8
            assert p.edit_log == ()

    def test_uniform_rejects_zero_polarity(self, small_film):
        with pytest.raises(EditError):
            create_uniform(small_film, 0)

    def test_cells_are_read_only(self, small_film):
        p = create_uniform(small_film, +1)
        with pytest.raises(ValueError):
            p.cells[0, 0] = -1

    def test_disk_stamp_reverses_disk_only(self, small_film):
        p0 = create_uniform(small_film, +1)
        p1 = apply_edit(p0, reversing_stamp(Disk(center=(0, 0), radius=50e-6)))
        x, y = small_film.cell_centers()
        xx, yy = np.meshgrid(x, y)
        inside = xx**2 + yy**2 <= (50e-6) ** 2
        assert (p1.cells[inside] == -1).all()
        assert (p1.cells[~inside] == +1).all()
        # the original pattern is untouched
        assert (p0.cells == +1).all()

    def test_zero_sign_stamp_demagnetizes(self, small_film):
        p0 = create_uniform(small_film, +1)
        square = Rectangle(corner=(-30e-6, -30e-6), size=(60e-6, 60e-6))
        op = EditOp(
            kind="stamp",
            shape=square,
            write_field_sign=0,
            beam_power=20e-3,
            spot_diameter=10e-6,
        )
        p1 = apply_edit(p0, op)
        x, y = small_film.cell_centers()
        xx, yy = np.meshgrid(x, y)
        inside = square.contains(xx, yy)
        assert (p1.cells[inside] == 0).all()
        assert (p1.cells[~inside] == +1).all()

    def test_shape_outside_extent_is_error(self, small_film):
        p0 = create_uniform(small_film, +1)
        with pytest.raises(EditError):
            apply_edit(
                p0, reversing_stamp(Disk(center=(1e-3, 1e-3), radius=20e-6))
            )


class TestWriteThreshold:
    def test_reference_point(self):
        assert power_threshold(10e-6) == pytest.approx(10e-3)

    def test_linear_in_width(self):
        assert power_threshold(20e-6) == pytest.approx(20e-3)
        assert power_threshold(5e-6) == pytest.approx(5e-3)

    def test_underpowered_scan_is_logged_noop(self, small_film):
        p0 = create_uniform(small_film, +1)
        line = [(-50e-6, 0.0), (50e-6, 0.0)]
        p1, wrote = scan_stroke(p0, line, width=10e-6, power=5e-3, write_field_sign=-1)
        assert not wrote
        assert (p1.cells == p0.cells).all()
        assert len(p1.edit_log) == 1  # the attempt is still recorded

    def test_powered_scan_writes_line(self, small_film):
        p0 = create_uniform(small_film, +1)
        line = [(-50e-6, 0.0), (50e-6, 0.0)]
        p1, wrote = scan_stroke(p0, line, width=10e-6, power=10e-3, write_field_sign=-1)
        assert wrote
        assert (p1.cells == -1).any()
        # written band is the stroke footprint
        x, y = small_film.cell_centers()
        xx, yy = np.meshgrid(x, y)
        inside = Stroke(polyline=tuple(line), width=10e-6).contains(xx, yy)
        assert (p1.cells[inside] == -1).all()
        assert (p1.cells[~inside] == +1).all()

    def test_composite_disk_plus_stroke(self, small_film):
        p = create_uniform(small_film, +1)
        p = apply_edit(p, reversing_stamp(Disk(center=(-30e-6, 0), radius=20e-6)))
        p, wrote = scan_stroke(
            p,
            [(0.0, -40e-6), (40e-6, -40e-6), (40e-6, 40e-6)],
            width=10e-6,
            power=10e-3,
            write_field_sign=-1,
        )
        assert wrote
        assert len(p.edit_log) == 2
        assert (p.cells == -1).sum() > 0


class TestInvolutionAndReplay:
    def test_write_erase_involution_byte_exact(self, small_film):
        p0 = create_uniform(small_film, +1)
        shape = Disk(center=(10e-6, -10e-6), radius=40e-6)
        p1 = apply_edit(p0, reversing_stamp(shape))
        op_back = EditOp(
            kind="stamp",
            shape=shape,
            write_field_sign=+1,
            beam_power=20e-3,
            spot_diameter=10e-6,
        )
        p2 = apply_edit(p1, op_back)
        assert p2.cells.tobytes() == p0.cells.tobytes()

    def test_replay_reproduces_cells(self, small_film):
        p = create_uniform(small_film, -1)
        p = apply_edit(p, reversing_stamp(Disk(center=(0, 0), radius=30e-6)))
        p, _ = scan_stroke(
            p, [(-60e-6, 60e-6), (60e-6, 60e-6)], width=8e-6, power=10e-3,
            write_field_sign=0,
        )
        rebuilt = replay(small_film, -1, p.edit_log)
        assert rebuilt.cells.tobytes() == p.cells.tobytes()
        assert rebuilt.edit_log == p.edit_log

    @settings(max_examples=20, deadline=None)
    @given(
        cx=st.floats(-60e-6, 60e-6),
        cy=st.floats(-60e-6, 60e-6),
        r=st.floats(5e-6, 40e-6),
        sign=st.sampled_from([-1, 0, 1]),
    )
    def test_edit_locality(self, small_film, cx, cy, r, sign):
        """Cells outside the stamped shape's bounds never change."""
        p0 = create_uniform(small_film, +1)
        op = EditOp(
            kind="stamp",
            shape=Disk(center=(cx, cy), radius=r),
            write_field_sign=sign,
            beam_power=20e-3,
            spot_diameter=10e-6,
        )
        p1 = apply_edit(p0, op)
        x, y = small_film.cell_centers()
        xx, yy = np.meshgrid(x, y)
        outside = ~op.shape.contains(xx, yy)
        assert (p1.cells[outside] == p0.cells[outside]).all()


class TestGeometryValidation:
    def test_bad_shapes(self):
        with pytest.raises(ShapeError):
            Disk(center=(0, 0), radius=0.0)
        with pytest.raises(ShapeError):
            Rectangle(corner=(0, 0), size=(1e-6, -1e-6))
        with pytest.raises(ShapeError):
            Stroke(polyline=((0.0, 0.0),), width=1e-6)
        with pytest.raises(EditError):
            EditOp(
                kind="stamp",
                shape=Disk(center=(0, 0), radius=1e-6),
                write_field_sign=2,
                beam_power=1e-3,
                spot_diameter=1e-6,
            )


class TestExports:
    def test_faraday_three_levels(self, small_film):
        p = create_uniform(small_film, +1)
        p = apply_edit(p, reversing_stamp(Disk(center=(0, 0), radius=30e-6)))
        square = Rectangle(corner=(50e-6, 50e-6), size=(30e-6, 30e-6))
        p = apply_edit(
            p,
            EditOp(
                kind="stamp", shape=square, write_field_sign=0,
                beam_power=20e-3, spot_diameter=10e-6,
            ),
        )
        img = faraday_image(p)
        assert set(np.unique(img)) == {0.0, 0.5, 1.0}
        # reversed disk renders dark on a bright background
        ny, nx = img.shape
        assert img[ny // 2, nx // 2] == 0.0
        assert img[0, 0] == 1.0

    def test_pgm_header_and_payload(self, small_film):
        p = create_uniform(small_film, -1)
        data = to_pgm(p)
        ny, nx = small_film.shape
        header = f"P5\n{nx} {ny}\n255\n".encode()
        assert data.startswith(header)
        body = np.frombuffer(data[len(header):], dtype=np.uint8)
        assert body.shape == (ny * nx,)
        assert (body == 0).all()

    def test_pgm_gray_levels(self, small_film):
        p = create_uniform(small_film, +1)
        p = apply_edit(
            p,
            EditOp(
                kind="stamp",
                shape=Rectangle(corner=(-20e-6, -20e-6), size=(40e-6, 40e-6)),
                write_field_sign=0,
                beam_power=20e-3,
                spot_diameter=10e-6,
            ),
        )
        data = to_pgm(p)
        body = np.frombuffer(data.split(b"\n", 3)[3], dtype=np.uint8)
        assert set(np.unique(body)) <= {0, 128, 255}
        assert 128 in body and 255 in body

    def test_physical_magnetization_scale(self, small_film):
        p = create_uniform(small_film, -1)
        m = p.physical_magnetization()
        assert np.allclose(m, -small_film.remanence)


def test_default_film_is_reference_spec():
    f = default_film()
    assert f.extent == (4e-3, 4e-3)
    assert f.cell_size == pytest.approx(2e-6)
