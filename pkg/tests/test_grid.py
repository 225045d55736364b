import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from psamtrain.grid import (IsubGrid, build_grid, default_p_axis, grid_config_hash,
                            interpolate, load_grid, save_grid)
from psamtrain.mi import Quadrature, optimize_isub

TINY = Quadrature(12, 8, 12)


@pytest.fixture(scope="module")
def small_grid():
    return build_grid(4.0, 4, 3, 1.0, rate_unit="nats", quad=TINY)


def test_default_axis():
    ax = default_p_axis(10.0, 60)
    assert ax[0] == 0.0 and len(ax) == 61
    assert ax[-1] == 10.0
    assert np.any(np.isclose(ax, 1.0, rtol=0, atol=1e-12))
    assert np.all(np.diff(ax) > 0)


def test_axis_validation():
    with pytest.raises(ValueError):
        default_p_axis(1.0, 1)
    with pytest.raises(ValueError):
        IsubGrid([0, 1], [0, 1], np.zeros((3, 2)), 1.0)
    with pytest.raises(ValueError):
        IsubGrid([0, 1, 1], [0, 1], np.zeros((3, 2)), 1.0)


def test_round_trip(small_grid, tmp_path):
    small_grid.meta["snr_db"] = "0.0"
    path = tmp_path / "g.grid"
    save_grid(small_grid, path)
    back = load_grid(path)
    assert_array_equal(back.values, small_grid.values)
    assert_array_equal(back.p_axis, small_grid.p_axis)
    assert_array_equal(back.v_axis, small_grid.v_axis)
    assert back.noise_var == small_grid.noise_var
    assert back.rate_unit == "nats"
    assert back.config_hash == small_grid.config_hash
    assert back.meta == {"snr_db": "0.0"}
    save_grid(back, tmp_path / "h.grid")
    assert (tmp_path / "h.grid").read_bytes() == path.read_bytes()


def test_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.grid"
    p.write_text("format: something-else\nvalues:\n")
    with pytest.raises(ValueError):
        load_grid(p)


def test_deterministic_and_schedule_free(small_grid):
    again = build_grid(4.0, 4, 3, 1.0, rate_unit="nats", quad=TINY, jobs=2)
    assert_array_equal(again.values, small_grid.values)


def test_zero_power_row(small_grid):
    assert np.all(small_grid.values[0] == 0.0)


def test_hash_tracks_config():
    a = grid_config_hash(10, 60, 60, 1.0, "bits")
    assert a == grid_config_hash(10, 60, 60, 1.0, "bits")
    assert a != grid_config_hash(10, 60, 60, 0.5, "bits")
    assert a != grid_config_hash(10, 60, 60, 1.0, "nats")


def test_unit_conversion(small_grid):
    bits = small_grid.in_unit("bits")
    assert np.allclose(bits.values * math.log(2), small_grid.values, rtol=1e-14)
    assert bits.in_unit("nats").rate_unit == "nats"


class TestInterpolate:
    def test_nodes_exact(self, grid_0db):
        i, j = np.meshgrid(np.arange(0, 61, 7), np.arange(0, 60, 9), indexing="ij")
        got = interpolate(grid_0db, grid_0db.p_axis[i], grid_0db.v_axis[j])
        assert_array_equal(got, grid_0db.values[i, j])

    def test_cell_center_is_mean(self, grid_0db):
        g = grid_0db
        P = 0.5 * (g.p_axis[20] + g.p_axis[21])
        v = 0.5 * (g.v_axis[10] + g.v_axis[11])
        assert interpolate(g, P, v) == pytest.approx(g.values[20:22, 10:12].mean(), rel=1e-13)

    def test_out_of_range(self, grid_0db):
        with pytest.raises(ValueError):
            interpolate(grid_0db, 10.5, 0.5)
        with pytest.raises(ValueError):
            interpolate(grid_0db, 1.0, 1.01)
        with pytest.raises(ValueError):
            interpolate(grid_0db, -0.1, 0.5)

    def test_scalar_and_vector(self, grid_0db):
        assert isinstance(interpolate(grid_0db, 1.0, 0.5), float)
        assert interpolate(grid_0db, [1.0, 2.0], 0.5).shape == (2,)

    def test_random_interior_vs_direct(self, grid_0db):
        rng = np.random.default_rng(9)
        for _ in range(4):
            P, v = float(np.exp(rng.uniform(np.log(0.05), np.log(9)))), float(rng.uniform(0, 1))
            direct = optimize_isub(P, v, 1.0, unit="nats")[1]
            assert interpolate(grid_0db, P, v) == pytest.approx(direct, rel=0.02)


class TestShippedGrid:
    def test_spot_node_recomputes(self, grid_0db):
        i = int(np.argmin(np.abs(grid_0db.p_axis - 1.0)))
        j = int(np.argmin(np.abs(grid_0db.v_axis - 0.5)))
        direct = optimize_isub(grid_0db.p_axis[i], grid_0db.v_axis[j], 1.0, unit="nats")[1]
        assert grid_0db.values[i, j] == pytest.approx(direct, rel=1e-9)

    def test_monotone(self, grid_0db):
        z = grid_0db.values
        assert np.all(np.diff(z, axis=0) >= -1e-4)
        assert np.all(np.diff(z, axis=1) <= 1e-4)
        assert np.all(z >= 0)
        assert np.all(z <= math.log(2) + 1e-12)

    def test_no_csi_column(self, grid_0db):
        for i in (15, 40, 60):
            P = grid_0db.p_axis[i]
            assert grid_0db.values[i, -1] == pytest.approx(
                optimize_isub(P, 1.0, 1.0, unit="nats")[1], rel=1e-9)
