#!/usr/bin/env python3
"""Tests for periodic grids and quadrature."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from madelung_core.grid import DimSpec, GridError, GridSpec, make_grid


def test_make_grid_accepts_tuples_dicts_and_dimspecs():
    grid = make_grid([(-1.0, 1.0, 16), {"x_min": 0.0, "x_max": 2.0, "n_points": 8}, DimSpec(0.0, 1.0, 10)])

    assert grid.ndim == 3
    assert grid.shape == (16, 8, 10)
    assert grid.size == 16 * 8 * 10
    assert grid.spacings == pytest.approx((0.125, 0.25, 0.1))
    assert grid.cell_volume == pytest.approx(0.125 * 0.25 * 0.1)


def test_coordinates_exclude_right_endpoint():
    x = make_grid([(-2.0, 2.0, 8)]).axis_coordinates(0)

    assert x[0] == -2.0
    assert x[-1] == pytest.approx(1.5)
    assert len(x) == 8


@pytest.mark.parametrize(
    "dims",
    [
        [],
        [(0.0, 1.0, 7)],
        [(1.0, 1.0, 16)],
        [(0.0, float("inf"), 16)],
        [(0.0, 1.0, 8)] * 4,
    ],
)
def test_make_grid_rejects_invalid_dimensions(dims):
    with pytest.raises(GridError):
        make_grid(dims)


def test_mesh_uses_ij_indexing_and_is_cached():
    grid = make_grid([(0.0, 1.0, 8), (0.0, 2.0, 16)])
    x, y = grid.mesh()

    assert x.shape == (8, 16)
    assert np.all(x[:, 0] == grid.axis_coordinates(0))
    assert np.all(y[0, :] == grid.axis_coordinates(1))
    assert grid.mesh()[0] is x


def test_integrate_is_exact_for_trigonometric_polynomials():
    grid = make_grid([(0.0, 2.0 * np.pi, 32)])
    x = grid.axis_coordinates(0)

    assert grid.integrate(np.ones(32)) == pytest.approx(2.0 * np.pi)
    assert abs(grid.integrate(np.sin(3 * x))) < 1e-14
    assert grid.integrate(np.cos(2 * x) ** 2) == pytest.approx(np.pi, rel=1e-14)


def test_commensurate_wavenumber_rounds_to_box_modes():
    grid = make_grid([(-20.0, 20.0, 512)])
    step = 2.0 * np.pi / 40.0

    assert grid.commensurate_wavenumber(0, 1.0) == pytest.approx(6 * step)
    assert grid.commensurate_wavenumber(0, 0.0) == 0.0
    assert grid.commensurate_wavenumber(0, -3 * step) == pytest.approx(-3 * step)


def test_grid_dict_round_trip_and_equality():
    grid = make_grid([(-1.0, 1.0, 16), (0.0, 3.0, 12)])
    again = GridSpec.from_dict(grid.to_dict())

    assert again == grid
    assert hash(again) == hash(grid)
