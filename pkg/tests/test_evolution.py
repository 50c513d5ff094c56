#!/usr/bin/env python3
"""Tests for the evolution driver: report cadence, callbacks, error tagging, free-packet physics."""

import logging
import sys
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from madelung_core.grid import make_grid
from madelung_core.potential import PotentialSpec
from madelung_core.state import DofParams, StateError, sample_gaussian
from hydro.dynamics import NonFiniteError, SimulationParams, StabilityError
from hydro.evolution import evolve


def _setup(lam=1.0, p0=0.0, dt=1e-3, n_points=256, half_width=10.0):
    grid = make_grid([(-half_width, half_width, n_points)])
    state = sample_gaussian(grid, 0.0, 1.0, p0)
    params = SimulationParams(dofs=(DofParams(mass=1.0, lam=lam),), potential=PotentialSpec.free(), dt=dt)
    return grid, state, params


def test_zero_steps_gives_single_report():
    grid, state, params = _setup()

    final, reports = evolve(state, grid, params, 0, 10)

    assert final is state
    assert len(reports) == 1
    assert reports[0].t == 0.0


def test_reports_at_multiples_of_report_every():
    grid, state, params = _setup()
    seen = []

    final, reports = evolve(state, grid, params, 10, 3, lambda index, sample, report: seen.append(index))

    assert seen == [0, 3, 6, 9]
    assert len(reports) == 4
    assert reports[-1].t == pytest.approx(9e-3)
    assert final.t == pytest.approx(1e-2)


def test_failing_callback_does_not_stop_evolution(caplog):
    grid, state, params = _setup()
    seen = []

    def broken(index, sample, report):
        raise RuntimeError("disk full")

    with caplog.at_level(logging.ERROR):
        _, reports = evolve(state, grid, params, 4, 2, [broken, lambda i, s, r: seen.append(i)])

    assert len(reports) == 3
    assert seen == [0, 2, 4]
    assert "disk full" in caplog.text


def test_invalid_arguments():
    grid, state, params = _setup()

    with pytest.raises(ValueError, match="n_steps"):
        evolve(state, grid, params, -1, 1)
    with pytest.raises(ValueError, match="report_every"):
        evolve(state, grid, params, 5, 0)
    with pytest.raises(StateError, match="normalised"):
        evolve(state.with_fields(rho=2.0 * state.rho), grid, params, 5, 1)


def test_stability_violation_is_tagged_with_step_zero():
    grid, state, params = _setup(dt=0.1)

    with pytest.raises(StabilityError) as excinfo:
        evolve(state, grid, params, 5, 1)

    assert excinfo.value.step_index == 0
    assert str(excinfo.value).startswith("step 0:")


def test_failure_is_tagged_with_failing_step():
    grid, state, params = _setup()
    calls = {"n": 0}

    def flaky(rho, s, k0, grid, params, potential):
        calls["n"] += 1
        if calls["n"] == 3:
            return np.full_like(rho, np.nan), s
        return rho, s

    with patch("hydro.dynamics._rk4", side_effect=flaky):
        with pytest.raises(NonFiniteError) as excinfo:
            evolve(state, grid, params, 10, 1)

    assert excinfo.value.step_index == 3


def test_evolution_is_deterministic():
    grid, state, params = _setup()

    first_state, first = evolve(state, grid, params, 20, 5)
    second_state, second = evolve(state, grid, params, 20, 5)

    assert first == second
    np.testing.assert_array_equal(first_state.rho, second_state.rho)
    np.testing.assert_array_equal(first_state.s_residual, second_state.s_residual)


@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_free_gaussian_spreads_like_the_analytic_packet(lam):
    grid, state, params = _setup(lam=lam, n_points=512, half_width=20.0)

    _, reports = evolve(state, grid, params, 1000, 1000)

    expected = 1.0 + (lam * 1.0 / 2.0) ** 2
    assert reports[-1].t == pytest.approx(1.0)
    assert reports[-1].delta_x[0] ** 2 == pytest.approx(expected, rel=1e-3)
    assert reports[-1].norm == pytest.approx(1.0, abs=1e-10)


def test_classical_packet_does_not_spread():
    grid, state, params = _setup(lam=0.0)

    final, reports = evolve(state, grid, params, 200, 200)

    np.testing.assert_allclose(final.rho, state.rho, atol=1e-14)
    assert reports[-1].delta_x[0] == reports[0].delta_x[0]


def test_moving_packet_follows_its_mean_momentum():
    grid, state, params = _setup(p0=1.0, n_points=512, half_width=20.0)

    _, reports = evolve(state, grid, params, 500, 250)

    for report in reports:
        assert report.mean_p[0] == pytest.approx(1.0, abs=1e-4)
        assert report.mean_x[0] == pytest.approx(report.t, abs=1e-4)
    energies = [r.energy for r in reports]
    assert max(energies) - min(energies) < 1e-6 * energies[0]
