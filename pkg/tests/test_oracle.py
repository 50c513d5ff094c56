#!/usr/bin/env python3
"""Tests for the wave-function maps and the split-step reference integrator."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from madelung_core.grid import make_grid
from madelung_core.potential import PotentialSpec
from madelung_core.state import ComplexField, DofParams, HydroState, coherent_state, plane_wave, sample_gaussian
from hydro.oracle import (
    NodeError,
    SplitStepPropagator,
    from_wavefunction,
    split_step,
    to_wavefunction,
    uniform_lambda,
)

ONE = (DofParams(mass=1.0, lam=1.0),)


def test_uniform_lambda():
    assert uniform_lambda(1.0) == 1.0
    assert uniform_lambda([0.5, 0.5]) == 0.5
    assert uniform_lambda(ONE * 2) == 1.0

    with pytest.raises(ValueError, match="non-uniform"):
        uniform_lambda([DofParams(lam=1.0), DofParams(lam=0.0)])
    with pytest.raises(ValueError, match="lambda > 0"):
        uniform_lambda(0.0)


def test_uniform_state_maps_to_constant_wave_function():
    grid = make_grid([(0.0, 4.0, 16)])
    state = HydroState(t=0.0, rho=np.full(16, 0.25), s_residual=np.zeros(16), k0=(0.0,))

    psi = to_wavefunction(state, grid, 1.0)

    np.testing.assert_allclose(psi.psi, 0.5)
    assert psi.norm(grid) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_wave_function_carries_plane_wave_phase():
    grid = make_grid([(-10.0, 10.0, 256)])
    state = sample_gaussian(grid, 0.0, 1.0, 2.0)
    x = grid.axis_coordinates(0)

    psi = to_wavefunction(state, grid, 1.0)

    np.testing.assert_allclose(psi.psi, np.sqrt(state.rho) * np.exp(2j * x), atol=1e-14)
    with pytest.raises(ValueError):
        to_wavefunction(state, grid, 0.0)


def test_plane_wave_is_recovered_from_its_wave_function():
    grid = make_grid([(0.0, 2.0 * np.pi, 32)])
    x = grid.axis_coordinates(0)
    psi = ComplexField(psi=np.exp(2j * x) / np.sqrt(2.0 * np.pi), t=0.0)

    state = from_wavefunction(psi, grid, 1.0)

    assert state.k0 == (2.0,)
    np.testing.assert_allclose(state.rho, 1.0 / (2.0 * np.pi), rtol=1e-12)
    np.testing.assert_allclose(state.s_residual, 0.0, atol=1e-12)


def test_round_trip_of_evolved_gaussian():
    grid = make_grid([(-10.0, 10.0, 256)])
    start = to_wavefunction(sample_gaussian(grid, 0.0, 1.0, 1.0), grid, 1.0)
    psi = SplitStepPropagator(grid, ONE, PotentialSpec.free(), 1e-2).run(start, 100)

    state = from_wavefunction(psi, grid, 1.0)
    again = to_wavefunction(state, grid, 1.0)

    assert state.t == pytest.approx(1.0)
    np.testing.assert_allclose(again.psi, psi.psi, atol=1e-10)


def test_explicit_k0_hint_is_snapped_to_commensurate_value():
    grid = make_grid([(-10.0, 10.0, 256)])
    psi = to_wavefunction(sample_gaussian(grid, 0.0, 1.0, 1.0), grid, 1.0)

    state = from_wavefunction(psi, grid, 1.0, k0_hint=[0.0])

    assert state.k0 == (0.0,)
    np.testing.assert_allclose(to_wavefunction(state, grid, 1.0).psi, psi.psi, atol=1e-10)


def test_node_is_detected():
    grid = make_grid([(-8.0, 8.0, 128)])
    x = grid.axis_coordinates(0)
    psi = ComplexField(psi=(x * np.exp(-0.5 * x ** 2)).astype(complex), t=0.0)

    with pytest.raises(NodeError, match="node detected"):
        from_wavefunction(psi, grid, 1.0)


def test_sign_flip_without_exact_zero_is_detected():
    grid = make_grid([(-8.0, 8.0, 128)])
    x = grid.axis_coordinates(0) + 0.5 * grid.spacings[0]
    psi = ComplexField(psi=(x * np.exp(-0.5 * x ** 2)).astype(complex), t=0.0)

    with pytest.raises(NodeError):
        from_wavefunction(psi, grid, 1.0)


def test_split_step_preconditions():
    odd = make_grid([(-8.0, 8.0, 127)])
    grid = make_grid([(-8.0, 8.0, 128)])

    with pytest.raises(ValueError, match="even"):
        SplitStepPropagator(odd, ONE, PotentialSpec.free(), 1e-3)
    with pytest.raises(ValueError, match="non-uniform"):
        SplitStepPropagator(make_grid([(-8.0, 8.0, 16), (-8.0, 8.0, 16)]), (DofParams(lam=1.0), DofParams(lam=0.0)), PotentialSpec.free(), 1e-3)
    with pytest.raises(ValueError, match="disagrees"):
        SplitStepPropagator(grid, ONE, PotentialSpec.free(), 1e-3, lam=0.5)


def test_zero_time_step_is_identity():
    grid = make_grid([(-8.0, 8.0, 64)])
    psi = to_wavefunction(sample_gaussian(grid, 0.0, 1.0, 1.0), grid, 1.0)

    out = split_step(psi, grid, ONE, PotentialSpec.harmonic(1.0), 0.0)

    np.testing.assert_array_equal(out.psi, psi.psi)
    assert out.psi is not psi.psi
    assert out.t == psi.t


def test_split_step_is_unitary():
    grid = make_grid([(-8.0, 8.0, 128)])
    psi = to_wavefunction(sample_gaussian(grid, 1.0, 1.0, 0.5), grid, 1.0)

    out = SplitStepPropagator(grid, ONE, PotentialSpec.gaussian_barrier(2.0, 0.0, 0.5), 1e-2).run(psi, 200)

    assert out.norm(grid) == pytest.approx(1.0, abs=1e-12)
    assert out.t == pytest.approx(2.0)


def test_split_step_is_second_order_in_time():
    grid = make_grid([(-10.0, 10.0, 256)])
    psi = to_wavefunction(sample_gaussian(grid, 1.0, 1.0, 0.0), grid, 1.0)
    potential = PotentialSpec.polynomial([0.0, 0.0, 0.5, 0.0, 0.05])

    def solve(n):
        return SplitStepPropagator(grid, ONE, potential, 0.5 / n).run(psi, n).psi

    reference = solve(320)
    coarse = np.max(np.abs(solve(10) - reference))
    fine = np.max(np.abs(solve(20) - reference))

    assert 3.0 < coarse / fine < 5.0


def test_harmonic_coherent_state_follows_classical_orbit():
    grid = make_grid([(-10.0, 10.0, 256)])
    x = grid.axis_coordinates(0)
    state = coherent_state(grid, ONE, 1.0, 1.0)
    propagator = SplitStepPropagator(grid, ONE, PotentialSpec.harmonic(1.0), 1e-3)

    psi = to_wavefunction(state, grid, 1.0)
    for _ in range(8):
        psi = propagator.run(psi, 785)
        center = grid.integrate(x * np.abs(psi.psi) ** 2)
        assert center == pytest.approx(np.cos(psi.t), abs=1e-4)


def test_plane_wave_phase_rotates_at_kinetic_energy():
    grid = make_grid([(0.0, 2.0 * np.pi, 32)])
    psi = to_wavefunction(plane_wave(grid, 3.0), grid, 1.0)

    out = split_step(psi, grid, ONE, PotentialSpec.free(), 0.1)

    np.testing.assert_allclose(out.psi, psi.psi * np.exp(-0.45j), atol=1e-14)
