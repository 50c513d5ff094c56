"""
Generalised Madelung dynamics with per-degree-of-freedom quantum strength.

    d rho / dt = -sum_i D_i(rho * dS_i / m_i)
    d S   / dt = -sum_i (dS_i)^2 / 2 m_i - Q - U
    Q          = sum_i lambda_i^2 / 8 m_i * (-2 D_i g_i - g_i^2),  g_i = D_i rho / rho

lambda_i = 0 gives the classical Hamilton-Jacobi ensemble, lambda_i = 1 (hbar)
the Schroedinger dynamics; mixing both gives hybrid quantum-classical systems.
"""

import functools
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import distance_transform_edt

from madelung_core.grid import GridSpec
from madelung_core.potential import PotentialSpec, evaluate_potential
from madelung_core.state import DofParams, HydroState
from madelung_core.stencil import divergence, floored_density, log_derivative, spatial_derivative


logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 0.25
DEFAULT_RHO_FLOOR = 1e-12
RENORMALISE_THRESHOLD = 1e-12
NEGATIVE_DENSITY_TOLERANCE = 1e-10


# ==========================================
# Errors
# ==========================================

class NumericalError(RuntimeError):
    """Base class for integration failures; ``step_index`` is attached by evolve."""

    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message)
        self.step_index = step_index

    def __str__(self) -> str:
        base = super().__str__()
        if self.step_index is None:
            return base
        return f"step {self.step_index}: {base}"


class NonFiniteError(NumericalError):
    """NaN or Inf appeared in the state."""


class NegativeDensityError(NumericalError):
    """Density went negative beyond the rounding tolerance."""


class StabilityError(NumericalError):
    """The time step violates the CFL-like guard."""


# ==========================================
# Parameters
# ==========================================

@dataclass(frozen=True)
class SimulationParams:
    """Physical and integrator parameters of one evolution."""

    dofs: Tuple[DofParams, ...]
    potential: PotentialSpec = field(default_factory=PotentialSpec.free)
    dt: float = 1e-3
    kappa: float = DEFAULT_KAPPA
    rho_floor: float = DEFAULT_RHO_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "dofs", tuple(self.dofs))
        if not self.dofs:
            raise ValueError("at least one degree of freedom is required")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.rho_floor >= 0:
            raise ValueError(f"rho_floor must be non-negative, got {self.rho_floor}")

    @property
    def masses(self) -> Tuple[float, ...]:
        return tuple(d.mass for d in self.dofs)

    @property
    def lambdas(self) -> Tuple[float, ...]:
        return tuple(d.lam for d in self.dofs)

    def check_grid(self, grid: GridSpec) -> None:
        if len(self.dofs) != grid.ndim:
            raise ValueError(f"{len(self.dofs)} degrees of freedom for a {grid.ndim}-D grid")

    def with_lambda(self, lam: float) -> "SimulationParams":
        """Same parameters with every degree of freedom set to ``lam``."""
        return replace(self, dofs=tuple(DofParams(mass=d.mass, lam=lam) for d in self.dofs))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dofs": [d.to_dict() for d in self.dofs],
            "potential": self.potential.to_dict(),
            "dt": self.dt,
            "kappa": self.kappa,
            "rho_floor": self.rho_floor,
        }


@functools.lru_cache(maxsize=32)
def potential_field(spec: PotentialSpec, grid: GridSpec) -> np.ndarray:
    values = evaluate_potential(spec, grid)
    values.setflags(write=False)
    return values


def max_stable_dt(state: HydroState, grid: GridSpec, params: SimulationParams) -> float:
    """Heuristic CFL-like bound 0.5 * min_d m dx^2 / (lambda + |k0| dx m + 1)."""
    bounds = []
    for dof, h, k in zip(params.dofs, grid.spacings, state.k0):
        bounds.append(dof.mass * h * h / (dof.lam + abs(k) * h * dof.mass + 1.0))
    return 0.5 * min(bounds)


def check_stability(state: HydroState, grid: GridSpec, params: SimulationParams) -> None:
    limit = max_stable_dt(state, grid, params)
    if params.dt > limit:
        raise StabilityError(f"dt={params.dt:.3e} exceeds the stability guard {limit:.3e}")


# ==========================================
# Right-hand sides
# ==========================================

def _momentum(s_residual: np.ndarray, k0: Sequence[float], grid: GridSpec, axis: int) -> np.ndarray:
    return k0[axis] + spatial_derivative(s_residual, grid, axis, 1)


def _clamp_to_unfloored(q: np.ndarray, floored: np.ndarray) -> np.ndarray:
    if not floored.any() or floored.all():
        return q
    nearest = distance_transform_edt(floored, return_distances=False, return_indices=True)
    return q[tuple(nearest)]


def _quantum_potential(rho: np.ndarray, grid: GridSpec, dofs: Sequence[DofParams], rho_floor: float) -> np.ndarray:
    q = np.zeros(grid.shape)
    if all(d.lam == 0 for d in dofs):
        return q

    rho_f, floored = floored_density(rho, rho_floor)
    for axis, dof in enumerate(dofs):
        if dof.lam == 0:
            continue
        g = log_derivative(rho_f, floored, grid, axis)
        q += (dof.lam ** 2 / (8.0 * dof.mass)) * (-2.0 * spatial_derivative(g, grid, axis, 1) - g * g)

    return _clamp_to_unfloored(q, floored)


def quantum_potential(state: HydroState, grid: GridSpec, dofs: Sequence[DofParams], rho_floor: float = DEFAULT_RHO_FLOOR) -> np.ndarray:
    """
    Q(x) = -sum_i lambda_i^2 / (2 m_i) * lap_i(sqrt rho) / sqrt rho.

    Discretised as sum_i lambda_i^2 / (8 m_i) * (-2 D_i g_i - g_i^2) with
    g_i = D_i rho / rho, the exact discrete variation of the Fisher term
    sum_i lambda_i^2 / (8 m_i) * integral (D_i rho)^2 / rho. rho is floored at
    rho_floor * max(rho) first; at floored points Q is clamped to its value at
    the nearest unfloored point.
    """
    return _quantum_potential(state.rho, grid, dofs, rho_floor)


def _continuity(rho, s_residual, k0, grid: GridSpec, params: SimulationParams) -> np.ndarray:
    # floored points carry no flux, so unresolved tails stay frozen
    _, floored = floored_density(rho, params.rho_floor)
    carried = np.where(floored, 0.0, rho)
    fluxes = [carried * _momentum(s_residual, k0, grid, axis) / dof.mass for axis, dof in enumerate(params.dofs)]
    return -divergence(fluxes, grid)


def _hamilton_jacobi(rho, s_residual, k0, grid: GridSpec, params: SimulationParams, potential: np.ndarray) -> np.ndarray:
    rate = -_quantum_potential(rho, grid, params.dofs, params.rho_floor) - potential
    for axis, dof in enumerate(params.dofs):
        p = _momentum(s_residual, k0, grid, axis)
        rate -= p * p / (2.0 * dof.mass)
    return rate


def continuity_rhs(state: HydroState, grid: GridSpec, params: SimulationParams) -> np.ndarray:
    """-sum_i D_i(rho * dS_i / m_i) with the flux zeroed at floored points; sums to zero over the grid."""
    params.check_grid(grid)
    return _continuity(state.rho, state.s_residual, state.k0, grid, params)


def hj_rhs(state: HydroState, grid: GridSpec, params: SimulationParams) -> np.ndarray:
    """Kinetic, quantum and external terms of the Hamilton-Jacobi equation."""
    params.check_grid(grid)
    potential = potential_field(params.potential, grid)
    return _hamilton_jacobi(state.rho, state.s_residual, state.k0, grid, params, potential)


# ==========================================
# Time stepping
# ==========================================

def _rk4(rho, s, k0, grid: GridSpec, params: SimulationParams, potential: np.ndarray):
    dt = params.dt

    def rates(r, sr):
        return _continuity(r, sr, k0, grid, params), _hamilton_jacobi(r, sr, k0, grid, params, potential)

    k1r, k1s = rates(rho, s)
    k2r, k2s = rates(rho + 0.5 * dt * k1r, s + 0.5 * dt * k1s)
    k3r, k3s = rates(rho + 0.5 * dt * k2r, s + 0.5 * dt * k2s)
    k4r, k4s = rates(rho + dt * k3r, s + dt * k3s)

    rho_next = rho + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    s_next = s + (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return rho_next, s_next


def _advance(state: HydroState, grid: GridSpec, params: SimulationParams, potential: np.ndarray) -> HydroState:
    rho, s = _rk4(state.rho, state.s_residual, state.k0, grid, params, potential)

    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(s))):
        raise NonFiniteError(f"non-finite field values at t={state.t + params.dt:.6g}")

    peak = float(np.max(rho))
    lowest = float(np.min(rho))
    if lowest < -NEGATIVE_DENSITY_TOLERANCE * peak:
        raise NegativeDensityError(f"density {lowest:.3e} below -{NEGATIVE_DENSITY_TOLERANCE:.0e} * max(rho)")
    if lowest < 0.0:
        rho = np.maximum(rho, 0.0)

    correction = state.norm_correction
    norm = grid.integrate(rho)
    drift = norm - 1.0
    if abs(drift) > RENORMALISE_THRESHOLD:
        logger.warning("Renormalising density at t=%.6g, norm drift %.3e", state.t + params.dt, drift)
        rho = rho / norm
        correction += abs(drift)

    return HydroState(
        t=state.t + params.dt,
        rho=rho,
        s_residual=s,
        k0=state.k0,
        norm_correction=correction,
    )


def step(state: HydroState, grid: GridSpec, params: SimulationParams) -> HydroState:
    """One classical RK4 step of the coupled (rho, S) system."""
    params.check_grid(grid)
    check_stability(state, grid, params)
    return _advance(state, grid, params, potential_field(params.potential, grid))
