"""
Wave-function reference integrator.

Maps between HydroState and psi = sqrt(rho) exp(i S / lambda) and propagates
psi with a Strang-split spectral scheme for

    i lambda d psi / dt = -sum_i lambda^2 / 2 m_i lap_i psi + U psi

The scheme shares nothing with the finite-difference solver except the grid,
so agreement between the two is an independent check of the dynamics.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy import fft

from madelung_core.grid import GridSpec
from madelung_core.potential import PotentialSpec
from madelung_core.state import ComplexField, DofParams, HydroState
from madelung_core.stencil import spatial_derivative

from .dynamics import DEFAULT_RHO_FLOOR, potential_field


logger = logging.getLogger(__name__)

# wrapped phase jump between neighbouring resolved points that signals a node
NODE_PHASE_JUMP = 0.5 * np.pi


class NodeError(ValueError):
    """The wave function vanishes somewhere, so its phase is undefined."""


def uniform_lambda(lam: Union[float, Sequence[float], Sequence[DofParams]]) -> float:
    """Single lambda shared by every degree of freedom; raises ValueError otherwise."""
    if np.isscalar(lam):
        values = [float(lam)]
    else:
        values = [float(v.lam) if isinstance(v, DofParams) else float(v) for v in lam]
    if not values:
        raise ValueError("no lambda given")
    if any(v != values[0] for v in values):
        raise ValueError(f"no wave function exists for non-uniform lambda {values}")
    if not values[0] > 0:
        raise ValueError(f"wave function needs lambda > 0, got {values[0]}")
    return values[0]


# ==========================================
# State <-> wave function
# ==========================================

def to_wavefunction(state: HydroState, grid: GridSpec, lam) -> ComplexField:
    """psi = sqrt(rho) * exp(i S / lambda) with S = k0 . x + s_residual."""
    lam = uniform_lambda(lam)
    psi = np.sqrt(np.maximum(state.rho, 0.0)) * np.exp(1j * state.action(grid) / lam)
    return ComplexField(psi=psi, t=state.t)


def _mean_wavenumber(psi: np.ndarray, grid: GridSpec, axis: int) -> float:
    weight = grid.integrate(np.abs(psi) ** 2)
    current = grid.integrate(np.imag(np.conj(psi) * spatial_derivative(psi, grid, axis, 1)))
    return current / weight


def _check_nodes(rho: np.ndarray, phase: np.ndarray, rho_floor: float) -> None:
    resolved = rho > rho_floor * float(np.max(rho))
    for axis in range(rho.ndim):
        ahead = np.roll(resolved, -1, axis=axis)
        behind = np.roll(resolved, 1, axis=axis)

        # an unresolved point squeezed between resolved neighbours is a node
        holes = ~resolved & ahead & behind
        if holes.any():
            where = tuple(int(i) for i in np.argwhere(holes)[0])
            raise NodeError(f"node detected at grid index {where} (density below floor)")

        jump = np.abs(np.angle(np.exp(1j * (np.roll(phase, -1, axis=axis) - phase))))
        sign_flips = resolved & ahead & (jump > NODE_PHASE_JUMP)
        if sign_flips.any():
            where = tuple(int(i) for i in np.argwhere(sign_flips)[0])
            raise NodeError(f"node detected near grid index {where} (phase jump {float(jump[where]):.3f})")


def from_wavefunction(
    psi: ComplexField,
    grid: GridSpec,
    lam,
    k0_hint: Optional[Sequence[float]] = None,
    rho_floor: float = DEFAULT_RHO_FLOOR,
) -> HydroState:
    """
    Inverse of to_wavefunction.

    The winding is absorbed into k0, the grid-commensurate wavenumber nearest to
    ``k0_hint`` (default: the mean momentum of psi). The remaining phase is
    unwrapped along dimension 0 first, then 1, then 2, starting at the grid
    origin, so the result does not depend on any other path choice.
    """
    lam = uniform_lambda(lam)
    values = np.asarray(psi.psi, dtype=complex)
    if values.shape != grid.shape:
        raise ValueError(f"psi shape {values.shape} does not match grid {grid.shape}")

    rho = np.abs(values) ** 2
    if not float(np.max(rho)) > 0:
        raise NodeError("wave function vanishes identically")

    if k0_hint is None:
        k0_hint = [lam * _mean_wavenumber(values, grid, axis) for axis in range(grid.ndim)]
    if len(k0_hint) != grid.ndim:
        raise ValueError(f"k0_hint has {len(k0_hint)} entries for a {grid.ndim}-D grid")
    k0 = tuple(lam * grid.commensurate_wavenumber(axis, k / lam) for axis, k in enumerate(k0_hint))

    carrier = np.zeros(grid.shape)
    for k, x in zip(k0, grid.mesh()):
        carrier = carrier + k * x
    phase = np.angle(values * np.exp(-1j * carrier / lam))
    _check_nodes(rho, phase, rho_floor)

    for axis in range(grid.ndim):
        phase = np.unwrap(phase, axis=axis)

    return HydroState(t=psi.t, rho=rho, s_residual=lam * phase, k0=k0)


# ==========================================
# Split-step propagation
# ==========================================

class SplitStepPropagator:
    """
    Strang splitting exp(-i U dt / 2 lambda) F^-1 exp(-i lambda k^2 dt / 2 m) F exp(-i U dt / 2 lambda).

    Phase factors are computed once per (grid, dofs, potential, dt).
    """

    def __init__(self, grid: GridSpec, dofs: Sequence[DofParams], potential: PotentialSpec, dt: float, lam=None):
        self.logger = logging.getLogger(self.__class__.__name__)

        dofs = tuple(dofs)
        if len(dofs) != grid.ndim:
            raise ValueError(f"{len(dofs)} degrees of freedom for a {grid.ndim}-D grid")
        odd = [n for n in grid.shape if n % 2]
        if odd:
            raise ValueError(f"split-step needs an even number of points per dimension, got {grid.shape}")
        if dt < 0:
            raise ValueError(f"dt must be non-negative, got {dt}")

        self.grid = grid
        self.dt = float(dt)
        self.lam = uniform_lambda(lam if lam is not None else dofs)
        if lam is not None and any(d.lam != self.lam for d in dofs):
            raise ValueError("lambda argument disagrees with the degrees of freedom")

        u = potential_field(potential, grid)
        self._half_potential = np.exp(-0.5j * u * self.dt / self.lam)

        kinetic = np.zeros(grid.shape)
        for axis, (dim, dof) in enumerate(zip(grid.dims, dofs)):
            k = 2.0 * np.pi * fft.fftfreq(dim.n_points, d=dim.spacing)
            shape = [1] * grid.ndim
            shape[axis] = dim.n_points
            kinetic = kinetic + (k ** 2).reshape(shape) / (2.0 * dof.mass)
        self._kinetic = np.exp(-1j * self.lam * kinetic * self.dt)

    def step(self, psi: ComplexField) -> ComplexField:
        if psi.psi.shape != self.grid.shape:
            raise ValueError(f"psi shape {psi.psi.shape} does not match grid {self.grid.shape}")
        if self.dt == 0:
            return ComplexField(psi=np.array(psi.psi, dtype=complex, copy=True), t=psi.t)

        values = psi.psi * self._half_potential
        values = fft.ifftn(fft.fftn(values) * self._kinetic)
        values = values * self._half_potential
        return ComplexField(psi=values, t=psi.t + self.dt)

    def run(self, psi: ComplexField, n_steps: int) -> ComplexField:
        if n_steps < 0:
            raise ValueError(f"n_steps must be non-negative, got {n_steps}")
        start = psi.norm(self.grid)
        for _ in range(n_steps):
            psi = self.step(psi)
        self.logger.debug(f"{n_steps} split steps, norm drift {psi.norm(self.grid) - start:.3e}")
        return psi


def split_step(
    psi: ComplexField,
    grid: GridSpec,
    dofs: Sequence[DofParams],
    potential: PotentialSpec,
    dt: float,
    lam=None,
) -> ComplexField:
    """One Strang step; norm preserved to rounding."""
    return SplitStepPropagator(grid, dofs, potential, dt, lam).step(psi)
