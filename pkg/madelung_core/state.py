"""
Hydrodynamic state (rho, S), its wave-function view, and initial-state constructors.

Natural units with hbar = 1. The action is stored as a linear background
k0 . x plus a periodic residual, since a linear S is not single-valued on a torus.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from .grid import GridSpec


logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-9
TAIL_MASS_LIMIT = 1e-10
MIN_SIGMA_CELLS = 3.0


class StateError(ValueError):
    """Raised when a state or constructor request violates the state invariants."""


@dataclass(frozen=True)
class DofParams:
    """Mass and quantum strength of one degree of freedom (lambda in units of hbar)."""

    mass: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise StateError(f"mass must be positive, got {self.mass}")
        if not self.lam >= 0:
            raise StateError(f"lambda must be non-negative, got {self.lam}")

    def to_dict(self) -> Dict[str, float]:
        return {"mass": self.mass, "lambda": self.lam}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DofParams":
        return cls(mass=float(data.get("mass", 1.0)), lam=float(data.get("lambda", 1.0)))


@dataclass(frozen=True)
class HydroState:
    """Density rho and action S = k0 . x + s_residual at time t."""

    t: float
    rho: np.ndarray
    s_residual: np.ndarray
    k0: Tuple[float, ...]
    # cumulative |norm - 1| removed by renormalisation during evolution
    norm_correction: float = 0.0

    def norm(self, grid: GridSpec) -> float:
        return grid.integrate(self.rho)

    def action(self, grid: GridSpec) -> np.ndarray:
        """Full S on the grid (background plus residual)."""
        s = np.array(self.s_residual, dtype=float, copy=True)
        for k, x in zip(self.k0, grid.mesh()):
            s = s + k * x
        return s

    def with_fields(self, **changes) -> "HydroState":
        return replace(self, **changes)

    def validate(self, grid: GridSpec, tolerance: float = NORM_TOLERANCE) -> "HydroState":
        if self.rho.shape != grid.shape or self.s_residual.shape != grid.shape:
            raise StateError(f"state fields have shape {self.rho.shape}, grid is {grid.shape}")
        if len(self.k0) != grid.ndim:
            raise StateError(f"k0 has {len(self.k0)} entries for a {grid.ndim}-D grid")
        if np.any(self.rho < 0):
            raise StateError(f"negative density, min={self.rho.min():.3e}")
        drift = abs(self.norm(grid) - 1.0)
        if drift > tolerance:
            raise StateError(f"density not normalised: |norm - 1| = {drift:.3e}")
        return self


@dataclass(frozen=True)
class ComplexField:
    """Wave function psi on the grid."""

    psi: np.ndarray
    t: float = 0.0

    def norm(self, grid: GridSpec) -> float:
        return grid.integrate(np.abs(self.psi) ** 2)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2


# ==========================================
# Constructors
# ==========================================

def _per_dim(values, ndim: int, name: str) -> Tuple[float, ...]:
    values = tuple(float(v) for v in np.atleast_1d(values))
    if len(values) == 1 and ndim > 1:
        values = values * ndim
    if len(values) != ndim:
        raise StateError(f"{name} has {len(values)} entries for a {ndim}-D grid")
    return values


def _normalise(rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    return rho / grid.integrate(rho)


def _wrapped_gaussian(grid: GridSpec, axis: int, center: float, sigma: float) -> np.ndarray:
    dim = grid.dims[axis]
    x = dim.coordinates()

    tail = 0.5 * erfc((center - dim.x_min) / (sigma * np.sqrt(2.0))) + 0.5 * erfc(
        (dim.x_max - center) / (sigma * np.sqrt(2.0))
    )
    if tail >= TAIL_MASS_LIMIT:
        raise StateError(
            f"dimension {axis}: Gaussian mass outside the box is {tail:.2e} (limit {TAIL_MASS_LIMIT:.0e})"
        )

    profile = np.zeros_like(x)
    for image in (-1, 0, 1):
        profile += np.exp(-((x - center + image * dim.length) ** 2) / (2.0 * sigma ** 2))
    return profile


def _check_resolved(grid: GridSpec, sigma: Tuple[float, ...]) -> None:
    for axis, (s, h) in enumerate(zip(sigma, grid.spacings)):
        if not s > 0:
            raise StateError(f"dimension {axis}: sigma must be positive, got {s}")
        if s < MIN_SIGMA_CELLS * h:
            raise StateError(
                f"dimension {axis}: sigma={s} under-resolved (needs >= {MIN_SIGMA_CELLS} * dx = {MIN_SIGMA_CELLS * h})"
            )


def _separable(grid: GridSpec, profiles) -> np.ndarray:
    rho = np.ones(grid.shape)
    for axis, profile in enumerate(profiles):
        shape = [1] * grid.ndim
        shape[axis] = grid.shape[axis]
        rho = rho * profile.reshape(shape)
    return rho


def sample_gaussian(grid: GridSpec, center, sigma, p0, t: float = 0.0) -> HydroState:
    """Normalised periodic-wrapped Gaussian with linear action p0 . x (k0 = p0)."""
    center = _per_dim(center, grid.ndim, "center")
    sigma = _per_dim(sigma, grid.ndim, "sigma")
    p0 = _per_dim(p0, grid.ndim, "p0")
    _check_resolved(grid, sigma)

    profiles = [_wrapped_gaussian(grid, axis, c, s) for axis, (c, s) in enumerate(zip(center, sigma))]
    rho = _normalise(_separable(grid, profiles), grid)
    return HydroState(t=t, rho=rho, s_residual=np.zeros(grid.shape), k0=p0)


def double_gaussian(grid: GridSpec, centers: Sequence, sigma, p0=0.0, weights: Optional[Sequence[float]] = None) -> HydroState:
    """Normalised sum of Gaussian bumps sharing one width."""
    if not centers:
        raise StateError("double_gaussian needs at least one center")
    weights = list(weights) if weights is not None else [1.0] * len(centers)
    if len(weights) != len(centers):
        raise StateError("weights and centers differ in length")

    sigma = _per_dim(sigma, grid.ndim, "sigma")
    _check_resolved(grid, sigma)
    rho = np.zeros(grid.shape)
    for w, c in zip(weights, centers):
        c = _per_dim(c, grid.ndim, "center")
        profiles = [_wrapped_gaussian(grid, axis, ca, sa) for axis, (ca, sa) in enumerate(zip(c, sigma))]
        bump = _separable(grid, profiles)
        rho = rho + w * bump / grid.integrate(bump)

    return HydroState(
        t=0.0,
        rho=_normalise(rho, grid),
        s_residual=np.zeros(grid.shape),
        k0=_per_dim(p0, grid.ndim, "p0"),
    )


def _snap(grid: GridSpec, axis: int, k: float) -> float:
    snapped = grid.commensurate_wavenumber(axis, k)
    # already commensurate up to rounding: keep the requested value bit-exact
    if abs(snapped - k) <= 1e-12 * max(1.0, abs(k)):
        return k
    return snapped


def plane_wave(grid: GridSpec, p0, t: float = 0.0) -> HydroState:
    """Uniform density with k0 snapped to the nearest grid-commensurate wavenumber."""
    requested = _per_dim(p0, grid.ndim, "p0")
    snapped = tuple(_snap(grid, axis, k) for axis, k in enumerate(requested))
    for axis, (want, got) in enumerate(zip(requested, snapped)):
        if want != got:
            logger.warning("Plane wave k0 snapped on axis %d: %.17g -> %.17g", axis, want, got)

    rho = np.full(grid.shape, 1.0 / float(np.prod(grid.lengths)))
    return HydroState(t=t, rho=rho, s_residual=np.zeros(grid.shape), k0=snapped)


def harmonic_width(stiffness: float, dof: DofParams) -> float:
    """Position spread of the harmonic ground state, sqrt(lambda / (2 m omega))."""
    if not stiffness > 0:
        raise StateError("harmonic width needs positive stiffness")
    if not dof.lam > 0:
        raise StateError("harmonic ground state needs lambda > 0")
    omega = np.sqrt(stiffness / dof.mass)
    return float(np.sqrt(dof.lam / (2.0 * dof.mass * omega)))


def harmonic_ground_state(grid: GridSpec, dofs: Sequence[DofParams], stiffness, center=0.0) -> HydroState:
    """rho proportional to exp(-m omega (x - c)^2 / lambda) per dimension, S = 0."""
    stiffness = _per_dim(stiffness, grid.ndim, "stiffness")
    sigma = [harmonic_width(k, dof) for k, dof in zip(stiffness, dofs)]
    return sample_gaussian(grid, center, sigma, 0.0)


def coherent_state(grid: GridSpec, dofs: Sequence[DofParams], stiffness, displacement, center=0.0) -> HydroState:
    """Ground-state-width Gaussian displaced from the potential minimum, at rest."""
    stiffness = _per_dim(stiffness, grid.ndim, "stiffness")
    center = _per_dim(center, grid.ndim, "center")
    displacement = _per_dim(displacement, grid.ndim, "displacement")
    sigma = [harmonic_width(k, dof) for k, dof in zip(stiffness, dofs)]
    return sample_gaussian(grid, [c + d for c, d in zip(center, displacement)], sigma, 0.0)
