"""
Ensemble statistics of a HydroState.

Local quantities are fields on the grid (p_bar = dS, local momentum variance,
local energy H_bar); global ones are rho-weighted grid integrals with N = 1.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from madelung_core.grid import GridSpec
from madelung_core.state import HydroState
from madelung_core.stencil import floored_density, log_derivative, spatial_derivative

from .dynamics import DEFAULT_RHO_FLOOR, SimulationParams, potential_field, hj_rhs


logger = logging.getLogger(__name__)

LOCALISATION_THRESHOLD = 1e-6
UNCERTAINTY_RELATIVE_SLACK = 1e-9


@dataclass(frozen=True)
class ObservableReport:
    """One time sample of the global statistics."""

    t: float
    norm: float
    mean_x: Tuple[float, ...]
    delta_x: Tuple[float, ...]
    mean_p: Tuple[float, ...]
    delta_p: Tuple[float, ...]
    energy: float
    axiom1_residual: float
    uncertainty_product: Tuple[float, ...]

    @property
    def n_dofs(self) -> int:
        return len(self.mean_x)

    @staticmethod
    def csv_header(n_dofs: int) -> List[str]:
        columns = ["t", "norm", "energy", "axiom1_residual"]
        for i in range(n_dofs):
            columns += [f"mean_x_{i}", f"delta_x_{i}", f"mean_p_{i}", f"delta_p_{i}", f"uncertainty_{i}"]
        return columns

    def csv_values(self) -> List[float]:
        values = [self.t, self.norm, self.energy, self.axiom1_residual]
        for i in range(self.n_dofs):
            values += [self.mean_x[i], self.delta_x[i], self.mean_p[i], self.delta_p[i], self.uncertainty_product[i]]
        return values

    def csv_row(self) -> List[str]:
        # 17 significant digits round-trip a float64 exactly
        return [f"{v:.17g}" for v in self.csv_values()]


@dataclass(frozen=True)
class UncertaintyVerdict:
    product: float
    bound: float
    satisfied: bool


# ==========================================
# Local fields
# ==========================================

def local_mean_momentum(state: HydroState, grid: GridSpec, axis: int) -> np.ndarray:
    """p_bar_i = d_i S including the k0 background."""
    return state.k0[axis] + spatial_derivative(state.s_residual, grid, axis, 1)


def _log_derivative(state: HydroState, grid: GridSpec, axis: int, rho_floor: float) -> np.ndarray:
    rho_f, floored = floored_density(state.rho, rho_floor)
    return log_derivative(rho_f, floored, grid, axis)


def local_momentum_variance(
    state: HydroState,
    grid: GridSpec,
    lambda_i: float,
    kappa: float,
    axis: int,
    rho_floor: float = DEFAULT_RHO_FLOOR,
) -> np.ndarray:
    """(delta p_i)^2 = kappa * lambda_i^2 * (d_i rho / rho)^2."""
    if lambda_i == 0:
        return np.zeros(grid.shape)
    g = _log_derivative(state, grid, axis, rho_floor)
    return kappa * lambda_i ** 2 * g * g


def local_energy(state: HydroState, grid: GridSpec, params: SimulationParams) -> np.ndarray:
    """H_bar(x) = sum_i [p_bar_i^2 + (delta p_i)^2] / 2 m_i + U."""
    energy = np.array(potential_field(params.potential, grid), copy=True)
    for axis, dof in enumerate(params.dofs):
        p = local_mean_momentum(state, grid, axis)
        variance = local_momentum_variance(state, grid, dof.lam, params.kappa, axis, params.rho_floor)
        energy += (p * p + variance) / (2.0 * dof.mass)
    return energy


def fisher_information(state: HydroState, grid: GridSpec, axis: int, rho_floor: float = DEFAULT_RHO_FLOOR) -> float:
    """F_i = integral of (d_i rho)^2 / rho; (Delta p_i)^2 = kappa lambda_i^2 F_i."""
    g = _log_derivative(state, grid, axis, rho_floor)
    return grid.integrate(state.rho * g * g)


# ==========================================
# Global statistics
# ==========================================

def _marginal(rho: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    others = tuple(a for a in range(grid.ndim) if a != axis)
    return np.sum(rho, axis=others) * grid.cell_volume if others else rho * grid.cell_volume


def position_moments(state: HydroState, grid: GridSpec, axis: int) -> Tuple[float, float]:
    """
    Mean and spread of x_axis on the torus.

    The marginal is recentred at its circular mean before taking moments, which
    is valid while the state is localised within half the box.
    """
    dim = grid.dims[axis]
    weights = _marginal(state.rho, grid, axis)
    x = dim.coordinates()

    theta = 2.0 * np.pi * (x - dim.x_min) / dim.length
    angle = np.arctan2(np.sum(weights * np.sin(theta)), np.sum(weights * np.cos(theta)))
    center = dim.x_min + dim.length * angle / (2.0 * np.pi)

    offset = np.mod(x - center + 0.5 * dim.length, dim.length) - 0.5 * dim.length
    total = float(np.sum(weights))
    shift = float(np.sum(weights * offset)) / total
    variance = float(np.sum(weights * (offset - shift) ** 2)) / total

    inside = float(np.sum(weights[np.abs(offset - shift) <= 0.25 * dim.length])) / total
    if inside < 1.0 - LOCALISATION_THRESHOLD:
        logger.warning(
            "State not localised on axis %d (%.3e of the mass outside half the box); delta_x is unreliable",
            axis,
            1.0 - inside,
        )

    mean = np.mod(center + shift - dim.x_min, dim.length) + dim.x_min
    return float(mean), float(np.sqrt(variance))


def axiom1_residual(state: HydroState, grid: GridSpec, params: SimulationParams) -> float:
    """
    Integral of rho * (dS/dt + H_bar) with dS/dt from the realised dynamics.

    Vanishes (to rounding) for kappa = 1/4; grows linearly with kappa otherwise.
    """
    integrand = state.rho * (hj_rhs(state, grid, params) + local_energy(state, grid, params))
    return grid.integrate(integrand)


def global_stats(state: HydroState, grid: GridSpec, params: SimulationParams) -> ObservableReport:
    params.check_grid(grid)
    rho = state.rho

    mean_x: List[float] = []
    delta_x: List[float] = []
    mean_p: List[float] = []
    delta_p: List[float] = []
    for axis, dof in enumerate(params.dofs):
        mx, dx = position_moments(state, grid, axis)
        mean_x.append(mx)
        delta_x.append(dx)
        mean_p.append(grid.integrate(rho * local_mean_momentum(state, grid, axis)))
        variance = local_momentum_variance(state, grid, dof.lam, params.kappa, axis, params.rho_floor)
        delta_p.append(float(np.sqrt(grid.integrate(rho * variance))))

    report = ObservableReport(
        t=state.t,
        norm=state.norm(grid),
        mean_x=tuple(mean_x),
        delta_x=tuple(delta_x),
        mean_p=tuple(mean_p),
        delta_p=tuple(delta_p),
        energy=grid.integrate(rho * local_energy(state, grid, params)),
        axiom1_residual=axiom1_residual(state, grid, params),
        uncertainty_product=tuple(a * b for a, b in zip(delta_x, delta_p)),
    )
    logger.debug("t=%.6g norm=%.15g energy=%.15g residual=%.3e", report.t, report.norm, report.energy, report.axiom1_residual)
    return report


# ==========================================
# Uncertainty relations
# ==========================================

def uncertainty_check(report: ObservableReport, lambdas: Sequence[float], kappa: float) -> List[UncertaintyVerdict]:
    """Delta x_i * Delta p_i >= sqrt(kappa) * lambda_i per degree of freedom."""
    verdicts = []
    for product, lam in zip(report.uncertainty_product, lambdas):
        bound = float(np.sqrt(kappa) * lam)
        verdicts.append(
            UncertaintyVerdict(
                product=product,
                bound=bound,
                satisfied=product >= bound * (1.0 - UNCERTAINTY_RELATIVE_SLACK),
            )
        )
    return verdicts


def cramer_rao_check(state: HydroState, grid: GridSpec, rho_floor: float = DEFAULT_RHO_FLOOR) -> List[float]:
    """(Delta x_i)^2 * F_i per axis; >= 1 for any localised density, = 1 for Gaussians."""
    values = []
    for axis in range(grid.ndim):
        _, spread = position_moments(state, grid, axis)
        values.append(spread ** 2 * fisher_information(state, grid, axis, rho_floor))
    return values
