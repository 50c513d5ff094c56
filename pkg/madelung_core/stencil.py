"""Periodic 4th-order central finite differences (5-point stencils)."""

import numpy as np

from .grid import GridSpec


def spatial_derivative(values: np.ndarray, grid: GridSpec, axis: int, order: int = 1) -> np.ndarray:
    """
    First or second derivative along ``axis`` with periodic wrap-around.

    Works on real and complex fields. The first-derivative operator is
    antisymmetric, so sum(f * D g) == -sum(D f * g) up to rounding.
    """
    if not 0 <= axis < grid.ndim:
        raise ValueError(f"axis {axis} out of range for a {grid.ndim}-D grid")
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")

    h = grid.spacings[axis]
    f_p1 = np.roll(values, -1, axis=axis)
    f_p2 = np.roll(values, -2, axis=axis)
    f_m1 = np.roll(values, 1, axis=axis)
    f_m2 = np.roll(values, 2, axis=axis)

    if order == 1:
        # Grouped so that constant fields give exactly zero.
        return ((f_m2 - f_p2) + 8.0 * (f_p1 - f_m1)) / (12.0 * h)
    if order == 2:
        return (-(f_p2 + f_m2) + 16.0 * (f_p1 + f_m1) - 30.0 * values) / (12.0 * h * h)

    raise ValueError(f"order must be 1 or 2, got {order}")


def gradient(values: np.ndarray, grid: GridSpec) -> list:
    return [spatial_derivative(values, grid, axis, 1) for axis in range(grid.ndim)]


def divergence(components: list, grid: GridSpec) -> np.ndarray:
    """Sum of D_i(component_i); sums to zero over the grid for periodic fields."""
    total = np.zeros(grid.shape, dtype=np.result_type(*components))
    for axis, component in enumerate(components):
        total = total + spatial_derivative(component, grid, axis, 1)
    return total


def floored_density(rho: np.ndarray, rho_floor: float):
    """
    Density floored at rho_floor * max(rho).

    Returns (rho_f, floored) where ``floored`` marks the points that sat below
    the relative floor (or at zero).
    """
    peak = float(np.max(rho)) if rho.size else 0.0
    floor = rho_floor * peak
    floored = (rho < floor) | (rho <= 0.0)
    return np.maximum(rho, floor), floored


def log_derivative(rho_f: np.ndarray, floored: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """D_i rho / rho on a floored density; zero-density points divide by one."""
    safe = np.where(floored & (rho_f <= 0.0), 1.0, rho_f)
    return spatial_derivative(rho_f, grid, axis, 1) / safe
