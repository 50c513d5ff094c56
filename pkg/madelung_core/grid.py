"""Periodic uniform configuration-space grids."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np


MIN_POINTS = 8
MAX_DIMS = 3


class GridError(ValueError):
    """Raised when a grid description violates the grid invariants."""


@dataclass(frozen=True)
class DimSpec:
    """One periodic dimension: [x_min, x_max) sampled at n_points."""

    x_min: float
    x_max: float
    n_points: int

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    def coordinates(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)

    def to_dict(self) -> Dict[str, Any]:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid over D <= 3 degrees of freedom."""

    dims: Tuple[DimSpec, ...]
    _mesh: Tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(d.n_points for d in self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacings(self) -> Tuple[float, ...]:
        return tuple(d.spacing for d in self.dims)

    @property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(d.length for d in self.dims)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.dims[axis].coordinates()

    def mesh(self) -> Tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the full grid shape."""
        if not self._mesh:
            coords = [d.coordinates() for d in self.dims]
            object.__setattr__(self, "_mesh", tuple(np.meshgrid(*coords, indexing="ij")))
        return self._mesh

    def integrate(self, values: np.ndarray) -> float:
        """Rectangle-rule quadrature; exact for trigonometric polynomials on a torus."""
        return float(np.sum(values) * self.cell_volume)

    def commensurate_wavenumber(self, axis: int, k: float) -> float:
        """Nearest k with k·L a multiple of 2π along ``axis``."""
        step = 2.0 * np.pi / self.dims[axis].length
        return float(np.round(k / step) * step)

    def to_dict(self) -> Dict[str, Any]:
        return {"dims": [d.to_dict() for d in self.dims]}

    @classmethod
    def from_dict(cls, data: Union[Dict[str, Any], Sequence[Dict[str, Any]]]) -> "GridSpec":
        dims = data["dims"] if isinstance(data, dict) else data
        return make_grid(dims)


DimLike = Union[DimSpec, Dict[str, Any], Sequence[float]]


def _as_dim(item: DimLike) -> DimSpec:
    if isinstance(item, DimSpec):
        return item
    if isinstance(item, dict):
        return DimSpec(float(item["x_min"]), float(item["x_max"]), int(item["n_points"]))
    x_min, x_max, n_points = item
    return DimSpec(float(x_min), float(x_max), int(n_points))


def make_grid(dims: Sequence[DimLike]) -> GridSpec:
    """Validate per-dimension records and build a GridSpec."""
    records: List[DimSpec] = [_as_dim(item) for item in dims]

    if not records:
        raise GridError("grid needs at least one dimension")
    if len(records) > MAX_DIMS:
        raise GridError(f"grid has {len(records)} dimensions, at most {MAX_DIMS} supported")

    for axis, dim in enumerate(records):
        if dim.n_points < MIN_POINTS:
            raise GridError(f"dimension {axis}: n_points={dim.n_points} < {MIN_POINTS}")
        if not np.isfinite(dim.x_min) or not np.isfinite(dim.x_max):
            raise GridError(f"dimension {axis}: non-finite bounds")
        if dim.x_max <= dim.x_min:
            raise GridError(f"dimension {axis}: x_max={dim.x_max} must exceed x_min={dim.x_min}")

    return GridSpec(tuple(records))
