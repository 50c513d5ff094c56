"""External potentials U(x) evaluated on a grid."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np

from .grid import GridSpec


class PotentialKind(Enum):
    FREE = "free"
    HARMONIC = "harmonic"
    POLYNOMIAL = "polynomial"
    GAUSSIAN_BARRIER = "gaussian_barrier"


# Allowed keys per kind, besides "kind" itself.
_KIND_KEYS = {
    PotentialKind.FREE: set(),
    PotentialKind.HARMONIC: {"stiffness", "center"},
    PotentialKind.POLYNOMIAL: {"coefficients"},
    PotentialKind.GAUSSIAN_BARRIER: {"height", "center", "width"},
}


@dataclass(frozen=True)
class PotentialSpec:
    """
    Tagged potential description.

    Harmonic:          U = sum_d 1/2 k_d (x_d - c_d)^2
    Polynomial:        U = sum_d sum_j coefficients[d][j] x_d^j
    GaussianBarrier:   U = height * exp(-sum_d (x_d - c_d)^2 / (2 width^2))
    """

    kind: PotentialKind = PotentialKind.FREE
    stiffness: Tuple[float, ...] = ()
    center: Tuple[float, ...] = ()
    coefficients: Tuple[Tuple[float, ...], ...] = ()
    height: float = 0.0
    width: float = 1.0

    @classmethod
    def free(cls) -> "PotentialSpec":
        return cls(PotentialKind.FREE)

    @classmethod
    def harmonic(cls, stiffness, center=None) -> "PotentialSpec":
        stiffness = tuple(float(k) for k in np.atleast_1d(stiffness))
        center = tuple(float(c) for c in np.atleast_1d(center)) if center is not None else (0.0,) * len(stiffness)
        return cls(PotentialKind.HARMONIC, stiffness=stiffness, center=center)

    @classmethod
    def polynomial(cls, coefficients) -> "PotentialSpec":
        if coefficients and np.isscalar(coefficients[0]):
            coefficients = [coefficients]
        return cls(
            PotentialKind.POLYNOMIAL,
            coefficients=tuple(tuple(float(c) for c in per_dim) for per_dim in coefficients),
        )

    @classmethod
    def gaussian_barrier(cls, height: float, center, width: float) -> "PotentialSpec":
        return cls(
            PotentialKind.GAUSSIAN_BARRIER,
            height=float(height),
            center=tuple(float(c) for c in np.atleast_1d(center)),
            width=float(width),
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PotentialSpec":
        try:
            kind = PotentialKind(data.get("kind", "free"))
        except ValueError:
            raise ValueError(f"unknown potential kind {data.get('kind')!r}") from None

        unknown = set(data) - {"kind"} - _KIND_KEYS[kind]
        if unknown:
            raise ValueError(f"unknown key(s) for {kind.value} potential: {', '.join(sorted(unknown))}")

        if kind == PotentialKind.HARMONIC:
            return cls.harmonic(data["stiffness"], data.get("center"))
        if kind == PotentialKind.POLYNOMIAL:
            return cls.polynomial(data["coefficients"])
        if kind == PotentialKind.GAUSSIAN_BARRIER:
            return cls.gaussian_barrier(data["height"], data["center"], data["width"])
        return cls.free()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind == PotentialKind.HARMONIC:
            data.update(stiffness=list(self.stiffness), center=list(self.center))
        elif self.kind == PotentialKind.POLYNOMIAL:
            data["coefficients"] = [list(c) for c in self.coefficients]
        elif self.kind == PotentialKind.GAUSSIAN_BARRIER:
            data.update(height=self.height, center=list(self.center), width=self.width)
        return data

    def shifted(self, offset) -> "PotentialSpec":
        """The same potential translated by ``offset`` (per dimension)."""
        offset = np.atleast_1d(offset).astype(float)
        if self.kind in (PotentialKind.HARMONIC, PotentialKind.GAUSSIAN_BARRIER):
            return PotentialSpec(
                self.kind,
                stiffness=self.stiffness,
                center=tuple(float(c + o) for c, o in zip(self.center, offset)),
                height=self.height,
                width=self.width,
            )
        if self.kind == PotentialKind.POLYNOMIAL:
            raise ValueError("polynomial potentials cannot be shifted in place")
        return self


def _per_dim(values: Tuple[float, ...], ndim: int, name: str) -> Tuple[float, ...]:
    if len(values) == 1 and ndim > 1:
        return values * ndim
    if len(values) != ndim:
        raise ValueError(f"{name} has {len(values)} entries for a {ndim}-D grid")
    return values


def evaluate_potential(spec: PotentialSpec, grid: GridSpec) -> np.ndarray:
    """U(x) at every grid point."""
    mesh = grid.mesh()
    result = np.zeros(grid.shape)

    if spec.kind == PotentialKind.HARMONIC:
        stiffness = _per_dim(spec.stiffness, grid.ndim, "stiffness")
        center = _per_dim(spec.center, grid.ndim, "center")
        for x, k, c in zip(mesh, stiffness, center):
            result = result + 0.5 * k * (x - c) ** 2

    elif spec.kind == PotentialKind.POLYNOMIAL:
        if len(spec.coefficients) != grid.ndim:
            raise ValueError(f"polynomial has {len(spec.coefficients)} coefficient lists for a {grid.ndim}-D grid")
        for x, coeffs in zip(mesh, spec.coefficients):
            # Horner, highest power first
            term = np.zeros(grid.shape)
            for c in reversed(coeffs):
                term = term * x + c
            result = result + term

    elif spec.kind == PotentialKind.GAUSSIAN_BARRIER:
        if spec.width <= 0:
            raise ValueError("barrier width must be positive")
        center = _per_dim(spec.center, grid.ndim, "center")
        r2 = sum((x - c) ** 2 for x, c in zip(mesh, center))
        result = spec.height * np.exp(-r2 / (2.0 * spec.width ** 2))

    if not np.all(np.isfinite(result)):
        raise ValueError(f"{spec.kind.value} potential is not finite on the grid")

    return result
