"""
Variational consistency checker for candidate mu(rho, eta) models, eta = (grad rho)^2.

Q0 is the functional derivative of F[rho] = integral rho * mu; Q1 is the
functional derivative of G[rho] = integral rho * Q0[rho]. A model is
admissible when Q1 == Q0, which the family

    mu = a * eta / rho^2 + b / rho + c,    a >= 0

satisfies. Q1 is always obtained by brute-force bump perturbations so the
check never relies on the closed form it is testing.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from madelung_core.grid import GridSpec, make_grid
from madelung_core.state import StateError, plane_wave
from madelung_core.stencil import gradient, spatial_derivative

from .observables import local_mean_momentum


logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
GATEAUX_RELATIVE_EPSILON = 1e-6
PARTIAL_RELATIVE_STEP = 1e-4

MuRule = Callable[[np.ndarray, np.ndarray], np.ndarray]
Functional = Callable[[np.ndarray], float]


class ProbeError(ValueError):
    """Probe density unusable: touches zero, or a perturbation drives it negative."""


# ==========================================
# Models
# ==========================================

@dataclass(frozen=True)
class MuModel:
    """Either the admissible family (a, b, c) or a custom pointwise rule mu(rho, eta)."""

    kind: str = "family"
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    rule: Optional[MuRule] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("family", "custom"):
            raise ValueError(f"unknown mu model kind {self.kind!r}")
        if self.kind == "family" and not self.a >= 0:
            raise ValueError(f"family constant a must be non-negative, got {self.a}")
        if self.kind == "custom" and not callable(self.rule):
            raise ValueError("custom mu model needs a callable rule")

    @classmethod
    def family(cls, a: float, b: float = 0.0, c: float = 0.0) -> "MuModel":
        return cls("family", a=float(a), b=float(b), c=float(c), name=f"family(a={a:g}, b={b:g}, c={c:g})")

    @classmethod
    def custom(cls, rule: MuRule, name: str = "custom") -> "MuModel":
        return cls("custom", rule=rule, name=name)

    @property
    def is_family(self) -> bool:
        return self.kind == "family"

    def evaluate(self, rho: np.ndarray, eta: np.ndarray) -> np.ndarray:
        if self.is_family:
            return self.a * eta / rho ** 2 + self.b / rho + self.c
        return np.asarray(self.rule(rho, eta), dtype=float) * np.ones_like(rho)

    def __add__(self, other: "MuModel") -> "MuModel":
        if self.is_family and other.is_family:
            return MuModel.family(self.a + other.a, self.b + other.b, self.c + other.c)
        return MuModel.custom(lambda rho, eta: self.evaluate(rho, eta) + other.evaluate(rho, eta), f"{self.name} + {other.name}")

    def to_dict(self) -> Dict[str, Any]:
        if self.is_family:
            return {"kind": "family", "a": self.a, "b": self.b, "c": self.c}
        return {"kind": "custom", "name": self.name}


BUILTIN_RULES: Dict[str, MuRule] = {
    "eta": lambda rho, eta: eta,
    "rho_eta": lambda rho, eta: rho * eta,
    "fisher": lambda rho, eta: 0.25 * eta / rho ** 2,
}


def builtin_model(name: str) -> MuModel:
    try:
        return MuModel.custom(BUILTIN_RULES[name], name)
    except KeyError:
        raise ValueError(f"unknown built-in rule {name!r} (choose from {', '.join(sorted(BUILTIN_RULES))})") from None


@dataclass
class ProbeResult:
    name: str
    max_abs_dev: float


@dataclass
class ConsistencyReport:
    model: Dict[str, Any]
    probes: List[ProbeResult]
    tolerance_used: float

    @property
    def max_abs_deviation(self) -> float:
        return max((p.max_abs_dev for p in self.probes), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_abs_deviation <= self.tolerance_used

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "probes": [{"name": p.name, "max_abs_dev": p.max_abs_dev} for p in self.probes],
            "max_abs_deviation": self.max_abs_deviation,
            "tolerance": self.tolerance_used,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ==========================================
# Field helpers
# ==========================================

def _check_probe(rho: np.ndarray, grid: GridSpec) -> None:
    if rho.shape != grid.shape:
        raise ProbeError(f"probe shape {rho.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise ProbeError("probe density must be finite and strictly positive")


def squared_gradient(rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    """eta = sum_i (D_i rho)^2."""
    return sum(d * d for d in gradient(rho, grid))


def mu_functional(mu: MuModel, grid: GridSpec) -> Functional:
    """F[rho] = integral rho * mu(rho, eta)."""

    def functional(rho: np.ndarray) -> float:
        return grid.integrate(rho * mu.evaluate(rho, squared_gradient(rho, grid)))

    return functional


def _partials(mu: MuModel, rho: np.ndarray, eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h_rho = PARTIAL_RELATIVE_STEP * rho
    h_eta = PARTIAL_RELATIVE_STEP * (np.abs(eta) + 1e-3 * float(np.max(np.abs(eta))) + 1e-300)
    mu_rho = (mu.evaluate(rho + h_rho, eta) - mu.evaluate(rho - h_rho, eta)) / (2.0 * h_rho)
    mu_eta = (mu.evaluate(rho, eta + h_eta) - mu.evaluate(rho, eta - h_eta)) / (2.0 * h_eta)
    if not (np.all(np.isfinite(mu_rho)) and np.all(np.isfinite(mu_eta))):
        raise ProbeError(f"non-finite partial derivatives of {mu.name}")
    return mu_rho, mu_eta


def _family_closed_form(mu: MuModel, rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    # exact discrete variation of a * sum (D rho)^2 / rho + c * sum rho
    q = np.full(grid.shape, mu.c)
    if mu.a:
        for axis in range(grid.ndim):
            g = spatial_derivative(rho, grid, axis, 1) / rho
            q += mu.a * (-2.0 * spatial_derivative(g, grid, axis, 1) - g * g)
    return q


# ==========================================
# Q0, Q1 and the Gateaux oracle
# ==========================================

def q0_field(mu: MuModel, rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    """
    Q0 = d(rho mu)/d rho - sum_i D_i d(rho mu)/d(D_i rho).

    Family models use the closed form a * (-2 D g - g^2) + c with g = D rho / rho
    (continuum: -4 a lap sqrt(rho) / sqrt(rho) + c). Custom rules go through the
    Euler-Lagrange expression mu + rho mu_rho - sum_i D_i(2 rho mu_eta D_i rho).
    """
    _check_probe(rho, grid)
    if mu.is_family:
        return _family_closed_form(mu, rho, grid)

    eta = squared_gradient(rho, grid)
    mu_rho, mu_eta = _partials(mu, rho, eta)
    q = mu.evaluate(rho, eta) + rho * mu_rho
    for axis in range(grid.ndim):
        q -= spatial_derivative(2.0 * rho * mu_eta * spatial_derivative(rho, grid, axis, 1), grid, axis, 1)
    return q


def gateaux_derivative(functional: Functional, rho: np.ndarray, grid: GridSpec, epsilon: Optional[float] = None) -> np.ndarray:
    """
    Discrete functional gradient (F[rho + eps d_j] - F[rho - eps d_j]) / (2 eps dV).

    One bump per grid point; default eps = 1e-6 * max(rho).
    """
    rho = np.asarray(rho, dtype=float)
    if epsilon is None:
        epsilon = GATEAUX_RELATIVE_EPSILON * float(np.max(rho))
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if float(np.min(rho)) - epsilon <= 0:
        raise ProbeError(f"epsilon={epsilon:.3e} drives the density negative (min rho {float(np.min(rho)):.3e})")

    gradient = np.empty(grid.shape)
    work = rho.copy()
    for index in np.ndindex(*grid.shape):
        original = work[index]
        work[index] = original + epsilon
        upper = functional(work)
        work[index] = original - epsilon
        lower = functional(work)
        work[index] = original
        gradient[index] = (upper - lower) / (2.0 * epsilon * grid.cell_volume)
    return gradient


@dataclass
class Q1Result:
    numeric: np.ndarray
    closed_form: Optional[np.ndarray] = None


def q1_field(mu: MuModel, rho: np.ndarray, grid: GridSpec, epsilon: Optional[float] = None) -> Q1Result:
    """Functional derivative of integral rho * Q0[rho], by bump perturbations."""
    _check_probe(rho, grid)

    def nested(values: np.ndarray) -> float:
        return grid.integrate(values * q0_field(mu, values, grid))

    numeric = gateaux_derivative(nested, rho, grid, epsilon)
    closed = _family_closed_form(mu, rho, grid) if mu.is_family else None
    return Q1Result(numeric=numeric, closed_form=closed)


# ==========================================
# Probes and the check itself
# ==========================================

def default_probe_grid() -> GridSpec:
    return make_grid([(-8.0, 8.0, 128)])


def default_probes(grid: Optional[GridSpec] = None) -> List[Tuple[str, np.ndarray]]:
    """Nodeless 1-D probes: Gaussian on a background, two bumps, raised cosine."""
    grid = grid or default_probe_grid()
    if grid.ndim != 1:
        raise ProbeError("default probes are one-dimensional")
    x = grid.axis_coordinates(0)
    length = grid.lengths[0]

    shapes = [
        ("gaussian", np.exp(-0.5 * x ** 2) + 0.1),
        ("double_gaussian", np.exp(-2.0 * (x - 2.0) ** 2) + 0.6 * np.exp(-2.0 * (x + 2.5) ** 2) + 0.05),
        ("raised_cosine", 1.0 + 0.5 * np.cos(2.0 * np.pi * x / length)),
    ]
    return [(name, profile / grid.integrate(profile)) for name, profile in shapes]


def check_consistency(
    mu: MuModel,
    probes: Optional[Sequence[Tuple[str, np.ndarray]]] = None,
    grid: Optional[GridSpec] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ConsistencyReport:
    """L-infinity of Q1 - Q0 per probe; pass iff every probe is within tolerance."""
    grid = grid or default_probe_grid()
    probes = list(probes) if probes is not None else default_probes(grid)
    if len(probes) < 3:
        raise ProbeError(f"need at least 3 probe densities, got {len(probes)}")

    results = []
    for name, rho in probes:
        q0 = q0_field(mu, rho, grid)
        q1 = q1_field(mu, rho, grid).numeric
        deviation = float(np.max(np.abs(q1 - q0)))
        logger.debug(f"{mu.name} on {name}: max |Q1 - Q0| = {deviation:.3e}")
        results.append(ProbeResult(name=name, max_abs_dev=deviation))

    report = ConsistencyReport(model=mu.to_dict(), probes=results, tolerance_used=tolerance)
    logger.info(f"Consistency of {mu.name}: {report.verdict} (max deviation {report.max_abs_deviation:.3e})")
    return report


@dataclass(frozen=True)
class PlaneWaveCalibration:
    mean_p: float
    energy: float
    c_admissible: bool


def plane_wave_calibration(c_value: float, grid: GridSpec, p0: float, m: float = 1.0) -> PlaneWaveCalibration:
    """
    Uniform-density plane wave with momentum p0 in 1-D.

    c only shifts the energy zero; mean_p equals p0 for every c, and only c = 0
    is admissible under the plane-wave momentum convention.
    """
    if grid.ndim != 1:
        raise ValueError("plane-wave calibration runs on a 1-D grid")
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    if abs(grid.commensurate_wavenumber(0, p0) - p0) > 1e-12 * max(1.0, abs(p0)):
        raise StateError(f"p0={p0} is not commensurate with the box length {grid.lengths[0]}")

    state = plane_wave(grid, p0)
    p_field = local_mean_momentum(state, grid, 0)
    mean_p = grid.integrate(state.rho * p_field)
    # uniform density carries no momentum variance
    energy = grid.integrate(state.rho * (p_field * p_field / (2.0 * m) + c_value))
    return PlaneWaveCalibration(mean_p=mean_p, energy=energy, c_admissible=(c_value == 0))
