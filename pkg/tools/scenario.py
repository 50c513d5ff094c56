"""
Scenario configuration: strict JSON schema, dataclass records, initial states.

Unknown keys anywhere in the document are errors naming the dotted key path,
so a typo like ``dofs[0].lamda`` never silently falls back to a default.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from madelung_core.grid import GridError, GridSpec, make_grid
from madelung_core.potential import PotentialSpec
from madelung_core.state import (
    DofParams,
    HydroState,
    StateError,
    double_gaussian,
    harmonic_ground_state,
    plane_wave,
    sample_gaussian,
)
from hydro.dynamics import DEFAULT_KAPPA, DEFAULT_RHO_FLOOR, SimulationParams

from .artifacts import read_snapshot


logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "LAMBDA_MADELUNG_OUT"

_TOP_KEYS = {"grid", "dofs", "potential", "initial", "integrator", "outputs", "oracle", "manifest"}
_REQUIRED_TOP = ("grid", "dofs", "initial")
_DIM_KEYS = {"x_min", "x_max", "n_points"}
_DOF_KEYS = {"mass", "lambda"}
_INTEGRATOR_KEYS = {"dt", "n_steps", "report_every", "kappa", "rho_floor"}
_OUTPUT_KEYS = {"dir", "write_snapshots", "snapshot_every"}
_ORACLE_KEYS = {"threshold"}
_INITIAL_KEYS = {
    "gaussian": {"center", "sigma", "p0"},
    "plane_wave": {"p0"},
    "snapshot": {"path"},
    "harmonic_ground": {"stiffness", "center"},
    "double_gaussian": {"centers", "sigma", "p0", "weights"},
}


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending key."""


# ==========================================
# Records
# ==========================================

@dataclass
class IntegratorConfig:
    dt: float = 1e-3
    n_steps: int = 1000
    report_every: int = 100
    kappa: float = DEFAULT_KAPPA
    rho_floor: float = DEFAULT_RHO_FLOOR


@dataclass
class OutputConfig:
    dir: str = "output"
    write_snapshots: bool = False
    snapshot_every: int = 0


@dataclass
class OracleConfig:
    threshold: Optional[float] = None


@dataclass
class InitialConfig:
    """Tagged initial-state choice; ``params`` holds the kind-specific keys."""

    kind: str = "gaussian"
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.params}


@dataclass
class ScenarioConfig:
    grid: GridSpec
    dofs: Tuple[DofParams, ...]
    initial: InitialConfig
    potential: PotentialSpec = field(default_factory=PotentialSpec.free)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    # directory relative snapshot paths resolve against
    base_dir: Path = field(default_factory=Path, compare=False)

    def simulation_params(self) -> SimulationParams:
        return SimulationParams(
            dofs=self.dofs,
            potential=self.potential,
            dt=self.integrator.dt,
            kappa=self.integrator.kappa,
            rho_floor=self.integrator.rho_floor,
        )

    @property
    def lambdas(self) -> Tuple[float, ...]:
        return tuple(d.lam for d in self.dofs)

    def with_lambda(self, lam: float) -> "ScenarioConfig":
        dofs = tuple(DofParams(mass=d.mass, lam=lam) for d in self.dofs)
        return ScenarioConfig(
            grid=self.grid,
            dofs=dofs,
            initial=self.initial,
            potential=self.potential,
            integrator=self.integrator,
            outputs=self.outputs,
            oracle=self.oracle,
            base_dir=self.base_dir,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Resolved document; parse_scenario(to_dict()) reproduces the same config."""
        data = {
            "grid": self.grid.to_dict(),
            "dofs": [d.to_dict() for d in self.dofs],
            "potential": self.potential.to_dict(),
            "initial": self.initial.to_dict(),
            "integrator": {
                "dt": self.integrator.dt,
                "n_steps": self.integrator.n_steps,
                "report_every": self.integrator.report_every,
                "kappa": self.integrator.kappa,
                "rho_floor": self.integrator.rho_floor,
            },
            "outputs": {
                "dir": self.outputs.dir,
                "write_snapshots": self.outputs.write_snapshots,
                "snapshot_every": self.outputs.snapshot_every,
            },
        }
        if self.oracle.threshold is not None:
            data["oracle"] = {"threshold": self.oracle.threshold}
        return data


# ==========================================
# Parsing
# ==========================================

def _check_keys(data: Any, allowed: set, path: str) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ScenarioError(f"{path or 'document'}: expected an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        prefix = f"{path}." if path else ""
        raise ScenarioError(f"unknown key '{prefix}{unknown[0]}'")
    return data


def _number(data: Dict[str, Any], key: str, path: str, default=None, cast=float):
    if key not in data:
        if default is None:
            raise ScenarioError(f"missing key '{path}.{key}'")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{path}.{key}' must be a number, got {value!r}")
    if cast is int and value != int(value):
        raise ScenarioError(f"'{path}.{key}' must be an integer, got {value!r}")
    return cast(value)


def _vector(value: Any, path: str) -> List[float]:
    values = value if isinstance(value, list) else [value]
    if not values or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        raise ScenarioError(f"'{path}' must be a number or a list of numbers")
    return [float(v) for v in values]


def _parse_grid(data: Any) -> GridSpec:
    data = _check_keys(data, {"dims"}, "grid")
    dims = data.get("dims")
    if not isinstance(dims, list):
        raise ScenarioError("'grid.dims' must be a list")
    records = []
    for i, dim in enumerate(dims):
        path = f"grid.dims[{i}]"
        _check_keys(dim, _DIM_KEYS, path)
        records.append(
            (_number(dim, "x_min", path), _number(dim, "x_max", path), _number(dim, "n_points", path, cast=int))
        )
    try:
        return make_grid(records)
    except GridError as e:
        raise ScenarioError(f"grid: {e}") from None


def _parse_dofs(data: Any) -> Tuple[DofParams, ...]:
    if not isinstance(data, list) or not data:
        raise ScenarioError("'dofs' must be a non-empty list")
    dofs = []
    for i, item in enumerate(data):
        path = f"dofs[{i}]"
        _check_keys(item, _DOF_KEYS, path)
        try:
            dofs.append(DofParams(mass=_number(item, "mass", path, 1.0), lam=_number(item, "lambda", path, 1.0)))
        except StateError as e:
            raise ScenarioError(f"{path}: {e}") from None
    return tuple(dofs)


def _parse_potential(data: Any) -> PotentialSpec:
    if data is None:
        return PotentialSpec.free()
    if not isinstance(data, dict):
        raise ScenarioError("'potential' must be an object")
    try:
        return PotentialSpec.from_dict(data)
    except KeyError as e:
        raise ScenarioError(f"missing key 'potential.{e.args[0]}'") from None
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"potential: {e}") from None


def _parse_initial(data: Any) -> InitialConfig:
    if not isinstance(data, dict) or "kind" not in data:
        raise ScenarioError("'initial' must be an object with a 'kind'")
    kind = data["kind"]
    if kind not in _INITIAL_KEYS:
        raise ScenarioError(f"unknown initial kind {kind!r} (choose from {', '.join(sorted(_INITIAL_KEYS))})")
    _check_keys(data, _INITIAL_KEYS[kind] | {"kind"}, "initial")
    params = {k: v for k, v in data.items() if k != "kind"}

    required = {
        "gaussian": ("center", "sigma"),
        "plane_wave": ("p0",),
        "snapshot": ("path",),
        "harmonic_ground": ("stiffness",),
        "double_gaussian": ("centers", "sigma"),
    }[kind]
    for key in required:
        if key not in params:
            raise ScenarioError(f"missing key 'initial.{key}'")
    return InitialConfig(kind=kind, params=params)


def _parse_integrator(data: Any) -> IntegratorConfig:
    data = _check_keys(data or {}, _INTEGRATOR_KEYS, "integrator")
    defaults = IntegratorConfig()
    config = IntegratorConfig(
        dt=_number(data, "dt", "integrator", defaults.dt),
        n_steps=_number(data, "n_steps", "integrator", defaults.n_steps, cast=int),
        report_every=_number(data, "report_every", "integrator", defaults.report_every, cast=int),
        kappa=_number(data, "kappa", "integrator", defaults.kappa),
        rho_floor=_number(data, "rho_floor", "integrator", defaults.rho_floor),
    )
    if not config.dt > 0:
        raise ScenarioError("'integrator.dt' must be positive")
    if config.n_steps < 0:
        raise ScenarioError("'integrator.n_steps' must be non-negative")
    if config.report_every < 1:
        raise ScenarioError("'integrator.report_every' must be >= 1")
    if not config.kappa > 0:
        raise ScenarioError("'integrator.kappa' must be positive")
    if config.rho_floor < 0:
        raise ScenarioError("'integrator.rho_floor' must be non-negative")
    return config


def _parse_outputs(data: Any) -> OutputConfig:
    data = _check_keys(data or {}, _OUTPUT_KEYS, "outputs")
    defaults = OutputConfig()
    directory = data.get("dir", defaults.dir)
    if not isinstance(directory, str) or not directory:
        raise ScenarioError("'outputs.dir' must be a non-empty string")
    write = data.get("write_snapshots", defaults.write_snapshots)
    if not isinstance(write, bool):
        raise ScenarioError("'outputs.write_snapshots' must be true or false")
    every = _number(data, "snapshot_every", "outputs", defaults.snapshot_every, cast=int)
    if every < 0:
        raise ScenarioError("'outputs.snapshot_every' must be non-negative")
    return OutputConfig(dir=directory, write_snapshots=write, snapshot_every=every)


def _parse_oracle(data: Any) -> OracleConfig:
    if data is None:
        return OracleConfig()
    data = _check_keys(data, _ORACLE_KEYS, "oracle")
    threshold = _number(data, "threshold", "oracle", None) if "threshold" in data else None
    if threshold is not None and not threshold > 0:
        raise ScenarioError("'oracle.threshold' must be positive")
    return OracleConfig(threshold=threshold)


def parse_scenario(data: Any, base_dir: Optional[Path] = None, output_override: Optional[str] = None) -> ScenarioConfig:
    """Validate a decoded JSON document and build the ScenarioConfig."""
    data = _check_keys(data, _TOP_KEYS, "")
    for key in _REQUIRED_TOP:
        if key not in data:
            raise ScenarioError(f"missing key '{key}'")

    config = ScenarioConfig(
        grid=_parse_grid(data["grid"]),
        dofs=_parse_dofs(data["dofs"]),
        initial=_parse_initial(data["initial"]),
        potential=_parse_potential(data.get("potential")),
        integrator=_parse_integrator(data.get("integrator")),
        outputs=_parse_outputs(data.get("outputs")),
        oracle=_parse_oracle(data.get("oracle")),
        base_dir=base_dir or Path("."),
    )
    if len(config.dofs) != config.grid.ndim:
        raise ScenarioError(f"'dofs' has {len(config.dofs)} entries for a {config.grid.ndim}-D grid")
    if output_override:
        config.outputs.dir = output_override
    return config


def load_scenario(path, environ: Optional[Dict[str, str]] = None) -> ScenarioConfig:
    """Read a scenario file; ``LAMBDA_MADELUNG_OUT`` replaces outputs.dir when set."""
    path = Path(path)
    environ = os.environ if environ is None else environ
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON ({e})") from None

    override = environ.get(OUTPUT_DIR_ENV, "").strip() or None
    config = parse_scenario(data, base_dir=path.parent, output_override=override)
    logger.debug(f"Loaded scenario {path} ({config.grid.ndim}-D, lambdas={config.lambdas})")
    return config


# ==========================================
# Initial states
# ==========================================

def _initial_error(kind: str, exc: Exception) -> ScenarioError:
    return ScenarioError(f"initial ({kind}): {exc}")


def build_initial_state(config: ScenarioConfig) -> HydroState:
    """Construct and validate the initial HydroState a scenario describes."""
    kind = config.initial.kind
    params = config.initial.params
    grid = config.grid

    try:
        if kind == "gaussian":
            state = sample_gaussian(
                grid,
                _vector(params["center"], "initial.center"),
                _vector(params["sigma"], "initial.sigma"),
                _vector(params.get("p0", 0.0), "initial.p0"),
            )
        elif kind == "plane_wave":
            state = plane_wave(grid, _vector(params["p0"], "initial.p0"))
        elif kind == "harmonic_ground":
            state = harmonic_ground_state(
                grid,
                config.dofs,
                _vector(params["stiffness"], "initial.stiffness"),
                _vector(params.get("center", 0.0), "initial.center"),
            )
        elif kind == "double_gaussian":
            centers = params["centers"]
            if not isinstance(centers, list) or not centers:
                raise ScenarioError("'initial.centers' must be a non-empty list")
            state = double_gaussian(
                grid,
                [_vector(c, f"initial.centers[{i}]") for i, c in enumerate(centers)],
                _vector(params["sigma"], "initial.sigma"),
                _vector(params.get("p0", 0.0), "initial.p0"),
                _vector(params["weights"], "initial.weights") if "weights" in params else None,
            )
        else:
            path = Path(params["path"])
            if not path.is_absolute():
                path = config.base_dir / path
            state, snapshot_grid = read_snapshot(path)
            if snapshot_grid != grid:
                raise ScenarioError(f"snapshot grid {snapshot_grid.to_dict()} differs from the scenario grid")
        return state.validate(grid)
    except ScenarioError:
        raise
    except (StateError, GridError, KeyError, ValueError) as e:
        raise _initial_error(kind, e) from None


def check_lambda_values(values: Sequence[float]) -> List[float]:
    if not values:
        raise ScenarioError("sweep needs at least one lambda value")
    result = [float(v) for v in values]
    negative = [v for v in result if v < 0]
    if negative:
        raise ScenarioError(f"lambda values must be non-negative, got {negative[0]}")
    return sorted(result)
