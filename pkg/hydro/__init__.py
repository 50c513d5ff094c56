"""Hydro - generalised Madelung dynamics, observables, wave-function oracle, consistency checks."""

from .consistency import (
    BUILTIN_RULES,
    ConsistencyReport,
    MuModel,
    ProbeError,
    builtin_model,
    check_consistency,
    default_probes,
    gateaux_derivative,
    plane_wave_calibration,
    q0_field,
    q1_field,
)
from .dynamics import (
    NegativeDensityError,
    NonFiniteError,
    NumericalError,
    SimulationParams,
    StabilityError,
    continuity_rhs,
    hj_rhs,
    max_stable_dt,
    quantum_potential,
    step,
)
from .evolution import evolve
from .observables import (
    ObservableReport,
    axiom1_residual,
    cramer_rao_check,
    fisher_information,
    global_stats,
    local_energy,
    local_mean_momentum,
    local_momentum_variance,
    uncertainty_check,
)
from .oracle import NodeError, SplitStepPropagator, from_wavefunction, split_step, to_wavefunction

__all__ = [
    "BUILTIN_RULES",
    "ConsistencyReport",
    "MuModel",
    "ProbeError",
    "builtin_model",
    "check_consistency",
    "default_probes",
    "gateaux_derivative",
    "plane_wave_calibration",
    "q0_field",
    "q1_field",
    "NegativeDensityError",
    "NonFiniteError",
    "NumericalError",
    "SimulationParams",
    "StabilityError",
    "continuity_rhs",
    "hj_rhs",
    "max_stable_dt",
    "quantum_potential",
    "step",
    "evolve",
    "ObservableReport",
    "axiom1_residual",
    "cramer_rao_check",
    "fisher_information",
    "global_stats",
    "local_energy",
    "local_mean_momentum",
    "local_momentum_variance",
    "uncertainty_check",
    "NodeError",
    "SplitStepPropagator",
    "from_wavefunction",
    "split_step",
    "to_wavefunction",
]
