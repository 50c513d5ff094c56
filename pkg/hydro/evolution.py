"""Time-stepping driver producing observable reports along a trajectory."""

import logging
from typing import Callable, Iterable, List, Optional, Tuple, Union

from madelung_core.grid import GridSpec
from madelung_core.state import HydroState

from .dynamics import NumericalError, SimulationParams, _advance, check_stability, potential_field
from .observables import ObservableReport, global_stats


logger = logging.getLogger(__name__)

SampleCallback = Callable[[int, HydroState, ObservableReport], None]


def _callbacks(on_sample) -> List[SampleCallback]:
    if on_sample is None:
        return []
    if callable(on_sample):
        return [on_sample]
    return list(on_sample)


def _notify(callbacks: List[SampleCallback], index: int, state: HydroState, report: ObservableReport) -> None:
    for cb in callbacks:
        try:
            cb(index, state, report)
        except Exception as e:
            logger.error(f"Sample callback error at step {index}: {e}")


def evolve(
    state: HydroState,
    grid: GridSpec,
    params: SimulationParams,
    n_steps: int,
    report_every: int,
    on_sample: Optional[Union[SampleCallback, Iterable[SampleCallback]]] = None,
) -> Tuple[HydroState, List[ObservableReport]]:
    """
    Apply ``n_steps`` RK4 steps, reporting at steps 0, report_every, 2 report_every, ...

    Numerical failures are re-raised with ``step_index`` set to the step that
    failed (1-based; 0 for a stability violation of the initial state).
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    if report_every < 1:
        raise ValueError(f"report_every must be >= 1, got {report_every}")

    params.check_grid(grid)
    state.validate(grid)
    try:
        check_stability(state, grid, params)
    except NumericalError as e:
        e.step_index = 0
        raise

    callbacks = _callbacks(on_sample)
    potential = potential_field(params.potential, grid)

    report = global_stats(state, grid, params)
    reports = [report]
    _notify(callbacks, 0, state, report)

    for index in range(1, n_steps + 1):
        try:
            state = _advance(state, grid, params, potential)
        except NumericalError as e:
            e.step_index = index
            logger.error(f"Integration failed: {e}")
            raise

        if index % report_every == 0:
            report = global_stats(state, grid, params)
            reports.append(report)
            _notify(callbacks, index, state, report)

    if state.norm_correction > 0:
        logger.info(f"Cumulative renormalisation correction {state.norm_correction:.3e}")
    return state, reports
