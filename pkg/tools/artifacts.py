"""
Run artifacts: observables CSV, JSON documents, binary field snapshots.

Numbers in CSV files carry 17 significant digits, which round-trips every
float64. Snapshots are flat little-endian float64 arrays in row-major order
with a JSON sidecar naming the grid, t and k0.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from madelung_core.grid import GridSpec
from madelung_core.state import HydroState
from hydro.observables import ObservableReport


logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    """Write through a temporary file and rename, so readers never see half a document."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    tmp_path.write_text(json.dumps(payload, indent=2, ensure_ascii=True) + "\n", encoding="utf-8")
    tmp_path.replace(path)
    return path


def write_observables_csv(path: Path, reports: Sequence[ObservableReport]) -> Path:
    """t,norm,energy,axiom1_residual then mean_x_i,delta_x_i,mean_p_i,delta_p_i,uncertainty_i per dof."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_dofs = reports[0].n_dofs if reports else 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ObservableReport.csv_header(n_dofs))
        for report in reports:
            writer.writerow(report.csv_row())
    logger.info(f"💾 Wrote {len(reports)} observable rows to {path}")
    return path


def sweep_header(n_dofs: int) -> List[str]:
    columns = ["lambda"]
    for i in range(n_dofs):
        columns += [f"delta_x_{i}", f"delta_p_{i}", f"uncertainty_{i}"]
    return columns + ["energy", "error"]


def sweep_row(lam: float, report: ObservableReport = None, error: str = "", n_dofs: int = 1) -> List[str]:
    row = [_fmt(lam)]
    if report is None:
        return row + [""] * (3 * n_dofs + 1) + [error]
    for i in range(report.n_dofs):
        row += [_fmt(report.delta_x[i]), _fmt(report.delta_p[i]), _fmt(report.uncertainty_product[i])]
    return row + [_fmt(report.energy), error]


def write_sweep_csv(path: Path, n_dofs: int, rows: Iterable[List[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(sweep_header(n_dofs))
        writer.writerows(rows)
    logger.info(f"💾 Wrote sweep table to {path}")
    return path


# ==========================================
# Snapshots
# ==========================================

def snapshot_paths(directory: Path, index: int) -> Tuple[Path, Path, Path]:
    directory = Path(directory)
    return (
        directory / f"rho_{index:06d}.f64",
        directory / f"s_{index:06d}.f64",
        directory / f"snapshot_{index:06d}.json",
    )


def write_snapshot(directory: Path, index: int, state: HydroState, grid: GridSpec) -> Path:
    """Write rho and s_residual for one sample; returns the sidecar path."""
    rho_path, s_path, sidecar = snapshot_paths(directory, index)
    rho_path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(state.rho, dtype=SNAPSHOT_DTYPE).tofile(rho_path)
    np.ascontiguousarray(state.s_residual, dtype=SNAPSHOT_DTYPE).tofile(s_path)
    write_json(
        sidecar,
        {
            "grid": grid.to_dict(),
            "t": state.t,
            "k0": list(state.k0),
            "norm_correction": state.norm_correction,
            "rho": rho_path.name,
            "s_residual": s_path.name,
        },
    )
    logger.debug(f"Snapshot {index} written to {sidecar}")
    return sidecar


def read_snapshot(sidecar: Path) -> Tuple[HydroState, GridSpec]:
    """Inverse of write_snapshot; field files resolve next to the sidecar."""
    sidecar = Path(sidecar)
    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    grid = GridSpec.from_dict(meta["grid"])

    def load(name: str) -> np.ndarray:
        values = np.fromfile(sidecar.parent / name, dtype=SNAPSHOT_DTYPE)
        if values.size != grid.size:
            raise ValueError(f"{name} holds {values.size} values, grid needs {grid.size}")
        return values.reshape(grid.shape).astype(float)

    state = HydroState(
        t=float(meta["t"]),
        rho=load(meta["rho"]),
        s_residual=load(meta["s_residual"]),
        k0=tuple(float(k) for k in meta["k0"]),
        norm_correction=float(meta.get("norm_correction", 0.0)),
    )
    return state, grid
