#!/usr/bin/env python3
"""
lambda-madelung - Generalised Madelung hydrodynamics runner

Runs scenario evolutions, lambda sweeps, wave-function oracle comparisons and
variational consistency checks, writing CSV/JSON/binary artifacts.

Exit codes: 0 ok, 2 usage/config, 3 numerical failure, 4 I/O, 5 verification failure.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import yaml

from hydro.consistency import DEFAULT_TOLERANCE, MuModel, builtin_model, check_consistency
from hydro.dynamics import NumericalError
from hydro.evolution import evolve
from hydro.oracle import SplitStepPropagator, to_wavefunction, uniform_lambda
from tools.artifacts import sweep_row, write_json, write_observables_csv, write_snapshot, write_sweep_csv
from tools.scenario import OUTPUT_DIR_ENV, ScenarioConfig, ScenarioError, build_initial_state, check_lambda_values, load_scenario


__version__ = "0.1.0"

DEFAULT_CONFIG_PATH = Path(__file__).parent / "config" / "config.yaml"
DEFAULT_ORACLE_THRESHOLD = 1e-3

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICS = 3
EXIT_IO = 4
EXIT_VERIFICATION = 5


class MadelungRunner:
    """Command implementations sharing the application config and logging setup."""

    def __init__(self, config_path=DEFAULT_CONFIG_PATH):
        self.config = self._load_config(config_path)
        self._setup_logging()
        self.logger = logging.getLogger("MadelungRunner")

    def _load_config(self, path) -> dict:
        """Load configuration."""
        config_path = Path(path)
        if config_path.exists():
            with open(config_path) as f:
                return yaml.safe_load(f) or {}
        return {}

    def _setup_logging(self):
        """Configure logging."""
        log_cfg = self.config.get("logging", {})
        level = getattr(logging, str(log_cfg.get("level", "INFO")).upper(), logging.INFO)

        logging.basicConfig(
            level=level,
            format=log_cfg.get("format", "%(asctime)s - %(name)s - %(levelname)s - %(message)s"),
        )

    def _setting(self, section: str, key: str, default):
        return (self.config.get(section) or {}).get(key, default)

    def _load(self, config_path) -> ScenarioConfig:
        scenario = load_scenario(config_path)
        if not os.getenv(OUTPUT_DIR_ENV) and scenario.outputs.dir == "output":
            scenario.outputs.dir = self._setting("outputs", "dir", scenario.outputs.dir)
        return scenario

    # ==========================================
    # run
    # ==========================================

    def run(self, config_path) -> int:
        scenario = self._load(config_path)
        out_dir = Path(scenario.outputs.dir)
        state = build_initial_state(scenario)
        params = scenario.simulation_params()
        integ = scenario.integrator

        self.logger.info(
            f"🚀 Running {config_path}: {integ.n_steps} steps of dt={integ.dt:g}, lambdas={scenario.lambdas}"
        )

        write_errors: List[OSError] = []

        def on_sample(index, sample, report):
            every = scenario.outputs.snapshot_every
            if every and index % every:
                return
            try:
                write_snapshot(out_dir, index, sample, scenario.grid)
            except OSError as e:
                write_errors.append(e)

        callbacks = [on_sample] if scenario.outputs.write_snapshots else []
        final, reports = evolve(state, scenario.grid, params, integ.n_steps, integ.report_every, callbacks)
        if write_errors:
            raise write_errors[0]

        write_observables_csv(out_dir / "observables.csv", reports)
        manifest = scenario.to_dict()
        manifest["manifest"] = {
            "command": "run",
            "version": __version__,
            "numpy": np.__version__,
            "reports": len(reports),
            "final_t": final.t,
            "norm_correction": final.norm_correction,
        }
        write_json(out_dir / "run.json", manifest)

        last = reports[-1]
        self.logger.info(f"✅ Finished at t={last.t:.6g}: energy={last.energy:.12g}, norm={last.norm:.15g}")
        return EXIT_OK

    # ==========================================
    # compare-oracle
    # ==========================================

    def compare_oracle(self, config_path, threshold: Optional[float] = None) -> int:
        scenario = self._load(config_path)
        try:
            lam = uniform_lambda(scenario.dofs)
        except ValueError as e:
            raise ScenarioError(f"compare-oracle: {e}") from None

        threshold = (
            threshold
            if threshold is not None
            else scenario.oracle.threshold
            if scenario.oracle.threshold is not None
            else float(self._setting("oracle", "threshold", DEFAULT_ORACLE_THRESHOLD))
        )
        out_dir = Path(scenario.outputs.dir)
        state = build_initial_state(scenario)
        params = scenario.simulation_params()
        integ = scenario.integrator

        try:
            propagator = SplitStepPropagator(scenario.grid, scenario.dofs, scenario.potential, integ.dt, lam)
        except ValueError as e:
            raise ScenarioError(f"compare-oracle: {e}") from None

        samples = []

        def on_sample(index, sample, report):
            samples.append((index, sample.t, sample.rho))

        self.logger.info(f"🔬 Comparing dynamics against split-step oracle, threshold {threshold:g}")
        evolve(state, scenario.grid, params, integ.n_steps, integ.report_every, on_sample)

        psi = to_wavefunction(state, scenario.grid, lam)
        done = 0
        t_samples, linf, l2 = [], [], []
        for index, t, rho in samples:
            psi = propagator.run(psi, index - done)
            done = index
            diff = rho - psi.density
            t_samples.append(t)
            linf.append(float(np.max(np.abs(diff))))
            l2.append(float(np.sqrt(scenario.grid.integrate(diff * diff))))

        passed = linf[-1] <= threshold
        write_json(
            out_dir / "compare.json",
            {"t_samples": t_samples, "linf_rho": linf, "l2_rho": l2, "threshold": threshold, "passed": passed},
        )
        if not passed:
            self.logger.error(f"❌ Oracle mismatch: final L-inf(rho) {linf[-1]:.3e} > {threshold:g}")
            return EXIT_VERIFICATION
        self.logger.info(f"✅ Oracle agreement: final L-inf(rho) {linf[-1]:.3e}")
        return EXIT_OK

    # ==========================================
    # sweep
    # ==========================================

    def sweep(self, config_path, lambda_values: Sequence[float], workers: Optional[int] = None) -> int:
        scenario = self._load(config_path)
        values = check_lambda_values(lambda_values)
        workers = int(workers or self._setting("sweep", "workers", 1))
        if workers < 1:
            raise ScenarioError(f"sweep workers must be >= 1, got {workers}")
        n_dofs = scenario.grid.ndim

        def one(lam: float):
            variant = scenario.with_lambda(lam)
            try:
                state = build_initial_state(variant)
                _, reports = evolve(
                    state,
                    variant.grid,
                    variant.simulation_params(),
                    variant.integrator.n_steps,
                    variant.integrator.report_every,
                )
                return sweep_row(lam, reports[-1])
            except (NumericalError, ValueError) as e:
                self.logger.warning(f"⚠️ lambda={lam:g} failed: {e}")
                return sweep_row(lam, None, str(e), n_dofs)

        self.logger.info(f"🔁 Sweeping {len(values)} lambda values with {workers} worker(s)")
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, values))

        write_sweep_csv(Path(scenario.outputs.dir) / "sweep.csv", n_dofs, rows)
        failures = sum(1 for row in rows if row[-1])
        if failures:
            self.logger.error(f"❌ {failures} of {len(values)} sweep runs failed")
            return EXIT_NUMERICS
        return EXIT_OK

    # ==========================================
    # check
    # ==========================================

    def check(self, family: Optional[Sequence[float]], custom: Optional[str], tolerance: Optional[float]) -> int:
        if (family is None) == (custom is None):
            raise ScenarioError("check needs exactly one of --family or --custom")
        mu = MuModel.family(*family) if family is not None else builtin_model(custom)
        tolerance = tolerance if tolerance is not None else float(
            self._setting("consistency", "tolerance", DEFAULT_TOLERANCE)
        )
        report = check_consistency(mu, tolerance=tolerance)
        print(report.to_json())
        return EXIT_OK if report.passed else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-madelung",
        description="Generalised Madelung hydrodynamics runner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s run scenario.json                 # Evolve and write observables.csv
  %(prog)s compare-oracle scenario.json      # Check against the split-step oracle
  %(prog)s sweep scenario.json -l 0 0.5 1    # Quantum-classical transition
  %(prog)s check --family 0.25 0 0           # Consistency of mu = a eta/rho^2 + b/rho + c
  %(prog)s check --custom eta                # A counterexample
        """,
    )
    parser.add_argument(
        "--app-config",
        default=str(DEFAULT_CONFIG_PATH),
        help="Application settings YAML (default: config/config.yaml)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Evolve a scenario")
    run.add_argument("config", help="Scenario JSON file")

    compare = sub.add_parser("compare-oracle", help="Compare dynamics with the split-step oracle")
    compare.add_argument("config", help="Scenario JSON file")
    compare.add_argument("--threshold", type=float, help="Final L-inf(rho) threshold (default from config)")

    sweep = sub.add_parser("sweep", help="One evolution per lambda value")
    sweep.add_argument("config", help="Scenario JSON file")
    sweep.add_argument("-l", "--lambdas", type=float, nargs="*", default=[], help="Lambda values")
    sweep.add_argument("-w", "--workers", type=int, help="Concurrent evolutions (default from config)")

    check = sub.add_parser("check", help="Variational consistency of a mu(rho, eta) model")
    group = check.add_mutually_exclusive_group(required=True)
    group.add_argument("--family", type=float, nargs=3, metavar=("A", "B", "C"), help="Family constants")
    group.add_argument("--custom", help="Built-in rule name (eta, rho_eta, fisher)")
    check.add_argument("--tolerance", type=float, help="Pass threshold for max |Q1 - Q0|")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    runner = MadelungRunner(args.app_config)
    logger = runner.logger

    try:
        if args.command == "run":
            return runner.run(args.config)
        if args.command == "compare-oracle":
            return runner.compare_oracle(args.config, args.threshold)
        if args.command == "sweep":
            return runner.sweep(args.config, args.lambdas, args.workers)
        return runner.check(args.family, args.custom, args.tolerance)
    except NumericalError as e:
        logger.error(f"❌ Numerical failure: {e}")
        return EXIT_NUMERICS
    except OSError as e:
        logger.error(f"❌ I/O failure: {e}")
        return EXIT_IO
    except (ScenarioError, ValueError, json.JSONDecodeError) as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
