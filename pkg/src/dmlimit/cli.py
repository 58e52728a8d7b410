# -*- coding: utf-8 -*-
"""
dm-continuum command line

Usage:
    dm-continuum simulate config.json
    dm-continuum converge config.json --workers 4
    dm-continuum verify config.json --log-level DEBUG

출력 (<output>/, 환경변수 DMLIMIT_OUTPUT_DIR가 우선):
- 공통: effective_config.json (확정된 설정)
- simulate: diagnostics.csv, snapshots/snapshot_XXXXX.csv, summary.json
- converge: report.json
- verify: inequalities.json

Exit codes: 0 성공, 1 설정 오류, 2 blow-up 중단, 3 판정 기준 미달
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from . import __version__
from .analysis import convergence_study, load_baselines, verify_inequalities
from .bounds import blowup_horizon
from .dmnls import Trajectory, evolve, resolve_quadrature
from .exceptions import BlowUpError, ConfigError, ConvergenceStudyError, DmLimitError
from .lattice import FLOAT_FORMAT, discretize, make_lattice, sample, write_field_csv
from .schemas.config import RunConfig
from .schemas.diagnostics import DIAGNOSTIC_COLUMNS, RunHealth
from .schemas.reports import BaselineFile, ConvergenceReport, VerificationReport

logger = logging.getLogger(__name__)

ENV_OUTPUT_DIR = "DMLIMIT_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_ACCEPTANCE = 3


# ============================================================================
# Configuration
# ============================================================================

def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """
    JSON 설정 → RunConfig

    - 잘못된 JSON, 범위 밖 값, 모르는 키 → ConfigError
    - mode가 주어지면 설정의 mode와 일치해야 함 (없으면 채움)
    - d_av=0이고 T ≥ T*이면 경고만 (T* 값 포함)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if mode is not None:
        data.setdefault("mode", mode)
        if data["mode"] != mode:
            raise ConfigError(f"config mode '{data['mode']}' does not match subcommand '{mode}'")
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc

    problem = config.problem
    if problem.d_av == 0.0 and problem.nonlinear and config.time and config.initial:
        l2 = config.initial.l2_norm()
        if math.isfinite(l2):
            horizon = blowup_horizon(l2, config.initial.derivative_l2_norm(), problem.p)
            if config.time.T >= horizon:
                logger.warning(
                    "T=%g is at or past the blow-up horizon T*=%.6g for d_av=0",
                    config.time.T, horizon,
                )
    return config


def config_echo(config: RunConfig) -> Dict[str, Any]:
    """출력에 포함되는 설정 (output 경로 제외 → 위치와 무관하게 바이트 동일)"""
    return config.model_dump(mode="json", exclude={"output"})


def output_dir(config: RunConfig) -> Path:
    override = os.environ.get(ENV_OUTPUT_DIR)
    return Path(override) if override else config.output


# ============================================================================
# Writers
# ============================================================================

def _write_json(path: Path, payload: str) -> None:
    path.write_text(payload + "\n", encoding="utf-8")


def write_diagnostics_csv(trajectory: Trajectory, path: Path) -> None:
    """`t,mass,energy,h1,dplus,barrier`, 17 유효숫자, barrier 없으면 빈 칸"""
    frame = pd.DataFrame(
        [record.model_dump() for record in trajectory.records], columns=list(DIAGNOSTIC_COLUMNS)
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def write_snapshots(trajectory: Trajectory, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for index, snapshot in enumerate(trajectory.snapshots):
        write_field_csv(snapshot, directory / f"snapshot_{index:05d}.csv")


# ============================================================================
# Modes
# ============================================================================

def _write_trajectory(trajectory: Trajectory, target: Path, summary: Dict[str, Any]) -> None:
    write_diagnostics_csv(trajectory, target / "diagnostics.csv")
    write_snapshots(trajectory, target / "snapshots")
    summary.update(steps=trajectory.steps, dt=trajectory.dt, snapshots=len(trajectory.records))
    if trajectory.records:
        summary.update(
            mass_drift=trajectory.relative_drift("mass"),
            energy_drift=trajectory.relative_drift("energy"),
        )


def _simulate(config: RunConfig, target: Path) -> int:
    assert config.time is not None and config.initial is not None and config.grid.h is not None
    spec = config.problem
    lattice = make_lattice(config.grid.h, config.grid.L_target, config.grid.max_points)
    if spec.kind == "continuum":
        phi = sample(config.initial, lattice)
    else:
        phi = discretize(config.initial, lattice)
    health = RunHealth()
    quad = resolve_quadrature(phi, spec, config.quadrature, health)
    summary: Dict[str, Any] = {"n": lattice.n, "L": lattice.period, "nodes": quad.size}
    code = EXIT_OK
    trajectory: Optional[Trajectory]
    try:
        trajectory = evolve(
            phi,
            spec,
            quad,
            config.time.T,
            config.time.dt,
            config.time.snapshot_every,
            blowup_factor=config.time.blowup_factor,
            health=health,
        )
    except BlowUpError as exc:
        # diagnostics up to the abort are still written
        logger.error("simulation aborted: %s", exc)
        summary.update(aborted_at=exc.t)
        trajectory = exc.trajectory
        code = EXIT_BLOWUP

    if trajectory is not None:
        _write_trajectory(trajectory, target, summary)
    summary.update(health=health.model_dump(mode="json"), config_echo=config_echo(config))
    _write_json(target / "summary.json", json.dumps(summary, indent=2, ensure_ascii=False))
    if health.has_warnings and not health.has_errors:
        logger.warning("simulate: %d issues flagged, see summary.json", len(health.issues))
    logger.info("simulate: %d snapshots written to %s", summary.get("snapshots", 0), target)
    return code


def acceptance_failures(
    report: ConvergenceReport, config: RunConfig, baselines: Optional[BaselineFile] = None
) -> List[str]:
    """converge 판정 기준 중 실패한 항목 (sup_t H¹은 고정된 baseline과 비교)"""
    rules = config.acceptance
    failures = []
    if report.slope < rules.min_slope:
        failures.append(f"slope {report.slope:.4f} < {rules.min_slope}")
    if rules.require_monotone and not report.monotone:
        failures.append("errors are not monotone in h")
    if report.max_mass_drift > rules.max_mass_drift:
        failures.append(f"mass drift {report.max_mass_drift:.3e} > {rules.max_mass_drift:g}")
    if report.max_energy_drift > rules.max_energy_drift:
        failures.append(f"energy drift {report.max_energy_drift:.3e} > {rules.max_energy_drift:g}")

    baselines = baselines if baselines is not None else load_baselines()
    bound = baselines.h1_constant(config.problem, config.initial, report.T)
    if not bound.is_usable:
        logger.info("sup_h1 not checked: %s", bound.reason)
    elif not bound.allows(report.max_sup_h1):
        failures.append(f"sup_t H¹ {report.max_sup_h1:.6g} > frozen {bound.value:g}")
    return failures


def _converge(config: RunConfig, target: Path, workers: int) -> int:
    assert config.time is not None and config.initial is not None
    assert config.grid.h_list is not None and config.grid.h_ref is not None
    try:
        report = convergence_study(
            config.initial,
            config.problem,
            config.time.T,
            config.time.dt,
            config.grid.h_list,
            config.grid.h_ref,
            L_target=config.grid.L_target,
            quadrature=config.quadrature,
            snapshot_every=config.time.snapshot_every,
            blowup_factor=config.time.blowup_factor,
            workers=workers,
            check_reference=config.acceptance.check_reference,
            reference_escalations=config.acceptance.reference_escalations,
            config_echo=config_echo(config),
        )
    except ConvergenceStudyError as exc:
        logger.error("convergence study aborted at h=%g: %s", exc.h, exc)
        return EXIT_BLOWUP

    _write_json(target / "report.json", report.model_dump_json(indent=2, by_alias=True))
    failures = acceptance_failures(report, config)
    for failure in failures:
        logger.error("acceptance: %s", failure)
    return EXIT_ACCEPTANCE if failures else EXIT_OK


def _verify(config: RunConfig, target: Path) -> int:
    settings = config.verify
    inequalities = verify_inequalities(
        settings.h_list,
        seed=config.seed,
        samples=settings.samples,
        estimate_samples=settings.estimate_samples,
        p=config.problem.p,
        L_target=config.grid.L_target,
        flow_time=settings.flow_time,
        refinement=settings.refinement,
        quadrature=config.quadrature,
    )
    report = VerificationReport(
        seed=config.seed,
        h_list=settings.h_list,
        inequalities=inequalities,
        config_echo=config_echo(config),
    )
    _write_json(target / "inequalities.json", report.model_dump_json(indent=2, by_alias=True))
    if not report.passed:
        logger.error("verify: violations %s", report.violations)
        return EXIT_ACCEPTANCE
    return EXIT_OK


def run(config: RunConfig, workers: int = 1) -> int:
    """설정 하나 실행, exit code 반환"""
    target = output_dir(config)
    try:
        target.mkdir(parents=True, exist_ok=True)
        _write_json(
            target / "effective_config.json",
            json.dumps(config_echo(config), indent=2, ensure_ascii=False),
        )
        logger.info("dm-continuum %s: %s → %s", __version__, config.mode, target)
        if config.mode == "simulate":
            return _simulate(config, target)
        if config.mode == "converge":
            return _converge(config, target, workers)
        return _verify(config, target)
    except BlowUpError as exc:
        logger.error("aborted: %s", exc)
        return EXIT_BLOWUP
    except (DmLimitError, ValueError, OSError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG


# ============================================================================
# CLI
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dm-continuum",
        description="Dispersion-managed NLS on lattices: simulate, continuum-limit study, inequality checks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="mode", required=True)
    for mode, help_text in (
        ("simulate", "evolve one initial datum and write diagnostics and snapshots"),
        ("converge", "run the continuum-limit convergence study"),
        ("verify", "check the lattice inequalities on a seeded ensemble"),
    ):
        sub = subparsers.add_parser(mode, help=help_text)
        sub.add_argument("config", type=Path, help="JSON config file")
        sub.add_argument(
            "--workers", "-w",
            type=int,
            default=1,
            help="parallel trajectories in converge (default: 1)",
        )
        sub.add_argument(
            "--log-level",
            default="INFO",
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="stderr log level (default: INFO)",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.workers < 1:
        logger.error("--workers must be at least 1")
        return EXIT_CONFIG
    try:
        config = parse_config(args.config.read_text(encoding="utf-8"), mode=args.mode)
    except (ConfigError, OSError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return run(config, workers=args.workers)


if __name__ == "__main__":
    sys.exit(main())
