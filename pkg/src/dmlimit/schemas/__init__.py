# -*- coding: utf-8 -*-
"""
DM-Continuum Pydantic Schemas

- base: BoundConstant 3분류 (EXACT / EMPIRICAL / UNCALIBRATED)
- datum: 초기값 기술자
- config: 실행 설정 (strict, unknown key 거부)
- diagnostics: 스냅샷 기록, 실행 이슈 플래깅
- reports: 수렴/부등식 리포트
"""

from .base import ConstantKind, BoundConstant
from .datum import (
    InitialDatum,
    GaussianDatum,
    SechDatum,
    FileDatum,
    ConstantDatum,
)
from .config import (
    ProblemSpec,
    GridConfig,
    TimeConfig,
    QuadratureConfig,
    AcceptanceConfig,
    VerifyConfig,
    RunConfig,
)
from .diagnostics import DiagnosticsRecord, RunIssue, RunHealth, DIAGNOSTIC_COLUMNS
from .reports import (
    EMPIRICAL_SUITES,
    BaselineFile,
    H1Baseline,
    ConvergenceRun,
    ConvergenceReport,
    InequalityReport,
    VerificationReport,
)

__all__ = [
    # Base
    "ConstantKind",
    "BoundConstant",
    # Datum
    "InitialDatum",
    "GaussianDatum",
    "SechDatum",
    "FileDatum",
    "ConstantDatum",
    # Config
    "ProblemSpec",
    "GridConfig",
    "TimeConfig",
    "QuadratureConfig",
    "AcceptanceConfig",
    "VerifyConfig",
    "RunConfig",
    # Diagnostics
    "DiagnosticsRecord",
    "RunIssue",
    "RunHealth",
    "DIAGNOSTIC_COLUMNS",
    # Reports
    "EMPIRICAL_SUITES",
    "BaselineFile",
    "H1Baseline",
    "ConvergenceRun",
    "ConvergenceReport",
    "InequalityReport",
    "VerificationReport",
]
