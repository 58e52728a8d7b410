# -*- coding: utf-8 -*-
"""
Run configuration schemas for DM-Continuum

설정 구조 (JSON):
- mode: simulate / converge / verify
- problem: p, d_av, kind
- grid: h 또는 h_list + h_ref, L_target
- time: T, dt, snapshot_every
- quadrature: M (정수 또는 "auto")
- initial: InitialDatum
- acceptance / verify: 판정 기준

모든 섹션은 extra="forbid": 수학 파라미터의 오타는 조용히 무시되지 않고 거부됨.
"""

import logging
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .datum import InitialDatum

logger = logging.getLogger(__name__)


# ============================================================================
# Problem
# ============================================================================

class ProblemSpec(BaseModel):
    """
    문제 정의: i∂_t u + d_av Δu + ⟨Q⟩(u) = 0

    허용 범위 (위반 시 경고만, 중단하지 않음):
    - d_av > 0: 1 < p < 9
    - d_av < 0: p > 1
    - d_av = 0: 1 < p < 5
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    p: float = Field(gt=1.0, description="nonlinearity exponent, |u|^{p-1}u")
    d_av: float = Field(description="average dispersion, any sign")
    kind: Literal["discrete", "continuum"] = "discrete"
    nonlinear: bool = Field(
        default=True,
        description="False switches the averaged nonlinearity off (pure linear flow)",
    )

    @model_validator(mode="after")
    def _warn_inadmissible(self) -> "ProblemSpec":
        if not self.admissible:
            logger.warning(
                "p=%g outside the admissible range for d_av=%g; running anyway", self.p, self.d_av
            )
        return self

    @property
    def admissible(self) -> bool:
        if self.d_av > 0:
            return self.p < 9.0
        if self.d_av < 0:
            return True
        return self.p < 5.0


# ============================================================================
# Grid / Time / Quadrature
# ============================================================================

class GridConfig(BaseModel):
    """
    격자 설정

    - simulate: h 사용
    - converge: h_list (내림차순) + h_ref (기본값 min(h_list)/8)
    """
    model_config = ConfigDict(extra="forbid")

    h: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    h_list: Optional[List[float]] = None
    h_ref: Optional[float] = Field(default=None, gt=0.0)
    L_target: float = Field(default=32.0, ge=8.0)
    max_points: int = Field(default=1 << 20, ge=4, description="memory cap on n")

    @field_validator("h_list")
    @classmethod
    def _check_h_list(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if any(not (0.0 < h <= 1.0) for h in value):
            raise ValueError("every h in h_list must lie in (0, 1]")
        if any(b > a for a, b in zip(value, value[1:])):
            raise ValueError("h_list must be non-increasing")
        return value


class TimeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    T: float = Field(gt=0.0, description="horizon")
    dt: float = Field(default=0.005, gt=0.0)
    snapshot_every: int = Field(default=20, ge=1)
    blowup_factor: float = Field(
        default=1e3, gt=1.0, description="abort when ‖u‖_{H¹} exceeds this multiple of its start"
    )


class QuadratureConfig(BaseModel):
    """
    r-적분 Gauss–Legendre 설정

    M="auto": start_nodes에서 시작, 대역폭 검사를 통과할 때까지 2배씩 증가, max_nodes에서 멈춤
    """
    model_config = ConfigDict(extra="forbid")

    M: Union[Literal["auto"], int] = "auto"
    start_nodes: int = Field(default=32, ge=1)
    max_nodes: int = Field(default=512, ge=1)

    @field_validator("M")
    @classmethod
    def _positive_nodes(cls, value: Union[str, int]) -> Union[str, int]:
        if isinstance(value, int) and value < 1:
            raise ValueError("M must be a positive node count or 'auto'")
        return value

    @property
    def auto(self) -> bool:
        return self.M == "auto"


# ============================================================================
# Acceptance / Verify
# ============================================================================

class AcceptanceConfig(BaseModel):
    """converge 모드의 판정 기준 (exit 3)"""
    model_config = ConfigDict(extra="forbid")

    min_slope: float = 0.45
    max_mass_drift: float = Field(default=1e-8, gt=0.0)
    max_energy_drift: float = Field(default=1e-6, gt=0.0)
    require_monotone: bool = True
    check_reference: bool = Field(
        default=True, description="compare the h_ref reference against a 2·h_ref run"
    )
    reference_escalations: int = Field(
        default=1, ge=0, description="halvings of h_ref allowed when monotonicity fails at the finest h"
    )


class VerifyConfig(BaseModel):
    """verify 모드 앙상블 설정"""
    model_config = ConfigDict(extra="forbid")

    h_list: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25, 0.125])
    samples: int = Field(default=1000, ge=1, description="fields per h for exact-constant suites")
    estimate_samples: int = Field(default=200, ge=1, description="fields per h for ≲-suites")
    flow_time: float = Field(default=1.0, gt=0.0, description="t in the linear-flow comparison")
    refinement: int = Field(default=16, ge=2, description="fine/coarse ratio for grid-transfer checks")

    @field_validator("refinement")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError("refinement must be a power of two")
        return value


# ============================================================================
# RunConfig
# ============================================================================

class RunConfig(BaseModel):
    """
    전체 실행 설정

    파일 구조: <output>/effective_config.json 에 확정된 설정이 다시 기록됨
    """
    model_config = ConfigDict(extra="forbid")

    mode: Literal["simulate", "converge", "verify"]
    problem: ProblemSpec
    grid: GridConfig = Field(default_factory=GridConfig)
    time: Optional[TimeConfig] = None
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    initial: Optional[InitialDatum] = None
    output: Path = Path("runs/latest")
    seed: int = 0
    acceptance: AcceptanceConfig = Field(default_factory=AcceptanceConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)

    @model_validator(mode="after")
    def _check_mode_sections(self) -> "RunConfig":
        if self.mode in ("simulate", "converge"):
            if self.time is None:
                raise ValueError(f"mode '{self.mode}' requires a 'time' section")
            if self.initial is None:
                raise ValueError(f"mode '{self.mode}' requires an 'initial' datum")
        if self.mode == "simulate" and self.grid.h is None:
            raise ValueError("mode 'simulate' requires grid.h")
        if self.mode == "converge":
            if not self.grid.h_list or len(self.grid.h_list) < 3:
                raise ValueError("mode 'converge' requires grid.h_list with at least 3 entries")
            finest = min(self.grid.h_list)
            if self.grid.h_ref is None:
                self.grid.h_ref = finest / 8.0
            if self.grid.h_ref > finest / 4.0:
                raise ValueError("grid.h_ref must be at most min(h_list)/4")
        return self

