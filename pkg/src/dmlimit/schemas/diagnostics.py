# -*- coding: utf-8 -*-
"""
Diagnostics schemas for DM-Continuum

실행 상태 추적:
- 스냅샷마다 DiagnosticsRecord 한 줄 (CSV: t,mass,energy,h1,dplus,barrier)
- 문제는 삭제하지 않고 RunIssue로 기록 (플래깅 방식)
- error 수준 이슈가 생기면 실행은 aborted
"""

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

DIAGNOSTIC_COLUMNS = ("t", "mass", "energy", "h1", "dplus", "barrier")


class DiagnosticsRecord(BaseModel):
    """
    스냅샷 하나의 보존량과 노름

    barrier는 d_av=0 실행에서만 값이 있음
    """
    model_config = ConfigDict(frozen=True)

    t: float
    mass: float = Field(description="‖u(t)‖²_{L²}")
    energy: float = Field(description="E(u(t)) with the run's r-quadrature")
    h1: float = Field(description="‖u(t)‖_{H¹_h}")
    dplus: float = Field(description="‖D⁺u(t)‖_{L²_h}")
    barrier: Optional[float] = Field(default=None, description="d_av=0 barrier value at t")

    @property
    def is_finite(self) -> bool:
        values = [self.t, self.mass, self.energy, self.h1, self.dplus]
        return bool(np.all(np.isfinite(values)))

    @property
    def below_barrier(self) -> Optional[bool]:
        """‖D⁺u(t)‖ ≤ barrier(t), None when there is no barrier"""
        if self.barrier is None:
            return None
        return self.dplus <= self.barrier * (1.0 + 1e-12)


class RunIssue(BaseModel):
    """
    개별 실행 이슈

    이슈 유형:
    - non_finite: NaN/Inf 발생
    - blow_up: H¹ 노름이 상한 초과
    - inadmissible_exponent: p가 허용 범위 밖
    - past_blowup_horizon: d_av=0, T ≥ T*
    - quadrature_cap: 노드 수가 상한에 도달
    - barrier_violation: ‖D⁺u‖ > barrier(t)
    """
    issue_type: Literal[
        "non_finite",
        "blow_up",
        "inadmissible_exponent",
        "past_blowup_horizon",
        "quadrature_cap",
        "barrier_violation",
        "other",
    ]
    severity: Literal["error", "warning", "info"] = "warning"
    description: str
    t: Optional[float] = Field(default=None, description="simulation time of the issue")


class RunHealth(BaseModel):
    """
    실행 건강 상태

    모든 trajectory에 포함되어 신뢰도를 추적
    {
        "status": "warned",
        "issues": [{"issue_type": "quadrature_cap", "description": "M capped at 512"}]
    }
    """
    status: Literal["healthy", "warned", "aborted"] = "healthy"
    issues: List[RunIssue] = Field(default_factory=list)

    def add_issue(
        self,
        issue_type: str,
        description: str,
        severity: str = "warning",
        t: Optional[float] = None,
    ) -> None:
        """이슈 추가"""
        self.issues.append(
            RunIssue(issue_type=issue_type, severity=severity, description=description, t=t)
        )

        # error 이슈가 있으면 aborted
        if severity == "error":
            self.status = "aborted"
        elif severity == "warning" and self.status == "healthy":
            self.status = "warned"

    @property
    def has_errors(self) -> bool:
        return any(i.severity == "error" for i in self.issues)

    @property
    def has_warnings(self) -> bool:
        return any(i.severity == "warning" for i in self.issues)
