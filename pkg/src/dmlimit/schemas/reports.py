# -*- coding: utf-8 -*-
"""
Report schemas for DM-Continuum

출력물:
- ConvergenceReport: h별 sup_t ‖p_h u_h(t) − u_ref(t)‖_{L²}와 log-log 기울기
- InequalityReport: 부등식 하나의 최악 비율과 판정
- VerificationReport: 부등식 리포트 묶음

JSON 직렬화는 model_dump_json(by_alias=True)로, 설정 echo(config_echo)가 항상 포함됨.
"""

from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

from .base import BoundConstant
from .config import ProblemSpec
from .datum import InitialDatum


# ============================================================================
# Convergence
# ============================================================================

class ConvergenceRun(BaseModel):
    """h 하나에 대한 실행 결과"""
    h: float
    n: int
    error: float = Field(description="sup over snapshots of the L² error against the reference")
    mass_drift: float = Field(description="max relative |mass(t) − mass(0)| / mass(0)")
    energy_drift: float = Field(description="max relative |E(t) − E(0)| / |E(0)|")
    sup_h1: float = Field(description="sup over snapshots of ‖u_h(t)‖_{H¹_h}")
    nodes: int = Field(description="r-quadrature size used")


class ConvergenceReport(BaseModel):
    """
    연속 극한 수렴 리포트

    error(h) ≈ intercept · h^slope 를 최소제곱으로 맞춤
    """
    h_list: List[float]
    errors: List[float]
    slope: float
    intercept: float
    T: float
    h_ref: float
    config_echo: Dict[str, Any] = Field(default_factory=dict)

    runs: List[ConvergenceRun] = Field(default_factory=list)
    reference_nodes: Optional[int] = None
    reference_self_error: Optional[float] = Field(
        default=None, description="sup-in-time L² distance between the h_ref and 2·h_ref references"
    )
    reference_escalations: int = 0

    @field_validator("errors")
    @classmethod
    def _finite_errors(cls, value: List[float]) -> List[float]:
        if not all(np.isfinite(e) and e >= 0.0 for e in value):
            raise ValueError("errors must be finite and nonnegative")
        return value

    @model_validator(mode="after")
    def _check_grid(self) -> "ConvergenceReport":
        if len(self.h_list) != len(self.errors):
            raise ValueError("h_list and errors differ in length")
        if any(b > a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValueError("h_list must be non-increasing")
        if any(h <= self.h_ref for h in self.h_list):
            raise ValueError("every h must exceed h_ref")
        return self

    @computed_field
    @property
    def monotone(self) -> bool:
        """h가 줄어들 때 오차가 증가하지 않는지"""
        return all(b <= a for a, b in zip(self.errors, self.errors[1:]))

    @computed_field
    @property
    def max_mass_drift(self) -> float:
        return max((r.mass_drift for r in self.runs), default=0.0)

    @computed_field
    @property
    def max_energy_drift(self) -> float:
        return max((r.energy_drift for r in self.runs), default=0.0)

    @computed_field
    @property
    def max_sup_h1(self) -> float:
        """h 전체의 sup_t ‖u_h(t)‖_{H¹_h}"""
        return max((r.sup_h1 for r in self.runs), default=0.0)


# ============================================================================
# Inequalities
# ============================================================================

class InequalityReport(BaseModel):
    """
    부등식 검증 결과

    LHS ≤ C·RHS 형태로 정규화, worst_ratio = max LHS/RHS
    passed는 constant.allows(worst_ratio)에서 계산되므로 항상 worst_ratio와 일치
    """
    name: str
    samples: int = Field(ge=0)
    worst_ratio: float
    constant: BoundConstant
    worst_by_h: Dict[str, float] = Field(default_factory=dict)

    @field_validator("worst_ratio")
    @classmethod
    def _finite_ratio(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("worst_ratio must be finite")
        return value

    @computed_field(alias="pass")
    @property
    def passed(self) -> bool:
        return self.constant.allows(self.worst_ratio)


class VerificationReport(BaseModel):
    """verify 모드 출력"""
    seed: int
    h_list: List[float]
    inequalities: List[InequalityReport] = Field(default_factory=list)
    config_echo: Dict[str, Any] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.inequalities)

    @computed_field
    @property
    def violations(self) -> List[str]:
        return [r.name for r in self.inequalities if not r.passed]

    def get(self, name: str) -> InequalityReport:
        for report in self.inequalities:
            if report.name == name:
                return report
        raise KeyError(name)


# ============================================================================
# Baselines
# ============================================================================

# Baselines whose frozen value only holds for the exponent / flow time they were measured at.
EXPONENT_DEPENDENT = frozenset({"averaged_nonlinearity_h1", "distributive"})
TIME_DEPENDENT = frozenset({"linear_flow_comparison"})

# ≲-suites whose constant comes from baselines.json
EMPIRICAL_SUITES = (
    "strichartz_l8",
    "averaged_nonlinearity_h1",
    "interpolation_consistency",
    "linear_flow_comparison",
    "distributive",
)


class H1Baseline(BaseModel):
    """
    sup_t ‖u_h(t)‖_{H¹_h}의 고정 상한

    가장 작은 h의 실행에서 측정한 값 × safety factor.
    같은 문제/초기값, 측정 T 이하의 구간에만 적용
    """
    value: float = Field(gt=0.0)
    measured: float = Field(gt=0.0, description="sup over snapshots before the safety factor")
    h: float = Field(gt=0.0, le=1.0, description="spacing of the measured run")
    T: float = Field(gt=0.0)
    dt: float = Field(gt=0.0)
    problem: ProblemSpec
    initial: InitialDatum

    def applies_to(self, problem: ProblemSpec, initial: Optional[InitialDatum], T: float) -> bool:
        return problem == self.problem and initial == self.initial and T <= self.T


class BaselineFile(BaseModel):
    """
    고정된 ≲ 상수 파일 (data/baselines.json)

    {
        "p": 3.0, "flow_time": 1.0, "safety_factor": 1.5,
        "constants": {"strichartz_l8": 0.0247, ...},
        "sup_h1": {"value": 2.3741, "h": 0.0625, "problem": {...}, "initial": {...}}
    }
    """
    version: int = 1
    p: float = Field(gt=1.0, description="exponent the p-dependent constants were measured at")
    flow_time: float = Field(gt=0.0, description="t of the linear-flow comparison")
    safety_factor: float = Field(default=1.5, ge=1.0)
    source: str = Field(default="", description="how the values were obtained")
    constants: Dict[str, Optional[float]] = Field(default_factory=dict)
    sup_h1: Optional[H1Baseline] = None

    def constant(self, name: str, p: float, flow_time: float) -> BoundConstant:
        """
        이름에 해당하는 BoundConstant

        측정 조건(p, t)이 다르면 UNCALIBRATED
        """
        if name in EXPONENT_DEPENDENT and not np.isclose(p, self.p):
            return BoundConstant.uncalibrated(f"{name} frozen for p={self.p:g}, not p={p:g}")
        if name in TIME_DEPENDENT and not np.isclose(flow_time, self.flow_time):
            return BoundConstant.uncalibrated(
                f"{name} frozen for t={self.flow_time:g}, not t={flow_time:g}"
            )
        return BoundConstant.from_baseline(self.constants.get(name), name)

    def h1_constant(
        self, problem: ProblemSpec, initial: Optional[InitialDatum], T: float
    ) -> BoundConstant:
        """sup_t ‖u_h‖_{H¹_h} 상한, 다른 실행이면 UNCALIBRATED"""
        if self.sup_h1 is None:
            return BoundConstant.uncalibrated("no frozen sup_h1")
        if not self.sup_h1.applies_to(problem, initial, T):
            return BoundConstant.uncalibrated("sup_h1 was frozen for a different run")
        return BoundConstant.from_baseline(self.sup_h1.value, "sup_h1")
