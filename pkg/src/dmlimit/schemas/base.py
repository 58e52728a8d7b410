# -*- coding: utf-8 -*-
"""
Base types for DM-Continuum

핵심 설계:
- 3분류 상수: EXACT / EMPIRICAL / UNCALIBRATED
- "상수가 1이다"와 "상수를 아직 모른다"를 구분
- 모든 상수에 출처 포함 (증명, 측정 파일 등)

Every inequality verdict is judged against a BoundConstant. Exact constants
come from a proof (norm equivalence, GN-∞), empirical ones from a frozen measurement,
and uncalibrated ones have no value yet and can never produce a pass.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict

# Rounding slack granted to every comparison against a constant.
ROUNDING_SLACK = 1e-12


class ConstantKind(str, Enum):
    """
    상수 상태 3분류

    EXACT: 증명된 정확한 상수
        예: norm equivalence lower bound 2/π, GN-∞ constant 1

    EMPIRICAL: ≲ 부등식의 상수, 측정 후 고정됨
        예: Strichartz L⁸ ratio baseline

    UNCALIBRATED: 아직 측정되지 않음
        예: baseline 파일에 항목 없음
    """
    EXACT = "EXACT"
    EMPIRICAL = "EMPIRICAL"
    UNCALIBRATED = "UNCALIBRATED"


class BoundConstant(BaseModel):
    """
    부등식 상수

    사용 예:
        # 증명된 상수
        c = BoundConstant.exact(1.0, "telescoping sum")

        # 측정 후 고정된 상수
        c = BoundConstant.empirical(2.5, "baselines.json")

        # 미측정
        c = BoundConstant.uncalibrated("no baseline entry")
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"value": 1.0, "kind": "EXACT", "source": "telescoping sum"},
                {"value": 2.5, "kind": "EMPIRICAL", "source": "baselines.json"},
                {"value": None, "kind": "UNCALIBRATED", "reason": "no baseline entry"},
            ]
        },
    )

    value: Optional[float] = None
    kind: ConstantKind = ConstantKind.UNCALIBRATED
    source: Optional[str] = None
    reason: Optional[str] = None  # UNCALIBRATED인 경우 사유

    @classmethod
    def exact(cls, value: float, source: str) -> "BoundConstant":
        """증명된 상수 생성"""
        return cls(value=value, kind=ConstantKind.EXACT, source=source)

    @classmethod
    def empirical(cls, value: float, source: str) -> "BoundConstant":
        """측정된 상수 생성"""
        return cls(value=value, kind=ConstantKind.EMPIRICAL, source=source)

    @classmethod
    def uncalibrated(cls, reason: str = "Not yet measured") -> "BoundConstant":
        """미측정 상수 생성"""
        return cls(value=None, kind=ConstantKind.UNCALIBRATED, reason=reason)

    @classmethod
    def from_baseline(cls, value: Optional[float], name: str) -> "BoundConstant":
        """
        baseline 파일 항목에서 변환

        - 양수 값 있음 → EMPIRICAL (source: "baseline:<name>")
        - 값 없음 → UNCALIBRATED
        """
        if value is not None and value > 0:
            return cls.empirical(float(value), f"baseline:{name}")
        return cls.uncalibrated(f"{name} has no frozen baseline")

    @property
    def is_exact(self) -> bool:
        return self.kind == ConstantKind.EXACT

    @property
    def is_usable(self) -> bool:
        """
        판정에 사용 가능 여부

        EXACT, EMPIRICAL: 값이 있으므로 사용 가능
        UNCALIBRATED: 사용 불가
        """
        return self.kind in (ConstantKind.EXACT, ConstantKind.EMPIRICAL) and self.value is not None

    def allows(self, ratio: float) -> bool:
        """ratio ≤ C (rounding slack 포함)"""
        if not self.is_usable:
            return False
        assert self.value is not None
        return ratio <= self.value * (1.0 + ROUNDING_SLACK) + ROUNDING_SLACK
