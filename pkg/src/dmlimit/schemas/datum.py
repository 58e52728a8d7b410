# -*- coding: utf-8 -*-
"""
Initial datum schemas for DM-Continuum

초기값 φ 기술자:
- gaussian: a·exp(−((x−c)/w)²)·e^{ivx}, 셀 평균은 erf로 정확히 계산
- sech: a·sech((x−c)/w)·e^{ivx}, 셀 평균은 8점 Gauss–Legendre
- file: `x,re,im` CSV에서 선형 보간
- constant: 주기 영역 전용 테스트 데이터 (경계 감쇠 검사 없음)

Descriptors are plain config values; every numeric method works on numpy
arrays of positions and never mutates the descriptor.
"""

from functools import cached_property
from pathlib import Path
from typing import Annotated, ClassVar, Literal, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import erfc

# Cell averages of non-gaussian data use this many Gauss–Legendre nodes per cell.
CELL_QUADRATURE_NODES = 8

# |φ(±L/2)| must stay below this fraction of max|φ|.
BOUNDARY_DECAY = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(CELL_QUADRATURE_NODES)


class _DatumBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    decays: ClassVar[bool] = True

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cell_average(self, x: np.ndarray, h: float) -> np.ndarray:
        """(1/h)∫_x^{x+h} φ, 셀마다 Gauss–Legendre"""
        x = np.asarray(x, dtype=float)
        points = x[:, None] + 0.5 * h * (_GL_NODES[None, :] + 1.0)
        values = self.evaluate(points.ravel()).reshape(points.shape)
        return values @ (0.5 * _GL_WEIGHTS)

    def boundary_ratio(self, period: float, samples: int = 4096) -> float:
        """max(|φ(−L/2)|, |φ(L/2)|) / max|φ| on the periodic box"""
        x = -0.5 * period + period * np.arange(samples) / samples
        peak = float(np.max(np.abs(self.evaluate(x))))
        if peak == 0.0:
            return 0.0
        edges = np.abs(self.evaluate(np.array([-0.5 * period, 0.5 * period])))
        return float(np.max(edges)) / peak

    def l2_norm(self) -> float:
        raise NotImplementedError

    def derivative_l2_norm(self) -> float:
        raise NotImplementedError

    def h1_norm(self) -> float:
        """‖φ‖_{H¹} = (‖φ‖² + ‖φ′‖²)^{1/2}"""
        return float(np.hypot(self.l2_norm(), self.derivative_l2_norm()))


class GaussianDatum(_DatumBase):
    """
    Gaussian 펄스

    φ(x) = a·exp(−((x−c)/w)²)·e^{ivx}
    """
    kind: Literal["gaussian"] = "gaussian"
    amplitude: float = Field(ge=0.0)
    width: float = Field(gt=0.0)
    center: float = 0.0
    velocity: float = Field(default=0.0, description="phase velocity v in e^{ivx}")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        envelope = self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))
        return envelope * np.exp(1j * self.velocity * x)

    def _antiderivative_difference(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # erf(z_b) − erf(z_a) via erfc on the side where it does not cancel
        shift = 0.5j * self.velocity * self.width
        za = (a - self.center) / self.width - shift
        zb = (b - self.center) / self.width - shift
        right = np.real(za) > 0.0
        return np.where(right, erfc(za) - erfc(zb), erfc(-zb) - erfc(-za))

    def cell_average(self, x: np.ndarray, h: float) -> np.ndarray:
        """닫힌 형태: completing the square, complex erf"""
        x = np.asarray(x, dtype=float)
        w, v, c = self.width, self.velocity, self.center
        prefactor = self.amplitude * w * np.sqrt(np.pi) / 2.0 * np.exp(1j * v * c - (v * w) ** 2 / 4.0)
        return prefactor * self._antiderivative_difference(x, x + h) / h

    def l2_norm(self) -> float:
        return float(self.amplitude * (self.width**2 * np.pi / 2.0) ** 0.25)

    def derivative_l2_norm(self) -> float:
        w, v = self.width, self.velocity
        return float(self.amplitude * np.sqrt(np.sqrt(np.pi / 2.0) * (1.0 / w + v * v * w)))


class SechDatum(_DatumBase):
    """
    Sech 펄스

    φ(x) = a·sech((x−c)/w)·e^{ivx}
    경계 감쇠가 지수적으로 느리므로 넓은 주기 필요 (L ≥ 48w 정도)
    """
    kind: Literal["sech"] = "sech"
    amplitude: float = Field(gt=0.0)
    width: float = Field(gt=0.0)
    center: float = 0.0
    velocity: float = 0.0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        envelope = self.amplitude / np.cosh((x - self.center) / self.width)
        return envelope * np.exp(1j * self.velocity * x)

    def l2_norm(self) -> float:
        return float(self.amplitude * np.sqrt(2.0 * self.width))

    def derivative_l2_norm(self) -> float:
        w, v = self.width, self.velocity
        return float(self.amplitude * np.sqrt(2.0 / (3.0 * w) + 2.0 * v * v * w))


class FileDatum(_DatumBase):
    """
    CSV 파일 초기값 (snapshot과 같은 `x,re,im` 형식)

    격자 밖은 0, 내부는 실수부/허수부 각각 선형 보간
    """
    kind: Literal["file"] = "file"
    path: Path

    @cached_property
    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        frame = pd.read_csv(self.path, float_precision="round_trip")
        missing = {"x", "re", "im"} - set(frame.columns)
        if missing:
            raise ValueError(f"{self.path}: missing columns {sorted(missing)}")
        frame = frame.sort_values("x")
        return frame["x"].to_numpy(float), (frame["re"] + 1j * frame["im"]).to_numpy(complex)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        xs, values = self.samples
        x = np.asarray(x, dtype=float)
        re = np.interp(x, xs, values.real, left=0.0, right=0.0)
        im = np.interp(x, xs, values.imag, left=0.0, right=0.0)
        return re + 1j * im

    def l2_norm(self) -> float:
        xs, values = self.samples
        return float(np.sqrt(np.trapezoid(np.abs(values) ** 2, xs)))

    def derivative_l2_norm(self) -> float:
        xs, values = self.samples
        slopes = np.diff(values) / np.diff(xs)
        return float(np.sqrt(np.sum(np.abs(slopes) ** 2 * np.diff(xs))))


class ConstantDatum(_DatumBase):
    """
    상수 초기값 (테스트 전용)

    주기 영역에서만 의미가 있으므로 경계 감쇠 검사를 건너뜀
    """
    kind: Literal["constant"] = "constant"
    decays: ClassVar[bool] = False
    re: float = 0.0
    im: float = 0.0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), complex(self.re, self.im))

    def cell_average(self, x: np.ndarray, h: float) -> np.ndarray:
        return self.evaluate(np.asarray(x))

    def l2_norm(self) -> float:
        return float("inf") if (self.re or self.im) else 0.0

    def derivative_l2_norm(self) -> float:
        return 0.0


InitialDatum = Annotated[
    Union[GaussianDatum, SechDatum, FileDatum, ConstantDatum],
    Field(discriminator="kind"),
]
