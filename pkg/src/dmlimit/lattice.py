# -*- coding: utf-8 -*-
"""
Periodic lattices, complex fields and the difference calculus

격자 구조:
- 주기 L = n·h, 점 x_m = −L/2 + m·h (m = 0..n−1), n은 2의 거듭제곱
- 2의 거듭제곱 점 수 → 세분 격자가 격자점을 공유 (정확한 격자 간 전달)
- 경계는 주기적으로 감김 (D⁺, D⁻, Δ_h 모두)

Norm conventions follow the lattice Fourier transform
f̂(ξ) = (h/√(2π)) Σ f(x) e^{−ixξ} on ξ_k = 2πk/L, so that Δξ·Σ|f̂|² = h·Σ|f|².
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft as sfft

from .exceptions import DecayError, GridMismatchError
from .schemas.datum import BOUNDARY_DECAY, InitialDatum

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 1 << 20

# Snapshot files carry 17 significant digits (round-trip exact for float64).
FLOAT_FORMAT = "%.17g"


# ============================================================================
# Lattice
# ============================================================================

class Lattice(BaseModel):
    """
    주기 격자 hZ ∩ [−L/2, L/2)

    h ∈ (0, 1], n ≥ 4 (2의 거듭제곱)
    """
    model_config = ConfigDict(frozen=True)

    h: float = Field(gt=0.0, le=1.0)
    n: int = Field(ge=4)

    @field_validator("n")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"n={value} is not a power of two")
        return value

    @property
    def period(self) -> float:
        return self.n * self.h

    @property
    def points(self) -> np.ndarray:
        return -0.5 * self.period + self.h * np.arange(self.n)

    @property
    def dxi(self) -> float:
        """Δξ = 2π/L"""
        return 2.0 * np.pi / self.period

    def frequencies(self, natural: bool = True) -> np.ndarray:
        """
        ξ_k = 2πk/L, k ∈ [−n/2, n/2)

        natural=True: FFT 순서 (0, 1, ..., −1), False: 단조 증가 순서
        """
        xi = 2.0 * np.pi * sfft.fftfreq(self.n, d=self.h)
        return xi if natural else sfft.fftshift(xi)

    def index_of(self, x: float) -> int:
        """x에 해당하는 격자점 인덱스"""
        m = (x + 0.5 * self.period) / self.h
        index = int(round(m))
        if abs(m - index) > 1e-9 or not (0 <= index < self.n):
            raise ValueError(f"x={x} is not a lattice point")
        return index


def make_lattice(h: float, L_target: float, max_points: int = DEFAULT_MAX_POINTS) -> Lattice:
    """
    n = 2^k 중 n·h ≥ L_target인 최소값

    예: (h=0.3, L_target=8) → n=32, L=9.6
    """
    if not (0.0 < h <= 1.0):
        raise ValueError(f"h={h} outside (0, 1]")
    if L_target < 8.0:
        raise ValueError(f"L_target={L_target} below 8")
    n = 4
    while n * h < L_target:
        n *= 2
    if n > max_points:
        raise ValueError(f"lattice with h={h}, L≥{L_target} needs n={n} > cap {max_points}")
    return Lattice(h=h, n=n)


# ============================================================================
# Fields
# ============================================================================

class LatticeField(BaseModel):
    """
    격자 위 복소장 (불변)

    values는 읽기 전용 복소 배열, 길이 = lattice.n, 모든 값 유한
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lattice: Lattice
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex_array(cls, value: object) -> np.ndarray:
        array = np.array(value, dtype=complex, copy=True)
        if array.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(array)):
            raise ValueError("values contain NaN or Inf")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _length_matches(self) -> "LatticeField":
        if self.values.shape[0] != self.lattice.n:
            raise ValueError(f"{self.values.shape[0]} values on a lattice of {self.lattice.n} points")
        return self

    @property
    def h(self) -> float:
        return self.lattice.h

    def with_values(self, values: np.ndarray) -> "LatticeField":
        """같은 격자, 같은 타입의 새 field"""
        return type(self)(lattice=self.lattice, values=values)


class ContinuumField(LatticeField):
    """
    연속 함수의 미세 격자 표현 (h_ref, n_ref)

    propagate는 이 타입에 연속 심볼 −ξ²를 사용
    """


def zeros(lattice: Lattice) -> LatticeField:
    return LatticeField(lattice=lattice, values=np.zeros(lattice.n, dtype=complex))


def delta(lattice: Lattice, x: float = 0.0, amplitude: complex = 1.0) -> LatticeField:
    """x에 크기 amplitude인 격자 델타"""
    values = np.zeros(lattice.n, dtype=complex)
    values[lattice.index_of(x)] = amplitude
    return LatticeField(lattice=lattice, values=values)


def _check_same_lattice(f: LatticeField, g: LatticeField) -> None:
    if f.lattice != g.lattice:
        raise GridMismatchError(f"lattice mismatch: {f.lattice} vs {g.lattice}")


# ============================================================================
# Norms and inner product
# ============================================================================

def lp_norm(f: LatticeField, p: float) -> float:
    """‖f‖_{L^p_h} = (h Σ|f|^p)^{1/p}, p=∞이면 sup"""
    if not p >= 1.0:
        raise ValueError(f"p={p} must be at least 1")
    magnitudes = np.abs(f.values)
    if np.isinf(p):
        return float(np.max(magnitudes)) if magnitudes.size else 0.0
    if p == 2.0:
        return float(np.sqrt(f.h * np.sum(magnitudes**2)))
    return float((f.h * np.sum(magnitudes**p)) ** (1.0 / p))


def inner_product(f: LatticeField, g: LatticeField) -> complex:
    """⟨f, g⟩ = h Σ f·conj(g)"""
    _check_same_lattice(f, g)
    return complex(f.h * np.vdot(g.values, f.values))


def hs_norm(f: LatticeField, s: float, homogeneous: bool = False) -> float:
    """
    H^s_h / Ḣ^s_h 노름

    ‖f‖² = Δξ Σ_k w(ξ_k)|f̂(ξ_k)|², w = (1+ξ²)^s 또는 |ξ|^{2s}
    Parseval: |f̂(ξ_k)|² = (h²/2π)|FFT_k|² 이므로 Δξ·h²/(2π) = h/n
    """
    xi = f.lattice.frequencies()
    coefficients = sfft.fft(f.values)
    if homogeneous:
        weights = np.abs(xi) ** (2.0 * s)
    else:
        weights = (1.0 + xi**2) ** s
    total = f.h / f.lattice.n * np.sum(weights * np.abs(coefficients) ** 2)
    return float(np.sqrt(total))


def h1_norm_equivalent(f: LatticeField) -> float:
    """(‖f‖² + ‖D⁺f‖²)^{1/2}, H¹_h와 동등한 작업용 노름"""
    return float(np.hypot(lp_norm(f, 2), lp_norm(forward_diff(f), 2)))


# ============================================================================
# Difference calculus
# ============================================================================

def forward_diff(f: LatticeField) -> LatticeField:
    """(D⁺f)(x) = (f(x+h) − f(x))/h"""
    return f.with_values((np.roll(f.values, -1) - f.values) / f.h)


def backward_diff(f: LatticeField) -> LatticeField:
    """(D⁻f)(x) = (f(x) − f(x−h))/h"""
    return f.with_values((f.values - np.roll(f.values, 1)) / f.h)


def discrete_laplacian(f: LatticeField) -> LatticeField:
    """(Δ_h f)(x) = (f(x+h) + f(x−h) − 2f(x))/h²  (= D⁻D⁺f)"""
    v = f.values
    return f.with_values((np.roll(v, -1) + np.roll(v, 1) - 2.0 * v) / f.h**2)


# ============================================================================
# Grid transfer
# ============================================================================

def _check_decay(datum: InitialDatum, lattice: Lattice) -> None:
    if not datum.decays:
        return
    ratio = datum.boundary_ratio(lattice.period)
    if ratio > BOUNDARY_DECAY:
        raise DecayError(
            f"datum {datum.kind} is {ratio:.3e} of its peak at the boundary of L={lattice.period}"
        )


def discretize(datum: InitialDatum, lattice: Lattice) -> LatticeField:
    """
    셀 평균 이산화 f_h(x) = (1/h)∫_x^{x+h} f

    gaussian은 erf로 정확히, 그 외는 셀당 8점 Gauss–Legendre
    """
    _check_decay(datum, lattice)
    values = datum.cell_average(lattice.points, lattice.h)
    return LatticeField(lattice=lattice, values=values)


def sample(datum: InitialDatum, lattice: Lattice) -> ContinuumField:
    """격자점 값 그대로 (연속 기준해의 초기값)"""
    _check_decay(datum, lattice)
    return ContinuumField(lattice=lattice, values=datum.evaluate(lattice.points))


def refinement_ratio(coarse: Lattice, fine: Lattice) -> int:
    """fine이 coarse를 세분하는 배율 (2의 거듭제곱), 아니면 GridMismatchError"""
    if not np.isclose(coarse.period, fine.period, rtol=1e-12, atol=0.0):
        raise GridMismatchError(f"periods differ: {coarse.period} vs {fine.period}")
    if fine.n % coarse.n:
        raise GridMismatchError(f"n={fine.n} does not refine n={coarse.n}")
    return fine.n // coarse.n


def interpolate(f: LatticeField, target: Lattice) -> ContinuumField:
    """
    선형 보간 p_h f를 target 격자점에서 샘플링

    [x_m, x_m+h)에서 f(x_m) + (f(x_m+h) − f(x_m))(x − x_m)/h, 마지막 셀은 주기적으로 감김
    """
    ratio = refinement_ratio(f.lattice, target)
    j = np.arange(target.n)
    m = j // ratio
    fraction = (j % ratio) / ratio
    left = f.values[m]
    right = f.values[(m + 1) % f.lattice.n]
    return ContinuumField(lattice=target, values=left + (right - left) * fraction)


def interpolant_h1_norm(f: LatticeField) -> float:
    """
    ‖p_h f‖_{H¹(ℝ)} 정확값 (구간별 선형 적분)

    셀마다 ∫|p_h f|² = h(|a|² + Re(a·conj b) + |b|²)/3, (p_h f)′ = D⁺f
    """
    a = f.values
    b = np.roll(a, -1)
    l2_squared = f.h / 3.0 * np.sum(np.abs(a) ** 2 + np.real(a * np.conj(b)) + np.abs(b) ** 2)
    return float(np.sqrt(l2_squared + lp_norm(forward_diff(f), 2) ** 2))


# ============================================================================
# Snapshot files
# ============================================================================

def write_field_csv(f: LatticeField, path: Union[str, Path]) -> None:
    """`x,re,im` 헤더, x 증가 순, 17 유효숫자"""
    frame = pd.DataFrame({"x": f.lattice.points, "re": f.values.real, "im": f.values.imag})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_field_csv(path: Union[str, Path]) -> LatticeField:
    """write_field_csv의 역. 균등 간격과 2의 거듭제곱 점 수를 요구"""
    frame = pd.read_csv(path, float_precision="round_trip")
    x = frame["x"].to_numpy(float)
    if x.size < 2:
        raise ValueError(f"{path}: too few points")
    h = float(x[1] - x[0])
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12):
        raise GridMismatchError(f"{path}: points are not equally spaced")
    lattice = Lattice(h=h, n=x.size)
    if not np.isclose(x[0], -0.5 * lattice.period, rtol=0.0, atol=1e-9 * lattice.period):
        raise GridMismatchError(f"{path}: first point {x[0]} is not −L/2")
    return LatticeField(lattice=lattice, values=(frame["re"] + 1j * frame["im"]).to_numpy())
