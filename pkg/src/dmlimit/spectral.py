# -*- coding: utf-8 -*-
"""
Lattice Fourier transform and free Schrödinger propagators

변환 규약:
- f̂(ξ) = (h/√(2π)) Σ_x f(x) e^{−ixξ},  ξ_k = 2πk/L, k ∈ [−n/2, n/2)
- f(x) = (1/√(2π)) Σ_k f̂(ξ_k) e^{ixξ_k} Δξ
- 격자점 x_m = −L/2 + mh 이므로 FFT 계수에 (−1)^k 위상이 붙음

Propagators are diagonal multipliers, so they skip the phase bookkeeping and
act as ifft(e^{irσ(ξ)}·fft(f)):
- discrete: σ_h(ξ) = −(4/h²) sin²(hξ/2), the symbol of Δ_h
- continuum: σ(ξ) = −ξ²
"""

import logging
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import fft as sfft

from .exceptions import GridMismatchError
from .lattice import ContinuumField, Lattice, LatticeField

logger = logging.getLogger(__name__)

PropagatorKind = Literal["discrete", "continuum"]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


# ============================================================================
# Spectrum
# ============================================================================

class SpectrumField(BaseModel):
    """
    격자장의 Fourier 계수

    내부 저장은 FFT 순서 (natural), API는 단조 ξ 순서
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lattice: Lattice
    natural: np.ndarray

    @field_validator("natural", mode="before")
    @classmethod
    def _as_complex_array(cls, value: object) -> np.ndarray:
        array = np.array(value, dtype=complex, copy=True)
        array.setflags(write=False)
        return array

    @classmethod
    def from_monotone(cls, lattice: Lattice, coefficients: np.ndarray) -> "SpectrumField":
        """단조 ξ 순서 계수에서 생성"""
        return cls(lattice=lattice, natural=sfft.ifftshift(np.asarray(coefficients, dtype=complex)))

    @property
    def coefficients(self) -> np.ndarray:
        return sfft.fftshift(self.natural)

    @property
    def frequencies(self) -> np.ndarray:
        return self.lattice.frequencies(natural=False)

    def l2_norm(self) -> float:
        """(Δξ Σ|f̂|²)^{1/2}, Parseval로 ‖f‖_{L²_h}와 같음"""
        return float(np.sqrt(self.lattice.dxi * np.sum(np.abs(self.natural) ** 2)))


def _alternating_sign(n: int) -> np.ndarray:
    # e^{−i x_0 ξ_k} = e^{iπk} = (−1)^k, and k ≡ index (mod 2) since n is even
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def dft(f: LatticeField) -> SpectrumField:
    """f̂(ξ_k) = (h/√(2π)) Σ f(x) e^{−ixξ_k}"""
    lattice = f.lattice
    coefficients = (lattice.h / _SQRT_2PI) * _alternating_sign(lattice.n) * sfft.fft(f.values)
    return SpectrumField(lattice=lattice, natural=coefficients)


def idft(spectrum: SpectrumField) -> LatticeField:
    """f(x) = (1/√(2π)) Σ_k f̂(ξ_k) e^{ixξ_k} Δξ"""
    lattice = spectrum.lattice
    scale = lattice.dxi * lattice.n / _SQRT_2PI
    values = scale * sfft.ifft(_alternating_sign(lattice.n) * spectrum.natural)
    return LatticeField(lattice=lattice, values=values)


# ============================================================================
# Symbols
# ============================================================================

def discrete_symbol(xi: np.ndarray, h: float) -> np.ndarray:
    """
    σ_h(ξ) = −(4/h²) sin²(hξ/2), |ξ| ≤ π/h

    σ_h(0) = 0, σ_h(±π/h) = −4/h², h→0에서 −ξ²로 수렴
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi) > np.pi / h * (1.0 + 1e-12)):
        raise ValueError(f"frequency outside the Brillouin zone [−π/h, π/h] for h={h}")
    return -(4.0 / h**2) * np.sin(0.5 * h * xi) ** 2


def continuum_symbol(xi: np.ndarray) -> np.ndarray:
    """σ(ξ) = −ξ²"""
    xi = np.asarray(xi, dtype=float)
    return -(xi**2)


def symbol_table(lattice: Lattice, kind: PropagatorKind) -> np.ndarray:
    """FFT 순서의 심볼 값"""
    xi = lattice.frequencies()
    if kind == "discrete":
        return discrete_symbol(xi, lattice.h)
    return continuum_symbol(xi)


# ============================================================================
# Propagators
# ============================================================================

class Propagator(BaseModel):
    """
    T_r = e^{irσ(D)}, 모든 multiplier의 절댓값은 1

    생성 후 불변, 스레드 간 공유 가능
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lattice: Lattice
    kind: PropagatorKind
    r: float
    multiplier: np.ndarray

    @classmethod
    def build(cls, lattice: Lattice, r: float, kind: PropagatorKind) -> "Propagator":
        table = np.exp(1j * r * symbol_table(lattice, kind))
        table.setflags(write=False)
        return cls(lattice=lattice, kind=kind, r=r, multiplier=table)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return sfft.ifft(self.multiplier * sfft.fft(values))

    def __call__(self, f: LatticeField) -> LatticeField:
        if f.lattice != self.lattice:
            raise GridMismatchError(f"propagator built for {self.lattice}, field on {f.lattice}")
        return f.with_values(self.apply(f.values))


@lru_cache(maxsize=256)
def propagator(lattice: Lattice, r: float, kind: PropagatorKind) -> Propagator:
    """(r, 격자)마다 한 번만 계산되는 Propagator"""
    return Propagator.build(lattice, r, kind)


@lru_cache(maxsize=64)
def multiplier_stack(lattice: Lattice, kind: PropagatorKind, nodes: tuple[float, ...]) -> np.ndarray:
    """
    e^{ir_jσ(ξ_k)}, shape (M, n)

    r-적분 노드마다 재사용 (시간 스텝, 에너지 계산 공통)
    """
    table = np.exp(1j * np.asarray(nodes)[:, None] * symbol_table(lattice, kind)[None, :])
    table.setflags(write=False)
    return table


def field_kind(f: LatticeField) -> PropagatorKind:
    return "continuum" if isinstance(f, ContinuumField) else "discrete"


def propagate(f: LatticeField, r: float, kind: Optional[PropagatorKind] = None) -> LatticeField:
    """
    T_{h,r}f (이산) 또는 T_r f (연속)

    kind를 생략하면 field 타입에서 결정, 명시한 kind가 타입과 다르면 GridMismatchError
    """
    expected = field_kind(f)
    if kind is not None and kind != expected:
        raise GridMismatchError(f"{kind} propagator requested for a {expected} field")
    if r == 0.0:
        return f
    return propagator(f.lattice, float(r), expected)(f)
