# -*- coding: utf-8 -*-
"""
Dispersion-managed NLS: averaged nonlinearity, conserved quantities, time integration

방정식: i∂_t u + d_av Δu + ⟨Q⟩(u) = 0
- ⟨Q⟩(f) = Σ_j w_j T_{r_j}^{−1}(|T_{r_j}f|^{p−1} T_{r_j}f),  r-적분은 [0,1] Gauss–Legendre
- 이산 (Δ_h, σ_h) 과 연속 (∂², −ξ²) 모두 같은 코드, 심볼만 다름

Time stepping uses the interaction picture u = e^{i d_av tΔ}v, so the linear
flow is exact through multipliers and classical RK4 only sees
∂_t v = i e^{−i d_av tΔ}⟨Q⟩(e^{i d_av tΔ}v).
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft as sfft

from .bounds import barrier_dav0, blowup_horizon
from .exceptions import BlowUpError, GridMismatchError, NonFiniteError
from .lattice import LatticeField, forward_diff, hs_norm, lp_norm
from .schemas.config import ProblemSpec, QuadratureConfig
from .schemas.diagnostics import DiagnosticsRecord, RunHealth
from .spectral import field_kind, multiplier_stack, symbol_table

logger = logging.getLogger(__name__)

# Spectral tail threshold for the quadrature bandwidth test.
TAIL_THRESHOLD = 1e-8

# Maximum phase increment of the fastest resolved mode across one quadrature panel.
PANEL_PHASE = 0.5 * np.pi


# ============================================================================
# Quadrature
# ============================================================================

class QuadratureRule(BaseModel):
    """
    [0,1] 위 Gauss–Legendre 규칙

    Σw_j = 1, 노드 r_j ∈ (0,1), 차수 2M−1까지 정확
    """
    model_config = ConfigDict(frozen=True)

    nodes: Tuple[float, ...]
    weights: Tuple[float, ...]

    @field_validator("weights")
    @classmethod
    def _positive_weights(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(w <= 0.0 for w in value):
            raise ValueError("weights must be positive")
        if abs(math.fsum(value) - 1.0) > 1e-13:
            raise ValueError("weights must sum to 1")
        return value

    @model_validator(mode="after")
    def _matching_nodes(self) -> "QuadratureRule":
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        if any(not (0.0 < r < 1.0) for r in self.nodes):
            raise ValueError("nodes must lie in (0, 1)")
        return self

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Σ_j w_j values[j] (첫 축이 노드)"""
        return np.tensordot(np.asarray(self.weights), values, axes=(0, 0))


def gauss_legendre(M: int) -> QuadratureRule:
    """[−1,1] 규칙을 [0,1]로 옮김"""
    if M < 1:
        raise ValueError(f"M={M} must be positive")
    x, w = np.polynomial.legendre.leggauss(M)
    return QuadratureRule(nodes=tuple(0.5 * (x + 1.0)), weights=tuple(0.5 * w))


def resolve_quadrature(
    f: LatticeField,
    spec: ProblemSpec,
    config: QuadratureConfig,
    health: Optional[RunHealth] = None,
) -> QuadratureRule:
    """
    노드 수 결정

    - 고정 M: 그대로
    - auto: |f̂| ≥ 1e−8·max 인 최고 주파수 ξ_eff에서 |σ(ξ_eff)|/M < π/2 가 될 때까지 2배,
      max_nodes에서 멈추고 경고
    """
    if not config.auto:
        return gauss_legendre(int(config.M))
    M = config.start_nodes
    magnitudes = np.abs(sfft.fft(f.values))
    peak = float(np.max(magnitudes)) if magnitudes.size else 0.0
    if peak == 0.0:
        return gauss_legendre(M)
    symbol = symbol_table(f.lattice, field_kind(f))
    phase = float(np.max(np.abs(symbol[magnitudes >= TAIL_THRESHOLD * peak])))
    while phase / M >= PANEL_PHASE and M < config.max_nodes:
        M = min(2 * M, config.max_nodes)
    if phase / M >= PANEL_PHASE:
        message = f"r-quadrature capped at M={M}; phase per panel {phase / M:.3f} ≥ π/2"
        logger.warning(message)
        if health is not None:
            health.add_issue("quadrature_cap", message)
    elif M > config.start_nodes:
        logger.info("r-quadrature escalated to M=%d (bandwidth phase %.1f)", M, phase)
    return gauss_legendre(M)


# ============================================================================
# Nonlinearity and conserved quantities
# ============================================================================

def nonlinearity_pointwise(z: np.ndarray, p: float) -> np.ndarray:
    """N(z) = |z|^{p−1}z, N(0) = 0"""
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.abs(z) ** (p - 1.0) * z


def _check_kind(f: LatticeField, spec: ProblemSpec) -> None:
    if field_kind(f) != spec.kind:
        raise GridMismatchError(f"{spec.kind} problem given a {field_kind(f)} field")


def _require_finite(values: np.ndarray, what: str, t: Optional[float] = None) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"non-finite values in {what}", t=t)
    return values


class _Flow:
    """
    한 궤적의 수치 흐름 (값 배열 수준)

    격자, 심볼, 노드별 multiplier 표를 한 번만 만들고 재사용
    """

    def __init__(self, lattice, kind, spec: ProblemSpec, quad: QuadratureRule):
        self.lattice = lattice
        self.spec = spec
        self.quad = quad
        self.symbol = symbol_table(lattice, kind)
        self.stack = multiplier_stack(lattice, kind, quad.nodes)
        self.weights = np.asarray(quad.weights)

    def linear(self, values: np.ndarray, r: float) -> np.ndarray:
        if r == 0.0:
            return values
        return sfft.ifft(np.exp(1j * r * self.symbol) * sfft.fft(values))

    def averaged(self, values: np.ndarray, t: Optional[float] = None) -> np.ndarray:
        if not self.spec.nonlinear:
            return np.zeros_like(values)
        spectrum = sfft.fft(values)
        orbit = sfft.ifft(self.stack * spectrum[None, :], axis=1)
        forced = sfft.fft(nonlinearity_pointwise(orbit, self.spec.p), axis=1)
        with np.errstate(invalid="ignore", over="ignore"):
            pulled_back = np.einsum("j,jk->k", self.weights, np.conj(self.stack) * forced)
        return _require_finite(sfft.ifft(pulled_back), "averaged nonlinearity", t)

    def potential(self, values: np.ndarray) -> float:
        """Σ_j w_j ‖T_{r_j}f‖^{p+1}_{L^{p+1}_h}"""
        if not self.spec.nonlinear:
            return 0.0
        orbit = sfft.ifft(self.stack * sfft.fft(values)[None, :], axis=1)
        with np.errstate(over="ignore"):
            norms = self.lattice.h * np.sum(np.abs(orbit) ** (self.spec.p + 1.0), axis=1)
        return float(self.weights @ norms)

    def rhs(self, v: np.ndarray, t: float) -> np.ndarray:
        r = self.spec.d_av * t
        u = self.linear(v, r)
        return 1j * self.linear(self.averaged(u, t), -r)

    def rk4(self, v: np.ndarray, t: float, dt: float) -> np.ndarray:
        k1 = self.rhs(v, t)
        k2 = self.rhs(v + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = self.rhs(v + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = self.rhs(v + dt * k3, t + dt)
        return _require_finite(v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), "RK4 step", t)


def _flow(f: LatticeField, spec: ProblemSpec, quad: QuadratureRule) -> _Flow:
    _check_kind(f, spec)
    return _Flow(f.lattice, spec.kind, spec, quad)


def averaged_nonlinearity(f: LatticeField, spec: ProblemSpec, quad: QuadratureRule) -> LatticeField:
    """⟨Q⟩(f) = Σ_j w_j T_{r_j}^{−1}(|T_{r_j}f|^{p−1}T_{r_j}f)"""
    return f.with_values(_flow(f, spec, quad).averaged(f.values))


def mass(f: LatticeField) -> float:
    """‖f‖²_{L²_h}"""
    return lp_norm(f, 2) ** 2


def kinetic(f: LatticeField) -> float:
    """
    ‖D⁺f‖² (이산) 또는 ‖∂f‖² = ‖f‖²_{Ḣ¹} (연속 심볼)

    각 흐름이 보존하는 에너지와 짝이 맞는 운동 항
    """
    if field_kind(f) == "continuum":
        return hs_norm(f, 1.0, homogeneous=True) ** 2
    return lp_norm(forward_diff(f), 2) ** 2


def energy(f: LatticeField, spec: ProblemSpec, quad: QuadratureRule) -> float:
    """E(f) = (d_av/2)‖D⁺f‖² − (1/(p+1)) ∫₀¹ ‖T_r f‖^{p+1}_{L^{p+1}} dr"""
    flow = _flow(f, spec, quad)
    return 0.5 * spec.d_av * kinetic(f) - flow.potential(f.values) / (spec.p + 1.0)


# ============================================================================
# Time integration
# ============================================================================

def rhs_interaction(
    v: LatticeField, t: float, spec: ProblemSpec, quad: QuadratureRule
) -> LatticeField:
    """∂_t v = i e^{−i d_av tΔ}⟨Q⟩(e^{i d_av tΔ}v)"""
    return v.with_values(_flow(v, spec, quad).rhs(v.values, t))


def step_rk4(
    v: LatticeField, t: float, dt: float, spec: ProblemSpec, quad: QuadratureRule
) -> LatticeField:
    """고전 4단 RK 한 스텝 (interaction picture)"""
    if dt <= 0.0:
        raise ValueError(f"dt={dt} must be positive")
    return v.with_values(_flow(v, spec, quad).rk4(v.values, t, dt))


class Trajectory(BaseModel):
    """
    evolve 결과

    snapshots[i]는 records[i].t 시각의 물리장 u (interaction 변수 아님)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    snapshots: List[LatticeField] = Field(default_factory=list)
    records: List[DiagnosticsRecord] = Field(default_factory=list)
    health: RunHealth = Field(default_factory=RunHealth)
    nodes: int
    steps: int
    dt: float

    @property
    def times(self) -> List[float]:
        return [r.t for r in self.records]

    @property
    def final(self) -> LatticeField:
        return self.snapshots[-1]

    def relative_drift(self, quantity: str) -> float:
        """max_t |q(t) − q(t0)| / |q(t0)|, q(t0)=0이면 절대 변화"""
        values = np.array([getattr(r, quantity) for r in self.records])
        scale = abs(values[0]) or 1.0
        return float(np.max(np.abs(values - values[0])) / scale)


def evolve(
    phi: LatticeField,
    spec: ProblemSpec,
    quad: QuadratureRule,
    T: float,
    dt: float,
    snapshot_every: int = 20,
    t0: float = 0.0,
    blowup_factor: float = 1e3,
    health: Optional[RunHealth] = None,
) -> Trajectory:
    """
    t0 → T 적분 (T < t0이면 역방향)

    - 스냅샷마다 DiagnosticsRecord
    - d_av=0: T* 경고, barrier(t) 기록
    - 매 스텝 ‖u‖_{H¹} > blowup_factor·시작값 또는 NaN/Inf → BlowUpError
      (초과 시점은 스냅샷으로 남김, exc.trajectory에 중단 전까지의 기록)
    """
    _check_kind(phi, spec)
    if dt <= 0.0:
        raise ValueError(f"dt={dt} must be positive")
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be at least 1")
    span = T - t0
    if span == 0.0:
        raise ValueError("T must differ from t0")
    steps = max(1, math.ceil(abs(span) / dt - 1e-9))
    step = span / steps
    health = health if health is not None else RunHealth()
    flow = _Flow(phi.lattice, spec.kind, spec, quad)

    phi_l2 = lp_norm(phi, 2)
    phi_dplus = lp_norm(forward_diff(phi), 2)
    h1_start = hs_norm(phi, 1.0)
    track_barrier = spec.d_av == 0.0 and spec.nonlinear and phi_l2 > 0.0 and phi_dplus > 0.0
    if spec.d_av == 0.0 and spec.nonlinear:
        horizon = blowup_horizon(phi_l2, phi_dplus, spec.p)
        if abs(span) >= horizon:
            message = f"horizon {abs(span):g} reaches T*={horizon:.6g} for d_av=0"
            logger.warning(message)
            health.add_issue("past_blowup_horizon", message)
    if not spec.admissible:
        health.add_issue("inadmissible_exponent", f"p={spec.p:g} with d_av={spec.d_av:g}")

    logger.info(
        "evolve: %s n=%d h=%g M=%d steps=%d dt=%g t0=%g T=%g",
        spec.kind, phi.lattice.n, phi.h, quad.size, steps, abs(step), t0, T,
    )

    trajectory = Trajectory(health=health, nodes=quad.size, steps=steps, dt=abs(step))
    ceiling = blowup_factor * h1_start
    v = flow.linear(phi.values, -spec.d_av * t0)
    for k in range(steps + 1):
        t = t0 + k * step
        u = phi.with_values(flow.linear(v, spec.d_av * t))
        h1 = hs_norm(u, 1.0)
        exceeded = h1_start > 0.0 and h1 > ceiling
        if k % snapshot_every == 0 or k == steps or exceeded:
            barrier = None
            if track_barrier:
                barrier, _ = barrier_dav0(abs(t - t0), phi_l2, phi_dplus, spec.p)
            record = DiagnosticsRecord(
                t=t,
                mass=mass(u),
                energy=0.5 * spec.d_av * kinetic(u) - flow.potential(u.values) / (spec.p + 1.0),
                h1=h1,
                dplus=lp_norm(forward_diff(u), 2),
                barrier=barrier,
            )
            if not record.is_finite:
                message = f"non-finite diagnostics at t={t:g}"
                health.add_issue("non_finite", message, severity="error", t=t)
                logger.error(message)
                raise NonFiniteError(message, t=t, trajectory=trajectory)
            trajectory.snapshots.append(u)
            trajectory.records.append(record)
            if record.below_barrier is False:
                health.add_issue(
                    "barrier_violation", f"‖D⁺u‖={record.dplus:.6g} > {barrier:.6g}", t=t
                )
        # checked every step, a snapshot is forced at the crossing
        if exceeded:
            message = f"‖u‖_H¹={h1:.3e} exceeds {blowup_factor:g}× its start at t={t:g}"
            health.add_issue("blow_up", message, severity="error", t=t)
            logger.error(message)
            raise BlowUpError(message, t=t, norm=h1, trajectory=trajectory)
        if k < steps:
            try:
                v = flow.rk4(v, t, step)
            except NonFiniteError as exc:
                health.add_issue("non_finite", str(exc), severity="error", t=t)
                logger.error("non-finite state at t=%g", t)
                raise NonFiniteError(str(exc), t=t, trajectory=trajectory) from exc

    logger.info("evolve done: mass drift %.3e", trajectory.relative_drift("mass"))
    return trajectory
