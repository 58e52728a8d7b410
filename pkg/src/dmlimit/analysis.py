# -*- coding: utf-8 -*-
"""
Continuum-limit convergence study and inequality verifiers

수렴 연구:
1. 연속 심볼 기준해 u_ref (h_ref, 점값 샘플링)
2. 각 h에서 이산 방정식, φ_h = 셀 평균
3. 공유 스냅샷 시각마다 ‖p_h u_h(t) − u_ref(t)‖_{L²}, sup → log-log 기울기

부등식 검증:
- 정확한 상수 (H¹ 동치, GN, Sobolev, 차분 상한, 이산화 축소, 보간 H¹) → BoundConstant.exact
- ≲ 부등식 (Strichartz L⁸, ⟨Q_h⟩ H¹, 보간 일관성/선형흐름/분배 결함) → 고정된 baseline
- sup_t ‖u_h‖_{H¹_h}: measure_sup_h1로 측정해 고정

All ensembles are drawn from one seeded generator per h, so reports are
reproducible byte for byte.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft

from .bounds import barrier_dav0, blowup_horizon
from .dmnls import (
    QuadratureRule,
    Trajectory,
    averaged_nonlinearity,
    evolve,
    gauss_legendre,
    nonlinearity_pointwise,
    resolve_quadrature,
)
from .exceptions import BlowUpError, ConvergenceStudyError
from .lattice import (
    Lattice,
    LatticeField,
    discretize,
    forward_diff,
    hs_norm,
    interpolant_h1_norm,
    interpolate,
    lp_norm,
    make_lattice,
    refinement_ratio,
    sample,
)
from .schemas.base import BoundConstant
from .schemas.config import ProblemSpec, QuadratureConfig
from .schemas.datum import GaussianDatum, InitialDatum
from .schemas.reports import (
    BaselineFile,
    ConvergenceReport,
    ConvergenceRun,
    InequalityReport,
)
from .spectral import multiplier_stack, propagate

logger = logging.getLogger(__name__)

__all__ = [
    "barrier_dav0",
    "l2_error",
    "restriction_error",
    "fit_loglog_slope",
    "convergence_study",
    "measure_sup_h1",
    "random_band_limited_field",
    "gaussian_family",
    "load_baselines",
    "verify_inequalities",
]

BASELINE_RESOURCE = "data/baselines.json"


# ============================================================================
# Errors and slopes
# ============================================================================

def l2_error(f: LatticeField, ref: LatticeField) -> float:
    """
    ‖p_h f − ref‖_{L²}

    p_h f를 기준 격자에서 샘플링, 기준 격자의 직사각형 규칙으로 적분
    격자가 중첩되지 않으면 GridMismatchError
    """
    diff = interpolate(f, ref.lattice).values - ref.values
    return float(np.sqrt(ref.h * np.sum(np.abs(diff) ** 2)))


def restriction_error(coarse: LatticeField, fine: LatticeField) -> float:
    """fine을 coarse 격자점으로 제한한 뒤의 L²_h 거리 (기준해 자기 검증용)"""
    ratio = refinement_ratio(coarse.lattice, fine.lattice)
    diff = fine.values[::ratio] - coarse.values
    return float(np.sqrt(coarse.h * np.sum(np.abs(diff) ** 2)))


def fit_loglog_slope(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """
    error ≈ intercept · h^slope 최소제곱

    예: [(1,1), (0.5,0.70710678), (0.25,0.5)] → (0.5, 1.0)
    """
    if len(points) < 3:
        raise ValueError(f"slope fit needs at least 3 points, got {len(points)}")
    h = np.array([pt[0] for pt in points], dtype=float)
    err = np.array([pt[1] for pt in points], dtype=float)
    if np.any(h <= 0.0) or np.any(err <= 0.0):
        raise ValueError("slope fit needs positive spacings and errors")
    slope, log_intercept = np.polyfit(np.log(h), np.log(err), 1)
    return float(slope), float(np.exp(log_intercept))


# ============================================================================
# Convergence study
# ============================================================================

def _evolve_member(
    h: float,
    phi: LatticeField,
    spec: ProblemSpec,
    rule: QuadratureRule,
    T: float,
    dt: float,
    snapshot_every: int,
    blowup_factor: float,
) -> Trajectory:
    try:
        return evolve(phi, spec, rule, T, dt, snapshot_every, blowup_factor=blowup_factor)
    except BlowUpError as exc:
        raise ConvergenceStudyError(f"run at h={h:g} aborted: {exc}", h=h) from exc


def _sup_error(run: Trajectory, reference: Trajectory) -> float:
    if len(run.records) != len(reference.records):
        raise ConvergenceStudyError("snapshot times differ from the reference", h=run.final.h)
    return max(l2_error(u, ref) for u, ref in zip(run.snapshots, reference.snapshots))


def convergence_study(
    phi: InitialDatum,
    spec: ProblemSpec,
    T: float,
    dt: float,
    h_list: Sequence[float],
    h_ref: float,
    *,
    L_target: float = 32.0,
    quadrature: Optional[QuadratureConfig] = None,
    snapshot_every: int = 20,
    blowup_factor: float = 1e3,
    workers: int = 1,
    check_reference: bool = False,
    reference_escalations: int = 0,
    config_echo: Optional[Dict[str, Any]] = None,
) -> ConvergenceReport:
    """
    연속 극한 수렴 연구

    - 모든 실행(기준해 포함)이 같은 r-quadrature를 사용 (auto면 필요한 최대 M)
    - 가장 작은 h에서 단조성이 깨지면 h_ref를 절반으로 줄여 기준해만 재실행
    - 구성 실행이 중단되면 ConvergenceStudyError (h 포함)
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("convergence study needs at least 3 spacings")
    if h_ref > min(h_list) / 4.0:
        raise ValueError(f"h_ref={h_ref:g} must be at most min(h_list)/4")
    if spec.d_av == 0.0 and spec.nonlinear:
        horizon = blowup_horizon(phi.l2_norm(), phi.derivative_l2_norm(), spec.p)
        if T >= horizon:
            raise ValueError(f"T={T:g} reaches the blow-up horizon T*={horizon:.6g}")
    quadrature = quadrature or QuadratureConfig()
    discrete = spec.model_copy(update={"kind": "discrete"})
    continuum = spec.model_copy(update={"kind": "continuum"})

    ref_lattice = make_lattice(h_ref, L_target)
    reference_phi = sample(phi, ref_lattice)
    coarse_phis = []
    for h in h_list:
        lattice = make_lattice(h, L_target)
        refinement_ratio(lattice, ref_lattice)
        coarse_phis.append(discretize(phi, lattice))

    nodes = max(
        [resolve_quadrature(f, discrete, quadrature).size for f in coarse_phis]
        + [resolve_quadrature(reference_phi, continuum, quadrature).size]
    )
    rule = gauss_legendre(nodes)
    logger.info(
        "convergence study: h=%s h_ref=%g T=%g dt=%g M=%d workers=%d",
        h_list, h_ref, T, dt, nodes, workers,
    )

    def run_reference(h: float) -> Trajectory:
        start = sample(phi, make_lattice(h, L_target))
        return _evolve_member(h, start, continuum, rule, T, dt, snapshot_every, blowup_factor)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reference_future = pool.submit(run_reference, h_ref)
        futures = [
            pool.submit(_evolve_member, h, f, discrete, rule, T, dt, snapshot_every, blowup_factor)
            for h, f in zip(h_list, coarse_phis)
        ]
        check_future = pool.submit(run_reference, 2.0 * h_ref) if check_reference else None
        runs = [future.result() for future in futures]
        reference = reference_future.result()
        check = check_future.result() if check_future is not None else None

    errors = [_sup_error(run, reference) for run in runs]
    escalations = 0
    while (
        escalations < reference_escalations
        and len(errors) >= 2
        and errors[-1] > errors[-2]
    ):
        h_ref *= 0.5
        escalations += 1
        logger.warning(
            "errors not monotone at h=%g (%.3e > %.3e); escalating reference to h_ref=%g",
            h_list[-1], errors[-1], errors[-2], h_ref,
        )
        check = reference if check_reference else None
        reference = run_reference(h_ref)
        errors = [_sup_error(run, reference) for run in runs]

    self_error = None
    if check is not None:
        self_error = max(
            restriction_error(coarse, fine)
            for coarse, fine in zip(check.snapshots, reference.snapshots)
        )
        logger.info("reference self-check (h_ref vs 2·h_ref): %.3e", self_error)

    slope, intercept = fit_loglog_slope(list(zip(h_list, errors)))
    logger.info("fitted slope %.4f, intercept %.4g", slope, intercept)

    members = [
        ConvergenceRun(
            h=h,
            n=run.final.lattice.n,
            error=error,
            mass_drift=run.relative_drift("mass"),
            energy_drift=run.relative_drift("energy"),
            sup_h1=max(r.h1 for r in run.records),
            nodes=run.nodes,
        )
        for h, run, error in zip(h_list, runs, errors)
    ]
    return ConvergenceReport(
        h_list=h_list,
        errors=errors,
        slope=slope,
        intercept=intercept,
        T=T,
        h_ref=h_ref,
        config_echo=config_echo or {},
        runs=members,
        reference_nodes=reference.nodes,
        reference_self_error=self_error,
        reference_escalations=escalations,
    )


def measure_sup_h1(
    phi: InitialDatum,
    spec: ProblemSpec,
    h: float,
    T: float,
    dt: float,
    *,
    L_target: float = 32.0,
    quadrature: Optional[QuadratureConfig] = None,
    snapshot_every: int = 20,
) -> float:
    """격자 h 위 한 궤적의 sup_t ‖u_h(t)‖_{H¹_h} (baseline 고정용)"""
    start = discretize(phi, make_lattice(h, L_target))
    rule = resolve_quadrature(start, spec, quadrature or QuadratureConfig())
    trajectory = evolve(start, spec, rule, T, dt, snapshot_every)
    return max(r.h1 for r in trajectory.records)


# ============================================================================
# Ensembles
# ============================================================================

def random_band_limited_field(lattice: Lattice, rng: np.random.Generator) -> LatticeField:
    """
    |f̂(ξ)| ∝ (1+|ξ|)^{−2}·(복소 가우스 잡음), |ξ| ≤ π

    cos²(πx/L) 창을 곱해 x = −L/2에서 정확히 0 (주기 격자 위에서도 직선과 같은 GN 상수)
    결과는 ‖f‖_{L²_h} = 1로 정규화
    """
    xi = lattice.frequencies()
    band = np.abs(xi) <= np.pi - 2.0 * lattice.dxi
    noise = rng.standard_normal(lattice.n) + 1j * rng.standard_normal(lattice.n)
    spectrum = np.where(band, noise / (1.0 + np.abs(xi)) ** 2, 0.0)
    window = np.cos(np.pi * lattice.points / lattice.period) ** 2
    values = window * sfft.ifft(spectrum)
    field = LatticeField(lattice=lattice, values=values)
    norm = lp_norm(field, 2)
    if norm == 0.0:
        raise ValueError("ensemble produced an all-zero field")
    return field.with_values(values / norm)


def gaussian_family(rng: np.random.Generator, count: int) -> List[GaussianDatum]:
    """폭 [0.5, 2], 중심 [−2, 2], 속도 [−1, 1], 진폭 1"""
    return [
        GaussianDatum(
            amplitude=1.0,
            width=float(rng.uniform(0.5, 2.0)),
            center=float(rng.uniform(-2.0, 2.0)),
            velocity=float(rng.uniform(-1.0, 1.0)),
        )
        for _ in range(count)
    ]


# ============================================================================
# Baselines
# ============================================================================

def load_baselines(path: Optional[Union[str, Path]] = None) -> BaselineFile:
    """패키지에 포함된 baselines.json (또는 지정 경로)"""
    if path is None:
        text = resources.files("dmlimit").joinpath(BASELINE_RESOURCE).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return BaselineFile.model_validate(json.loads(text))


# ============================================================================
# Ratios
# ============================================================================

def h1_equivalence_ratio(f: LatticeField) -> float:
    """‖D⁺f‖_{L²_h} / ‖f‖_{Ḣ¹_h}, 항상 [2/π, 1]"""
    return lp_norm(forward_diff(f), 2) / hs_norm(f, 1.0, homogeneous=True)


def gn_infinity_ratio(f: LatticeField) -> float:
    """‖f‖_∞ / (‖f‖_{L²}‖D⁺f‖_{L²})^{1/2} ≤ 1"""
    return lp_norm(f, np.inf) / math.sqrt(lp_norm(f, 2) * lp_norm(forward_diff(f), 2))


def gn_ratio(f: LatticeField, q: float) -> float:
    """‖f‖_{L^q} / (‖f‖^{1−θ}‖D⁺f‖^θ), θ = 1/2 − 1/q"""
    theta = 0.5 - 1.0 / q
    l2 = lp_norm(f, 2)
    return lp_norm(f, q) / (l2 ** (1.0 - theta) * lp_norm(forward_diff(f), 2) ** theta)


def sobolev_ratio(f: LatticeField) -> float:
    """√2‖f‖_∞ / ‖f‖_{H¹_h} ≤ 1"""
    return math.sqrt(2.0) * lp_norm(f, np.inf) / hs_norm(f, 1.0)


def difference_ratio(f: LatticeField) -> float:
    """h‖D⁺f‖ / (2‖f‖) ≤ 1"""
    return f.h * lp_norm(forward_diff(f), 2) / (2.0 * lp_norm(f, 2))


def strichartz_ratio(f: LatticeField, rule: QuadratureRule) -> float:
    """Σ_j w_j‖T_{h,r_j}f‖⁸_{L⁸_h} / (‖f‖⁷‖D⁺f‖)"""
    stack = multiplier_stack(f.lattice, "discrete", rule.nodes)
    orbit = sfft.ifft(stack * sfft.fft(f.values)[None, :], axis=1)
    averaged = float(np.asarray(rule.weights) @ (f.h * np.sum(np.abs(orbit) ** 8, axis=1)))
    return averaged / (lp_norm(f, 2) ** 7 * lp_norm(forward_diff(f), 2))


def averaged_nonlinearity_ratio(f: LatticeField, spec: ProblemSpec, rule: QuadratureRule) -> float:
    """‖⟨Q_h⟩(f)‖_{H¹_h} / ‖f‖^p_{H¹_h}"""
    return hs_norm(averaged_nonlinearity(f, spec, rule), 1.0) / hs_norm(f, 1.0) ** spec.p


def distributive_ratio(f: LatticeField, p: float, refinement: int) -> float:
    """‖p_h N(f) − N(p_h f)‖_{L²} / (h‖f‖^{p−1}_∞‖f‖_{H¹_h})"""
    fine = Lattice(h=f.h / refinement, n=f.lattice.n * refinement)
    outer = interpolate(f.with_values(nonlinearity_pointwise(f.values, p)), fine).values
    inner = nonlinearity_pointwise(interpolate(f, fine).values, p)
    lhs = math.sqrt(fine.h * float(np.sum(np.abs(outer - inner) ** 2)))
    return lhs / (f.h * lp_norm(f, np.inf) ** (p - 1.0) * hs_norm(f, 1.0))


class _Suite:
    """한 부등식의 h별 최악 비율 누적"""

    def __init__(self, name: str, constant: BoundConstant):
        self.name = name
        self.constant = constant
        self.samples = 0
        self.worst_by_h: Dict[str, float] = {}

    def record(self, h: float, ratios: Sequence[float]) -> None:
        self.samples += len(ratios)
        key = repr(float(h))
        self.worst_by_h[key] = max(self.worst_by_h.get(key, -math.inf), max(ratios))

    def report(self) -> InequalityReport:
        return InequalityReport(
            name=self.name,
            samples=self.samples,
            worst_ratio=max(self.worst_by_h.values()),
            constant=self.constant,
            worst_by_h=self.worst_by_h,
        )


# ============================================================================
# verify_inequalities
# ============================================================================

def verify_inequalities(
    h_list: Sequence[float],
    *,
    ensemble: Callable[[Lattice, np.random.Generator], LatticeField] = random_band_limited_field,
    seed: int = 0,
    samples: int = 1000,
    estimate_samples: int = 200,
    p: float = 3.0,
    L_target: float = 32.0,
    flow_time: float = 1.0,
    refinement: int = 16,
    baselines: Optional[BaselineFile] = None,
    quadrature: Optional[QuadratureConfig] = None,
) -> List[InequalityReport]:
    """
    부등식 스위트 실행

    - 정확한 상수: samples개 (h마다)
    - ≲ 부등식: estimate_samples개, h 전체의 최악 비율을 baseline과 비교 (h-균일성)
    """
    if not h_list:
        raise ValueError("h_list is empty")
    baselines = baselines if baselines is not None else load_baselines()
    quadrature = quadrature or QuadratureConfig()
    spec = ProblemSpec(p=p, d_av=1.0)

    def exact(name: str, source: str) -> _Suite:
        return _Suite(name, BoundConstant.exact(1.0, source))

    def empirical(name: str) -> _Suite:
        return _Suite(name, baselines.constant(name, p=p, flow_time=flow_time))

    suites = [
        exact("h1_equivalence_lower", "(2/π)|ξ| ≤ (2/h)|sin(hξ/2)|"),
        exact("h1_equivalence_upper", "(2/h)|sin(hξ/2)| ≤ |ξ|"),
        exact("gagliardo_nirenberg_inf", "telescoping |f|² from a zero"),
        exact("gagliardo_nirenberg_l4", "Hölder with the L^∞ bound"),
        exact("gagliardo_nirenberg_l6", "Hölder with the L^∞ bound"),
        exact("gagliardo_nirenberg_l8", "Hölder with the L^∞ bound"),
        exact("sobolev_inf", "GN-∞ and AM-GM"),
        exact("difference_bound", "|e^{ihξ} − 1| ≤ 2"),
        exact("discretization_l2", "Cauchy–Schwarz on cell averages"),
        exact("discretization_dplus", "Cauchy–Schwarz on cell averages"),
        exact("interpolation_h1", "linear cell integral ≤ cell mean, |e^{ihξ} − 1| ≤ h|ξ|"),
        empirical("strichartz_l8"),
        empirical("averaged_nonlinearity_h1"),
        empirical("interpolation_consistency"),
        empirical("linear_flow_comparison"),
        empirical("distributive"),
    ]
    by_name = {suite.name: suite for suite in suites}
    seeds = np.random.SeedSequence(seed).spawn(len(h_list))

    for h, child in zip(h_list, seeds):
        rng = np.random.default_rng(child)
        lattice = make_lattice(h, L_target)
        fine = Lattice(h=lattice.h / refinement, n=lattice.n * refinement)
        fields = [ensemble(lattice, rng) for _ in range(samples)]
        if all(not np.any(f.values) for f in fields):
            raise ValueError(f"degenerate ensemble at h={h:g}")
        logger.info("verify: h=%g n=%d fields=%d", h, lattice.n, len(fields))

        ratios = np.array([h1_equivalence_ratio(f) for f in fields])
        by_name["h1_equivalence_lower"].record(h, list((2.0 / np.pi) / ratios))
        by_name["h1_equivalence_upper"].record(h, list(ratios))
        by_name["gagliardo_nirenberg_inf"].record(h, [gn_infinity_ratio(f) for f in fields])
        for q in (4, 6, 8):
            by_name[f"gagliardo_nirenberg_l{q}"].record(h, [gn_ratio(f, q) for f in fields])
        by_name["sobolev_inf"].record(h, [sobolev_ratio(f) for f in fields])
        by_name["difference_bound"].record(h, [difference_ratio(f) for f in fields])

        family = gaussian_family(rng, samples)
        l2_ratios, dplus_ratios = [], []
        for datum in family:
            f_h = discretize(datum, lattice)
            l2_ratios.append(lp_norm(f_h, 2) / datum.l2_norm())
            dplus_ratios.append(lp_norm(forward_diff(f_h), 2) / datum.derivative_l2_norm())
        by_name["discretization_l2"].record(h, l2_ratios)
        by_name["discretization_dplus"].record(h, dplus_ratios)

        estimate_fields = fields[:estimate_samples]
        rule = resolve_quadrature(estimate_fields[0], spec, quadrature)
        by_name["strichartz_l8"].record(h, [strichartz_ratio(f, rule) for f in estimate_fields])
        by_name["averaged_nonlinearity_h1"].record(
            h, [averaged_nonlinearity_ratio(f, spec, rule) for f in estimate_fields]
        )
        by_name["interpolation_h1"].record(
            h, [interpolant_h1_norm(f) / hs_norm(f, 1.0) for f in estimate_fields]
        )
        by_name["distributive"].record(
            h, [distributive_ratio(f, p, refinement) for f in estimate_fields]
        )

        consistency, flow = [], []
        for datum in family[:estimate_samples]:
            f_h = discretize(datum, lattice)
            exact_fine = sample(datum, fine)
            gap = l2_error(f_h, exact_fine)
            consistency.append(gap / (h * datum.h1_norm()))
            evolved = propagate(f_h, flow_time)
            free = propagate(exact_fine, flow_time)
            bound = (
                math.sqrt(h) * flow_time * (hs_norm(f_h, 1.0) + datum.h1_norm()) + gap
            )
            flow.append(l2_error(evolved, free) / bound)
        by_name["interpolation_consistency"].record(h, consistency)
        by_name["linear_flow_comparison"].record(h, flow)

    reports = [suite.report() for suite in suites]
    for report in reports:
        level = logging.INFO if report.passed else logging.WARNING
        logger.log(
            level, "%s: worst %.6g vs %s (%s)",
            report.name, report.worst_ratio, report.constant.value, report.constant.kind.value,
        )
    return reports
