# -*- coding: utf-8 -*-
"""
수렴 연구, 기울기 맞춤, 부등식 검증 테스트
"""

import json
import math
import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from dmlimit import analysis
from dmlimit.analysis import (
    barrier_dav0, convergence_study, fit_loglog_slope, gaussian_family, l2_error,
    load_baselines, measure_sup_h1, random_band_limited_field, restriction_error,
    verify_inequalities,
)
from dmlimit.bounds import blowup_horizon, energy_h1_bound
from dmlimit.exceptions import BlowUpError, ConvergenceStudyError, GridMismatchError
from dmlimit.lattice import (
    LatticeField, delta, discretize, hs_norm, interpolate, lp_norm, make_lattice, sample, zeros,
)
from dmlimit.schemas.base import ConstantKind
from dmlimit.schemas.config import ProblemSpec
from dmlimit.schemas.datum import GaussianDatum
from dmlimit.schemas.reports import EMPIRICAL_SUITES, BaselineFile, VerificationReport
from dmlimit.spectral import dft

GAUSSIAN = GaussianDatum(amplitude=1.0, width=1.0)
LINEAR = ProblemSpec(p=3.0, d_av=1.0, nonlinear=False)


class TestErrors:
    """l2_error, restriction_error"""

    def test_interpolant_has_zero_error(self):
        f = sample(GAUSSIAN, make_lattice(0.5, 16.0))
        ref = interpolate(f, make_lattice(0.125, 16.0))

        assert l2_error(f, ref) == pytest.approx(0.0, abs=1e-15)

    def test_constant_offset(self):
        """‖0 − c‖_{L²(−L/2, L/2)} = |c|√L"""
        coarse = make_lattice(0.5, 8.0)
        fine = make_lattice(0.125, 8.0)
        c = 0.3 + 0.4j
        ref = LatticeField(lattice=fine, values=np.full(fine.n, c))

        assert l2_error(zeros(coarse), ref) == pytest.approx(abs(c) * math.sqrt(8.0))

    def test_not_nested(self):
        with pytest.raises(GridMismatchError):
            l2_error(zeros(make_lattice(0.5, 8.0)), zeros(make_lattice(0.125, 32.0)))

    def test_restriction_of_same_datum(self):
        coarse = sample(GAUSSIAN, make_lattice(0.5, 32.0))
        fine = sample(GAUSSIAN, make_lattice(0.125, 32.0))

        assert restriction_error(coarse, fine) == pytest.approx(0.0, abs=1e-15)


class TestSlopeFit:
    """log-log 최소제곱"""

    def test_half_order(self):
        slope, intercept = fit_loglog_slope([(1.0, 1.0), (0.5, 0.70710678), (0.25, 0.5)])

        assert slope == pytest.approx(0.5, abs=1e-8)
        assert intercept == pytest.approx(1.0, abs=1e-8)

    def test_first_order(self):
        slope, intercept = fit_loglog_slope([(1.0, 2.0), (0.5, 1.0), (0.25, 0.5)])

        assert slope == pytest.approx(1.0)
        assert intercept == pytest.approx(2.0)

    def test_rescaling_keeps_slope(self):
        points = [(h, 3.0 * h**1.5) for h in (1.0, 0.5, 0.25, 0.125)]
        scaled = [(h, 7.0 * e) for h, e in points]

        assert fit_loglog_slope(scaled)[0] == pytest.approx(fit_loglog_slope(points)[0])
        assert fit_loglog_slope(scaled)[1] == pytest.approx(7.0 * fit_loglog_slope(points)[1])

    def test_noisy_power_law(self):
        """±1% 잡음 → 기울기 오차 ≤ 0.02"""
        rng = np.random.default_rng(3)
        h = 0.5 ** np.arange(6)
        for _ in range(20):
            noise = 1.0 + rng.uniform(-0.01, 0.01, h.size)
            slope, _ = fit_loglog_slope(list(zip(h, 0.8 * h**0.75 * noise)))
            assert abs(slope - 0.75) <= 0.02

    def test_rejects_bad_points(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([(1.0, 1.0), (0.5, 0.5)])
        with pytest.raises(ValueError):
            fit_loglog_slope([(1.0, 1.0), (0.5, 0.0), (0.25, 0.1)])


class TestConvergenceStudy:
    """연속 극한 비교"""

    def small_study(self, **kwargs):
        options = dict(h_list=[1.0, 0.5, 0.25], h_ref=1 / 16, T=0.5, dt=0.01, snapshot_every=10)
        options.update(kwargs)
        return convergence_study(GAUSSIAN, LINEAR, **options)

    def test_linear_flow_errors_decrease(self):
        report = self.small_study()

        assert report.monotone
        assert all(b < a for a, b in zip(report.errors, report.errors[1:]))
        assert report.slope > 0.0
        assert [run.h for run in report.runs] == [1.0, 0.5, 0.25]
        assert report.max_mass_drift <= 1e-12

    def test_duplicate_spacings_identical(self):
        report = self.small_study(h_list=[0.5, 0.5, 0.25])

        assert report.errors[0] == report.errors[1]

    def test_deterministic_across_workers(self):
        serial = self.small_study()
        threaded = self.small_study(workers=3)

        assert serial.errors == threaded.errors
        assert serial.model_dump() == threaded.model_dump()

    def test_reference_self_check(self):
        report = self.small_study(check_reference=True)

        assert report.reference_self_error is not None
        assert report.reference_self_error < report.errors[-1]

    def test_member_abort_names_spacing(self, monkeypatch):
        real = analysis.evolve

        def failing(phi, *args, **kwargs):
            if phi.h == 0.5:
                raise BlowUpError("forced", t=0.1)
            return real(phi, *args, **kwargs)

        monkeypatch.setattr(analysis, "evolve", failing)
        with pytest.raises(ConvergenceStudyError) as info:
            self.small_study()

        assert info.value.h == 0.5

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            self.small_study(h_list=[1.0, 0.5])
        with pytest.raises(ValueError):
            self.small_study(h_ref=0.125)

    def test_rejects_horizon(self):
        """d_av=0, T ≥ T*"""
        spec = ProblemSpec(p=3.0, d_av=0.0)
        horizon = blowup_horizon(GAUSSIAN.l2_norm(), GAUSSIAN.derivative_l2_norm(), 3.0)
        with pytest.raises(ValueError):
            convergence_study(GAUSSIAN, spec, horizon, 0.01, [1.0, 0.5, 0.25], 1 / 16)

    @pytest.mark.slow
    def test_acceptance_run(self):
        """gaussian, p=3, d_av=1, T=1, dt=0.002, h ∈ {1/2,…,1/16}, h_ref=1/128"""
        report = convergence_study(
            GAUSSIAN, ProblemSpec(p=3.0, d_av=1.0), T=1.0, dt=0.002,
            h_list=[0.5, 0.25, 0.125, 0.0625], h_ref=1 / 128, workers=4,
        )

        assert report.slope >= 0.45
        assert report.monotone
        assert report.max_mass_drift <= 1e-8
        assert report.max_energy_drift <= 1e-6


class TestEnsembles:
    """무작위 장, gaussian 족"""

    def test_band_limited_field(self):
        lattice = make_lattice(0.25, 32.0)
        f = random_band_limited_field(lattice, np.random.default_rng(5))
        spectrum = dft(f)

        assert lp_norm(f, 2) == pytest.approx(1.0)
        assert abs(f.values[0]) < 1e-15
        assert np.max(np.abs(spectrum.coefficients[np.abs(spectrum.frequencies) > np.pi + 1e-9])) < 1e-12

    def test_seeded(self):
        lattice = make_lattice(0.5, 32.0)
        a = random_band_limited_field(lattice, np.random.default_rng(6))
        b = random_band_limited_field(lattice, np.random.default_rng(6))

        np.testing.assert_array_equal(a.values, b.values)

    def test_gaussian_family_ranges(self):
        for datum in gaussian_family(np.random.default_rng(7), 50):
            assert datum.amplitude == 1.0
            assert 0.5 <= datum.width <= 2.0
            assert -2.0 <= datum.center <= 2.0
            assert -1.0 <= datum.velocity <= 1.0


class TestRatios:
    """닫힌 형태 비율"""

    def test_delta_gagliardo_nirenberg(self):
        """h=1 delta: 1/2^{1/4}"""
        f = delta(make_lattice(1.0, 8.0))

        assert analysis.gn_infinity_ratio(f) == pytest.approx(2 ** -0.25, abs=1e-12)

    def test_nyquist_equivalence(self):
        """(−1)^m 모드: ‖D⁺f‖/‖f‖_{Ḣ¹} = 2/π"""
        for h in (1.0, 0.5, 0.125):
            lattice = make_lattice(h, 8.0)
            f = LatticeField(lattice=lattice, values=(-1.0) ** np.arange(lattice.n))
            assert analysis.h1_equivalence_ratio(f) == pytest.approx(2 / np.pi, abs=1e-10)

    def test_low_mode_near_one(self):
        lattice = make_lattice(0.125, 32.0)
        f = LatticeField(lattice=lattice, values=np.exp(2j * np.pi * lattice.points / lattice.period))

        assert 0.999 < analysis.h1_equivalence_ratio(f) <= 1.0

    def test_difference_ratio_nyquist(self):
        """Nyquist에서 h‖D⁺f‖ = 2‖f‖"""
        lattice = make_lattice(0.5, 8.0)
        f = LatticeField(lattice=lattice, values=(-1.0) ** np.arange(lattice.n))

        assert analysis.difference_ratio(f) == pytest.approx(1.0)


class TestVerify:
    """verify_inequalities"""

    def test_small_ensemble_passes(self):
        reports = verify_inequalities([1.0, 0.5], samples=40, estimate_samples=8)
        report = VerificationReport(seed=0, h_list=[1.0, 0.5], inequalities=reports)

        assert report.passed, report.violations
        assert len(reports) == 16
        equivalence = report.get("h1_equivalence_upper")
        assert equivalence.samples == 80
        assert set(equivalence.worst_by_h) == {"1.0", "0.5"}
        assert report.get("strichartz_l8").constant.kind == ConstantKind.EMPIRICAL

    def test_deterministic(self):
        first = verify_inequalities([0.5], seed=11, samples=20, estimate_samples=4)
        second = verify_inequalities([0.5], seed=11, samples=20, estimate_samples=4)

        assert [r.model_dump() for r in first] == [r.model_dump() for r in second]

    def test_exponent_mismatch_uncalibrated(self):
        reports = verify_inequalities([0.5], samples=10, estimate_samples=2, p=4.0)
        by_name = {r.name: r for r in reports}

        assert by_name["averaged_nonlinearity_h1"].constant.kind == ConstantKind.UNCALIBRATED
        assert not by_name["averaged_nonlinearity_h1"].passed
        assert by_name["strichartz_l8"].passed

    def test_degenerate_ensemble(self):
        with pytest.raises(ValueError):
            verify_inequalities([0.5], ensemble=lambda lattice, rng: zeros(lattice), samples=5)

    def test_empty_h_list(self):
        with pytest.raises(ValueError):
            verify_inequalities([])

    @pytest.mark.slow
    def test_acceptance_exact_suites(self):
        """h ∈ {1, 1/2, 1/4, 1/8}, 1000 fields: exact-constant 위반 0"""
        reports = verify_inequalities([1.0, 0.5, 0.25, 0.125], samples=1000, estimate_samples=50)

        for report in reports:
            assert report.passed, report.name


class TestBaselines:
    """baselines.json"""

    def test_packaged(self):
        baselines = load_baselines()

        assert baselines.p == 3.0 and baselines.flow_time == 1.0
        assert set(baselines.constants) == set(EMPIRICAL_SUITES)
        assert all(value is not None and value > 0.0 for value in baselines.constants.values())
        assert "freeze_baselines.py" in baselines.source

    def test_packaged_sup_h1(self):
        """sup_h1: 측정값 × 1.5, 측정값 ≥ t=0의 노름"""
        reference = load_baselines().sup_h1

        assert reference is not None
        assert reference.initial == GAUSSIAN
        assert reference.problem == ProblemSpec(p=3.0, d_av=1.0)
        assert reference.value == pytest.approx(1.5 * reference.measured, rel=1e-4)
        start = discretize(reference.initial, make_lattice(reference.h, 32.0))
        assert reference.measured >= hs_norm(start, 1.0) * (1.0 - 1e-4)

    def test_sup_h1_applies_only_to_its_run(self):
        baselines = load_baselines()

        assert baselines.h1_constant(ProblemSpec(p=3.0, d_av=1.0), GAUSSIAN, 1.0).is_usable
        assert baselines.h1_constant(ProblemSpec(p=3.0, d_av=1.0), GAUSSIAN, 0.5).is_usable
        assert not baselines.h1_constant(ProblemSpec(p=3.0, d_av=1.0), GAUSSIAN, 2.0).is_usable
        assert not baselines.h1_constant(LINEAR, GAUSSIAN, 1.0).is_usable
        wide = GaussianDatum(amplitude=1.0, width=2.0)
        assert not baselines.h1_constant(ProblemSpec(p=3.0, d_av=1.0), wide, 1.0).is_usable

    @pytest.mark.slow
    def test_frozen_constants_match_measurement(self):
        """고정 상수 ∈ [측정 최악값, 1.5 × 측정 최악값]"""
        baselines = load_baselines()
        reports = verify_inequalities(
            [1.0, 0.5, 0.25, 0.125], seed=0, samples=100, estimate_samples=100
        )

        for report in reports:
            if report.name not in EMPIRICAL_SUITES:
                continue
            frozen = baselines.constants[report.name]
            assert report.worst_ratio <= frozen, report.name
            assert frozen <= 1.5 * report.worst_ratio * 1.01, report.name

    @pytest.mark.slow
    def test_frozen_sup_h1_matches_measurement(self):
        reference = load_baselines().sup_h1
        measured = measure_sup_h1(
            reference.initial, reference.problem, reference.h, reference.T, reference.dt
        )

        assert measured <= reference.value
        assert reference.value <= 1.5 * measured * 1.01

    def test_custom_path(self, tmp_path):
        path = tmp_path / "baselines.json"
        path.write_text(json.dumps({"p": 5.0, "flow_time": 2.0, "constants": {"distributive": 3.0}}))
        baselines = load_baselines(path)

        assert isinstance(baselines, BaselineFile)
        assert baselines.constant("distributive", p=5.0, flow_time=1.0).value == 3.0
        assert baselines.constant("strichartz_l8", p=5.0, flow_time=1.0).kind == ConstantKind.UNCALIBRATED


class TestBounds:
    """barrier_dav0, energy_h1_bound"""

    def test_barrier_examples(self):
        assert barrier_dav0(0.0, 0.7, 1.3, 3.0) == (pytest.approx(1.3), True)
        assert barrier_dav0(0.5, 1.0, 1.0, 3.0) == (pytest.approx(2.0), True)
        assert barrier_dav0(1.0, 1.0, 1.0, 3.0) == (math.inf, False)

    def test_barrier_closed_form(self):
        """p=3, 노름 1: 1/(1−t)"""
        for t in (0.1, 0.3, 0.9, 0.99):
            value, finite = barrier_dav0(t, 1.0, 1.0, 3.0)
            assert finite
            assert value == pytest.approx(1.0 / (1.0 - t))

    def test_barrier_rejects(self):
        with pytest.raises(ValueError):
            barrier_dav0(-0.1, 1.0, 1.0, 3.0)
        with pytest.raises(ValueError):
            barrier_dav0(0.1, 0.0, 1.0, 3.0)

    def test_horizon(self):
        assert blowup_horizon(1.0, 1.0, 3.0) == pytest.approx(1.0)
        assert blowup_horizon(0.0, 1.0, 3.0) == math.inf

    def test_energy_bound(self):
        assert energy_h1_bound(1.0, 0.5, 0.0, 3.0) is None
        assert energy_h1_bound(0.0, 0.0, 1.0, 3.0) == 0.0
        # linear regime: X² ≤ 2E/d_av when the nonlinear term is negligible
        bound = energy_h1_bound(1e-12, 2.0, 1.0, 3.0)
        assert bound == pytest.approx(2.0, rel=1e-6)
