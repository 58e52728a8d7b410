# -*- coding: utf-8 -*-
"""
CLI 테스트: 설정 파싱, 출력 파일, exit code
"""

import json
import logging
import os
import sys

import pandas as pd
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from dmlimit.analysis import load_baselines
from dmlimit.cli import (
    ENV_OUTPUT_DIR, EXIT_ACCEPTANCE, EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, acceptance_failures,
    config_echo, main, parse_config,
)
from dmlimit.exceptions import ConfigError
from dmlimit.schemas.datum import GaussianDatum
from dmlimit.schemas.reports import ConvergenceReport, ConvergenceRun


def write_config(directory, payload, name="config.json"):
    path = directory / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def simulate_payload(output, amplitude=0.0, **time):
    return {
        "mode": "simulate",
        "problem": {"p": 3, "d_av": 1},
        "grid": {"h": 0.5, "L_target": 16},
        "time": {"T": 0.1, "dt": 0.01, "snapshot_every": 5, **time},
        "initial": {"kind": "gaussian", "amplitude": amplitude, "width": 1},
        "output": str(output),
    }


def verify_payload(output, p=3):
    return {
        "mode": "verify",
        "problem": {"p": p, "d_av": 1},
        "verify": {"h_list": [0.5], "samples": 10, "estimate_samples": 2},
        "seed": 7,
        "output": str(output),
    }


class TestParseConfig:
    """JSON → RunConfig"""

    def test_minimal_verify(self):
        config = parse_config('{"problem": {"p": 3, "d_av": 1}}', mode="verify")

        assert config.mode == "verify"
        assert config.verify.h_list == [1.0, 0.5, 0.25, 0.125]
        assert config.quadrature.auto

    def test_converge_default_reference(self):
        config = parse_config(json.dumps({
            "mode": "converge",
            "problem": {"p": 3, "d_av": 1},
            "grid": {"h_list": [0.5, 0.25, 0.125]},
            "time": {"T": 1},
            "initial": {"kind": "gaussian", "amplitude": 1, "width": 1},
        }))

        assert config.grid.h_ref == pytest.approx(0.125 / 8)

    @pytest.mark.parametrize("text", [
        "{not json",
        "[1, 2]",
        '{"mode": "verify", "problem": {"p": 0.5, "d_av": 1}}',
        '{"mode": "verify", "problem": {"p": 3, "d_av": 1}, "colour": "red"}',
        '{"mode": "simulate", "problem": {"p": 3, "d_av": 1}}',
    ])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_mode_mismatch(self):
        with pytest.raises(ConfigError):
            parse_config('{"mode": "verify", "problem": {"p": 3, "d_av": 1}}', mode="simulate")

    def test_horizon_warning(self, caplog):
        """d_av=0, T ≥ T*: 경고만"""
        text = json.dumps({
            "mode": "simulate",
            "problem": {"p": 3, "d_av": 0},
            "grid": {"h": 0.5},
            "time": {"T": 5},
            "initial": {"kind": "gaussian", "amplitude": 1, "width": 1},
        })
        with caplog.at_level(logging.WARNING, logger="dmlimit.cli"):
            config = parse_config(text)

        assert config.time.T == 5
        assert "blow-up horizon" in caplog.text

    def test_echo_excludes_output(self, tmp_path):
        a = parse_config(json.dumps(verify_payload(tmp_path / "a")))
        b = parse_config(json.dumps(verify_payload(tmp_path / "b")))

        assert config_echo(a) == config_echo(b)
        assert "output" not in config_echo(a)


class TestSimulate:
    """simulate 모드"""

    def test_zero_datum(self, tmp_path):
        out = tmp_path / "run"
        code = main(["simulate", str(write_config(tmp_path, simulate_payload(out)))])

        assert code == EXIT_OK
        frame = pd.read_csv(out / "diagnostics.csv")
        assert list(frame.columns) == ["t", "mass", "energy", "h1", "dplus", "barrier"]
        assert len(frame) == 3
        assert (frame[["mass", "energy", "h1", "dplus"]] == 0.0).all().all()
        assert frame["barrier"].isna().all()
        assert sorted(p.name for p in (out / "snapshots").iterdir()) == [
            "snapshot_00000.csv", "snapshot_00001.csv", "snapshot_00002.csv",
        ]
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["health"]["status"] == "healthy"
        assert (out / "effective_config.json").exists()

    def test_repeatable(self, tmp_path):
        outputs = []
        for name in ("first", "second"):
            out = tmp_path / name
            path = write_config(tmp_path, simulate_payload(out, amplitude=1.0), f"{name}.json")
            assert main(["simulate", str(path)]) == EXIT_OK
            outputs.append(out)

        for relative in ("diagnostics.csv", "summary.json", "snapshots/snapshot_00002.csv"):
            assert (outputs[0] / relative).read_bytes() == (outputs[1] / relative).read_bytes()

    def test_non_finite_state_aborts(self, tmp_path):
        """|u|²u overflow → exit 2, summary에 aborted 기록"""
        out = tmp_path / "run"
        code = main(["simulate", str(write_config(tmp_path, simulate_payload(out, amplitude=1e120)))])

        assert code == EXIT_BLOWUP
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["health"]["status"] == "aborted"
        frame = pd.read_csv(out / "diagnostics.csv")
        assert list(frame.columns) == ["t", "mass", "energy", "h1", "dplus", "barrier"]
        assert len(frame) == 0

    def test_blow_up_keeps_diagnostics(self, tmp_path):
        """H¹ 상한 초과 → exit 2, 중단 시점까지의 diagnostics와 스냅샷"""
        out = tmp_path / "run"
        payload = simulate_payload(out, amplitude=2.0, T=2.0, blowup_factor=1.01)
        payload["problem"]["d_av"] = -1
        code = main(["simulate", str(write_config(tmp_path, payload))])

        assert code == EXIT_BLOWUP
        frame = pd.read_csv(out / "diagnostics.csv")
        assert len(frame) >= 2
        assert frame["h1"].iloc[-1] > 1.01 * frame["h1"].iloc[0]
        assert len(list((out / "snapshots").iterdir())) == len(frame)
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["aborted_at"] == pytest.approx(frame["t"].iloc[-1])
        assert [i["issue_type"] for i in summary["health"]["issues"]] == ["blow_up"]

    def test_env_override(self, tmp_path, monkeypatch):
        redirected = tmp_path / "elsewhere"
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(redirected))
        code = main(["simulate", str(write_config(tmp_path, simulate_payload(tmp_path / "ignored")))])

        assert code == EXIT_OK
        assert (redirected / "diagnostics.csv").exists()
        assert not (tmp_path / "ignored").exists()


class TestConverge:
    """converge 모드"""

    def payload(self, output, **acceptance):
        return {
            "mode": "converge",
            "problem": {"p": 3, "d_av": 1, "nonlinear": False},
            "grid": {"h_list": [1.0, 0.5, 0.25], "h_ref": 0.0625},
            "time": {"T": 0.2, "dt": 0.01, "snapshot_every": 5},
            "initial": {"kind": "gaussian", "amplitude": 1, "width": 1},
            "acceptance": acceptance,
            "output": str(output),
        }

    def test_report_written(self, tmp_path):
        out = tmp_path / "run"
        code = main(["converge", str(write_config(tmp_path, self.payload(out))), "--workers", "2"])

        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["h_list"] == [1.0, 0.5, 0.25]
        assert report["slope"] >= 0.45
        assert report["config_echo"]["mode"] == "converge"

    def test_acceptance_failure(self, tmp_path):
        out = tmp_path / "run"
        code = main(["converge", str(write_config(tmp_path, self.payload(out, min_slope=10.0)))])

        assert code == EXIT_ACCEPTANCE
        assert (out / "report.json").exists()

    def acceptance_report(self, sup_h1):
        run = ConvergenceRun(h=0.0625, n=512, error=0.01, mass_drift=0.0, energy_drift=0.0,
                             sup_h1=sup_h1, nodes=32)
        return ConvergenceReport(h_list=[0.0625], errors=[0.01], slope=1.0, intercept=1.0,
                                 T=1.0, h_ref=1 / 128, runs=[run])

    def acceptance_config(self, tmp_path):
        payload = self.payload(tmp_path / "run")
        payload["problem"] = {"p": 3, "d_av": 1}
        payload["time"]["T"] = 1.0
        return parse_config(json.dumps(payload))

    def test_sup_h1_against_frozen_bound(self, tmp_path):
        """고정 sup_h1 초과 → 판정 실패"""
        config = self.acceptance_config(tmp_path)
        frozen = load_baselines().sup_h1.value

        assert acceptance_failures(self.acceptance_report(0.99 * frozen), config) == []
        failures = acceptance_failures(self.acceptance_report(1.01 * frozen), config)
        assert len(failures) == 1 and "H¹" in failures[0]

    def test_sup_h1_skipped_for_other_runs(self, tmp_path):
        """다른 초기값: 고정 상한 없음 → 검사 생략"""
        config = self.acceptance_config(tmp_path)
        config = config.model_copy(update={"initial": GaussianDatum(amplitude=5.0, width=1.0)})

        assert acceptance_failures(self.acceptance_report(100.0), config) == []


class TestVerify:
    """verify 모드"""

    def test_byte_identical(self, tmp_path):
        outputs = []
        for name in ("first", "second"):
            out = tmp_path / name
            path = write_config(tmp_path, verify_payload(out), f"{name}.json")
            assert main(["verify", str(path)]) == EXIT_OK
            outputs.append(out / "inequalities.json")

        assert outputs[0].read_bytes() == outputs[1].read_bytes()
        report = json.loads(outputs[0].read_text(encoding="utf-8"))
        assert report["passed"] is True
        assert all("pass" in item for item in report["inequalities"])

    def test_uncalibrated_exponent_fails(self, tmp_path):
        """p=4: p-의존 baseline 없음 → exit 3"""
        out = tmp_path / "run"
        code = main(["verify", str(write_config(tmp_path, verify_payload(out, p=4)))])

        assert code == EXIT_ACCEPTANCE
        report = json.loads((out / "inequalities.json").read_text(encoding="utf-8"))
        assert "averaged_nonlinearity_h1" in report["violations"]


class TestExitCodes:
    """설정 오류"""

    def test_missing_file(self, tmp_path):
        assert main(["verify", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")

        assert main(["verify", str(path)]) == EXIT_CONFIG

    def test_wrong_subcommand(self, tmp_path):
        path = write_config(tmp_path, verify_payload(tmp_path / "run"))

        assert main(["simulate", str(path)]) == EXIT_CONFIG

    def test_bad_workers(self, tmp_path):
        path = write_config(tmp_path, verify_payload(tmp_path / "run"))

        assert main(["verify", str(path), "--workers", "0"]) == EXIT_CONFIG

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])

        assert info.value.code == 0
        assert "dm-continuum" in capsys.readouterr().out
