"""CLI の統合テスト"""

import json
from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from fuelcon.__version__ import __version__
from fuelcon.cli.io import ExitCode
from fuelcon.main import main
from fuelcon.models.report import ReportFile
from tests import OPTIMAL_TBAR, OPTIMAL_VBAR, OPTIMAL_XBAR


def _write_json(path: Path, data: dict[str, Any]) -> Path:
    """辞書を JSON ファイルに書く"""
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def report_path(worked_example_path: Path, tmp_path: Path) -> Path:
    """計算例を solve したレポートのパス"""
    path = tmp_path / "report.json"
    assert main(["solve", str(worked_example_path), "--output", str(path)]) == 0
    return path


class TestFeasibilityCommand:
    """feasibility コマンドのテスト"""

    def test_feasible(
        self, worked_example_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """実行可能なら終了コード 0 で速度帯が出力されることを確認"""
        assert main(["feasibility", str(worked_example_path)]) == ExitCode.OK
        out = json.loads(capsys.readouterr().out)
        assert out["feasible"] is True
        assert (out["v_lo"], out["v_hi"]) == (14.0, 50.0)

    def test_infeasible(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """速度差が 2β を超えると終了コード 2 で余裕 1 が出力されることを確認"""
        path = _write_json(
            tmp_path / "fleet.json",
            {
                "beta": 50,
                "agents": [{"id": 1, "x": 0, "v": 0}, {"id": 2, "x": 0, "v": 101}],
            },
        )
        assert main(["feasibility", str(path)]) == ExitCode.INFEASIBLE
        out = json.loads(capsys.readouterr().out)
        assert out["feasible"] is False
        assert out["margin"] == 1.0

    def test_missing_beta(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """beta が無いと終了コード 1 で項目名が表示されることを確認"""
        path = _write_json(
            tmp_path / "fleet.json", {"agents": [{"id": 1, "x": 0, "v": 0}]}
        )
        assert main(["feasibility", str(path)]) == ExitCode.INPUT_ERROR
        assert "beta" in capsys.readouterr().err

    def test_broken_json(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """JSON の構文エラーで終了コード 1 になることを確認"""
        path = tmp_path / "fleet.json"
        path.write_text("{", encoding="utf-8")
        assert main(["feasibility", str(path)]) == ExitCode.INPUT_ERROR
        assert "InputFormatError" in capsys.readouterr().err

    def test_missing_file(self, tmp_path: Path) -> None:
        """存在しないファイルで終了コード 1 になることを確認"""
        missing = tmp_path / "none.json"
        assert main(["feasibility", str(missing)]) == ExitCode.INPUT_ERROR


class TestSolveCommand:
    """solve コマンドのテスト"""

    def test_writes_report(self, report_path: Path) -> None:
        """レポートが書き出され、読み戻せることを確認"""
        report = ReportFile.model_validate_json(report_path.read_text(encoding="utf-8"))
        assert report.feasible
        assert report.t_star == pytest.approx(OPTIMAL_TBAR, abs=1e-3)
        assert report.app_version == __version__
        assert report.verification is not None and report.verification.passed

    def test_single_agent(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """1 エージェントなら t_star 0 で初期状態が合意点になることを確認"""
        path = _write_json(
            tmp_path / "fleet.json", {"beta": 2, "agents": [{"id": 5, "x": 3, "v": -1}]}
        )
        assert main(["solve", str(path)]) == ExitCode.OK
        out = json.loads(capsys.readouterr().out)
        assert out["t_star"] == 0.0
        assert out["x_star"] == {"x": 3.0, "v": -1.0}

    def test_infeasible(self, tmp_path: Path) -> None:
        """実行不能なら終了コード 2 になることを確認"""
        path = _write_json(
            tmp_path / "fleet.json",
            {
                "beta": 1,
                "agents": [{"id": 1, "x": 0, "v": 0}, {"id": 2, "x": 0, "v": 5}],
            },
        )
        assert main(["solve", str(path), "--output", str(tmp_path / "r.json")]) == 2

    def test_workers_identical(self, worked_example_path: Path, tmp_path: Path) -> None:
        """workers 1 と 8 のレポートが実行時間以外で一致することを確認"""
        paths = []
        for workers in (1, 8):
            path = tmp_path / f"report_{workers}.json"
            argv = ["solve", str(worked_example_path), "--workers", str(workers)]
            assert main([*argv, "--output", str(path)]) == ExitCode.OK
            paths.append(path)
        single, multi = (
            ReportFile.model_validate_json(p.read_text(encoding="utf-8")) for p in paths
        )
        assert single.without_timing() == multi.without_timing()

    def test_invalid_workers(self, worked_example_path: Path) -> None:
        """workers 0 で終了コード 1 になることを確認"""
        argv = ["solve", str(worked_example_path), "--workers", "0"]
        assert main(argv) == ExitCode.INPUT_ERROR


class TestBoundaryCommand:
    """boundary コマンドのテスト"""

    def test_stdout(self, capsys: pytest.CaptureFixture[str]) -> None:
        """境界の CSV が標準出力にヘッダ x,v 付きで出ることを確認"""
        argv = ["boundary", "--x", "0", "--v", "0", "--beta", "1", "--tf", "4"]
        assert main([*argv, "--n", "16"]) == ExitCode.OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "x,v"
        assert len(lines) > 16

    def test_file(self, tmp_path: Path) -> None:
        """--out でファイルに書き出されることを確認"""
        out = tmp_path / "boundary.csv"
        argv = ["boundary", "--x", "1", "--v", "2", "--beta", "3", "--tf", "2"]
        assert main([*argv, "--out", str(out)]) == ExitCode.OK
        assert list(pd.read_csv(out).columns) == ["x", "v"]

    def test_negative_horizon(self) -> None:
        """負の終端時刻で終了コード 1 になることを確認"""
        argv = ["boundary", "--x", "0", "--v", "0", "--beta", "1", "--tf", "-1"]
        assert main(argv) == ExitCode.INPUT_ERROR

    def test_missing_option(self) -> None:
        """必須オプションが無いと終了コード 1 になることを確認"""
        assert main(["boundary", "--x", "0"]) == ExitCode.INPUT_ERROR


class TestSimulateCommand:
    """simulate コマンドのテスト"""

    def test_outputs(
        self, worked_example_path: Path, report_path: Path, tmp_path: Path
    ) -> None:
        """軌道・入力プロファイル・境界の CSV が書き出されることを確認"""
        out_dir = tmp_path / "out"
        argv = ["simulate", str(worked_example_path), str(report_path)]
        assert main([*argv, "--out-dir", str(out_dir), "--boundaries"]) == 0
        for agent_id in range(1, 7):
            assert (out_dir / f"trajectory_{agent_id}.csv").exists()
            assert (out_dir / f"control_{agent_id}.csv").exists()
            assert (out_dir / f"boundary_{agent_id}.csv").exists()

        control = pd.read_csv(out_dir / "control_2.csv")
        assert list(control["u"]) == [-1, -1, 0, 0, 1, 1]
        t1 = (114.0 - OPTIMAL_VBAR) / 2.0
        assert control["t"].iloc[1] == pytest.approx(t1, abs=1e-3)
        assert control["t"].iloc[3] == pytest.approx(OPTIMAL_TBAR - 50.0 + t1, abs=1e-3)

        trajectory = pd.read_csv(out_dir / "trajectory_1.csv")
        assert list(trajectory.columns) == ["t", "x", "v", "u"]
        assert trajectory["x"].iloc[-1] == pytest.approx(OPTIMAL_XBAR.pos, abs=1e-3)

    def test_mismatched_report(
        self, report_path: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """エージェント群と対応しないレポートで終了コード 1 になることを確認"""
        path = _write_json(
            tmp_path / "fleet.json", {"beta": 50, "agents": [{"id": 9, "x": 0, "v": 0}]}
        )
        argv = ["simulate", str(path), str(report_path), "--out-dir", str(tmp_path)]
        assert main(argv) == ExitCode.INPUT_ERROR
        assert "ReportMismatchError" in capsys.readouterr().err


class TestVerifyCommand:
    """verify コマンドのテスト"""

    def test_passed(
        self,
        worked_example_path: Path,
        report_path: Path,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """保存したレポートが検証に合格することを確認"""
        assert main(["verify", str(worked_example_path), str(report_path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] is True
        assert [a["id"] for a in out["agents"]] == [1, 2, 3, 4, 5, 6]

    def test_tampered(
        self, worked_example_path: Path, report_path: Path, tmp_path: Path
    ) -> None:
        """切替時刻をずらしたレポートで終了コード 3 になることを確認"""
        data = json.loads(report_path.read_text(encoding="utf-8"))
        data["per_agent"][0]["t2"] += 1.0
        tampered = _write_json(tmp_path / "tampered.json", data)
        argv = ["verify", str(worked_example_path), str(tampered)]
        assert main(argv) == ExitCode.INCONSISTENT


class TestMain:
    """main関数のテスト"""

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """--version で終了コード 0 とバージョンが出ることを確認"""
        assert main(["--version"]) == ExitCode.OK
        assert __version__ in capsys.readouterr().out

    def test_no_command(self) -> None:
        """サブコマンドが無いと終了コード 1 になることを確認"""
        assert main([]) == ExitCode.INPUT_ERROR
