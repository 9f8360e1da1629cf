"""統合求解サービス

入力ファイルのモデルから求解・制御合成・到達検証までを実行し、
レポートのモデルに整形する
"""

import logging
import time

from fuelcon.__version__ import __version__
from fuelcon.core.config import Settings, get_settings
from fuelcon.core.exceptions import ReportMismatchError
from fuelcon.models.fleet import FleetFile
from fuelcon.models.report import (
    AgentBandEntry,
    AgentControlEntry,
    FeasibilityReport,
    ReportFile,
    StateEntry,
    TimingInfo,
    VerificationSummary,
    round_sig,
)
from fuelcon.services.attainable import agent_velocity_band, consensus_band
from fuelcon.services.consensus import (
    ConsensusResult,
    Fleet,
    solve_fleet,
    solve_fleet_distributed,
)
from fuelcon.services.dynamics import Trajectory, sample_trajectory
from fuelcon.services.synthesis import (
    RendezvousReport,
    SynthesizedControl,
    verify_rendezvous,
)

logger = logging.getLogger(__name__)


class ConsensusPipeline:
    """求解パイプライン

    実行可能性判定、N エージェントの求解、制御合成、到達検証をまとめ、
    結果をレポート形式に整形する
    """

    def __init__(self, settings: Settings | None = None) -> None:
        """初期化処理

        Args:
            settings (Settings | None): 設定（省略時は get_settings()）
        """
        self.settings = settings or get_settings()

    def feasibility(self, fleet_file: FleetFile) -> FeasibilityReport:
        """速度条件によるコンセンサスの可否と速度帯を求める

        Args:
            fleet_file (FleetFile): エージェント群ファイル

        Returns:
            FeasibilityReport: 実行可能性レポート
        """
        return self._feasibility(fleet_file.to_fleet())

    def _feasibility(self, fleet: Fleet) -> FeasibilityReport:
        band = consensus_band(fleet.agents, fleet.beta)
        vels = [s.vel for s in fleet.agents]
        slack = 2.0 * fleet.beta - (max(vels) - min(vels))
        bands = []
        for agent_id, s in zip(fleet.ids, fleet.agents):
            own = agent_velocity_band(s, fleet.beta)
            bands.append(
                AgentBandEntry(
                    id=agent_id, v_lo=round_sig(own.v_lo), v_hi=round_sig(own.v_hi)
                )
            )
        report = FeasibilityReport(
            feasible=slack >= 0.0,
            v_lo=round_sig(band.v_lo),
            v_hi=round_sig(band.v_hi),
            margin=round_sig(abs(slack)),
            agent_bands=bands,
        )
        logger.info(
            "実行可能性: %s 速度帯 [%.12g, %.12g]", report.feasible, band.v_lo, band.v_hi
        )
        return report

    def solve(
        self,
        fleet_file: FleetFile,
        workers: int | None = None,
        hull_prune: bool | None = None,
        progress: bool = False,
    ) -> tuple[ReportFile, ConsensusResult]:
        """求解・制御合成・到達検証を実行する

        Args:
            fleet_file (FleetFile): エージェント群ファイル
            workers (int | None): ワーカー数（省略時は設定値）
            hull_prune (bool | None): 凸包による枝刈り（省略時は設定値）
            progress (bool): 進捗バーを表示するか（ワーカー 1 のとき）

        Returns:
            tuple[ReportFile, ConsensusResult]: レポートと求解結果

        Raises:
            ValueError: workers が 1 未満の場合
        """
        workers = self.settings.DEFAULT_WORKERS if workers is None else workers
        hull_prune = self.settings.HULL_PRUNE if hull_prune is None else hull_prune
        if workers < 1:
            raise ValueError(f"workersは1以上である必要があります: {workers}")

        fleet = fleet_file.to_fleet()
        logger.info("エージェント %d 体、β=%.12g を求解します", fleet.size, fleet.beta)

        started = time.perf_counter()
        if workers == 1:
            result = solve_fleet(fleet, hull_prune=hull_prune, progress=progress)
        else:
            result = solve_fleet_distributed(fleet, workers, hull_prune=hull_prune)
        elapsed = time.perf_counter() - started

        verification = verify_rendezvous(fleet, result) if result.feasible else None
        if verification is not None:
            logger.info(
                "到達検証: %s（最大誤差 %.3g）",
                "合格" if verification.passed else "不合格",
                verification.max_terminal_error,
            )

        report = self.build_report(
            fleet,
            result,
            verification,
            TimingInfo(elapsed_seconds=round(elapsed, 6), workers=workers),
            hull_prune,
        )
        return report, result

    def verify(self, fleet_file: FleetFile, report: ReportFile) -> RendezvousReport:
        """レポートの制御則を再シミュレーションして検証する

        Args:
            fleet_file (FleetFile): エージェント群ファイル
            report (ReportFile): 求解レポート

        Returns:
            RendezvousReport: 検証レポート

        Raises:
            ReportMismatchError: レポートとエージェント群が対応しない場合
        """
        fleet = fleet_file.to_fleet()
        result = self.result_from_report(fleet, report)
        return verify_rendezvous(fleet, result)

    def simulate(
        self, fleet_file: FleetFile, report: ReportFile, samples: int | None = None
    ) -> dict[int, Trajectory]:
        """レポートの制御則に沿った軌道をサンプリングする

        Args:
            fleet_file (FleetFile): エージェント群ファイル
            report (ReportFile): 求解レポート
            samples (int | None): 等間隔サンプル数（省略時は設定値）

        Returns:
            dict[int, Trajectory]: エージェント ID ごとの軌道

        Raises:
            ReportMismatchError: レポートとエージェント群が対応しない場合
        """
        n = self.settings.TRAJECTORY_SAMPLES if samples is None else samples
        fleet = fleet_file.to_fleet()
        result = self.result_from_report(fleet, report)
        return {
            control.agent_id: sample_trajectory(s, control.plan, n)
            for s, control in zip(fleet.agents, result.controls)
        }

    def build_report(
        self,
        fleet: Fleet,
        result: ConsensusResult,
        verification: RendezvousReport | None,
        timing: TimingInfo,
        hull_prune: bool = False,
    ) -> ReportFile:
        """求解結果をレポートに整形する

        Args:
            fleet (Fleet): エージェント群
            result (ConsensusResult): 求解結果
            verification (RendezvousReport | None): 到達検証の結果
            timing (TimingInfo): 実行時間のメタデータ
            hull_prune (bool): 凸包による枝刈りを使ったか

        Returns:
            ReportFile: レポート
        """
        errors: dict[int, float] = {}
        summary: VerificationSummary | None = None
        if verification is not None:
            errors = {c.agent_id: c.terminal_error for c in verification.checks}
            summary = VerificationSummary(
                passed=verification.passed,
                max_terminal_error=round_sig(verification.max_terminal_error),
                tolerance=round_sig(verification.tolerance),
            )

        scenario = None
        if result.scenario is not None:
            scenario = f"{result.scenario.id} {result.scenario.label}"

        return ReportFile(
            app_version=__version__,
            beta=round_sig(fleet.beta),
            feasible=result.feasible,
            band=self._feasibility(fleet),
            t_star=None if result.t_star is None else round_sig(result.t_star),
            x_star=(
                None if result.x_star is None else StateEntry.from_state(result.x_star)
            ),
            critical_triplet=list(result.critical_triplet),
            scenario=scenario,
            method=result.method,
            triplet_count=result.triplet_count,
            hull_prune=hull_prune,
            per_agent=[
                _control_entry(c, errors.get(c.agent_id, 0.0)) for c in result.controls
            ],
            verification=summary,
            timing=timing,
        )

    def result_from_report(self, fleet: Fleet, report: ReportFile) -> ConsensusResult:
        """レポートから検証用の求解結果を復元する

        Args:
            fleet (Fleet): エージェント群
            report (ReportFile): 求解レポート

        Returns:
            ConsensusResult: 求解結果

        Raises:
            ReportMismatchError: レポートとエージェント群が対応しない場合
        """
        if not report.feasible or report.t_star is None or report.x_star is None:
            raise ReportMismatchError("実行不能のレポートには制御則がありません")
        report_ids = [a.id for a in report.per_agent]
        if report_ids != fleet.ids:
            raise ReportMismatchError(
                f"レポートのエージェント ID がエージェント群と一致しません: "
                f"{report_ids} != {fleet.ids}"
            )
        if abs(report.beta - fleet.beta) > 1e-9 * (1.0 + fleet.beta):
            raise ReportMismatchError(
                f"レポートの β がエージェント群と一致しません: {report.beta} != {fleet.beta}"
            )

        tf = report.t_star
        try:
            controls = [
                SynthesizedControl(
                    agent_id=entry.id,
                    plan=entry.to_plan(tf),
                    beta_eff=entry.beta_eff,
                    on_boundary=entry.on_boundary,
                )
                for entry in report.per_agent
            ]
        except ValueError as e:
            raise ReportMismatchError(f"レポートの切替時刻が不正です: {e}") from e

        return ConsensusResult(
            feasible=True,
            band=consensus_band(fleet.agents, fleet.beta),
            t_star=tf,
            x_star=report.x_star.to_state(),
            critical_triplet=tuple(report.critical_triplet),
            controls=controls,
            ids=list(fleet.ids),
            triplet_count=report.triplet_count,
            method=report.method,
        )


def _control_entry(control: SynthesizedControl, error: float) -> AgentControlEntry:
    """制御則をレポートの行に変換する"""
    plan = control.plan
    return AgentControlEntry(
        id=control.agent_id,
        sequence=plan.profile,
        gamma=1 if plan.gamma > 0 else -1,
        t0=round_sig(plan.t0),
        t1=round_sig(plan.t1),
        t2=round_sig(plan.t2),
        beta_eff=round_sig(control.beta_eff),
        fuel_used=round_sig(plan.fuel),
        terminal_error=round_sig(error),
        on_boundary=control.on_boundary,
    )
