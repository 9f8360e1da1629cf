"""simulate コマンド

レポートの制御則に沿った各エージェントの軌道と入力プロファイルを CSV で出力する
"""

import argparse
import logging
from pathlib import Path

from fuelcon.cli.io import ExitCode, load_fleet, load_report
from fuelcon.core.config import get_settings
from fuelcon.services.attainable import ReachSpec, boundary_polyline
from fuelcon.services.export import boundary_frame, write_csv, write_trajectories
from fuelcon.services.pipeline import ConsensusPipeline

logger = logging.getLogger(__name__)


def register(subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]") -> None:
    """サブコマンドを登録する

    Args:
        subparsers (argparse._SubParsersAction): サブコマンドの登録先
    """
    settings = get_settings()
    parser = subparsers.add_parser("simulate", help="軌道と入力プロファイルを CSV で出力する")
    parser.add_argument("input", type=Path, help="エージェント群ファイル（JSON）")
    parser.add_argument("report", type=Path, help="solve が出力したレポート（JSON）")
    parser.add_argument(
        "--samples",
        type=int,
        default=settings.TRAJECTORY_SAMPLES,
        help="軌道の等間隔サンプル数",
    )
    parser.add_argument(
        "--out-dir", type=Path, default=Path("."), help="CSV の出力ディレクトリ"
    )
    parser.add_argument(
        "--boundaries",
        action="store_true",
        help="合意時刻での各エージェントの到達可能集合の境界も出力する",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """軌道をサンプリングして CSV を書き出す

    Args:
        args (argparse.Namespace): コマンドライン引数

    Returns:
        int: 終了コード

    Raises:
        ReportMismatchError: レポートとエージェント群が対応しない場合（終了コード 1）
    """
    fleet_file = load_fleet(args.input)
    report = load_report(args.report)
    pipeline = ConsensusPipeline()
    trajectories = pipeline.simulate(fleet_file, report, args.samples)

    fleet = fleet_file.to_fleet()
    result = pipeline.result_from_report(fleet, report)
    plans = {c.agent_id: c.plan for c in result.controls}
    write_trajectories(trajectories, plans, args.out_dir)

    if result.x_star is not None:
        tolerance = pipeline.settings.VERIFY_ATOL + pipeline.settings.VERIFY_RTOL * max(
            abs(result.x_star.pos), abs(result.x_star.vel)
        )
        for agent_id, trajectory in trajectories.items():
            error = trajectory.final.distance(result.x_star)
            if error > tolerance:
                logger.warning(
                    "エージェント %d の終端誤差 %.3g が許容値を超えています", agent_id, error
                )

    if args.boundaries and result.t_star is not None:
        n = pipeline.settings.BOUNDARY_POINTS
        for agent_id, s in zip(fleet.ids, fleet.agents):
            points = boundary_polyline(ReachSpec(s, fleet.beta, result.t_star), n)
            write_csv(boundary_frame(points), args.out_dir / f"boundary_{agent_id}.csv")

    return ExitCode.OK
