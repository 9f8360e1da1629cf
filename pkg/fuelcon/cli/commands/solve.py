"""solve コマンド

最小コンセンサス時刻・合意点・制御則を求め、到達を検証してレポートを出力する
"""

import argparse
import logging
from pathlib import Path

from fuelcon.cli.io import ExitCode, load_fleet, write_json
from fuelcon.core.config import get_settings
from fuelcon.services.pipeline import ConsensusPipeline

logger = logging.getLogger(__name__)


def register(subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]") -> None:
    """サブコマンドを登録する

    Args:
        subparsers (argparse._SubParsersAction): サブコマンドの登録先
    """
    settings = get_settings()
    parser = subparsers.add_parser("solve", help="最小時間コンセンサスを求める")
    parser.add_argument("input", type=Path, help="エージェント群ファイル（JSON）")
    parser.add_argument(
        "--hull-prune",
        action=argparse.BooleanOptionalAction,
        default=settings.HULL_PRUNE,
        help="初期状態の凸包の境界上のエージェントだけで三つ組を作る",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=settings.DEFAULT_WORKERS,
        help="三つ組を解くワーカープロセス数",
    )
    parser.add_argument(
        "--output", type=Path, default=None, help="レポートの出力先（省略時は標準出力）"
    )
    parser.add_argument(
        "--progress", action="store_true", help="三つ組の進捗バーを標準エラー出力に表示する"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """求解してレポートを書き出す

    Args:
        args (argparse.Namespace): コマンドライン引数

    Returns:
        int: 終了コード（成功 0、不能 2、到達検証の不合格 3）
    """
    fleet_file = load_fleet(args.input)
    report, _ = ConsensusPipeline().solve(
        fleet_file,
        workers=args.workers,
        hull_prune=args.hull_prune,
        progress=args.progress,
    )
    write_json(report, args.output)

    if not report.feasible:
        return ExitCode.INFEASIBLE
    if report.verification is not None and not report.verification.passed:
        logger.error(
            "到達検証に失敗しました（最大誤差 %.3g）",
            report.verification.max_terminal_error,
        )
        return ExitCode.INCONSISTENT
    return ExitCode.OK
