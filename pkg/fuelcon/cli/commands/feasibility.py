"""feasibility コマンド

速度条件によるコンセンサスの可否とコンセンサス速度帯を出力する
"""

import argparse
import logging
from pathlib import Path

from fuelcon.cli.io import ExitCode, load_fleet, write_json
from fuelcon.services.pipeline import ConsensusPipeline

logger = logging.getLogger(__name__)


def register(subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]") -> None:
    """サブコマンドを登録する

    Args:
        subparsers (argparse._SubParsersAction): サブコマンドの登録先
    """
    parser = subparsers.add_parser(
        "feasibility", help="コンセンサス速度帯を出力する（不能なら終了コード 2）"
    )
    parser.add_argument("input", type=Path, help="エージェント群ファイル（JSON）")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """実行可能性を判定して JSON を標準出力に書く

    Args:
        args (argparse.Namespace): コマンドライン引数

    Returns:
        int: 終了コード（可能なら 0、不能なら 2）
    """
    fleet_file = load_fleet(args.input)
    report = ConsensusPipeline().feasibility(fleet_file)
    write_json(report)
    if not report.feasible:
        logger.info("速度差が 2β を %.12g 超えています", report.margin)
        return ExitCode.INFEASIBLE
    return ExitCode.OK
