"""verify コマンド

レポートの制御則を再シミュレーションし、全員が合意点へ届くか検証する
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from fuelcon.cli.io import ExitCode, load_fleet, load_report
from fuelcon.models.report import round_sig
from fuelcon.services.pipeline import ConsensusPipeline

logger = logging.getLogger(__name__)


def register(subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]") -> None:
    """サブコマンドを登録する

    Args:
        subparsers (argparse._SubParsersAction): サブコマンドの登録先
    """
    parser = subparsers.add_parser("verify", help="レポートの制御則を再検証する")
    parser.add_argument("input", type=Path, help="エージェント群ファイル（JSON）")
    parser.add_argument("report", type=Path, help="solve が出力したレポート（JSON）")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """検証結果を JSON で標準出力に書く

    Args:
        args (argparse.Namespace): コマンドライン引数

    Returns:
        int: 終了コード（合格 0、不合格 3）
    """
    fleet_file = load_fleet(args.input)
    report = load_report(args.report)
    result = ConsensusPipeline().verify(fleet_file, report)

    summary = {
        "passed": result.passed,
        "tolerance": round_sig(result.tolerance),
        "max_terminal_error": round_sig(result.max_terminal_error),
        "agents": [
            {
                "id": c.agent_id,
                "terminal_error": round_sig(c.terminal_error),
                "fuel_used": round_sig(c.fuel_used),
                "fuel_margin": round_sig(c.fuel_margin),
                "ordering_margin": round_sig(c.ordering_margin),
                "passed": c.passed,
            }
            for c in result.checks
        ],
    }
    sys.stdout.write(json.dumps(summary, indent=2, ensure_ascii=False) + "\n")
    return ExitCode.OK if result.passed else ExitCode.INCONSISTENT
