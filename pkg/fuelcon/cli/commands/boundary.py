"""boundary コマンド

1 エージェントの到達可能集合の境界を閉じた折れ線の CSV で出力する
"""

import argparse
import sys
from pathlib import Path

from fuelcon.cli.io import ExitCode
from fuelcon.core.config import get_settings
from fuelcon.services.attainable import ReachSpec, boundary_polyline
from fuelcon.services.dynamics import AgentState
from fuelcon.services.export import FLOAT_FORMAT, boundary_frame, write_csv


def register(subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]") -> None:
    """サブコマンドを登録する

    Args:
        subparsers (argparse._SubParsersAction): サブコマンドの登録先
    """
    parser = subparsers.add_parser("boundary", help="到達可能集合の境界を CSV で出力する")
    parser.add_argument("--x", type=float, required=True, help="初期位置")
    parser.add_argument("--v", type=float, required=True, help="初期速度")
    parser.add_argument("--beta", type=float, required=True, help="燃料予算")
    parser.add_argument("--tf", type=float, required=True, help="終端時刻")
    parser.add_argument(
        "--n", type=int, default=get_settings().BOUNDARY_POINTS, help="弧ごとの頂点数"
    )
    parser.add_argument(
        "--out", type=Path, default=None, help="CSV の出力先（省略時は標準出力）"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """境界の折れ線を書き出す

    Args:
        args (argparse.Namespace): コマンドライン引数

    Returns:
        int: 終了コード

    Raises:
        ValueError: 数値が不正な場合（CLI では終了コード 1）
    """
    spec = ReachSpec(AgentState(pos=args.x, vel=args.v), args.beta, args.tf)
    frame = boundary_frame(boundary_polyline(spec, args.n))
    if args.out is None:
        frame.to_csv(
            sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
    else:
        write_csv(frame, args.out)
    return ExitCode.OK
