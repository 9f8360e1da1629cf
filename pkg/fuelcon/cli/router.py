"""CLI ルーター

全てのサブコマンドを統合する
"""

import argparse
from typing import NoReturn

from fuelcon.__version__ import __app_name__, __version__
from fuelcon.cli.commands import boundary, feasibility, simulate, solve, verify
from fuelcon.core.exceptions import InputFormatError


class _Parser(argparse.ArgumentParser):
    """引数エラーを終了せずに InputFormatError として送出するパーサー"""

    def error(self, message: str) -> NoReturn:
        raise InputFormatError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """サブコマンドを登録したパーサーを作る

    Returns:
        argparse.ArgumentParser: パーサー
    """
    parser = _Parser(
        prog=__app_name__,
        description="燃料予算付き二重積分器エージェント群の最小時間コンセンサス",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # サブコマンドを登録
    feasibility.register(subparsers)
    solve.register(subparsers)
    boundary.register(subparsers)
    simulate.register(subparsers)
    verify.register(subparsers)
    return parser
