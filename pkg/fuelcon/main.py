"""CLI のエントリポイント

fuelcon コマンドのサブコマンドを実行し、例外を終了コードへ対応付ける
"""

import logging
import sys
from typing import Sequence

from fuelcon.cli.io import ExitCode
from fuelcon.cli.router import build_parser
from fuelcon.core.config import get_settings
from fuelcon.core.exceptions import (
    FuelconError,
    InputFormatError,
    NoConsensusWithinHorizonError,
)
from fuelcon.core.log import setup_logging

logger = logging.getLogger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    """サブコマンドを実行する

    Args:
        argv (Sequence[str] | None): コマンドライン引数（省略時は sys.argv）

    Returns:
        int: 終了コード
    """
    setup_logging(get_settings())

    try:
        args = build_parser().parse_args(argv)
        return int(args.handler(args))
    except SystemExit as e:
        # --help / --version
        if e.code is None or isinstance(e.code, int):
            return int(e.code or 0)
        return ExitCode.INPUT_ERROR
    except (InputFormatError, ValueError) as e:
        _report(e)
        return ExitCode.INPUT_ERROR
    except NoConsensusWithinHorizonError as e:
        _report(e)
        return ExitCode.INFEASIBLE
    except FuelconError as e:
        # NoCommonPoint / SynthesisFailed / NoScenarioFeasible など内部の不整合
        logger.debug("内部の不整合", exc_info=True)
        _report(e)
        return ExitCode.INCONSISTENT


def _report(e: Exception) -> None:
    """エラーの概要を標準エラー出力に書く"""
    sys.stderr.write(f"error: {type(e).__name__}: {e}\n")


if __name__ == "__main__":
    sys.exit(main())
