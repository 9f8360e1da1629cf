"""ログ設定

CLI 実行時のロガー設定を提供する
"""

import logging
import sys

from fuelcon.core.config import Settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _StderrHandler(logging.StreamHandler):  # type: ignore[type-arg]
    """fuelcon が登録する標準エラー出力ハンドラー"""


def setup_logging(settings: Settings) -> None:
    """ルートロガーに標準エラー出力のハンドラーを設定する

    標準出力はレポート JSON に使うため、ログは必ず標準エラー出力へ流す
    既にハンドラーがある場合はレベルのみ更新する

    Args:
        settings (Settings): アプリケーション設定
    """
    level = logging.getLevelName(settings.LOG_LEVEL)
    if not isinstance(level, int):
        level = logging.WARNING

    root = logging.getLogger()
    root.setLevel(level)
    if not any(isinstance(h, _StderrHandler) for h in root.handlers):
        handler = _StderrHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
