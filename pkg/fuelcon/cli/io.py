"""CLI の入出力

終了コードの定義と、JSON ファイルの読み込み・書き出しを提供する
"""

import json
import logging
import sys
from enum import IntEnum
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel, ValidationError

from fuelcon.core.exceptions import InputFormatError
from fuelcon.models.fleet import FleetFile
from fuelcon.models.report import ReportFile

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class ExitCode(IntEnum):
    """終了コード"""

    OK = 0
    INPUT_ERROR = 1
    INFEASIBLE = 2
    INCONSISTENT = 3


def load_fleet(path: Path) -> FleetFile:
    """エージェント群ファイルを読み込む

    Args:
        path (Path): ファイルパス

    Returns:
        FleetFile: エージェント群ファイル

    Raises:
        InputFormatError: 読み込み・構文・項目の検証に失敗した場合
    """
    return _load_model(path, FleetFile)


def load_report(path: Path) -> ReportFile:
    """求解レポートを読み込む

    Args:
        path (Path): ファイルパス

    Returns:
        ReportFile: 求解レポート

    Raises:
        InputFormatError: 読み込み・構文・項目の検証に失敗した場合
    """
    return _load_model(path, ReportFile)


def write_json(model: BaseModel, path: Path | None = None) -> None:
    """モデルを JSON で書き出す（path が None なら標準出力）

    Args:
        model (BaseModel): 出力するモデル
        path (Path | None): 出力先
    """
    text = model.model_dump_json(indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("%s に書き込みました", path)


def _load_model(path: Path, model: type[ModelT]) -> ModelT:
    """JSON ファイルを読み込んでモデルで検証する"""
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputFormatError(f"{path}: ファイルを読み込めません: {e}") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFormatError(
            f"{path}:{e.lineno}:{e.colno}: JSON の構文エラー: {e.msg}"
        ) from e

    try:
        return model.model_validate(data)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '(root)'}: {err['msg']}"
            for err in e.errors()
        )
        raise InputFormatError(f"{path}: 項目が不正です: {details}") from e
