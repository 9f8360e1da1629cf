"""テスト共通のフィクスチャ"""

from pathlib import Path

import pytest

from fuelcon.cli.io import load_fleet
from fuelcon.core.config import get_settings
from fuelcon.models.fleet import FleetFile
from fuelcon.services.consensus import Fleet
from tests import WORKED_EXAMPLE_AGENTS, WORKED_EXAMPLE_BETA

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def clear_settings_cache() -> None:
    """環境変数を変えたテストの影響が残らないよう設定のキャッシュを消す"""
    get_settings.cache_clear()


@pytest.fixture
def worked_example_path() -> Path:
    """計算例のエージェント群ファイルのパス

    Returns:
        Path: JSON ファイルのパス
    """
    return FIXTURES / "worked_example.json"


@pytest.fixture
def worked_example_file(worked_example_path: Path) -> FleetFile:
    """計算例のエージェント群ファイル

    Returns:
        FleetFile: 読み込んだファイルモデル
    """
    return load_fleet(worked_example_path)


@pytest.fixture
def worked_example_fleet() -> Fleet:
    """計算例のエージェント群

    Returns:
        Fleet: ID 1〜6 のエージェント群
    """
    return Fleet(agents=list(WORKED_EXAMPLE_AGENTS), beta=WORKED_EXAMPLE_BETA)
