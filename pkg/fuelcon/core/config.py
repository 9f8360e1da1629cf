"""アプリケーション設定

環境変数を読み込み、ソルバー全体で使用する許容誤差や既定値を管理する
"""

import os
import warnings
from functools import lru_cache

from fuelcon.__version__ import __app_name__, __version__


class Settings:
    """アプリケーション設定クラス

    環境変数から設定値を読み込み、デフォルト値を提供する
    """

    def __init__(self) -> None:
        """設定を初期化する"""
        # アプリケーション基本情報
        self.APP_NAME: str = os.getenv("APP_NAME", __app_name__)
        self.APP_VERSION: str = os.getenv("APP_VERSION", __version__)

        # 許容誤差
        self.GEOMETRY_EPS: float = self._get_positive_float_env("FUELCON_EPS", 1e-6)
        self.TIME_EPS: float = self._get_positive_float_env("FUELCON_TIME_EPS", 1e-9)
        self.STATE_ATOL: float = self._get_positive_float_env(
            "FUELCON_STATE_ATOL", 1e-6
        )
        self.STATE_RTOL: float = self._get_positive_float_env(
            "FUELCON_STATE_RTOL", 1e-9
        )
        self.VERIFY_ATOL: float = self._get_positive_float_env(
            "FUELCON_VERIFY_ATOL", 1e-4
        )
        self.VERIFY_RTOL: float = self._get_positive_float_env(
            "FUELCON_VERIFY_RTOL", 1e-6
        )

        # 求解設定
        self.DEFAULT_WORKERS: int = self._get_int_env("FUELCON_WORKERS", 1)
        self.HULL_PRUNE: bool = os.getenv("FUELCON_HULL_PRUNE", "false").lower() in (
            "true",
            "1",
            "yes",
        )
        self.HORIZON_FACTOR: float = self._get_positive_float_env(
            "FUELCON_HORIZON_FACTOR", 4.0
        )

        # 出力設定
        self.TRAJECTORY_SAMPLES: int = self._get_int_env(
            "FUELCON_TRAJECTORY_SAMPLES", 201
        )
        self.BOUNDARY_POINTS: int = self._get_int_env("FUELCON_BOUNDARY_POINTS", 64)
        self.LOG_LEVEL: str = os.getenv("FUELCON_LOG_LEVEL", "WARNING").upper()

    def _get_int_env(self, key: str, default: int) -> int:
        """環境変数から整数値を安全に取得する

        環境変数の値が整数に変換できない場合は、デフォルト値を使用し、
        警告メッセージを表示する

        Args:
            key (str): 環境変数のキー
            default (int): デフォルト値

        Returns:
            int: 環境変数の値またはデフォルト値
        """
        value_str = os.getenv(key)
        if value_str is None:
            return default

        try:
            return int(value_str)
        except ValueError:
            warnings.warn(
                f"環境変数 {key} の値 '{value_str}' は整数に変換できません。"
                f"デフォルト値 {default} を使用します。",
                UserWarning,
                stacklevel=2,
            )
            return default

    def _get_positive_float_env(self, key: str, default: float) -> float:
        """環境変数から正の浮動小数点数値を安全に取得する

        変換できない値や 0 以下の値の場合は、デフォルト値を使用し、
        警告メッセージを表示する

        Args:
            key (str): 環境変数のキー
            default (float): デフォルト値

        Returns:
            float: 環境変数の値またはデフォルト値
        """
        value_str = os.getenv(key)
        if value_str is None:
            return default

        try:
            value = float(value_str)
        except ValueError:
            warnings.warn(
                f"環境変数 {key} の値 '{value_str}' は浮動小数点数に変換できません。"
                f"デフォルト値 {default} を使用します。",
                UserWarning,
                stacklevel=2,
            )
            return default

        # nan や 0 以下は許容誤差として意味を持たない
        if not value > 0.0 or value == float("inf"):
            warnings.warn(
                f"環境変数 {key} の値 '{value_str}' は正の有限値である必要があります。"
                f"デフォルト値 {default} を使用します。",
                UserWarning,
                stacklevel=2,
            )
            return default
        return value


@lru_cache()
def get_settings() -> Settings:
    """設定のシングルトンインスタンスを取得する

    lru_cacheによりインスタンスがキャッシュされ、
    パッケージ全体で同じインスタンスが使用される

    Returns:
        Settings: 設定インスタンス
    """
    return Settings()
