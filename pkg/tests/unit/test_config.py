"""config.pyのユニットテスト"""

import os
import warnings
from unittest import mock

from fuelcon.__version__ import __app_name__, __version__
from fuelcon.core.config import Settings, get_settings


class TestSettings:
    """Settingsクラスのテスト"""

    def test_default_values(self) -> None:
        """デフォルト値が正しく設定されることを確認"""
        with mock.patch.dict(os.environ, {}, clear=True):
            settings = Settings()
        assert settings.APP_NAME == __app_name__
        assert settings.APP_VERSION == __version__
        assert settings.GEOMETRY_EPS == 1e-6
        assert settings.TIME_EPS == 1e-9
        assert settings.STATE_ATOL == 1e-6
        assert settings.STATE_RTOL == 1e-9
        assert settings.VERIFY_ATOL == 1e-4
        assert settings.VERIFY_RTOL == 1e-6
        assert settings.DEFAULT_WORKERS == 1
        assert settings.HULL_PRUNE is False
        assert settings.HORIZON_FACTOR == 4.0
        assert settings.TRAJECTORY_SAMPLES == 201
        assert settings.BOUNDARY_POINTS == 64
        assert settings.LOG_LEVEL == "WARNING"

    def test_custom_env_values(self) -> None:
        """環境変数からカスタム値が読み込まれることを確認"""
        with mock.patch.dict(
            os.environ,
            {
                "FUELCON_EPS": "1e-8",
                "FUELCON_VERIFY_ATOL": "0.001",
                "FUELCON_WORKERS": "4",
                "FUELCON_HULL_PRUNE": "yes",
                "FUELCON_TRAJECTORY_SAMPLES": "11",
                "FUELCON_BOUNDARY_POINTS": "16",
                "FUELCON_LOG_LEVEL": "debug",
            },
        ):
            settings = Settings()
            assert settings.GEOMETRY_EPS == 1e-8
            assert settings.VERIFY_ATOL == 0.001
            assert settings.DEFAULT_WORKERS == 4
            assert settings.HULL_PRUNE is True
            assert settings.TRAJECTORY_SAMPLES == 11
            assert settings.BOUNDARY_POINTS == 16
            assert settings.LOG_LEVEL == "DEBUG"

    def test_invalid_int_env_values(self) -> None:
        """無効な整数値が設定された場合にデフォルト値が使用されることを確認"""
        with mock.patch.dict(os.environ, {"FUELCON_WORKERS": "many"}):
            with warnings.catch_warnings(record=True) as w:
                warnings.simplefilter("always")
                settings = Settings()

                assert settings.DEFAULT_WORKERS == 1
                assert len(w) == 1
                assert issubclass(w[0].category, UserWarning)
                assert "FUELCON_WORKERS" in str(w[0].message)

    def test_invalid_float_env_values(self) -> None:
        """数値でない許容誤差が設定された場合にデフォルト値が使用されることを確認"""
        with mock.patch.dict(os.environ, {"FUELCON_EPS": "tiny"}):
            with warnings.catch_warnings(record=True) as w:
                warnings.simplefilter("always")
                settings = Settings()

                assert settings.GEOMETRY_EPS == 1e-6
                assert len(w) == 1
                assert "FUELCON_EPS" in str(w[0].message)

    def test_non_positive_float_env_values(self) -> None:
        """0 以下や nan の許容誤差が拒否されることを確認"""
        with mock.patch.dict(
            os.environ,
            {
                "FUELCON_TIME_EPS": "0",
                "FUELCON_VERIFY_RTOL": "-1",
                "FUELCON_EPS": "nan",
            },
        ):
            with warnings.catch_warnings(record=True) as w:
                warnings.simplefilter("always")
                settings = Settings()

                assert settings.TIME_EPS == 1e-9
                assert settings.VERIFY_RTOL == 1e-6
                assert settings.GEOMETRY_EPS == 1e-6
                assert len(w) == 3


class TestGetSettings:
    """get_settings関数のテスト"""

    def test_singleton(self) -> None:
        """同じインスタンスが返されることを確認"""
        assert get_settings() is get_settings()

    def test_cache_clear_rereads_env(self) -> None:
        """キャッシュを消すと環境変数が読み直されることを確認"""
        with mock.patch.dict(os.environ, {"FUELCON_WORKERS": "3"}):
            get_settings.cache_clear()
            assert get_settings().DEFAULT_WORKERS == 3
        get_settings.cache_clear()
