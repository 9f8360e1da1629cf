"""バージョン情報

パッケージのバージョンと名前を管理する
リリース時にこのファイルのみを更新する
"""

__version__ = "1.0.0"
__app_name__ = "fuelcon"
