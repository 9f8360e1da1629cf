"""fuelcon: 燃料制約付き二重積分器群の最小時間コンセンサス"""

from fuelcon.__version__ import __app_name__, __version__

__all__ = ["__app_name__", "__version__"]
