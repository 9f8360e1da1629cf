"""数値計算ユーティリティ

許容誤差の計算と、桁落ちに強い根の計算を提供する
"""

import math

import numpy as np
from numpy.polynomial import Polynomial

from fuelcon.core.config import get_settings


def geometric_slack(*magnitudes: float) -> float:
    """幾何判定に使う許容誤差 ε_g を返す

    ε_g = eps·(1 + 座標の最大絶対値)。eps は FUELCON_EPS で上書きできる

    Args:
        *magnitudes (float): 判定に関わる座標値

    Returns:
        float: 許容誤差
    """
    scale = max((abs(m) for m in magnitudes), default=0.0)
    return get_settings().GEOMETRY_EPS * (1.0 + scale)


def time_slack() -> float:
    """時刻の順序判定に使う許容誤差 ε_t を返す

    Returns:
        float: 許容誤差
    """
    return get_settings().TIME_EPS


def mixed_close(
    a: float, b: float, atol: float | None = None, rtol: float | None = None
) -> bool:
    """絶対誤差と相対誤差を併用して 2 値が等しいか判定する

    Args:
        a (float): 比較する値
        b (float): 基準値
        atol (float | None): 絶対許容誤差（省略時は設定値）
        rtol (float | None): 相対許容誤差（省略時は設定値）

    Returns:
        bool: |a - b| <= atol + rtol·|b| なら True
    """
    settings = get_settings()
    atol = settings.STATE_ATOL if atol is None else atol
    rtol = settings.STATE_RTOL if rtol is None else rtol
    return abs(a - b) <= atol + rtol * abs(b)


def quadratic_roots(a: float, b: float, c: float) -> tuple[float, ...]:
    """実係数二次方程式 a·x² + b·x + c = 0 の実根を昇順で返す

    q = -(b + sign(b)·√Δ)/2 を経由する桁落ちしにくい形で計算する
    a = 0 の場合は一次方程式として扱う。判別式がわずかに負の場合
    （|Δ| が丸め誤差程度）は重根とみなす

    Args:
        a (float): 二次の係数
        b (float): 一次の係数
        c (float): 定数項

    Returns:
        tuple[float, ...]: 実根（0〜2 個）
    """
    if a == 0.0:
        if b == 0.0:
            return ()
        return (-c / b,)

    disc = b * b - 4.0 * a * c
    # 丸め誤差程度の負の判別式は 0 に丸める
    if disc < 0.0:
        if disc >= -1e-12 * max(b * b, abs(4.0 * a * c), 1.0):
            disc = 0.0
        else:
            return ()

    sqrt_disc = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sqrt_disc, b))
    if q == 0.0:
        # b = 0 かつ c = 0
        return (0.0,)
    roots = sorted({q / a, c / q})
    return tuple(roots)


def real_polynomial_roots(poly: Polynomial, t_scale: float = 1.0) -> list[float]:
    """多項式の実根を昇順で返す

    係数の最大絶対値に対して無視できる高次係数を落としてから根を求め、
    虚部が小さい根だけを実根として採用する

    Args:
        poly (Polynomial): 多項式
        t_scale (float): 虚部判定に使う変数のスケール

    Returns:
        list[float]: 実根のリスト

    Raises:
        ValueError: 多項式が恒等的に 0 の場合
    """
    coef = np.asarray(poly.coef, dtype=float)
    biggest = float(np.max(np.abs(coef))) if coef.size else 0.0
    if biggest == 0.0:
        raise ValueError("多項式が恒等的に 0 です")

    trimmed = poly.trim(tol=1e-13 * biggest)
    if trimmed.degree() == 0:
        return []
    if trimmed.degree() <= 2:
        padded = list(trimmed.coef) + [0.0] * (3 - len(trimmed.coef))
        return list(quadratic_roots(padded[2], padded[1], padded[0]))

    roots: list[float] = []
    for root in trimmed.roots():
        if abs(root.imag) <= 1e-9 * (1.0 + abs(root.real) + t_scale):
            roots.append(float(root.real))
    return sorted(roots)
