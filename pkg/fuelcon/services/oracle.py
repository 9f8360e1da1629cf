"""総当たりオラクルサービス

解析解とは独立に、切替時刻の格子上の全制御則の終端をサンプリングして
到達可能集合を近似し、最小コンセンサス時刻を格子探索で求める
小規模な検証専用
"""

import logging
import math
from typing import Sequence

import numpy as np
import pandas as pd

from fuelcon.core.exceptions import NoConsensusWithinHorizonError
from fuelcon.services.attainable import contact_horizon
from fuelcon.services.dynamics import AgentState

logger = logging.getLogger(__name__)

# 燃料と時刻の比較に使う丸め誤差
_ROUND = 1e-12


def oracle_reachable(
    x0: AgentState, beta: float, tf: float, grid_step: float
) -> list[AgentState]:
    """格子上の全制御則の終端状態を返す

    {γ, 0, -γ} 形と単一パルス {0, γ, 0} 形について、切替時刻を
    grid_step 刻みで総当たりし、燃料が β 以下のものだけを残す。
    燃料をちょうど min(β, tf) 使う境界の族は速度が grid_step 刻みになるよう
    別に加える

    Args:
        x0 (AgentState): 初期状態
        beta (float): 燃料予算
        tf (float): 終端時刻
        grid_step (float): 切替時刻の格子幅

    Returns:
        list[AgentState]: 終端状態（重複なし）

    Raises:
        ValueError: grid_step が正でない場合
    """
    points = _plan_endpoints(x0, beta, tf, grid_step)
    return [AgentState(pos=float(x), vel=float(v)) for x, v in points]


def oracle_min_consensus(
    agents: Sequence[AgentState],
    beta: float,
    t_step: float,
    grid_step: float,
    t_cap: float | None = None,
) -> tuple[float, AgentState]:
    """時刻格子上で全員のサンプル集合が点を共有する最小時刻を返す

    各集合は速度方向に grid_step 幅の行へ分け、行ごとの位置の最大・最小の点を
    線分でつないだ包絡で表す。包絡は集合の内側にあるので、共通の速度で
    上側包絡の最小が下側包絡の最大以上なら共通点ありとみなす。共通点の有無は
    時刻について単調なので、格子番号を二分探索する

    Args:
        agents (Sequence[AgentState]): 初期状態
        beta (float): 燃料予算
        t_step (float): 時刻格子の幅
        grid_step (float): 切替時刻とラスタの格子幅
        t_cap (float | None): 探索上限（省略時は解析的な探索上限）

    Returns:
        tuple[float, AgentState]: (最小時刻, 共有点)

    Raises:
        ValueError: 刻み幅が正でない、またはエージェントが空の場合
        NoConsensusWithinHorizonError: 上限までに共通点が無い場合
    """
    if t_step <= 0.0 or grid_step <= 0.0:
        raise ValueError(
            f"刻み幅は正である必要があります: t_step={t_step}, grid_step={grid_step}"
        )
    unique = list(dict.fromkeys(agents))
    if not unique:
        raise ValueError("エージェントが1つ以上必要です")
    if len(unique) == 1:
        return 0.0, unique[0]

    cap = contact_horizon(unique, beta) if t_cap is None else t_cap
    k_max = max(1, math.ceil(cap / t_step))

    def shared_at(k: int) -> AgentState | None:
        return _shared_point(unique, beta, k * t_step, grid_step)

    # shared_at(0) は常に None（初期状態は互いに異なる）。倍々に広げてから二分探索する
    lo, hi = 0, 1
    while shared_at(hi) is None:
        if hi >= k_max:
            raise NoConsensusWithinHorizonError(
                f"時刻 {k_max * t_step:.6g} までに共通点がありません"
            )
        lo, hi = hi, min(2 * hi, k_max)

    while hi - lo > 1:
        mid = (lo + hi) // 2
        if shared_at(mid) is None:
            lo = mid
        else:
            hi = mid

    cell = shared_at(hi)
    assert cell is not None
    logger.debug(
        "オラクル: t=%.6g で共通点 (%.6g, %.6g)", hi * t_step, cell.pos, cell.vel
    )
    return hi * t_step, cell


def _plan_endpoints(
    x0: AgentState, beta: float, tf: float, step: float
) -> np.ndarray:
    """格子上の制御則の終端 (x, v) を (k, 2) 配列で返す"""
    if step <= 0.0:
        raise ValueError(f"grid_stepは正である必要があります: {step}")
    if tf <= 0.0:
        return np.array([[x0.pos, x0.vel]])

    grid = np.unique(np.append(np.arange(0.0, tf, step), tf))
    blocks: list[np.ndarray] = []

    # {γ, 0, -γ}: 加速 t1、惰行 t2 - t1、減速 tf - t2
    t1, t2 = np.meshgrid(grid, grid, indexing="ij")
    keep = (t1 <= t2) & (t1 + tf - t2 <= beta + _ROUND)
    blocks.extend(_arc_endpoints(x0, tf, t1[keep], t2[keep]))

    # {0, γ, 0}: 開始 s、幅 w
    s, w = np.meshgrid(grid, grid, indexing="ij")
    keep = (s + w <= tf + _ROUND) & (w <= beta + _ROUND)
    s, w = s[keep], w[keep]
    blocks.extend(_pulse_endpoints(x0, tf, s, w))

    # 燃料を使い切る境界の族（格子上の (t1, t2) は β ちょうどに乗らない）
    burn = min(beta, tf)
    fine = np.unique(np.append(np.arange(0.0, burn, step / 2.0), burn))
    t2 = fine if beta >= tf else tf - (beta - fine)
    blocks.extend(_arc_endpoints(x0, tf, fine, t2))
    s = np.unique(np.append(np.arange(0.0, tf - burn, step / 2.0), tf - burn))
    blocks.extend(_pulse_endpoints(x0, tf, s, np.full_like(s, burn)))

    return np.unique(np.vstack(blocks), axis=0)


def _arc_endpoints(
    x0: AgentState, tf: float, t1: np.ndarray, t2: np.ndarray
) -> list[np.ndarray]:
    """{γ, 0, -γ} 形の終端を両極性について返す"""
    dec = tf - t2
    blocks: list[np.ndarray] = []
    for gamma in (1.0, -1.0):
        v1 = x0.vel + gamma * t1
        x2 = x0.pos + x0.vel * t1 + gamma * t1**2 / 2.0 + v1 * (t2 - t1)
        x = x2 + v1 * dec - gamma * dec**2 / 2.0
        blocks.append(np.column_stack([x, v1 - gamma * dec]))
    return blocks


def _pulse_endpoints(
    x0: AgentState, tf: float, s: np.ndarray, w: np.ndarray
) -> list[np.ndarray]:
    """{0, γ, 0} 形（開始 s、幅 w）の終端を両極性について返す"""
    rest = np.maximum(tf - s - w, 0.0)
    blocks: list[np.ndarray] = []
    for gamma in (1.0, -1.0):
        v1 = x0.vel + gamma * w
        x1 = x0.pos + x0.vel * (s + w) + gamma * w**2 / 2.0
        blocks.append(np.column_stack([x1 + v1 * rest, v1]))
    return blocks


def _envelope(
    x0: AgentState, beta: float, t: float, step: float
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """速度ごとの位置の上側・下側の包絡点（速度の昇順）

    行ごとの極値点に速度の両端の点を加える。点はすべて集合内にあるので、
    凸性から隣り合う点を結ぶ線分も集合内にある
    """
    points = _plan_endpoints(x0, beta, t, step)
    frame = pd.DataFrame(
        {
            "row": np.rint(points[:, 1] / step).astype(np.int64),
            "vel": points[:, 1],
            "pos": points[:, 0],
        }
    )
    edges = frame["vel"].isin([frame["vel"].min(), frame["vel"].max()])
    grouped = frame.groupby("row")["pos"]
    upper = pd.concat([frame.loc[grouped.idxmax()], frame[edges]])
    lower = pd.concat([frame.loc[grouped.idxmin()], frame[edges]])
    upper = upper.groupby("vel", as_index=False)["pos"].max()
    lower = lower.groupby("vel", as_index=False)["pos"].min()
    return upper, lower


def _shared_point(
    agents: Sequence[AgentState], beta: float, t: float, step: float
) -> AgentState | None:
    """全員が共有する点（無ければ None）"""
    if t <= 0.0:
        return None

    envelopes = [_envelope(a, beta, t, step) for a in agents]
    v_lo = max(upper["vel"].iloc[0] for upper, _ in envelopes)
    v_hi = min(upper["vel"].iloc[-1] for upper, _ in envelopes)
    if v_lo > v_hi:
        return None

    ks = np.arange(math.ceil(v_lo / step), math.floor(v_hi / step) + 1)
    vs = np.unique(np.concatenate([ks * step, [v_lo, v_hi]]))
    vs = vs[(vs >= v_lo) & (vs <= v_hi)]
    his = np.min(
        [np.interp(vs, u["vel"], u["pos"], np.nan, np.nan) for u, _ in envelopes],
        axis=0,
    )
    los = np.max(
        [np.interp(vs, lo["vel"], lo["pos"], np.nan, np.nan) for _, lo in envelopes],
        axis=0,
    )
    overlap = his - los
    if np.all(np.isnan(overlap)):
        return None
    k = int(np.nanargmax(overlap))
    # 弦による内側近似の誤差はセル幅の 2 乗程度
    if overlap[k] < -step * step:
        return None
    return AgentState(pos=float(0.5 * (his[k] + los[k])), vel=float(vs[k]))
