"""到達可能集合サービス

燃料制約付き到達可能集合 A^β(tf, x0) の幾何を扱う
境界曲線、速度固定スライスの区間、証拠制御則付きの包含判定、
コンセンサス速度帯、および複数集合の最初の接触時刻を提供する
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from fuelcon.core.config import get_settings
from fuelcon.core.exceptions import (
    NoConsensusWithinHorizonError,
    VelocityOutOfBandError,
)
from fuelcon.core.numerics import geometric_slack, quadratic_roots
from fuelcon.services.dynamics import AgentState, SwitchPlan, coast

logger = logging.getLogger(__name__)

# ギャップ関数の単峰性チェックと代替走査の点数
_UNIMODAL_STATIONS = 9
_FALLBACK_STATIONS = 512


class Regime(str, Enum):
    """境界を決める制約の種類"""

    FUEL_BOUND = "fuel_bound"  # β < tf: 燃料を使い切る境界
    TIME_BOUND = "time_bound"  # β >= tf: bang-bang 境界（燃料制約は効かない）


@dataclass(frozen=True)
class ReachSpec:
    """到達可能集合 A^β(tf, x0) を表すハンドル

    Attributes:
        x0 (AgentState): 初期状態
        beta (float): 燃料予算
        tf (float): 終端時刻
    """

    x0: AgentState
    beta: float
    tf: float

    def __post_init__(self) -> None:
        """パラメータを検証する

        Raises:
            ValueError: β または tf が負、あるいは有限値でない場合
        """
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValueError(f"betaは0以上の有限値である必要があります: {self.beta}")
        if not (math.isfinite(self.tf) and self.tf >= 0.0):
            raise ValueError(f"tfは0以上の有限値である必要があります: {self.tf}")

    @property
    def burn(self) -> float:
        """境界上で消費される燃料 min(β, tf)"""
        return min(self.beta, self.tf)

    @property
    def regime(self) -> Regime:
        """境界を決める制約"""
        return Regime.FUEL_BOUND if self.beta < self.tf else Regime.TIME_BOUND


@dataclass(frozen=True)
class VelocityBand:
    """速度帯 [v_lo, v_hi]

    Attributes:
        v_lo (float): 下限速度
        v_hi (float): 上限速度
    """

    v_lo: float
    v_hi: float

    @property
    def empty(self) -> bool:
        """下限が上限を超えていれば空"""
        return self.v_lo > self.v_hi

    @property
    def width(self) -> float:
        """帯の幅（空なら負）"""
        return self.v_hi - self.v_lo


@dataclass(frozen=True)
class SliceExtent:
    """速度 v における到達可能な位置区間

    Attributes:
        v (float): 速度
        x_lo (float): 位置の下限（s3 側の境界）
        x_hi (float): 位置の上限（s1 側の境界）
    """

    v: float
    x_lo: float
    x_hi: float

    @property
    def width(self) -> float:
        """区間の幅"""
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class Membership:
    """包含判定の結果

    Attributes:
        inside (bool): 許容誤差 ε_g 込みで集合に含まれるか
        witness (SwitchPlan | None): 目標状態へ到達する最小燃料の制御則
        margin (float): 最も近い境界片までの符号付き距離（内部で正）
    """

    inside: bool
    witness: SwitchPlan | None
    margin: float


@dataclass(frozen=True)
class CommonGap:
    """複数集合の速度スライスの最大重なり

    Attributes:
        gap (float): min(x_hi) - max(x_lo) の最大値（負なら交わらない）
        v (float): 最大値をとる速度
        pos (float): その速度での重なり区間の中点
    """

    gap: float
    v: float
    pos: float


def velocity_band(r: ReachSpec) -> VelocityBand:
    """到達可能な速度帯を返す

    Args:
        r (ReachSpec): 到達可能集合

    Returns:
        VelocityBand: [v0 - min(β, tf), v0 + min(β, tf)]
    """
    burn = r.burn
    return VelocityBand(v_lo=r.x0.vel - burn, v_hi=r.x0.vel + burn)


def agent_velocity_band(x0: AgentState, beta: float) -> VelocityBand:
    """時間無制限で到達し得る速度帯 [v0 - β, v0 + β] を返す

    Args:
        x0 (AgentState): 初期状態
        beta (float): 燃料予算

    Returns:
        VelocityBand: エージェント単体の速度帯
    """
    return VelocityBand(v_lo=x0.vel - beta, v_hi=x0.vel + beta)


def slice_extent(r: ReachSpec, v: float) -> SliceExtent:
    """速度 v での位置区間を返す

    Args:
        r (ReachSpec): 到達可能集合
        v (float): 速度

    Returns:
        SliceExtent: 位置区間

    Raises:
        VelocityOutOfBandError: v が速度帯から ε_g を超えて外れている場合
    """
    band = velocity_band(r)
    slack = geometric_slack(v, r.x0.vel)
    if v < band.v_lo - slack or v > band.v_hi + slack:
        raise VelocityOutOfBandError(
            f"速度が到達可能帯の外です: v={v}, band=[{band.v_lo}, {band.v_hi}]"
        )
    v = min(max(v, band.v_lo), band.v_hi)
    x_lo, x_hi = _extent(r.x0.pos, r.x0.vel, r.beta, r.tf, v)
    return SliceExtent(v=v, x_lo=x_lo, x_hi=x_hi)


def contains(r: ReachSpec, target: AgentState) -> Membership:
    """目標状態が到達可能集合に含まれるか判定する

    速度帯とスライス区間で判定し、含まれる場合は最小燃料の証拠制御則を付ける

    Args:
        r (ReachSpec): 到達可能集合
        target (AgentState): 目標状態

    Returns:
        Membership: 判定結果
    """
    band = velocity_band(r)
    slack = geometric_slack(target.pos, target.vel, r.x0.pos, r.x0.vel)
    v_margin = min(target.vel - band.v_lo, band.v_hi - target.vel)
    if v_margin < -slack:
        return Membership(inside=False, witness=None, margin=v_margin)

    v = min(max(target.vel, band.v_lo), band.v_hi)
    x_lo, x_hi = _extent(r.x0.pos, r.x0.vel, r.beta, r.tf, v)
    margin = min(v_margin, target.pos - x_lo, x_hi - target.pos)
    if margin < -slack:
        return Membership(inside=False, witness=None, margin=margin)
    return Membership(
        inside=True, witness=minimum_fuel_plan(r, target), margin=float(margin)
    )


def minimum_fuel_plan(r: ReachSpec, target: AgentState) -> SwitchPlan | None:
    """目標状態へちょうど tf で到達する最小燃料の制御則を返す

    目標は集合内へ射影してから解く。極性 γ ごとに速度・位置の伝達方程式を
    (t1, t2) について解き、解がなければ単一パルス {0, γ, 0} を試す

    Args:
        r (ReachSpec): 到達可能集合
        target (AgentState): 目標状態

    Returns:
        SwitchPlan | None: 制御則（構成できない場合は None）
    """
    tf = r.tf
    if tf == 0.0:
        return SwitchPlan.idle(0.0)

    band = velocity_band(r)
    v = min(max(target.vel, band.v_lo), band.v_hi)
    x_lo, x_hi = _extent(r.x0.pos, r.x0.vel, r.beta, tf, v)
    x = min(max(target.pos, x_lo), x_hi)

    drift = coast(r.x0, tf)
    dv = v - r.x0.vel
    dx = x - drift.pos
    tol = 1e-9 * (1.0 + tf + r.beta)

    for gamma in (1, -1):
        c = gamma * dv
        y = gamma * dx
        # 後段の減速時間 m について: m² - (tf - c)·m - (c·tf - c²/2 - y) = 0
        for m in quadratic_roots(1.0, -(tf - c), -(c * tf - c * c / 2.0 - y)):
            p = m + c
            if m < -tol or p < -tol or p + m > tf + tol or p + m > r.beta + tol:
                continue
            t1 = min(max(p, 0.0), tf)
            t2 = min(max(tf - m, t1), tf)
            return SwitchPlan(gamma=gamma, t1=t1, t2=t2, tf=tf)

    return single_pulse_plan(r, AgentState(pos=x, vel=v))


def single_pulse_plan(r: ReachSpec, target: AgentState) -> SwitchPlan | None:
    """単一パルス {0, γ, 0} で目標へ到達する制御則を返す

    速度変化 |Δv| だけの燃料で届く位置は、パルスを早く打つか遅く打つかで
    [惰行点 + Δv·|Δv|/2, 惰行点 + Δv·tf - Δv·|Δv|/2] の範囲を動く

    Args:
        r (ReachSpec): 到達可能集合
        target (AgentState): 目標状態

    Returns:
        SwitchPlan | None: 制御則（範囲外なら None）
    """
    tf = r.tf
    drift = coast(r.x0, tf)
    dv = target.vel - r.x0.vel
    width = abs(dv)
    tol = 1e-9 * (1.0 + tf + abs(target.pos - drift.pos))

    if width <= tol:
        if abs(target.pos - drift.pos) <= geometric_slack(target.pos, drift.pos):
            return SwitchPlan.idle(tf)
        return None
    if width > min(r.beta, tf) + tol:
        return None

    gamma = 1 if dv > 0.0 else -1
    delay = tf - width / 2.0 - gamma * (target.pos - drift.pos) / width
    if delay < -tol or delay > tf - width + tol:
        return None
    delay = min(max(delay, 0.0), tf - width)
    return SwitchPlan(gamma=gamma, t0=delay, t1=delay + width, t2=tf, tf=tf)


def boundary_polyline(r: ReachSpec, n: int) -> list[AgentState]:
    """境界 ∂A を閉じた折れ線として返す

    s1 弧（速度昇順）、上側の平坦部、s3 弧（速度降順）、下側の平坦部の順に
    たどり、最初の頂点を末尾に繰り返して閉じる。速度の標本点は
    平坦部付近に密なチェビシェフ配置

    Args:
        r (ReachSpec): 到達可能集合
        n (int): 各弧の速度標本点数（>= 8）

    Returns:
        list[AgentState]: 閉じた折れ線の頂点列

    Raises:
        ValueError: n が 8 未満の場合
    """
    if n < 8:
        raise ValueError(f"nは8以上である必要があります: {n}")

    burn = r.burn
    k = np.arange(n)
    stations = r.x0.vel - burn * np.cos(np.pi * k / (n - 1))

    extents = [_extent(r.x0.pos, r.x0.vel, r.beta, r.tf, float(v)) for v in stations]
    upper = [AgentState(pos=e[1], vel=float(v)) for e, v in zip(extents, stations)]
    lower = [
        AgentState(pos=e[0], vel=float(v))
        for e, v in zip(reversed(extents), stations[::-1])
    ]

    points: list[AgentState] = []
    for p in upper + lower:
        if points and _same_point(points[-1], p):
            continue
        points.append(p)
    if len(points) > 1 and _same_point(points[-1], points[0]):
        points.pop()
    points.append(points[0])
    return points


def consensus_band(agents: Sequence[AgentState], beta: float) -> VelocityBand:
    """コンセンサス速度帯 [max(v) - β, min(v) + β] を返す

    Args:
        agents (Sequence[AgentState]): エージェントの初期状態
        beta (float): 燃料予算

    Returns:
        VelocityBand: コンセンサス速度帯（下限 > 上限なら空）

    Raises:
        ValueError: エージェントが空の場合
    """
    if not agents:
        raise ValueError("エージェントが1つ以上必要です")
    vels = [a.vel for a in agents]
    return VelocityBand(v_lo=max(vels) - beta, v_hi=min(vels) + beta)


def feasible(agents: Sequence[AgentState], beta: float) -> bool:
    """コンセンサスが可能か判定する（max(v) - min(v) <= 2β）

    Args:
        agents (Sequence[AgentState]): エージェントの初期状態
        beta (float): 燃料予算

    Returns:
        bool: 可能なら True

    Raises:
        ValueError: エージェントが空の場合
    """
    if not agents:
        raise ValueError("エージェントが1つ以上必要です")
    vels = [a.vel for a in agents]
    return max(vels) - min(vels) <= 2.0 * beta


def common_gap(states: Sequence[AgentState], beta: float, t: float) -> CommonGap:
    """時刻 t での複数集合の速度スライスの最大重なりを返す

    各上限は速度について凹、各下限は凸なので、重なり
    min(x_hi) - max(x_lo) は共通速度帯上で単峰になる。黄金分割
    （有界 Brent 法）で最大化し、単峰性チェックに失敗した場合は
    512 点の走査に切り替える

    Args:
        states (Sequence[AgentState]): 初期状態
        beta (float): 燃料予算
        t (float): 時刻

    Returns:
        CommonGap: 最大重なり
    """
    burn = min(beta, t)
    v_lo = max(s.vel for s in states) - burn
    v_hi = min(s.vel for s in states) + burn
    if v_lo > v_hi:
        # 速度帯が交わらない
        return CommonGap(gap=v_hi - v_lo, v=0.5 * (v_lo + v_hi), pos=float("nan"))

    params = [(s.pos, s.vel) for s in states]

    def bounds(v: float) -> tuple[float, float]:
        extents = [_extent(p, u, beta, t, v) for p, u in params]
        return max(e[0] for e in extents), min(e[1] for e in extents)

    def gap(v: float) -> float:
        lo, hi = bounds(v)
        return hi - lo

    best_v = _maximize_unimodal(gap, v_lo, v_hi)
    lo, hi = bounds(best_v)
    return CommonGap(gap=float(hi - lo), v=float(best_v), pos=float(0.5 * (lo + hi)))


def first_contact(
    states: Sequence[AgentState],
    beta: float,
    lower: float | None = None,
    upper: float | None = None,
) -> tuple[float, AgentState]:
    """複数の到達可能集合が最初に共通点を持つ時刻と、その点を返す

    共通点の存在は時刻について単調（共通点から惰行すれば以後も共通）なので、
    指数的に区間を広げてから二分法で 1e-9 の相対幅まで絞る

    Args:
        states (Sequence[AgentState]): 初期状態
        beta (float): 燃料予算
        lower (float | None): 交わらないことが分かっている時刻
        upper (float | None): 交わることが分かっている時刻の候補

    Returns:
        tuple[float, AgentState]: (接触時刻, 共通点)

    Raises:
        NoConsensusWithinHorizonError: 探索上限までに交わらない場合
    """
    unique = list(dict.fromkeys(states))
    if len(unique) == 1:
        return 0.0, unique[0]

    cap = contact_horizon(unique, beta)

    def meets(t: float) -> bool:
        return common_gap(unique, beta, t).gap >= 0.0

    lo = 0.0 if lower is None else max(lower, 0.0)
    if lo > 0.0 and meets(lo):
        return lo, _contact_point(unique, beta, lo)

    hi: float | None = None
    if upper is not None and upper > lo and meets(upper):
        hi = upper
    else:
        t = max(1.0, 2.0 * lo)
        while hi is None:
            if t >= cap:
                if not meets(cap):
                    raise NoConsensusWithinHorizonError(
                        f"時刻 {cap:.6g} までに到達可能集合が交わりません"
                    )
                hi = cap
            elif meets(t):
                hi = t
            else:
                lo = t
                t *= 2.0

    iterations = 0
    while hi - lo > 1e-9 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1

    logger.debug("接触時刻 %.12g を %d 回の二分法で決定", hi, iterations)
    return hi, _contact_point(unique, beta, hi)


def contact_horizon(states: Sequence[AgentState], beta: float) -> float:
    """接触時刻探索の上限 T_cap を返す

    基本値は factor·(初期状態の直径 + 2β + 1)。速度差が 2β より小さい場合は、
    速度差の余裕に反比例する到達時間の見積りでも上限を広げる

    Args:
        states (Sequence[AgentState]): 初期状態
        beta (float): 燃料予算

    Returns:
        float: 探索上限時刻
    """
    factor = get_settings().HORIZON_FACTOR
    diameter = max(
        (a.distance(b) for i, a in enumerate(states) for b in states[i + 1 :]),
        default=0.0,
    )
    cap = factor * (diameter + 2.0 * beta + 1.0)
    vels = [s.vel for s in states]
    slack = 2.0 * beta - (max(vels) - min(vels))
    if slack > 0.0:
        cap = max(cap, factor * 2.0 * (diameter + beta * beta + 1.0) / slack)
    return cap


def _contact_point(states: Sequence[AgentState], beta: float, t: float) -> AgentState:
    """時刻 t での共通点（重なり区間の中点）を返す"""
    g = common_gap(states, beta, t)
    return AgentState(pos=g.pos, vel=g.v)


def _extent(
    pos: float, vel: float, beta: float, tf: float, v: float
) -> tuple[float, float]:
    """速度 v での位置区間 (x_lo, x_hi) を返す

    β < tf では燃料を使い切る s1/s3 境界、β >= tf では t1 = t2 の
    bang-bang 境界を使う。β = tf で両者は一致する
    """
    a = v - vel
    if beta < tf:
        # s1: t1 = (a + β)/2, t2 = (a - β + 2tf)/2 / s3 はその鏡像
        x_hi = pos + v * tf - (a + beta) ** 2 / 8.0 - (a - beta + 2.0 * tf) ** 2 / 8.0
        x_hi += tf * tf / 2.0
        x_lo = pos + v * tf + (a - beta) ** 2 / 8.0 + (a + beta - 2.0 * tf) ** 2 / 8.0
        x_lo -= tf * tf / 2.0
        return x_lo, x_hi

    # bang-bang: 上側は +1 を (a + tf)/2、下側は -1 を (tf - a)/2 だけ印加
    drift = pos + vel * tf
    up = (a + tf) / 2.0
    down = (tf - a) / 2.0
    x_hi = drift + up * tf - up * up / 2.0 - (tf - up) ** 2 / 2.0
    x_lo = drift - (down * tf - down * down / 2.0 - (tf - down) ** 2 / 2.0)
    return x_lo, x_hi


def _maximize_unimodal(f: Callable[[float], float], lo: float, hi: float) -> float:
    """区間 [lo, hi] で単峰関数 f を最大化する点を返す"""
    if hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
        return lo

    stations = np.linspace(lo, hi, _UNIMODAL_STATIONS)
    values = np.array([f(float(v)) for v in stations])
    if not _is_unimodal(values):
        logger.debug("ギャップ関数の単峰性チェックに失敗したため走査に切り替えます")
        stations = np.linspace(lo, hi, _FALLBACK_STATIONS)
        values = np.array([f(float(v)) for v in stations])
        k = int(np.argmax(values))
        lo = float(stations[max(k - 1, 0)])
        hi = float(stations[min(k + 1, len(stations) - 1)])

    result = minimize_scalar(
        lambda v: -f(v),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * (1.0 + abs(lo) + abs(hi))},
    )
    candidates = [float(result.x), lo, hi]
    return max(candidates, key=f)


def _is_unimodal(values: np.ndarray) -> bool:
    """値の列が（ノイズを除いて）増加してから減少するか判定する"""
    noise = 1e-9 * (1.0 + float(np.max(np.abs(values))))
    diffs = np.diff(values)
    descending = False
    for d in diffs:
        if d < -noise:
            descending = True
        elif d > noise and descending:
            return False
    return True


def _same_point(a: AgentState, b: AgentState) -> bool:
    """折れ線の頂点が重複しているか判定する"""
    return math.isclose(a.pos, b.pos, rel_tol=1e-12, abs_tol=1e-12) and math.isclose(
        a.vel, b.vel, rel_tol=1e-12, abs_tol=1e-12
    )
