"""二重積分器の状態伝播サービス

区分的に一定な入力のもとでの厳密な状態伝播と、
bang-off-bang 制御則の評価・サンプリングを提供する
"""

import math
from dataclasses import dataclass

import numpy as np

from fuelcon.core.numerics import time_slack


@dataclass(frozen=True)
class AgentState:
    """エージェントの状態（位置・速度）

    Attributes:
        pos (float): 位置
        vel (float): 速度
    """

    pos: float
    vel: float

    def __post_init__(self) -> None:
        """状態が有限値であることを検証し、numpy のスカラーを float にそろえる

        Raises:
            ValueError: 位置または速度が有限値でない場合
        """
        if not (math.isfinite(self.pos) and math.isfinite(self.vel)):
            raise ValueError(
                f"状態は有限値である必要があります: pos={self.pos}, vel={self.vel}"
            )
        object.__setattr__(self, "pos", float(self.pos))
        object.__setattr__(self, "vel", float(self.vel))

    def distance(self, other: "AgentState") -> float:
        """状態空間でのユークリッド距離を返す

        Args:
            other (AgentState): 比較対象の状態

        Returns:
            float: 距離
        """
        return math.hypot(self.pos - other.pos, self.vel - other.vel)


@dataclass(frozen=True)
class SwitchPlan:
    """bang-off-bang 制御則

    入力は [0, t0] で 0、[t0, t1] で γ、[t1, t2] で 0、[t2, tf] で -γ をとる
    t0 = 0 のとき通常の {γ, 0, -γ} 形になる。t0 > 0 は単一パルス
    {0, γ, 0} を表すために使う

    Attributes:
        gamma (int): 極性（+1 または -1）
        t1 (float): 第1切替時刻
        t2 (float): 第2切替時刻
        tf (float): 終端時刻
        t0 (float): 先頭の惰行区間の終了時刻（デフォルト: 0）
    """

    gamma: int
    t1: float
    t2: float
    tf: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        """切替時刻の順序を検証し、許容誤差内のずれを丸めて float にそろえる

        Raises:
            ValueError: 極性が不正、または時刻の順序が許容誤差を超えて崩れている場合
        """
        if self.gamma not in (1, -1):
            raise ValueError(f"gammaは+1または-1である必要があります: {self.gamma}")
        times = (self.t0, self.t1, self.t2, self.tf)
        if not all(math.isfinite(t) for t in times):
            raise ValueError(f"切替時刻は有限値である必要があります: {times}")

        eps = time_slack()
        if self.tf < -eps:
            raise ValueError(f"tfは0以上である必要があります: {self.tf}")
        if not (
            -eps <= self.t0
            and self.t0 <= self.t1 + eps
            and self.t1 <= self.t2 + eps
            and self.t2 <= self.tf + eps
        ):
            raise ValueError(
                "切替時刻は 0 <= t0 <= t1 <= t2 <= tf を満たす必要があります: "
                f"t0={self.t0}, t1={self.t1}, t2={self.t2}, tf={self.tf}"
            )

        # ε_t 以内のずれは順序を満たすように丸める
        tf = float(max(self.tf, 0.0))
        t0 = float(min(max(self.t0, 0.0), tf))
        t1 = float(min(max(self.t1, t0), tf))
        t2 = float(min(max(self.t2, t1), tf))
        object.__setattr__(self, "gamma", int(self.gamma))
        object.__setattr__(self, "tf", tf)
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)

    @classmethod
    def idle(cls, tf: float) -> "SwitchPlan":
        """全区間で入力 0 の制御則を返す

        Args:
            tf (float): 終端時刻

        Returns:
            SwitchPlan: 惰行のみの制御則
        """
        return cls(gamma=1, t1=0.0, t2=tf, tf=tf)

    @property
    def fuel(self) -> float:
        """消費燃料（入力の L1 ノルム）"""
        return fuel_of(self)

    @property
    def phases(self) -> list[tuple[int, float, float]]:
        """(入力レベル, 開始時刻, 終了時刻) の区間リスト"""
        return [
            (0, 0.0, self.t0),
            (self.gamma, self.t0, self.t1),
            (0, self.t1, self.t2),
            (-self.gamma, self.t2, self.tf),
        ]

    @property
    def profile(self) -> str:
        """実際に印加される入力レベルの列（例: "{+1,0,-1}"）"""
        eps = time_slack()
        levels: list[int] = []
        for level, start, end in self.phases:
            if end - start <= eps:
                continue
            if not levels or levels[-1] != level:
                levels.append(level)
        if not levels:
            levels = [0]
        return "{" + ",".join(_format_level(level) for level in levels) + "}"


@dataclass
class Trajectory:
    """サンプリングされた軌道

    Attributes:
        samples (list[tuple[float, AgentState]]): (時刻, 状態) の列
        control (list[tuple[float, int]]): (時刻, 入力レベル) の列
    """

    samples: list[tuple[float, AgentState]]
    control: list[tuple[float, int]]

    @property
    def final(self) -> AgentState:
        """終端状態"""
        return self.samples[-1][1]


def propagate(s: AgentState, u: float, dt: float) -> AgentState:
    """一定入力 u のもとで状態を dt だけ厳密に伝播する

    Args:
        s (AgentState): 初期状態
        u (float): 入力（|u| <= 1）
        dt (float): 経過時間（>= 0）

    Returns:
        AgentState: 伝播後の状態
    """
    return AgentState(pos=s.pos + s.vel * dt + u * dt * dt / 2.0, vel=s.vel + u * dt)


def coast(x0: AgentState, tf: float) -> AgentState:
    """入力 0 で tf だけ惰行したときの状態を返す

    到達可能集合は惰行点を中心に平行移動した形になる:
    A(tf, x0) = coast(x0, tf) + A(tf, 0)

    Args:
        x0 (AgentState): 初期状態
        tf (float): 経過時間

    Returns:
        AgentState: 惰行後の状態
    """
    return propagate(x0, 0.0, tf)


def state_at(x0: AgentState, p: SwitchPlan, t: float) -> AgentState:
    """制御則を時刻 t まで適用した状態を返す

    Args:
        x0 (AgentState): 初期状態
        p (SwitchPlan): 制御則
        t (float): 評価時刻（0 <= t <= tf に切り詰める）

    Returns:
        AgentState: 時刻 t での状態
    """
    horizon = min(max(t, 0.0), p.tf)
    state = x0
    for level, start, end in p.phases:
        if horizon <= start:
            break
        dt = min(horizon, end) - start
        if dt > 0.0:
            state = propagate(state, float(level), dt)
    return state


def apply_plan(x0: AgentState, p: SwitchPlan) -> AgentState:
    """制御則を終端時刻まで適用した状態を返す

    Args:
        x0 (AgentState): 初期状態
        p (SwitchPlan): 制御則

    Returns:
        AgentState: 終端状態
    """
    return state_at(x0, p, p.tf)


def fuel_of(p: SwitchPlan) -> float:
    """制御則の消費燃料を返す

    t0 = 0 のとき tf - t2 + t1 に一致する

    Args:
        p (SwitchPlan): 制御則

    Returns:
        float: 消費燃料
    """
    return (p.t1 - p.t0) + (p.tf - p.t2)


def level_at(p: SwitchPlan, t: float) -> int:
    """時刻 t での入力レベルを返す

    切替時刻では切替後のレベル（右連続）を返し、終端時刻では
    最後に印加されていたレベルを返す

    Args:
        p (SwitchPlan): 制御則
        t (float): 時刻

    Returns:
        int: 入力レベル（-1, 0, +1）
    """
    if t < p.tf:
        for level, start, end in p.phases:
            if start <= t < end:
                return level
        return 0

    # 終端: 長さが正の最後の区間
    for level, start, end in reversed(p.phases):
        if end > start:
            return level
    return 0


def sample_trajectory(x0: AgentState, p: SwitchPlan, n: int) -> Trajectory:
    """制御則に沿った軌道をサンプリングする

    [0, tf] の等間隔 n 点に切替時刻を加え、各時刻の状態と入力を評価する

    Args:
        x0 (AgentState): 初期状態
        p (SwitchPlan): 制御則
        n (int): 等間隔サンプル数（>= 2）

    Returns:
        Trajectory: サンプリング結果

    Raises:
        ValueError: n が 2 未満の場合
    """
    if n < 2:
        raise ValueError(f"nは2以上である必要があります: {n}")

    grid = np.linspace(0.0, p.tf, n)
    switches = [t for t in (p.t0, p.t1, p.t2) if 0.0 < t < p.tf]
    times = np.unique(np.concatenate([grid, np.asarray(switches, dtype=float)]))

    samples = [(float(t), state_at(x0, p, float(t))) for t in times[:-1]]
    # 終端は apply_plan と完全に一致させる
    samples.append((p.tf, apply_plan(x0, p)))
    control = [(t, level_at(p, t)) for t, _ in samples]
    return Trajectory(samples=samples, control=control)


def _format_level(level: int) -> str:
    """入力レベルを符号付き文字列にする"""
    return f"{level:+d}" if level else "0"
