"""三つ組ソルバーサービス

3 エージェントの最小コンセンサス時刻と合意点を求める
ペアごとの接触時刻、包含による場合分け、境界交差シナリオの
多項式消去、および数値探索による代替経路からなる
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from numpy.polynomial import Polynomial

from fuelcon.core.exceptions import (
    DegenerateScenarioError,
    NegativeRadicandError,
    NoConsensusWithinHorizonError,
    NoScenarioFeasibleError,
    PairInfeasibleError,
    TripletInfeasibleError,
)
from fuelcon.core.numerics import real_polynomial_roots
from fuelcon.services.attainable import (
    ReachSpec,
    Regime,
    common_gap,
    contains,
    feasible,
    first_contact,
    minimum_fuel_plan,
)
from fuelcon.services.dynamics import AgentState, SwitchPlan

logger = logging.getLogger(__name__)

# 多項式の変数 t_f
_T = Polynomial([0.0, 1.0])


class Sequence(str, Enum):
    """境界上の入力符号パターン"""

    S1 = "s1"  # {+1, 0, -1}
    S2 = "s2"  # {0, +1}
    S3 = "s3"  # {-1, 0, +1}
    S4 = "s4"  # {0, -1}

    @property
    def sign(self) -> int:
        """上側の境界（s1, s2）なら +1、下側（s3, s4）なら -1"""
        return 1 if self in (Sequence.S1, Sequence.S2) else -1

    @property
    def is_cap(self) -> bool:
        """速度一定の平坦部（s2, s4）か"""
        return self in (Sequence.S2, Sequence.S4)


@dataclass(frozen=True)
class Scenario:
    """三つ組の各エージェントに割り当てた境界パターン

    Attributes:
        id (int): シナリオ番号（1〜20 は基本表、21〜30 は並べ替えの補完）
        seqs (tuple[Sequence, Sequence, Sequence]): エージェント (i, j, k) のパターン
    """

    id: int
    seqs: tuple[Sequence, Sequence, Sequence]

    def __post_init__(self) -> None:
        """全員が同じ弧に乗る組合せを拒否する

        Raises:
            ValueError: 全員が s1、または全員が s3 の場合
        """
        if len(set(self.seqs)) == 1 and not self.seqs[0].is_cap:
            raise ValueError(f"全エージェントが同じパターンのシナリオは除外されます: {self}")
        if sum(seq.is_cap for seq in self.seqs) > 1:
            raise ValueError(f"平坦部は1エージェントまでです: {self}")

    @property
    def label(self) -> str:
        """"(s1,s3,s3)" 形式の表記"""
        return "(" + ",".join(seq.value for seq in self.seqs) + ")"


def _scenario(sid: int, i: str, j: str, k: str) -> Scenario:
    return Scenario(id=sid, seqs=(Sequence(i), Sequence(j), Sequence(k)))


# 基本の 20 シナリオ
SCENARIOS: tuple[Scenario, ...] = (
    _scenario(1, "s1", "s3", "s1"),
    _scenario(2, "s1", "s1", "s3"),
    _scenario(3, "s1", "s3", "s3"),
    _scenario(4, "s3", "s1", "s1"),
    _scenario(5, "s3", "s3", "s1"),
    _scenario(6, "s3", "s1", "s3"),
    _scenario(7, "s3", "s2", "s3"),
    _scenario(8, "s3", "s2", "s1"),
    _scenario(9, "s3", "s1", "s2"),
    _scenario(10, "s3", "s1", "s4"),
    _scenario(11, "s3", "s4", "s1"),
    _scenario(12, "s2", "s3", "s1"),
    _scenario(13, "s2", "s1", "s3"),
    _scenario(14, "s2", "s1", "s1"),
    _scenario(15, "s1", "s3", "s2"),
    _scenario(16, "s1", "s3", "s4"),
    _scenario(17, "s1", "s2", "s3"),
    _scenario(18, "s1", "s4", "s3"),
    _scenario(19, "s4", "s3", "s1"),
    _scenario(20, "s4", "s1", "s3"),
)

# 基本表に無い並べ替え。これで探索がエージェントの順序に依存しなくなる
EXTENDED_SCENARIOS: tuple[Scenario, ...] = SCENARIOS + (
    _scenario(21, "s2", "s3", "s3"),
    _scenario(22, "s4", "s1", "s1"),
    _scenario(23, "s4", "s3", "s3"),
    _scenario(24, "s1", "s2", "s1"),
    _scenario(25, "s1", "s4", "s1"),
    _scenario(26, "s3", "s4", "s3"),
    _scenario(27, "s1", "s1", "s2"),
    _scenario(28, "s3", "s3", "s2"),
    _scenario(29, "s1", "s1", "s4"),
    _scenario(30, "s3", "s3", "s4"),
)


@dataclass(frozen=True)
class TripletSolution:
    """三つ組の最小コンセンサス解

    Attributes:
        t_star (float): 最小コンセンサス時刻
        x_star (AgentState): 合意点
        scenario (Scenario | None): 合意点を与えたシナリオ（場合1・数値解では None）
        plans (tuple[SwitchPlan, ...]): 各エージェントの制御則
        case (int): 1 = ペアの接触点を第3集合が含む / 2 = 3 境界の交点
        method (str): "pair" / "scenario" / "numeric"
    """

    t_star: float
    x_star: AgentState
    scenario: Scenario | None
    plans: tuple[SwitchPlan, ...]
    case: int
    method: str


def pair_min_time(
    a: AgentState, b: AgentState, beta: float
) -> tuple[float, AgentState]:
    """2 つの到達可能集合が最初に交わる時刻と交点を返す

    Args:
        a (AgentState): エージェント a の初期状態
        b (AgentState): エージェント b の初期状態
        beta (float): 燃料予算

    Returns:
        tuple[float, AgentState]: (接触時刻, 交点)

    Raises:
        PairInfeasibleError: |a.vel - b.vel| > 2β の場合
    """
    if abs(a.vel - b.vel) > 2.0 * beta:
        raise PairInfeasibleError(
            f"速度差が 2β を超えています: |{a.vel} - {b.vel}| > 2·{beta}"
        )
    # 順序に依らず同じ結果（とキャッシュ）を使う
    first, second = sorted((a, b), key=lambda s: (s.pos, s.vel))
    return _pair_contact(first, second, beta)


def scenario_solve(
    sc: Scenario,
    xi: AgentState,
    xj: AgentState,
    xk: AgentState,
    beta: float,
    min_time: float = 0.0,
) -> list[tuple[float, AgentState]]:
    """シナリオの境界方程式を連立して合意点の候補を求める

    平坦部のエージェントがいれば速度を固定し、残り 2 本の弧の式の差を
    t_f の多項式にする。いなければ同じ種類の弧 2 本の差から速度を t_f の
    一次式で表し、残りの弧との差に代入する。燃料を使い切る境界
    （t_f >= β）と bang-bang 境界（t_f <= β）の両方で解く

    Args:
        sc (Scenario): シナリオ
        xi (AgentState): エージェント i の初期状態
        xj (AgentState): エージェント j の初期状態
        xk (AgentState): エージェント k の初期状態
        beta (float): 燃料予算
        min_time (float): これより前の候補は不要（β 未満なら bang-bang 側も解く）

    Returns:
        list[tuple[float, AgentState]]: t_f > 0 の候補（t_f 昇順）

    Raises:
        DegenerateScenarioError: 消去の分母が消え t_f が定まらない場合
    """
    states = (xi, xj, xk)
    regimes = [Regime.FUEL_BOUND]
    if min_time <= beta:
        regimes.append(Regime.TIME_BOUND)

    candidates: list[tuple[float, AgentState]] = []
    for regime in regimes:
        burn = Polynomial([beta]) if regime is Regime.FUEL_BOUND else _T
        v_poly, diff = _eliminate(sc, states, burn)
        scale = max(1.0, beta, *(abs(s.pos) + abs(s.vel) for s in states))
        try:
            roots = real_polynomial_roots(diff, t_scale=scale)
        except ValueError as e:
            raise DegenerateScenarioError(
                f"シナリオ {sc.id} {sc.label} の方程式が恒等的に成り立ちます"
            ) from e

        tol = 1e-9 * (1.0 + beta)
        for t in roots:
            if t <= 0.0:
                continue
            if regime is Regime.FUEL_BOUND and t < beta - tol:
                continue
            if regime is Regime.TIME_BOUND and t > beta + tol:
                continue
            v = float(v_poly(t))
            x = _arc_position(sc, states, burn, v, t)
            candidates.append((t, AgentState(pos=x, vel=v)))

    candidates.sort(key=lambda c: c[0])
    return candidates


def boundary_residuals(
    sc: Scenario, states: tuple[AgentState, ...], beta: float, t: float, x: AgentState
) -> list[float]:
    """シナリオの各境界方程式の残差を返す

    弧では位置の残差、平坦部では速度の残差を返す

    Args:
        sc (Scenario): シナリオ
        states (tuple[AgentState, ...]): 三つ組の初期状態
        beta (float): 燃料予算
        t (float): 時刻
        x (AgentState): 合意点の候補

    Returns:
        list[float]: 残差（エージェント順）
    """
    burn = min(beta, t)
    residuals = []
    for s, seq in zip(states, sc.seqs):
        if seq.is_cap:
            residuals.append(x.vel - (s.vel + seq.sign * burn))
            continue
        a = x.vel - s.vel
        arc = s.pos + t * (x.vel + s.vel + seq.sign * burn) / 2.0
        arc -= seq.sign * (a * a + burn * burn) / 4.0
        residuals.append(x.pos - arc)
    return residuals


def recover_switchings(
    x0: AgentState, xbar: AgentState, tf: float, seq: Sequence, beta: float
) -> tuple[float, float]:
    """境界上の合意点から切替時刻 (t1, t2) を復元する

    境界上で消費される燃料は min(β, tf) として扱う

    Args:
        x0 (AgentState): 初期状態
        xbar (AgentState): 合意点
        tf (float): 終端時刻
        seq (Sequence): 境界パターン
        beta (float): 燃料予算

    Returns:
        tuple[float, float]: (t1, t2)。順序の検査はしない

    Raises:
        NegativeRadicandError: s2/s4 で根号内が負の場合
    """
    burn = min(beta, tf)
    if seq is Sequence.S1:
        a = xbar.vel - x0.vel
        return (a + burn) / 2.0, tf - (burn - a) / 2.0
    if seq is Sequence.S3:
        a = xbar.vel - x0.vel
        return (burn - a) / 2.0, tf - (burn + a) / 2.0

    if seq is Sequence.S2:
        radicand = 2.0 * (xbar.pos - x0.pos - tf * x0.vel)
    else:
        radicand = 2.0 * (x0.pos - xbar.pos + tf * x0.vel)
    eps = 1e-9 * (1.0 + abs(xbar.pos) + abs(x0.pos) + tf * abs(x0.vel))
    if radicand < -eps:
        raise NegativeRadicandError(
            f"{seq.value} の切替時刻で根号内が負です: {radicand}"
        )
    return 0.0, tf - math.sqrt(max(radicand, 0.0))


def solve_triplet(
    xi: AgentState, xj: AgentState, xk: AgentState, beta: float
) -> TripletSolution:
    """三つ組の最小コンセンサス時刻と合意点を求める

    ペアの接触時刻の最大値を与えるペアの接触点を残りの集合が含めば
    それが解（場合1）。そうでなければ全シナリオの候補から、全員の
    切替時刻が整合し集合に含まれる最小の t_f を選ぶ（場合2）

    Args:
        xi (AgentState): エージェント i の初期状態
        xj (AgentState): エージェント j の初期状態
        xk (AgentState): エージェント k の初期状態
        beta (float): 燃料予算

    Returns:
        TripletSolution: 三つ組の解

    Raises:
        TripletInfeasibleError: 速度差が 2β を超える場合
        NoScenarioFeasibleError: 数値探索でも解が得られない場合
    """
    states = (xi, xj, xk)
    if not feasible(states, beta):
        raise TripletInfeasibleError(
            f"三つ組の速度差が 2β を超えています: {[s.vel for s in states]}, β={beta}"
        )

    # 重複があればペア（または単独）の問題になる
    unique = list(dict.fromkeys(states))
    if len(unique) < 3:
        t, x = first_contact(unique, beta)
        return _finish(states, beta, t, x, scenario=None, case=1, method="pair")

    pairs = ((0, 1), (1, 2), (0, 2))
    contacts = [pair_min_time(states[p], states[q], beta) for p, q in pairs]
    best = max(range(3), key=lambda n: contacts[n][0])
    t_pq, x_pq = contacts[best]
    third = 3 - sum(pairs[best])

    if contains(ReachSpec(states[third], beta, t_pq), x_pq).inside:
        logger.debug("場合1: ペア %s の接触点を第3エージェントが含む", pairs[best])
        return _finish(states, beta, t_pq, x_pq, scenario=None, case=1, method="pair")

    survivor = _best_scenario(states, beta, t_pq)
    upper: float | None = None
    if survivor is not None:
        t_c, sc, x_c = survivor
        if not _met_before(states, beta, t_c, t_pq):
            return _finish(
                states, beta, t_c, x_c, scenario=sc, case=2, method="scenario"
            )
        logger.warning("シナリオ %d の候補 t=%.12g は最初の接触ではありません", sc.id, t_c)
        upper = t_c

    logger.warning("三つ組 %s は数値探索で求めます", states)
    try:
        t, x = first_contact(states, beta, lower=t_pq, upper=upper)
    except NoConsensusWithinHorizonError as e:
        raise NoScenarioFeasibleError(f"三つ組の合意点が見つかりません: {states}") from e
    if not all(contains(ReachSpec(s, beta, t), x).inside for s in states):
        raise NoScenarioFeasibleError(f"数値探索の残差が許容誤差を超えました: {states}")
    return _finish(states, beta, t, x, scenario=None, case=2, method="numeric")


@lru_cache(maxsize=8192)
def _pair_contact(
    a: AgentState, b: AgentState, beta: float
) -> tuple[float, AgentState]:
    """ペアの接触時刻（キャッシュ付き）"""
    return first_contact((a, b), beta)


def _best_scenario(
    states: tuple[AgentState, ...], beta: float, t_lower: float
) -> tuple[float, Scenario, AgentState] | None:
    """整合する候補のうち t_f が最小のもの（同値なら番号の小さいシナリオ）を返す"""
    best: tuple[float, Scenario, AgentState] | None = None
    tol = 1e-9 * (1.0 + t_lower)
    for sc in EXTENDED_SCENARIOS:
        try:
            candidates = scenario_solve(sc, *states, beta, min_time=t_lower)
        except DegenerateScenarioError:
            logger.warning(
                "シナリオ %d %s は退化しているため除外", sc.id, sc.label, exc_info=True
            )
            continue

        for t, x in candidates:
            if t < t_lower - tol:
                continue
            if best is not None and t >= best[0]:
                break
            if _admissible(sc, states, beta, t, x):
                best = (t, sc, x)
                break

    if best is None:
        logger.debug("整合するシナリオ候補がありません")
    else:
        logger.debug("シナリオ %d %s を採用: t=%.12g", best[1].id, best[1].label, best[0])
    return best


def _admissible(
    sc: Scenario, states: tuple[AgentState, ...], beta: float, t: float, x: AgentState
) -> bool:
    """候補の切替時刻が全員で整合し、合意点が全員の集合に含まれるか判定する"""
    tol = 1e-7 * (1.0 + t)
    for s, seq in zip(states, sc.seqs):
        try:
            t1, t2 = recover_switchings(s, x, t, seq, beta)
        except NegativeRadicandError:
            return False
        if not (-tol <= t1 <= t2 + tol and t2 <= t + tol):
            return False

        r = ReachSpec(s, beta, t)
        membership = contains(r, x)
        if not membership.inside or membership.witness is None:
            return False
        if membership.witness.fuel > beta + tol:
            return False
    return True


def _met_before(
    states: tuple[AgentState, ...], beta: float, t_c: float, t_lower: float
) -> bool:
    """候補時刻の少し前に既に共通点があるか判定する"""
    t_before = t_c - 1e-6 * (1.0 + t_c)
    if t_before <= t_lower:
        return False
    return common_gap(states, beta, t_before).gap >= 0.0


def _finish(
    states: tuple[AgentState, ...],
    beta: float,
    t: float,
    x: AgentState,
    scenario: Scenario | None,
    case: int,
    method: str,
) -> TripletSolution:
    """各エージェントの制御則を付けて解を組み立てる"""
    plans = []
    for s in states:
        plan = minimum_fuel_plan(ReachSpec(s, beta, t), x)
        if plan is None:
            raise NoScenarioFeasibleError(f"合意点 {x} へ到達する制御則がありません: {s}")
        plans.append(plan)
    return TripletSolution(
        t_star=float(t),
        x_star=x,
        scenario=scenario,
        plans=tuple(plans),
        case=case,
        method=method,
    )


def _arc_terms(
    x0: AgentState, sign: int, burn: Polynomial
) -> tuple[float, Polynomial, Polynomial]:
    """弧の式 x = q·v² + l·v + c の係数（l, c は t_f の多項式）を返す"""
    quad = -sign / 4.0
    lin = _T / 2.0 + sign * x0.vel / 2.0
    const = x0.pos + _T * (x0.vel + sign * burn) / 2.0
    const = const - sign * (x0.vel**2 + burn**2) / 4.0
    return quad, lin, const


def _arc_value(
    terms: tuple[float, Polynomial, Polynomial], v: Polynomial
) -> Polynomial:
    """速度を t_f の多項式で与えたときの弧上の位置"""
    quad, lin, const = terms
    return quad * v**2 + lin * v + const


def _eliminate(
    sc: Scenario, states: tuple[AgentState, ...], burn: Polynomial
) -> tuple[Polynomial, Polynomial]:
    """速度と位置を消去し、(速度の t_f 多項式, t_f の方程式) を返す"""
    arcs = [(s, seq) for s, seq in zip(states, sc.seqs) if not seq.is_cap]
    caps = [(s, seq) for s, seq in zip(states, sc.seqs) if seq.is_cap]

    if caps:
        cap_state, cap_seq = caps[0]
        v_poly = cap_state.vel + cap_seq.sign * burn
        (si, qi), (sk, qk) = arcs
        diff = _arc_value(_arc_terms(si, qi.sign, burn), v_poly) - _arc_value(
            _arc_terms(sk, qk.sign, burn), v_poly
        )
    else:
        # 同じ種類の弧の組 (p, q) と残り r
        same = [
            (a, b)
            for a in range(3)
            for b in range(a + 1, 3)
            if sc.seqs[a] is sc.seqs[b]
        ]
        p, q = same[0]
        r = 3 - p - q
        sign = sc.seqs[p].sign
        denom = sign * (states[p].vel - states[q].vel) / 2.0
        if abs(denom) <= 1e-12 * (1.0 + abs(states[p].vel) + abs(states[q].vel)):
            raise DegenerateScenarioError(
                f"シナリオ {sc.id} {sc.label}: 同じ弧のエージェントの速度が等しい"
            )
        terms_p = _arc_terms(states[p], sign, burn)
        terms_q = _arc_terms(states[q], sign, burn)
        v_poly = -(terms_p[2] - terms_q[2]) / denom
        diff = _arc_value(terms_p, v_poly) - _arc_value(
            _arc_terms(states[r], sc.seqs[r].sign, burn), v_poly
        )

    if diff.trim(tol=1e-12 * float(max(abs(c) for c in diff.coef))).degree() == 0:
        raise DegenerateScenarioError(
            f"シナリオ {sc.id} {sc.label}: 消去後の方程式が t_f を含みません"
        )
    return v_poly, diff


def _arc_position(
    sc: Scenario, states: tuple[AgentState, ...], burn: Polynomial, v: float, t: float
) -> float:
    """弧に乗るエージェントの式から合意点の位置を求める（平均をとる）"""
    burn_t = float(burn(t))
    values = []
    for s, seq in zip(states, sc.seqs):
        if seq.is_cap:
            continue
        a = v - s.vel
        arc = s.pos + t * (v + s.vel + seq.sign * burn_t) / 2.0
        values.append(arc - seq.sign * (a * a + burn_t * burn_t) / 4.0)
    return sum(values) / len(values)
