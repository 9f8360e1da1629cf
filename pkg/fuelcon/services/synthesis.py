"""制御入力合成サービス

合意点 x̄ へ時刻 t̄ ちょうどに到達する bang-off-bang 制御則を各エージェントに
割り当て、シミュレーションで到達を検証する
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from fuelcon.core.config import get_settings
from fuelcon.core.exceptions import NegativeRadicandError, SynthesisFailedError
from fuelcon.core.numerics import geometric_slack, mixed_close, quadratic_roots
from fuelcon.services.attainable import (
    ReachSpec,
    contains,
    minimum_fuel_plan,
    single_pulse_plan,
)
from fuelcon.services.dynamics import AgentState, SwitchPlan, apply_plan, coast
from fuelcon.services.triplet_solver import Sequence, recover_switchings

if TYPE_CHECKING:
    from fuelcon.services.consensus import ConsensusResult, Fleet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthesizedControl:
    """1 エージェント分の合成結果

    Attributes:
        agent_id (int): エージェント ID
        plan (SwitchPlan): 制御則（plan.tf = t̄）
        beta_eff (float): 実効燃料 β′（境界上なら β）
        on_boundary (bool): 合意点が到達可能集合の境界上にあるか
    """

    agent_id: int
    plan: SwitchPlan
    beta_eff: float
    on_boundary: bool

    @property
    def sequence(self) -> str:
        """印加される入力レベルの列"""
        return self.plan.profile


@dataclass(frozen=True)
class AgentCheck:
    """1 エージェント分の検証結果

    Attributes:
        agent_id (int): エージェント ID
        final (AgentState): シミュレーションした終端状態
        terminal_error (float): 終端状態と合意点の距離
        fuel_used (float): 消費燃料
        fuel_margin (float): β - 消費燃料
        ordering_margin (float): 切替時刻の間隔の最小値
        passed (bool): 到達誤差と燃料の両方が許容範囲内か
    """

    agent_id: int
    final: AgentState
    terminal_error: float
    fuel_used: float
    fuel_margin: float
    ordering_margin: float
    passed: bool


@dataclass
class RendezvousReport:
    """全エージェントの到達検証レポート

    Attributes:
        passed (bool): 全エージェントが合格したか
        tolerance (float): 到達誤差の許容値
        checks (list[AgentCheck]): エージェントごとの結果
    """

    passed: bool
    tolerance: float
    checks: list[AgentCheck] = field(default_factory=list)

    @property
    def max_terminal_error(self) -> float:
        """終端誤差の最大値"""
        return max((c.terminal_error for c in self.checks), default=0.0)


def synthesize(
    x0: AgentState, xbar: AgentState, tbar: float, beta: float, agent_id: int = 0
) -> SynthesizedControl:
    """合意点へ t̄ ちょうどに到達する制御則を求める

    境界上の合意点には切替時刻の復元式をそのまま使い（β′ = β）、
    内部の合意点には燃料 β′ を未知数として境界の式を解き直す。
    β′ は最小のものを採用する

    Args:
        x0 (AgentState): 初期状態
        xbar (AgentState): 合意点
        tbar (float): 合意時刻
        beta (float): 燃料予算
        agent_id (int): エージェント ID

    Returns:
        SynthesizedControl: 合成結果

    Raises:
        SynthesisFailedError: 合意点が集合外、または整合する制御則が無い場合
    """
    r = ReachSpec(x0, beta, tbar)
    membership = contains(r, xbar)
    if not membership.inside:
        raise SynthesisFailedError(
            f"エージェント {agent_id} の到達可能集合に合意点が含まれません: "
            f"x0={x0}, x̄={xbar}, t̄={tbar}, margin={membership.margin:.3g}"
        )

    # 惰行だけで届く場合は根の計算をしない
    drift = coast(x0, tbar)
    if mixed_close(drift.pos, xbar.pos) and mixed_close(drift.vel, xbar.vel):
        return SynthesizedControl(
            agent_id=agent_id,
            plan=SwitchPlan.idle(tbar),
            beta_eff=0.0,
            on_boundary=beta == 0.0 or tbar == 0.0,
        )

    slack = geometric_slack(xbar.pos, xbar.vel, x0.pos, x0.vel)
    on_boundary = bool(membership.margin <= slack)

    plan: SwitchPlan | None = None
    beta_eff = beta
    if on_boundary:
        plan = _boundary_plan(r, xbar)
    if plan is None:
        found = _interior_plan(r, xbar)
        if found is not None:
            plan, beta_eff = found
            if on_boundary:
                logger.debug("エージェント %d: 境界の復元式が合わず β′ を再計算", agent_id)
    if plan is None:
        plan = single_pulse_plan(r, xbar) or minimum_fuel_plan(r, xbar)
        if plan is not None and not on_boundary:
            beta_eff = plan.fuel

    if plan is None or not _reaches(x0, plan, xbar):
        raise SynthesisFailedError(
            f"エージェント {agent_id} の制御則を構成できません: x0={x0}, x̄={xbar}, t̄={tbar}"
        )

    logger.debug(
        "エージェント %d: %s t1=%.6g t2=%.6g β′=%.6g",
        agent_id,
        plan.profile,
        plan.t1,
        plan.t2,
        beta_eff,
    )
    return SynthesizedControl(
        agent_id=agent_id,
        plan=plan,
        beta_eff=float(min(beta_eff, beta)),
        on_boundary=on_boundary,
    )


def verify_rendezvous(fleet: "Fleet", result: "ConsensusResult") -> RendezvousReport:
    """合成した制御則をシミュレーションし、全員が合意点に届くか検証する

    Args:
        fleet (Fleet): エージェント群
        result (ConsensusResult): 求解結果

    Returns:
        RendezvousReport: 検証レポート（実行不能な結果なら不合格）
    """
    settings = get_settings()
    xbar = result.x_star
    tbar = result.t_star
    if xbar is None or tbar is None or not result.feasible:
        logger.warning("実行不能な結果は検証できません")
        return RendezvousReport(passed=False, tolerance=settings.VERIFY_ATOL)

    tolerance = settings.VERIFY_ATOL + settings.VERIFY_RTOL * max(
        abs(xbar.pos), abs(xbar.vel)
    )
    if len(result.controls) != len(fleet.agents):
        logger.warning("検証対象の制御則がエージェント数と一致しません")
        return RendezvousReport(passed=False, tolerance=tolerance)

    fuel_cap = fleet.beta + 1e-6
    checks = []
    for x0, control in zip(fleet.agents, result.controls):
        plan = control.plan
        final = apply_plan(x0, plan)
        error = final.distance(xbar)
        fuel = plan.fuel
        ordering = min(plan.t0, plan.t1 - plan.t0, plan.t2 - plan.t1, plan.tf - plan.t2)
        ok = (
            error <= tolerance
            and fuel <= fuel_cap
            and math.isclose(plan.tf, tbar, rel_tol=1e-12, abs_tol=1e-12)
        )
        checks.append(
            AgentCheck(
                agent_id=control.agent_id,
                final=final,
                terminal_error=error,
                fuel_used=fuel,
                fuel_margin=fleet.beta - fuel,
                ordering_margin=ordering,
                passed=ok,
            )
        )

    report = RendezvousReport(
        passed=all(c.passed for c in checks), tolerance=tolerance, checks=checks
    )
    if not report.passed:
        failed = [c.agent_id for c in checks if not c.passed]
        logger.warning("到達検証に失敗したエージェント: %s", failed)
    return report


def _boundary_plan(r: ReachSpec, xbar: AgentState) -> SwitchPlan | None:
    """境界上の合意点に s1/s3 の復元式で制御則を作る（合わなければ None）"""
    for seq in (Sequence.S1, Sequence.S3):
        try:
            t1, t2 = recover_switchings(r.x0, xbar, r.tf, seq, r.beta)
        except NegativeRadicandError:
            continue
        plan = _ordered_plan(seq.sign, t1, t2, r.tf)
        if plan is not None and _reaches(r.x0, plan, xbar, strict=True):
            return plan
    return None


def _interior_plan(r: ReachSpec, xbar: AgentState) -> tuple[SwitchPlan, float] | None:
    """β′ を未知数として境界の式を解き、最小の β′ の制御則を返す"""
    tf = r.tf
    a = xbar.vel - r.x0.vel
    d = xbar.pos - coast(r.x0, tf).pos
    upper = min(r.beta, tf)
    tol = 1e-9 * (1.0 + tf + r.beta)

    best: tuple[SwitchPlan, float] | None = None
    for seq in (Sequence.S1, Sequence.S3):
        sign = seq.sign
        # s1: b² - 2tf·b + (a² - 2a·tf + 4d) = 0、s3 は a, d の符号を反転
        const = a * a - sign * 2.0 * a * tf + sign * 4.0 * d
        for b in quadratic_roots(1.0, -2.0 * tf, const):
            if b < abs(a) - tol or b > upper + tol:
                continue
            b = min(max(b, abs(a)), upper)
            if sign > 0:
                t1, t2 = (a + b) / 2.0, tf - (b - a) / 2.0
            else:
                t1, t2 = (b - a) / 2.0, tf - (b + a) / 2.0
            plan = _ordered_plan(sign, t1, t2, tf)
            if plan is None:
                continue
            if best is None or b < best[1]:
                best = (plan, b)
    return best


def _ordered_plan(gamma: int, t1: float, t2: float, tf: float) -> SwitchPlan | None:
    """順序を満たせば制御則を作る"""
    try:
        return SwitchPlan(gamma=gamma, t1=t1, t2=t2, tf=tf)
    except ValueError:
        return None


def _reaches(
    x0: AgentState, plan: SwitchPlan, xbar: AgentState, strict: bool = False
) -> bool:
    """制御則の終端が合意点に一致するか判定する"""
    final = apply_plan(x0, plan)
    if strict:
        scale = 1.0 + abs(xbar.pos) + abs(xbar.vel)
        return final.distance(xbar) <= 1e-9 * scale
    settings = get_settings()
    return mixed_close(
        final.pos, xbar.pos, settings.VERIFY_ATOL, settings.VERIFY_RTOL
    ) and mixed_close(final.vel, xbar.vel, settings.VERIFY_ATOL, settings.VERIFY_RTOL)
