"""N エージェントのコンセンサスサービス

全三つ組の最小コンセンサス時刻の最大値として N エージェントの最小時刻を求め、
合意点へ向かう制御則を全員に割り当てる。凸包による枝刈りと、
三つ組をワーカーへ振り分ける分散実行を提供する
"""

import itertools
import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from tqdm import tqdm

from fuelcon.core.exceptions import NoCommonPointError
from fuelcon.services.attainable import (
    ReachSpec,
    VelocityBand,
    consensus_band,
    contains,
    feasible,
)
from fuelcon.services.dynamics import AgentState, SwitchPlan
from fuelcon.services.synthesis import SynthesizedControl, synthesize
from fuelcon.services.triplet_solver import (
    Scenario,
    TripletSolution,
    pair_min_time,
    solve_triplet,
)

logger = logging.getLogger(__name__)

Triplet = tuple[int, int, int]


@dataclass
class Fleet:
    """エージェント群と燃料予算

    Attributes:
        agents (list[AgentState]): 初期状態（順序付き）
        beta (float): 燃料予算
        ids (list[int]): エージェント ID（省略時は 1..N）
    """

    agents: list[AgentState]
    beta: float
    ids: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        """エージェント数・燃料・ID を検証する

        Raises:
            ValueError: エージェントが空、β が負、または ID が不正な場合
        """
        if not self.agents:
            raise ValueError("エージェントが1つ以上必要です")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValueError(f"betaは0以上の有限値である必要があります: {self.beta}")
        if not self.ids:
            self.ids = list(range(1, len(self.agents) + 1))
        if len(self.ids) != len(self.agents):
            raise ValueError(
                f"IDの数がエージェント数と一致しません: {len(self.ids)} != {len(self.agents)}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValueError(f"IDが重複しています: {self.ids}")

    @property
    def size(self) -> int:
        """エージェント数"""
        return len(self.agents)


@dataclass
class ConsensusResult:
    """N エージェントの求解結果

    Attributes:
        feasible (bool): コンセンサス可能か
        band (VelocityBand): コンセンサス速度帯
        t_star (float | None): 最小コンセンサス時刻
        x_star (AgentState | None): 合意点
        critical_triplet (tuple[int, ...]): 時刻を決めた三つ組の ID（N < 3 ではペア・単独）
        controls (list[SynthesizedControl]): エージェント順の制御則
        ids (list[int]): エージェント ID
        triplet_count (int): 解いた三つ組の数
        scenario (Scenario | None): 臨界三つ組のシナリオ
        method (str): 臨界三つ組の解法
    """

    feasible: bool
    band: VelocityBand
    t_star: float | None = None
    x_star: AgentState | None = None
    critical_triplet: tuple[int, ...] = ()
    controls: list[SynthesizedControl] = field(default_factory=list)
    ids: list[int] = field(default_factory=list)
    triplet_count: int = 0
    scenario: Scenario | None = None
    method: str = ""

    @property
    def per_agent(self) -> list[tuple[SwitchPlan, float]]:
        """(制御則, 実効燃料 β′) のリスト"""
        return [(c.plan, c.beta_eff) for c in self.controls]


def solve_fleet(
    f: Fleet, hull_prune: bool = False, progress: bool = False
) -> ConsensusResult:
    """N エージェントの最小コンセンサス時刻・合意点・制御則を求める

    Args:
        f (Fleet): エージェント群
        hull_prune (bool): 凸包の境界上のエージェントだけで三つ組を作るか
        progress (bool): 三つ組の進捗バーを標準エラー出力に表示するか

    Returns:
        ConsensusResult: 求解結果（速度条件を満たさなければ feasible=False）

    Raises:
        NoCommonPointError: 臨界三つ組の合意点を他のエージェントが含まない場合
        SynthesisFailedError: 制御則を構成できないエージェントがいる場合
    """
    band = consensus_band(f.agents, f.beta)
    if not feasible(f.agents, f.beta):
        logger.info("速度差が 2β を超えるためコンセンサス不能: 速度帯 %s", band)
        return ConsensusResult(feasible=False, band=band, ids=list(f.ids))

    candidates = _candidates(f, hull_prune)
    if len(candidates) < 3:
        return _solve_small(f, candidates, band)

    triplets = list(itertools.combinations(candidates, 3))
    iterator: Iterable[Triplet] = triplets
    if progress:
        iterator = tqdm(triplets, desc="triplets", unit="triplet", leave=False)

    states = tuple(f.agents)
    best = _reduce(_solve_one(states, f.beta, t) for t in iterator)
    return _finalize(f, band, best, len(triplets))


def solve_fleet_distributed(
    f: Fleet, workers: int, hull_prune: bool = False
) -> ConsensusResult:
    """三つ組をワーカーに振り分けて並列に解く

    各ワーカーは担当分の最大を返し、同じ順序付けで最大をとり直すので
    結果はワーカー数に依らず solve_fleet と一致する

    Args:
        f (Fleet): エージェント群
        workers (int): ワーカー数（>= 1）
        hull_prune (bool): 凸包の境界上のエージェントだけで三つ組を作るか

    Returns:
        ConsensusResult: 求解結果

    Raises:
        ValueError: workers が 1 未満の場合
    """
    if workers < 1:
        raise ValueError(f"workersは1以上である必要があります: {workers}")

    band = consensus_band(f.agents, f.beta)
    if not feasible(f.agents, f.beta):
        return ConsensusResult(feasible=False, band=band, ids=list(f.ids))

    candidates = _candidates(f, hull_prune)
    if len(candidates) < 3:
        return _solve_small(f, candidates, band)

    m = len(candidates)
    workers = min(workers, m)
    states = tuple(f.agents)
    jobs = []
    for worker in range(1, workers + 1):
        local = partition_triplets(m, worker, workers)
        # 候補内の番号 (1 始まり) を元のインデックスに戻す
        mapped = [tuple(candidates[i - 1] for i in t) for t in local]
        jobs.append((states, f.beta, mapped))

    if workers == 1:
        partials = [_solve_partition(job) for job in jobs]
    else:
        with multiprocessing.Pool(workers) as pool:
            partials = pool.map(_solve_partition, jobs)

    best = _reduce(p for p in partials if p is not None)
    count = math.comb(m, 3)
    logger.debug("%d ワーカーで %d 個の三つ組を解きました", workers, count)
    return _finalize(f, band, best, count)


def hull_filter(agents: Sequence[AgentState]) -> list[int]:
    """初期状態の凸包の境界上にあるエージェントの位置を返す

    単調連鎖法で凸包を作り、辺上の共線点も境界として残す

    Args:
        agents (Sequence[AgentState]): 初期状態

    Returns:
        list[int]: 境界上のエージェントのインデックス（昇順）

    Raises:
        ValueError: エージェントが空の場合
    """
    if not agents:
        raise ValueError("エージェントが1つ以上必要です")

    points = sorted({(a.pos, a.vel) for a in agents})
    if len(points) <= 2:
        return list(range(len(agents)))

    def chain(pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
        out: list[tuple[float, float]] = []
        for p in pts:
            # 共線点を残すため、右折のときだけ取り除く
            while len(out) >= 2 and _cross(out[-2], out[-1], p) < 0.0:
                out.pop()
            out.append(p)
        return out

    lower = chain(points)
    upper = chain(list(reversed(points)))
    boundary = set(lower) | set(upper)

    # 全点が一直線上なら全員が境界
    if all(_cross(points[0], points[-1], p) == 0.0 for p in points):
        boundary = set(points)

    return [i for i, a in enumerate(agents) if (a.pos, a.vel) in boundary]


def partition_triplets(n: int, agent_id: int, workers: int) -> list[Triplet]:
    """辞書順の三つ組をラウンドロビンで割り当てたうち、agent_id の担当分を返す

    Args:
        n (int): エージェント数
        agent_id (int): ワーカー番号（1 始まり）
        workers (int): ワーカー数

    Returns:
        list[Triplet]: 担当する三つ組（ID は 1..n）

    Raises:
        ValueError: 1 <= agent_id <= workers <= n を満たさない場合
    """
    if not 1 <= agent_id <= workers <= n:
        raise ValueError(
            f"1 <= agent_id <= workers <= n を満たす必要があります: "
            f"agent_id={agent_id}, workers={workers}, n={n}"
        )
    triplets = itertools.combinations(range(1, n + 1), 3)
    return [
        (i, j, k)
        for q, (i, j, k) in enumerate(triplets)
        if q % workers == agent_id - 1
    ]


def _candidates(f: Fleet, hull_prune: bool) -> list[int]:
    """重複を除き、必要なら凸包で枝刈りした候補インデックスを返す"""
    seen: dict[AgentState, int] = {}
    for i, s in enumerate(f.agents):
        seen.setdefault(s, i)
    unique = sorted(seen.values())
    if len(unique) < len(f.agents):
        logger.debug("重複する初期状態を %d 個除外", len(f.agents) - len(unique))

    if hull_prune and len(unique) > 3:
        on_hull = hull_filter([f.agents[i] for i in unique])
        pruned = [unique[i] for i in on_hull]
        logger.debug("凸包で %d -> %d エージェントに枝刈り", len(unique), len(pruned))
        return pruned
    return unique


def _solve_one(
    states: tuple[AgentState, ...], beta: float, triplet: tuple[int, ...]
) -> tuple[tuple[int, ...], TripletSolution]:
    i, j, k = triplet
    return triplet, solve_triplet(states[i], states[j], states[k], beta)


def _solve_partition(
    job: tuple[tuple[AgentState, ...], float, list[tuple[int, ...]]]
) -> tuple[tuple[int, ...], TripletSolution] | None:
    """ワーカー 1 つ分の三つ組を解き、担当分の最大を返す"""
    states, beta, triplets = job
    if not triplets:
        return None
    return _reduce(_solve_one(states, beta, t) for t in triplets)


def _reduce(
    solved: Iterable[tuple[tuple[int, ...], TripletSolution]]
) -> tuple[tuple[int, ...], TripletSolution]:
    """時刻最大の三つ組を返す（同時刻なら辞書順で小さい三つ組）"""
    best: tuple[tuple[int, ...], TripletSolution] | None = None
    for triplet, solution in solved:
        if best is None or (-solution.t_star, triplet) < (-best[1].t_star, best[0]):
            best = (triplet, solution)
    if best is None:
        raise ValueError("三つ組がありません")
    return best


def _solve_small(
    f: Fleet, candidates: list[int], band: VelocityBand
) -> ConsensusResult:
    """異なる初期状態が 1 つか 2 つの場合"""
    if len(candidates) == 1:
        t, x = 0.0, f.agents[candidates[0]]
        method = "single"
    else:
        t, x = pair_min_time(f.agents[candidates[0]], f.agents[candidates[1]], f.beta)
        method = "pair"
    critical = tuple(f.ids[i] for i in candidates)
    return _assemble(f, band, t, x, critical, 0, None, method)


def _finalize(
    f: Fleet,
    band: VelocityBand,
    best: tuple[tuple[int, ...], TripletSolution],
    count: int,
) -> ConsensusResult:
    triplet, solution = best
    critical = tuple(f.ids[i] for i in triplet)
    logger.info(
        "臨界三つ組 %s: t̄=%.12g x̄=(%.12g, %.12g) [%s]",
        critical,
        solution.t_star,
        solution.x_star.pos,
        solution.x_star.vel,
        solution.method,
    )
    return _assemble(
        f,
        band,
        solution.t_star,
        solution.x_star,
        critical,
        count,
        solution.scenario,
        solution.method,
    )


def _assemble(
    f: Fleet,
    band: VelocityBand,
    t: float,
    x: AgentState,
    critical: tuple[int, ...],
    count: int,
    scenario: Scenario | None,
    method: str,
) -> ConsensusResult:
    """全員の包含を確かめ、制御則を合成して結果を組み立てる"""
    outside = [
        agent_id
        for agent_id, s in zip(f.ids, f.agents)
        if not contains(ReachSpec(s, f.beta, t), x).inside
    ]
    if outside:
        raise NoCommonPointError(
            f"合意点 ({x.pos:.12g}, {x.vel:.12g}) を時刻 {t:.12g} に含まない"
            f"エージェントがあります: {outside}"
        )

    controls = [
        synthesize(s, x, t, f.beta, agent_id=agent_id)
        for agent_id, s in zip(f.ids, f.agents)
    ]
    return ConsensusResult(
        feasible=True,
        band=band,
        t_star=float(t),
        x_star=x,
        critical_triplet=critical,
        controls=controls,
        ids=list(f.ids),
        triplet_count=count,
        scenario=scenario,
        method=method,
    )


Point = tuple[float, float]


def _cross(o: Point, a: Point, b: Point) -> float:
    """OA × OB の z 成分"""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
