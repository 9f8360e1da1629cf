"""解析解と総当たりオラクルの一致の E2E テスト

ランダムな三つ組について、解析的な最小コンセンサス時刻が
格子探索の時刻と許容誤差内で一致することを確認する

実行方法:
    pytest tests/e2e/test_oracle_equivalence.py -v -s
"""

import math

import numpy as np
import pytest

from fuelcon.core.exceptions import NoConsensusWithinHorizonError
from fuelcon.services.dynamics import AgentState
from fuelcon.services.oracle import oracle_min_consensus
from fuelcon.services.triplet_solver import solve_triplet

T_STEP = 0.02
GRID_STEP = 0.05
TOLERANCE = max(T_STEP, 5 * GRID_STEP)
TRIPLETS = 200


def _random_triplet(rng: np.random.Generator) -> tuple[list[AgentState], float]:
    """速度差が 2β 未満になるランダムな三つ組を作る"""
    beta = float(rng.uniform(1.0, 5.0))
    center = float(rng.uniform(-5.0, 5.0))
    agents = [
        AgentState(
            float(rng.uniform(-10.0, 10.0)),
            float(np.clip(center + rng.uniform(-0.9, 0.9) * beta, -10.0, 10.0)),
        )
        for _ in range(3)
    ]
    return agents, beta


@pytest.mark.e2e
class TestOracleEquivalence:
    """オラクルとの一致のテスト"""

    def test_random_triplets(self) -> None:
        """200 個のランダムな三つ組で合意時刻が一致することを確認"""
        rng = np.random.default_rng(20240611)
        failures = []
        for n in range(TRIPLETS):
            agents, beta = _random_triplet(rng)
            analytic = solve_triplet(*agents, beta).t_star
            try:
                oracle, _ = oracle_min_consensus(
                    agents, beta, T_STEP, GRID_STEP, t_cap=analytic + 1.0
                )
            except NoConsensusWithinHorizonError:
                oracle = math.inf
            if abs(analytic - oracle) > TOLERANCE:
                failures.append((n, agents, beta, analytic, oracle))

        assert failures == []

    def test_grid_refinement(self) -> None:
        """格子を細かくするとオラクルの時刻が解析解へ近づくことを確認"""
        rng = np.random.default_rng(31)
        for _ in range(10):
            agents, beta = _random_triplet(rng)
            analytic = solve_triplet(*agents, beta).t_star
            errors = []
            for grid_step in (0.2, 0.1, GRID_STEP):
                oracle, _ = oracle_min_consensus(
                    agents, beta, T_STEP, grid_step, t_cap=analytic + 5.0
                )
                errors.append(abs(oracle - analytic))
            assert errors[-1] <= TOLERANCE
            assert errors[-1] <= errors[0] + T_STEP
