"""テストユーティリティ"""

import math

from fuelcon.services.dynamics import AgentState

# 6 エージェントの計算例（β = 50）
WORKED_EXAMPLE_AGENTS = [
    AgentState(pos=0.0, vel=0.0),
    AgentState(pos=40.0, vel=64.0),
    AgentState(pos=-500.0, vel=8.0),
    AgentState(pos=-100.0, vel=10.0),
    AgentState(pos=600.0, vel=30.0),
    AgentState(pos=2900.0, vel=10.0),
]
WORKED_EXAMPLE_BETA = 50.0

# 計算例の最小合意時刻と合意点
# エージェント 1 の上側の弧とエージェント 2, 6 の下側の弧が接する点で、
# v̄ = 50 - sqrt(1060/3), t̄ = v̄ + 1861/27
OPTIMAL_VBAR = 50.0 - math.sqrt(1060.0 / 3.0)
OPTIMAL_TBAR = OPTIMAL_VBAR + 1861.0 / 27.0
OPTIMAL_XBAR = AgentState(
    pos=OPTIMAL_TBAR * (OPTIMAL_VBAR + 50.0) / 2.0 - (OPTIMAL_VBAR**2 + 2500.0) / 4.0,
    vel=OPTIMAL_VBAR,
)

# 全員が到達できるが最小ではない合意点（エージェント 1, 2 の弧が v = 28.56 で接する）
FEASIBLE_TBAR = 100.43
FEASIBLE_XBAR = AgentState(pos=3116.4, vel=28.56)
