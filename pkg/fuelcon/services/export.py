"""CSV 出力サービス

境界の折れ線、軌道、入力プロファイルを pandas の DataFrame に変換して CSV に書く
数値は小数点・桁区切りなしの有効数字 12 桁で出力する
"""

import logging
from pathlib import Path
from typing import Sequence

import pandas as pd

from fuelcon.services.dynamics import AgentState, SwitchPlan, Trajectory

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def boundary_frame(points: Sequence[AgentState]) -> pd.DataFrame:
    """境界の折れ線を (x, v) の DataFrame にする

    Args:
        points (Sequence[AgentState]): 折れ線の頂点

    Returns:
        pd.DataFrame: 列 x, v
    """
    return pd.DataFrame(
        {"x": [p.pos for p in points], "v": [p.vel for p in points]}, columns=["x", "v"]
    )


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    """軌道を (t, x, v, u) の DataFrame にする

    Args:
        trajectory (Trajectory): サンプリングした軌道

    Returns:
        pd.DataFrame: 列 t, x, v, u
    """
    return pd.DataFrame(
        {
            "t": [t for t, _ in trajectory.samples],
            "x": [s.pos for _, s in trajectory.samples],
            "v": [s.vel for _, s in trajectory.samples],
            "u": [u for _, u in trajectory.control],
        },
        columns=["t", "x", "v", "u"],
    )


def control_frame(plan: SwitchPlan) -> pd.DataFrame:
    """入力プロファイルを区間の端点ごとの (t, u) にする

    長さ 0 の区間は省く。各区間の開始と終了を 1 行ずつ出すので、
    そのまま描けば階段状のグラフになる

    Args:
        plan (SwitchPlan): 制御則

    Returns:
        pd.DataFrame: 列 t, u
    """
    rows = []
    for level, start, end in plan.phases:
        if end > start:
            rows.append((start, level))
            rows.append((end, level))
    if not rows:
        rows = [(0.0, 0), (plan.tf, 0)]
    return pd.DataFrame(rows, columns=["t", "u"])


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """DataFrame を CSV に書く

    Args:
        frame (pd.DataFrame): 出力するデータ
        path (Path): 出力先

    Returns:
        Path: 書き込んだファイル
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("%s に %d 行を書き込みました", path, len(frame))
    return path


def write_trajectories(
    trajectories: dict[int, Trajectory], plans: dict[int, SwitchPlan], out_dir: Path
) -> list[Path]:
    """エージェントごとの軌道と入力プロファイルを CSV に書く

    Args:
        trajectories (dict[int, Trajectory]): エージェント ID ごとの軌道
        plans (dict[int, SwitchPlan]): エージェント ID ごとの制御則
        out_dir (Path): 出力ディレクトリ

    Returns:
        list[Path]: 書き込んだファイル
    """
    written = []
    for agent_id, trajectory in trajectories.items():
        written.append(
            write_csv(
                trajectory_frame(trajectory), out_dir / f"trajectory_{agent_id}.csv"
            )
        )
        written.append(
            write_csv(
                control_frame(plans[agent_id]), out_dir / f"control_{agent_id}.csv"
            )
        )
    return written
