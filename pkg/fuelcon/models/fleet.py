"""入力モデル

エージェント群ファイル（JSON）のデータモデルを定義する
"""

from typing import Literal

from pydantic import BaseModel, Field, field_validator

from fuelcon.services.consensus import Fleet
from fuelcon.services.dynamics import AgentState

SCHEMA_VERSION = "1"


class AgentEntry(BaseModel):
    """エージェントの初期状態

    Attributes:
        id (int): エージェント ID
        x (float): 初期位置
        v (float): 初期速度
    """

    id: int = Field(description="エージェント ID")
    x: float = Field(allow_inf_nan=False, description="初期位置")
    v: float = Field(allow_inf_nan=False, description="初期速度")


class FleetFile(BaseModel):
    """エージェント群ファイル

    Attributes:
        schema_version (str): スキーマバージョン（"1" 固定）
        beta (float): 燃料予算
        agents (list[AgentEntry]): エージェントのリスト
    """

    schema_version: Literal["1"] = Field(
        default=SCHEMA_VERSION, description="スキーマバージョン"
    )
    beta: float = Field(ge=0.0, allow_inf_nan=False, description="燃料予算")
    agents: list[AgentEntry] = Field(min_length=1, description="エージェントのリスト")

    @field_validator("agents")
    @classmethod
    def validate_unique_ids(cls, v: list[AgentEntry]) -> list[AgentEntry]:
        """ID の重複を検出する

        Args:
            v (list[AgentEntry]): エージェントのリスト

        Returns:
            list[AgentEntry]: 検証済みのリスト

        Raises:
            ValueError: ID が重複している場合
        """
        ids = [a.id for a in v]
        duplicated = sorted({i for i in ids if ids.count(i) > 1})
        if duplicated:
            raise ValueError(f"エージェント ID が重複しています: {duplicated}")
        return v

    def to_fleet(self) -> Fleet:
        """サービス層の Fleet に変換する

        Returns:
            Fleet: エージェント群
        """
        return Fleet(
            agents=[AgentState(pos=a.x, vel=a.v) for a in self.agents],
            beta=self.beta,
            ids=[a.id for a in self.agents],
        )

    @classmethod
    def from_fleet(cls, fleet: Fleet) -> "FleetFile":
        """Fleet からファイルモデルを作る

        Args:
            fleet (Fleet): エージェント群

        Returns:
            FleetFile: ファイルモデル
        """
        return cls(
            beta=fleet.beta,
            agents=[
                AgentEntry(id=i, x=s.pos, v=s.vel)
                for i, s in zip(fleet.ids, fleet.agents)
            ],
        )
