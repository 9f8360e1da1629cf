"""出力モデル

実行可能性レポートと求解レポート（JSON）のデータモデルを定義する
数値はレポート作成時に有効数字 12 桁へ丸めるので、
JSON を読み戻したモデルは元のモデルと完全に一致する
"""

from typing import Literal

from pydantic import BaseModel, Field, field_validator

from fuelcon.services.dynamics import AgentState, SwitchPlan

SIGNIFICANT_DIGITS = 12


def round_sig(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    """有効数字 digits 桁に丸める

    Args:
        value (float): 値
        digits (int): 有効数字の桁数

    Returns:
        float: 丸めた値
    """
    rounded = float(f"{value:.{digits}g}")
    # -0.0 は 0.0 にそろえる
    return rounded + 0.0


class StateEntry(BaseModel):
    """状態 (x, v)

    Attributes:
        x (float): 位置
        v (float): 速度
    """

    x: float = Field(description="位置")
    v: float = Field(description="速度")

    @classmethod
    def from_state(cls, s: AgentState) -> "StateEntry":
        """AgentState から作る（丸め付き）

        Args:
            s (AgentState): 状態

        Returns:
            StateEntry: 状態エントリ
        """
        return cls(x=round_sig(s.pos), v=round_sig(s.vel))

    def to_state(self) -> AgentState:
        """AgentState に変換する

        Returns:
            AgentState: 状態
        """
        return AgentState(pos=self.x, vel=self.v)


class AgentBandEntry(BaseModel):
    """エージェント単独の速度帯 [v0 - β, v0 + β]

    Attributes:
        id (int): エージェント ID
        v_lo (float): 下限速度
        v_hi (float): 上限速度
    """

    id: int = Field(description="エージェント ID")
    v_lo: float = Field(description="下限速度")
    v_hi: float = Field(description="上限速度")


class FeasibilityReport(BaseModel):
    """実行可能性レポート

    Attributes:
        feasible (bool): コンセンサス可能か
        v_lo (float): コンセンサス速度帯の下限
        v_hi (float): コンセンサス速度帯の上限
        margin (float): 速度差と 2β の差の絶対値
        agent_bands (list[AgentBandEntry]): エージェントごとの速度帯
    """

    feasible: bool = Field(description="コンセンサス可能か")
    v_lo: float = Field(description="コンセンサス速度帯の下限")
    v_hi: float = Field(description="コンセンサス速度帯の上限")
    margin: float = Field(ge=0.0, description="速度差と 2β の差の絶対値")
    agent_bands: list[AgentBandEntry] = Field(
        default_factory=list, description="エージェントごとの速度帯"
    )


class AgentControlEntry(BaseModel):
    """エージェントの制御則

    Attributes:
        id (int): エージェント ID
        sequence (str): 入力レベルの列（例: "{+1,0,-1}"）
        gamma (int): 極性
        t0 (float): 先頭の惰行の終了時刻
        t1 (float): 第1切替時刻
        t2 (float): 第2切替時刻
        beta_eff (float): 実効燃料 β′
        fuel_used (float): 消費燃料
        terminal_error (float): シミュレーションした終端誤差
        on_boundary (bool): 合意点が境界上にあるか
    """

    id: int = Field(description="エージェント ID")
    sequence: str = Field(description="入力レベルの列")
    gamma: Literal[1, -1] = Field(description="極性")
    t0: float = Field(default=0.0, ge=0.0, description="先頭の惰行の終了時刻")
    t1: float = Field(ge=0.0, description="第1切替時刻")
    t2: float = Field(ge=0.0, description="第2切替時刻")
    beta_eff: float = Field(ge=0.0, description="実効燃料 β′")
    fuel_used: float = Field(ge=0.0, description="消費燃料")
    terminal_error: float = Field(ge=0.0, description="終端誤差")
    on_boundary: bool = Field(description="合意点が境界上にあるか")

    def to_plan(self, tf: float) -> SwitchPlan:
        """SwitchPlan に変換する

        Args:
            tf (float): 終端時刻（レポートの t_star）

        Returns:
            SwitchPlan: 制御則
        """
        return SwitchPlan(gamma=self.gamma, t0=self.t0, t1=self.t1, t2=self.t2, tf=tf)


class VerificationSummary(BaseModel):
    """到達検証の要約

    Attributes:
        passed (bool): 全エージェントが合格したか
        max_terminal_error (float): 終端誤差の最大値
        tolerance (float): 許容誤差
    """

    passed: bool = Field(description="全エージェントが合格したか")
    max_terminal_error: float = Field(ge=0.0, description="終端誤差の最大値")
    tolerance: float = Field(gt=0.0, description="許容誤差")


class TimingInfo(BaseModel):
    """実行時間などのメタデータ（ワーカー数によって変わる項目）

    Attributes:
        elapsed_seconds (float): 求解にかかった時間
        workers (int): ワーカー数
    """

    elapsed_seconds: float = Field(ge=0.0, description="求解にかかった時間（秒）")
    workers: int = Field(ge=1, description="ワーカー数")


class ReportFile(BaseModel):
    """求解レポート

    Attributes:
        schema_version (str): スキーマバージョン
        app_version (str): 作成したアプリケーションのバージョン
        beta (float): 燃料予算
        feasible (bool): コンセンサス可能か
        band (FeasibilityReport): 速度帯
        t_star (float | None): 最小コンセンサス時刻
        x_star (StateEntry | None): 合意点
        critical_triplet (list[int]): 臨界三つ組の ID
        scenario (str | None): 臨界三つ組のシナリオ（例: "3 (s1,s3,s3)"）
        method (str): 臨界三つ組の解法
        triplet_count (int): 解いた三つ組の数
        hull_prune (bool): 凸包による枝刈りを使ったか
        per_agent (list[AgentControlEntry]): エージェントごとの制御則
        verification (VerificationSummary | None): 到達検証の結果
        timing (TimingInfo): 実行時間のメタデータ
    """

    schema_version: Literal["1"] = Field(default="1", description="スキーマバージョン")
    app_version: str = Field(description="アプリケーションのバージョン")
    beta: float = Field(ge=0.0, description="燃料予算")
    feasible: bool = Field(description="コンセンサス可能か")
    band: FeasibilityReport = Field(description="速度帯")
    t_star: float | None = Field(default=None, description="最小コンセンサス時刻")
    x_star: StateEntry | None = Field(default=None, description="合意点")
    critical_triplet: list[int] = Field(default_factory=list, description="臨界三つ組の ID")
    scenario: str | None = Field(default=None, description="臨界三つ組のシナリオ")
    method: str = Field(default="", description="臨界三つ組の解法")
    triplet_count: int = Field(default=0, ge=0, description="解いた三つ組の数")
    hull_prune: bool = Field(default=False, description="凸包による枝刈りを使ったか")
    per_agent: list[AgentControlEntry] = Field(
        default_factory=list, description="エージェントごとの制御則"
    )
    verification: VerificationSummary | None = Field(
        default=None, description="到達検証の結果"
    )
    timing: TimingInfo = Field(description="実行時間のメタデータ")

    @field_validator("per_agent")
    @classmethod
    def validate_unique_ids(cls, v: list[AgentControlEntry]) -> list[AgentControlEntry]:
        """制御則の ID の重複を検出する

        Args:
            v (list[AgentControlEntry]): 制御則のリスト

        Returns:
            list[AgentControlEntry]: 検証済みのリスト

        Raises:
            ValueError: ID が重複している場合
        """
        ids = [a.id for a in v]
        if len(set(ids)) != len(ids):
            raise ValueError(f"制御則の ID が重複しています: {ids}")
        return v

    def without_timing(self) -> dict[str, object]:
        """実行時間を除いた内容（ワーカー数の違いを比較する用）

        Returns:
            dict[str, object]: timing を除いた辞書
        """
        return self.model_dump(exclude={"timing"})
