"""例外定義

ソルバーの各段階で送出されるドメイン例外を定義する
CLI はこの階層を終了コードへ対応付ける
"""


class FuelconError(Exception):
    """fuelcon の全ドメイン例外の基底クラス"""


class VelocityOutOfBandError(FuelconError, ValueError):
    """到達可能な速度帯の外側の速度でスライスを要求した"""


class PairInfeasibleError(FuelconError):
    """2 エージェントの速度差が 2β を超えている"""


class DegenerateScenarioError(FuelconError):
    """シナリオ方程式の消去で分母が消えた"""


class NegativeRadicandError(FuelconError):
    """s2/s4 の切替時刻式で根号内が負になった"""


class TripletInfeasibleError(FuelconError):
    """3 エージェントの組がコンセンサス不能"""


class NoScenarioFeasibleError(FuelconError):
    """シナリオ候補も数値探索も有効な解を返さなかった"""


class NoCommonPointError(FuelconError):
    """臨界三つ組の合意点が他のエージェントの到達可能集合に含まれない"""


class SynthesisFailedError(FuelconError):
    """合意点へ到達する制御則を構成できなかった"""


class NoConsensusWithinHorizonError(FuelconError):
    """探索上限時刻までに到達可能集合が交わらなかった"""


class InputFormatError(FuelconError):
    """入力ファイルの形式が不正"""


class ReportMismatchError(InputFormatError):
    """レポートとフリートファイルが対応していない"""
