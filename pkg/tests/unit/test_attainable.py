"""attainable.pyのユニットテスト"""

import math

import numpy as np
import pytest

from fuelcon.core.exceptions import (
    NoConsensusWithinHorizonError,
    VelocityOutOfBandError,
)
from fuelcon.services.attainable import (
    ReachSpec,
    Regime,
    agent_velocity_band,
    boundary_polyline,
    common_gap,
    consensus_band,
    contains,
    feasible,
    first_contact,
    minimum_fuel_plan,
    single_pulse_plan,
    slice_extent,
    velocity_band,
)
from fuelcon.services.dynamics import AgentState, apply_plan, coast
from tests import (
    FEASIBLE_TBAR,
    FEASIBLE_XBAR,
    OPTIMAL_TBAR,
    OPTIMAL_XBAR,
    WORKED_EXAMPLE_AGENTS,
)

ORIGIN = AgentState(pos=0.0, vel=0.0)


def _random_inside(r: ReachSpec, rng: np.random.Generator) -> AgentState:
    """集合内の点を一様でなくてよいので 1 つ選ぶ"""
    band = velocity_band(r)
    v = float(rng.uniform(band.v_lo, band.v_hi))
    extent = slice_extent(r, v)
    return AgentState(pos=float(rng.uniform(extent.x_lo, extent.x_hi)), vel=v)


class TestReachSpec:
    """ReachSpecクラスのテスト"""

    def test_invalid_values(self) -> None:
        """負や非有限の β・tf で ValueError が発生することを確認"""
        with pytest.raises(ValueError):
            ReachSpec(ORIGIN, -1.0, 1.0)
        with pytest.raises(ValueError):
            ReachSpec(ORIGIN, 1.0, float("inf"))

    def test_regime(self) -> None:
        """β と tf の大小で境界の種類が切り替わることを確認"""
        assert ReachSpec(ORIGIN, 50.0, 100.0).regime is Regime.FUEL_BOUND
        assert ReachSpec(ORIGIN, 200.0, 10.0).regime is Regime.TIME_BOUND
        assert ReachSpec(ORIGIN, 200.0, 10.0).burn == 10.0


class TestVelocityBand:
    """velocity_band関数のテスト"""

    def test_fuel_limited(self) -> None:
        """燃料で制限される速度帯を確認"""
        band = velocity_band(ReachSpec(ORIGIN, 50.0, 100.0))
        assert (band.v_lo, band.v_hi) == (-50.0, 50.0)

    def test_time_limited(self) -> None:
        """時間で制限される速度帯を確認"""
        band = velocity_band(ReachSpec(AgentState(0.0, 5.0), 10.0, 3.0))
        assert (band.v_lo, band.v_hi) == (2.0, 8.0)

    def test_no_fuel(self) -> None:
        """燃料 0 なら速度は変わらないことを確認"""
        band = velocity_band(ReachSpec(ORIGIN, 0.0, 7.0))
        assert (band.v_lo, band.v_hi) == (0.0, 0.0)
        assert band.width == 0.0

    def test_agent_band(self) -> None:
        """時間無制限の速度帯が v0 ± β であることを確認"""
        band = agent_velocity_band(AgentState(0.0, 64.0), 50.0)
        assert (band.v_lo, band.v_hi) == (14.0, 114.0)


class TestSliceExtent:
    """slice_extent関数のテスト"""

    def test_symmetric_at_zero_velocity(self) -> None:
        """原点から速度 0 のスライスが対称であることを確認"""
        extent = slice_extent(ReachSpec(ORIGIN, 50.0, 100.0), 0.0)
        assert extent.x_hi > 0.0
        assert extent.x_lo == pytest.approx(-extent.x_hi)

    def test_band_edge_is_flat_segment(self) -> None:
        """速度帯の端のスライスが単一パルスの平坦部になることを確認"""
        edge = slice_extent(ReachSpec(ORIGIN, 50.0, 100.0), 50.0)
        # パルスを最初に打つか最後に打つかで [β²/2, β·tf - β²/2]
        assert edge.x_lo == pytest.approx(1250.0)
        assert edge.x_hi == pytest.approx(3750.0)

    def test_time_bound_extent(self) -> None:
        """β >= tf では bang-bang の境界になることを確認"""
        extent = slice_extent(ReachSpec(ORIGIN, 200.0, 10.0), 0.0)
        assert extent.x_lo == pytest.approx(-25.0)
        assert extent.x_hi == pytest.approx(25.0)

    def test_regime_seam(self) -> None:
        """β = tf の前後で境界が連続であることを確認"""
        x0 = AgentState(3.0, -1.0)
        for v in (-1.5, -1.0, 0.0, 0.9):
            below = slice_extent(ReachSpec(x0, 2.0 - 1e-9, 2.0), v)
            at = slice_extent(ReachSpec(x0, 2.0, 2.0), v)
            assert below.x_lo == pytest.approx(at.x_lo, abs=1e-7)
            assert below.x_hi == pytest.approx(at.x_hi, abs=1e-7)

    def test_collapse_for_large_budget(self) -> None:
        """β >= tf では β を増やしても境界が変わらないことを確認"""
        x0 = AgentState(1.0, 2.0)
        for v in np.linspace(-2.5, 6.5, 7):
            base = slice_extent(ReachSpec(x0, 5.0, 5.0), float(v))
            for beta in (6.0, 50.0, 1e3):
                other = slice_extent(ReachSpec(x0, beta, 5.0), float(v))
                assert other.x_lo == pytest.approx(base.x_lo, abs=1e-9)
                assert other.x_hi == pytest.approx(base.x_hi, abs=1e-9)

    def test_monotone_growth_from_origin(self) -> None:
        """原点からのスライスが時間とともに広がることを確認"""
        for v in (-4.0, 0.0, 2.5):
            short = slice_extent(ReachSpec(ORIGIN, 5.0, 8.0), v)
            long = slice_extent(ReachSpec(ORIGIN, 5.0, 20.0), v)
            assert long.x_lo <= short.x_lo + 1e-9
            assert long.x_hi >= short.x_hi - 1e-9

    def test_unbounded_in_position(self) -> None:
        """速度帯の内側では位置方向に際限なく広がることを確認"""
        x0 = AgentState(0.0, 1.0)
        for t in (10.0, 20.0, 40.0):
            short = slice_extent(ReachSpec(x0, 3.0, t), 0.5)
            long = slice_extent(ReachSpec(x0, 3.0, 2.0 * t), 0.5)
            assert long.x_hi > short.x_hi + 1.0
            assert long.x_lo < short.x_lo - 1.0

    def test_coast_translation(self) -> None:
        """集合が惰行した初期状態だけ原点の集合を平行移動したものであることを確認"""
        rng = np.random.default_rng(11)
        for _ in range(100):
            x0 = AgentState(float(rng.uniform(-10, 10)), float(rng.uniform(-5, 5)))
            beta, tf = float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 8.0))
            shift = coast(x0, tf)
            dv = float(rng.uniform(-1.0, 1.0)) * min(beta, tf)
            moved = slice_extent(ReachSpec(x0, beta, tf), shift.vel + dv)
            base = slice_extent(ReachSpec(ORIGIN, beta, tf), dv)
            assert moved.x_lo == pytest.approx(shift.pos + base.x_lo, abs=1e-9)
            assert moved.x_hi == pytest.approx(shift.pos + base.x_hi, abs=1e-9)

    def test_out_of_band(self) -> None:
        """速度帯の外で VelocityOutOfBandError が発生することを確認"""
        with pytest.raises(VelocityOutOfBandError):
            slice_extent(ReachSpec(ORIGIN, 50.0, 100.0), 60.0)


class TestContains:
    """contains関数のテスト"""

    def test_zero_horizon(self) -> None:
        """tf = 0 では初期状態だけが含まれることを確認"""
        membership = contains(ReachSpec(ORIGIN, 50.0, 0.0), ORIGIN)
        assert membership.inside
        assert membership.witness is not None
        assert membership.witness.fuel == 0.0

    def test_consensus_point_witness(self) -> None:
        """合意点の証拠制御則が燃料を使い切る {+1,0,-1} であることを確認"""
        r = ReachSpec(ORIGIN, 50.0, FEASIBLE_TBAR)
        extent = slice_extent(r, FEASIBLE_XBAR.vel)
        membership = contains(r, AgentState(extent.x_hi, FEASIBLE_XBAR.vel))
        assert membership.inside
        witness = membership.witness
        assert witness is not None
        assert witness.gamma == 1
        assert witness.t1 == pytest.approx(39.28, abs=0.05)
        assert witness.t2 == pytest.approx(89.71, abs=0.05)
        assert witness.fuel == pytest.approx(50.0, abs=1e-6)

    def test_velocity_out_of_reach(self) -> None:
        """速度変化が β を超える目標が含まれないことを確認"""
        membership = contains(ReachSpec(ORIGIN, 50.0, 100.0), AgentState(0.0, 60.0))
        assert not membership.inside
        assert membership.witness is None
        assert membership.margin < 0.0

    def test_position_out_of_reach(self) -> None:
        """スライス区間の外の目標が含まれないことを確認"""
        r = ReachSpec(ORIGIN, 50.0, 100.0)
        extent = slice_extent(r, 10.0)
        assert not contains(r, AgentState(extent.x_hi + 1.0, 10.0)).inside
        assert not contains(r, AgentState(extent.x_lo - 1.0, 10.0)).inside

    def test_witness_soundness(self) -> None:
        """証拠制御則が目標へ届き燃料が予算内であることを確認"""
        rng = np.random.default_rng(3)
        for _ in range(200):
            x0 = AgentState(float(rng.uniform(-10, 10)), float(rng.uniform(-5, 5)))
            beta, tf = float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 8.0))
            r = ReachSpec(x0, beta, tf)
            target = _random_inside(r, rng)
            membership = contains(r, target)
            assert membership.inside
            assert membership.witness is not None
            final = apply_plan(x0, membership.witness)
            assert final.pos == pytest.approx(target.pos, abs=1e-6, rel=1e-9)
            assert final.vel == pytest.approx(target.vel, abs=1e-6, rel=1e-9)
            assert membership.witness.fuel <= r.beta + 1e-9

    def test_convexity(self) -> None:
        """集合内の 2 点を結ぶ線分上の点も集合内にあることを確認（10^4 組）"""
        rng = np.random.default_rng(5)
        for _ in range(100):
            x0 = AgentState(float(rng.uniform(-10, 10)), float(rng.uniform(-5, 5)))
            beta, tf = float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.5, 8.0))
            r = ReachSpec(x0, beta, tf)
            for _ in range(100):
                p = _random_inside(r, rng)
                q = _random_inside(r, rng)
                lam = float(rng.uniform(0.0, 1.0))
                mixed = AgentState(
                    lam * p.pos + (1.0 - lam) * q.pos,
                    lam * p.vel + (1.0 - lam) * q.vel,
                )
                assert contains(r, mixed).inside


class TestPlans:
    """minimum_fuel_plan関数とsingle_pulse_plan関数のテスト"""

    def test_single_pulse(self) -> None:
        """速度変化ちょうどの燃料で届く目標に単一パルスが使われることを確認"""
        r = ReachSpec(ORIGIN, 5.0, 10.0)
        # 1 だけ加速して以後惰行: パルスを [2, 3] に打つと位置は 7.5
        target = AgentState(7.5, 1.0)
        plan = single_pulse_plan(r, target)
        assert plan is not None
        assert plan.t0 == pytest.approx(2.0)
        assert plan.fuel == pytest.approx(1.0)
        final = apply_plan(ORIGIN, plan)
        assert final.pos == pytest.approx(7.5)
        assert final.vel == pytest.approx(1.0)

    def test_single_pulse_out_of_range(self) -> None:
        """単一パルスで届かない位置では None を返すことを確認"""
        r = ReachSpec(ORIGIN, 5.0, 10.0)
        assert single_pulse_plan(r, AgentState(20.0, 1.0)) is None

    def test_minimum_fuel_on_boundary(self) -> None:
        """境界上の目標に予算を使い切る制御則が返されることを確認"""
        r = ReachSpec(ORIGIN, 50.0, FEASIBLE_TBAR)
        extent = slice_extent(r, FEASIBLE_XBAR.vel)
        target = AgentState(extent.x_hi, FEASIBLE_XBAR.vel)
        plan = minimum_fuel_plan(r, target)
        assert plan is not None
        assert plan.fuel == pytest.approx(50.0, abs=1e-6)
        assert apply_plan(ORIGIN, plan).pos == pytest.approx(extent.x_hi, abs=1e-6)


class TestBoundaryPolyline:
    """boundary_polyline関数のテスト"""

    def test_closed_and_in_band(self) -> None:
        """閉じた折れ線で、全頂点が速度帯に入ることを確認"""
        r = ReachSpec(ORIGIN, 50.0, 100.0)
        points = boundary_polyline(r, 64)
        assert points[0] == points[-1]
        assert all(abs(p.vel) <= 50.0 + 1e-9 for p in points)
        assert min(p.vel for p in points) == pytest.approx(-50.0)
        assert max(p.vel for p in points) == pytest.approx(50.0)

    def test_vertices_on_boundary(self) -> None:
        """全頂点が集合の閉包に含まれ、余裕がほぼ 0 であることを確認"""
        r = ReachSpec(AgentState(40.0, 64.0), 50.0, FEASIBLE_TBAR)
        for p in boundary_polyline(r, 32):
            membership = contains(r, p)
            assert membership.inside
            assert abs(membership.margin) <= 1e-6 * (1.0 + abs(p.pos) + abs(p.vel))

    def test_no_consecutive_duplicates(self) -> None:
        """連続する重複頂点が取り除かれていることを確認"""
        points = boundary_polyline(ReachSpec(ORIGIN, 50.0, 100.0), 16)
        assert all(a != b for a, b in zip(points[:-1], points[1:]))

    def test_zero_horizon(self) -> None:
        """tf = 0 では 1 点の繰り返しになることを確認"""
        points = boundary_polyline(ReachSpec(ORIGIN, 50.0, 0.0), 8)
        assert points == [ORIGIN, ORIGIN]

    def test_too_few_points(self) -> None:
        """n < 8 で ValueError が発生することを確認"""
        with pytest.raises(ValueError):
            boundary_polyline(ReachSpec(ORIGIN, 50.0, 1.0), 4)


class TestConsensusBand:
    """consensus_band関数とfeasible関数のテスト"""

    def test_worked_example_band(self) -> None:
        """計算例の速度帯が [14, 50] であることを確認"""
        band = consensus_band(WORKED_EXAMPLE_AGENTS, 50.0)
        assert (band.v_lo, band.v_hi) == (14.0, 50.0)
        assert feasible(WORKED_EXAMPLE_AGENTS, 50.0)

    def test_single_agent(self) -> None:
        """1 エージェントの速度帯が v ± β であることを確認"""
        band = consensus_band([AgentState(0.0, 3.0)], 2.0)
        assert (band.v_lo, band.v_hi) == (1.0, 5.0)

    def test_equality_is_feasible(self) -> None:
        """速度差がちょうど 2β なら可能であることを確認"""
        agents = [AgentState(0.0, 0.0), AgentState(1.0, 100.0)]
        assert feasible(agents, 50.0)
        assert consensus_band(agents, 50.0).width == 0.0

    def test_infeasible(self) -> None:
        """速度差が 2β を超えると不能で速度帯が空になることを確認"""
        agents = [AgentState(0.0, 0.0), AgentState(1.0, 101.0)]
        assert not feasible(agents, 50.0)
        assert consensus_band(agents, 50.0).empty

    def test_random_classification(self) -> None:
        """1000 群で実行可能性が速度差 ≤ 2β と一致することを確認"""
        rng = np.random.default_rng(17)
        for _ in range(1000):
            beta = float(rng.uniform(0.5, 5.0))
            vels = rng.uniform(-3.0, 3.0, size=int(rng.integers(2, 9))) * beta
            agents = [AgentState(float(rng.uniform(-10, 10)), float(v)) for v in vels]
            spread = float(vels.max() - vels.min())
            expected = spread <= 2.0 * beta
            assert feasible(agents, beta) is expected
            assert consensus_band(agents, beta).empty is not expected

    def test_empty_agents(self) -> None:
        """エージェントが空の場合に ValueError が発生することを確認"""
        with pytest.raises(ValueError):
            consensus_band([], 1.0)
        with pytest.raises(ValueError):
            feasible([], 1.0)


class TestFirstContact:
    """first_contact関数とcommon_gap関数のテスト"""

    def test_symmetric_pair(self) -> None:
        """(0,0) と (2,0) が t = 2 で (1, 0) において接することを確認"""
        t, x = first_contact([ORIGIN, AgentState(2.0, 0.0)], 100.0)
        assert t == pytest.approx(2.0, rel=1e-7)
        assert x.pos == pytest.approx(1.0, abs=1e-6)
        assert x.vel == pytest.approx(0.0, abs=1e-6)

    def test_identical_states(self) -> None:
        """同じ初期状態なら時刻 0 で接することを確認"""
        s = AgentState(7.0, -3.0)
        assert first_contact([s, s, s], 1.0) == (0.0, s)

    def test_gap_sign(self) -> None:
        """接触時刻の前後で重なりの符号が変わることを確認"""
        states = [ORIGIN, AgentState(2.0, 0.0)]
        assert common_gap(states, 100.0, 1.9).gap < 0.0
        assert common_gap(states, 100.0, 2.1).gap > 0.0

    def test_disjoint_velocity_bands(self) -> None:
        """速度帯が交わらない時刻では重なりが負であることを確認"""
        gap = common_gap([ORIGIN, AgentState(0.0, 10.0)], 1.0, 5.0)
        assert gap.gap < 0.0
        assert math.isnan(gap.pos)

    def test_never_meets(self) -> None:
        """速度差が 2β を超えると探索上限で例外になることを確認"""
        with pytest.raises(NoConsensusWithinHorizonError):
            first_contact([ORIGIN, AgentState(0.0, 3.0)], 1.0)

    @pytest.mark.parametrize("delay", [1.0, 5.0, 20.0])
    def test_common_point_persists(self, delay: float) -> None:
        """合意点から惰行した点が以後の時刻でも全員の集合に含まれることを確認"""
        t = OPTIMAL_TBAR + delay
        target = coast(OPTIMAL_XBAR, delay)
        for agent in WORKED_EXAMPLE_AGENTS:
            assert contains(ReachSpec(agent, 50.0, t), target).inside
        assert common_gap(WORKED_EXAMPLE_AGENTS, 50.0, t).gap >= 0.0

    def test_pair_contact_monotone(self) -> None:
        """ペアの接触時刻以降は重なりが負に戻らないことを確認"""
        rng = np.random.default_rng(19)
        for _ in range(50):
            beta = float(rng.uniform(1.0, 5.0))
            pair = [
                AgentState(
                    float(rng.uniform(-10, 10)), float(rng.uniform(-0.9, 0.9)) * beta
                )
                for _ in range(2)
            ]
            t_star, _ = first_contact(pair, beta)
            for delay in (1.0, 5.0, 20.0):
                assert common_gap(pair, beta, t_star + delay).gap >= 0.0
