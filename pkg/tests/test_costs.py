import math
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faasched.costs import (
    CostBreakdown,
    CostParams,
    UnroutableError,
    money_str,
    parse_money,
    placement_cost,
    routing_cost,
    running_cost,
    switching_cost,
    to_micro,
)
from faasched.topology import EdgeNode

from conftest import chain_topology, fn_type, make_topology


@pytest.fixture
def params():
    return CostParams()


def node(freq=2.5, mem=250, nid=0):
    return EdgeNode(id=nid, x_m=0.0, y_m=0.0, cpu_ghz=freq, mem_mb=mem)


class TestMoney:
    def test_to_micro_decimal_string(self):
        assert to_micro("0.01") == 10_000
        assert to_micro(0.4) == 400_000
        assert to_micro(5.0) == 5_000_000

    def test_money_str_exact(self):
        assert money_str(400_000) == "0.400000"
        assert money_str(-1_130_000) == "-1.130000"
        assert money_str(0) == "0.000000"

    def test_parse_round_trip(self):
        for m in (0, 1, 999_999, 12_345_678):
            assert parse_money(money_str(m)) == m
        assert parse_money("inf") is None

    def test_half_even(self):
        assert to_micro(Decimal("0.0000005")) == 0
        assert to_micro(Decimal("0.0000015")) == 2


class TestSwitchingCost:
    def test_direct_arithmetic(self, params):
        # 0.01 * 100 / 2.5 = 0.4
        assert switching_cost(params, fn_type(mem_mb=100), node(2.5)) == 400_000

    def test_zero_coefficient(self):
        p = CostParams(alpha_switch=0.0)
        assert switching_cost(p, fn_type(mem_mb=123), node(3.3)) == 0

    def test_inverse_in_frequency(self, params):
        fn = fn_type(mem_mb=100)
        assert switching_cost(params, fn, node(2.4)) > switching_cost(params, fn, node(3.6))


class TestRunningCost:
    def test_direct_arithmetic(self, params):
        # 0.002 * 100 * 2.5 = 0.5
        assert running_cost(params, fn_type(mem_mb=100), node(2.5)) == 500_000

    def test_duration_exactly_doubles(self, params):
        one = running_cost(params, fn_type(mem_mb=100, duration_slots=1), node(2.5))
        two = running_cost(params, fn_type(mem_mb=100, duration_slots=2), node(2.5))
        assert two == 2 * one

    def test_proportional_to_size_and_frequency(self, params):
        assert (running_cost(params, fn_type(mem_mb=200), node(2.5))
                == 2 * running_cost(params, fn_type(mem_mb=100), node(2.5)))
        assert (running_cost(params, fn_type(mem_mb=100), node(3.0))
                > running_cost(params, fn_type(mem_mb=100), node(2.5)))


class TestRoutingCost:
    def test_local_is_free(self, params, chain3):
        assert routing_cost(params, fn_type(mem_mb=100), chain3, 1, 1) == 0

    def test_direct_arithmetic(self, params, chain3):
        # 0.003 * 100 * 2 hops = 0.6
        assert routing_cost(params, fn_type(mem_mb=100), chain3, 0, 2) == 600_000

    def test_traffic_proportional_to_size(self, params, chain3):
        small = routing_cost(params, fn_type(mem_mb=100), chain3, 0, 2)
        large = routing_cost(params, fn_type(mem_mb=200), chain3, 0, 2)
        assert large == 2 * small

    def test_unroutable(self, params):
        topo = make_topology([(0, 0), (10_000, 0)], edges=[])
        with pytest.raises(UnroutableError):
            routing_cost(params, fn_type(), topo, 0, 1)


class TestPlacementCost:
    def test_warm_local(self, params, chain3):
        cb = placement_cost(params, fn_type(mem_mb=100), chain3, 0, 0, spawn_new=False)
        assert (cb.c_s, cb.c_e, cb.c_t, cb.total) == (0, 500_000, 0, 500_000)

    def test_cold_remote_two_hops(self, params, chain3):
        cb = placement_cost(params, fn_type(mem_mb=100), chain3, 0, 2, spawn_new=True)
        assert (cb.c_s, cb.c_e, cb.c_t, cb.total) == (400_000, 500_000, 600_000, 1_500_000)

    def test_all_zero_coefficients(self, chain3):
        p = CostParams(alpha_switch=0, beta_run=0, delta_route=0, reject_penalty=0)
        cb = placement_cost(p, fn_type(), chain3, 0, 2, spawn_new=True)
        assert (cb.c_s, cb.c_e, cb.c_t, cb.total) == (0, 0, 0, 0)


coeff = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)
size = st.integers(min_value=1, max_value=4096)
freq_grid = st.sampled_from([2.4, 2.5, 2.7, 3.0, 3.3, 3.5, 3.6])
duration = st.integers(min_value=1, max_value=8)


class TestProperties:
    @given(alpha=coeff, beta=coeff, delta=coeff, u=size, f=freq_grid, d=duration)
    @settings(max_examples=300)
    def test_total_is_exact_component_sum(self, alpha, beta, delta, u, f, d):
        params = CostParams(alpha_switch=alpha, beta_run=beta, delta_route=delta)
        topo = chain_topology(4, cpu_ghz=f)
        cb = placement_cost(params, fn_type(mem_mb=u, duration_slots=d), topo, 0, 3, True)
        assert cb.total == cb.c_s + cb.c_e + cb.c_t

    @given(u=size, f=freq_grid)
    @settings(max_examples=200)
    def test_monotone_in_hops_and_spawn(self, u, f):
        params = CostParams()
        topo = chain_topology(4, cpu_ghz=f)
        fn = fn_type(mem_mb=u)
        totals = [placement_cost(params, fn, topo, 0, v, True).total for v in range(4)]
        assert totals == sorted(totals)
        for v in range(4):
            cold = placement_cost(params, fn, topo, 0, v, True).total
            warm = placement_cost(params, fn, topo, 0, v, False).total
            assert cold >= warm

    @given(u1=size, u2=size, f=freq_grid)
    @settings(max_examples=200)
    def test_monotone_in_function_size(self, u1, u2, f):
        if u1 > u2:
            u1, u2 = u2, u1
        params = CostParams()
        topo = chain_topology(3, cpu_ghz=f)
        a = placement_cost(params, fn_type(mem_mb=u1), topo, 0, 2, True)
        b = placement_cost(params, fn_type(mem_mb=u2), topo, 0, 2, True)
        assert b.c_s >= a.c_s and b.c_e >= a.c_e and b.c_t >= a.c_t

    def test_switching_strictly_decreasing_running_increasing(self):
        params = CostParams()
        freqs = [2.4, 2.7, 3.0, 3.3, 3.6]
        for u in (20, 100, 180, 250):
            fn = fn_type(mem_mb=u)
            sw = [switching_cost(params, fn, node(f)) for f in freqs]
            run = [running_cost(params, fn, node(f)) for f in freqs]
            assert all(a > b for a, b in zip(sw, sw[1:]))
            assert all(a < b for a, b in zip(run, run[1:]))

    def test_breakdown_rejects_negative(self):
        with pytest.raises(ValueError):
            CostBreakdown(c_s=-1, c_e=0, c_t=0)

    def test_params_reject_negative(self):
        with pytest.raises(ValueError):
            CostParams(alpha_switch=-0.1)

    def test_reject_penalty_micro(self):
        assert CostParams().reject_penalty_micro == 5_000_000
        assert math.isclose(CostParams(reject_penalty=1.25).reject_penalty_micro, 1_250_000)
