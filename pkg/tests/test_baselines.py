import numpy as np
import pytest

from faasched.baselines import (
    OracleLimitError,
    greedy_choose,
    greedy_episode,
    oracle_optimal,
    random_episode,
    run_episode,
)
from faasched.costs import CostParams
from faasched.env import Action, action_to_index

from conftest import chain_topology, fn_type, make_env, make_topology, request_at


def micro_instance(seed, n_nodes=3, n_types=2, n_requests=6):
    """Seeded micro-instance: chain topology, default-style costs, mixed types."""
    rng = np.random.default_rng(seed)
    freqs = [float(rng.choice([2.4, 3.0, 3.6])) for _ in range(n_nodes)]
    topo = chain_topology(n_nodes, cpu_ghz=freqs, mem_mb=300)
    catalog = [fn_type(i, mem_mb=int(m), budget=2_000_000)
               for i, m in enumerate([100, 180][:n_types])]
    params = CostParams()
    trace = [request_at(t=int(t), origin=int(rng.integers(0, n_nodes)),
                        fid=int(rng.integers(0, n_types)), budget=2_000_000)
             for t in sorted(rng.integers(0, n_requests, size=n_requests))]
    return topo, catalog, params, trace


def episode_cost(records):
    return sum(-r.reward for r in records)


class TestGreedy:
    def test_prefers_warm_local_over_spawn(self):
        topo = chain_topology(3)
        catalog = [fn_type(0, mem_mb=100)]
        env = make_env(topo, catalog)
        env.reset([request_at(t=0), request_at(t=1)])
        env.step(Action(0, True))
        assert greedy_choose(env) == action_to_index(Action(0, False), 3)

    def test_rejects_when_everything_over_budget(self):
        topo = chain_topology(2)
        catalog = [fn_type(0, mem_mb=100, budget=100)]  # far below any placement
        env = make_env(topo, catalog)
        env.reset([request_at(budget=100)])
        assert greedy_choose(env) == 2 * 2  # reject index
        records = greedy_episode(env, [request_at(budget=100)])
        assert not records[0].accepted

    def test_never_worse_than_oracle_is_impossible(self):
        topo, catalog, params, trace = micro_instance(seed=1)
        env = make_env(topo, catalog, params)
        greedy_cost = episode_cost(greedy_episode(env, trace))
        oracle = oracle_optimal(topo, catalog, params, trace)
        assert greedy_cost >= oracle.total_cost


class TestRandom:
    def test_only_reject_feasible_always_chosen(self):
        topo = chain_topology(2)
        catalog = [fn_type(0, mem_mb=100, budget=100)]
        env = make_env(topo, catalog)
        trace = [request_at(budget=100) for _ in range(5)]
        records = random_episode(env, trace, seed=3)
        assert all(not r.accepted for r in records)

    def test_reproducible_per_seed(self):
        topo, catalog, params, trace = micro_instance(seed=2)
        env = make_env(topo, catalog, params)
        a = random_episode(env, trace, seed=42)
        b = random_episode(env, trace, seed=42)
        assert [(r.target, r.accepted, r.reward) for r in a] == \
               [(r.target, r.accepted, r.reward) for r in b]

    def test_random_mean_not_better_than_greedy(self):
        topo, catalog, params, trace = micro_instance(seed=5, n_requests=8)
        env = make_env(topo, catalog, params)
        greedy_cost = episode_cost(greedy_episode(env, trace))
        random_costs = [episode_cost(random_episode(env, trace, seed=s))
                        for s in range(100)]
        assert np.mean(random_costs) >= greedy_cost


class TestOracle:
    def test_zero_costs_all_accepted(self):
        topo = chain_topology(2)
        params = CostParams(alpha_switch=0, beta_run=0, delta_route=0,
                            reject_penalty=5.0)
        catalog = [fn_type(0, mem_mb=100)]
        trace = [request_at(t=t) for t in range(4)]
        result = oracle_optimal(topo, catalog, params, trace)
        assert result.total_cost == 0
        assert all(r.accepted for r in result.records)

    def test_single_forced_cold_start(self):
        # one node at 2.5 GHz, u=100: q + eps = 0.4 + 0.5 = 0.9
        topo = make_topology([(0, 0)])
        catalog = [fn_type(0, mem_mb=100)]
        result = oracle_optimal(topo, catalog, CostParams(), [request_at()])
        assert result.total_cost == 900_000

    def test_warm_reuse_pays_switching_once(self):
        # two same-type requests within keep-alive: 0.9 + 0.5 beats 2 * 0.9
        topo = make_topology([(0, 0)])
        catalog = [fn_type(0, mem_mb=100)]
        trace = [request_at(t=0), request_at(t=1)]
        result = oracle_optimal(topo, catalog, CostParams(), trace)
        assert result.total_cost == 1_400_000
        assert result.action_indices == [1, 0]  # spawn, then reuse

    def test_reject_when_placement_exceeds_budget(self):
        topo = make_topology([(0, 0)])
        catalog = [fn_type(0, mem_mb=100, budget=100)]
        result = oracle_optimal(topo, catalog, CostParams(),
                                [request_at(budget=100)])
        assert result.total_cost == 5_000_000  # penalty-priced rejection

    def test_empty_trace(self):
        topo = chain_topology(2)
        result = oracle_optimal(topo, [fn_type()], CostParams(), [])
        assert result.total_cost == 0 and result.records == []

    def test_max_states_guard(self):
        topo, catalog, params, trace = micro_instance(seed=7)
        with pytest.raises(OracleLimitError):
            oracle_optimal(topo, catalog, params, trace, max_states=3)

    def test_pruning_matches_pure_enumeration(self):
        for seed in range(8):
            topo, catalog, params, trace = micro_instance(seed=seed, n_requests=5)
            pruned = oracle_optimal(topo, catalog, params, trace, prune=True)
            full = oracle_optimal(topo, catalog, params, trace, prune=False,
                                  max_states=500_000)
            assert pruned.total_cost == full.total_cost
            assert pruned.action_indices == full.action_indices
            assert pruned.states_expanded <= full.states_expanded

    def test_sequences_replay_to_reported_cost(self):
        topo, catalog, params, trace = micro_instance(seed=9)
        result = oracle_optimal(topo, catalog, params, trace)
        env = make_env(topo, catalog, params)
        env.reset(trace)
        for idx in result.action_indices:
            env.step_index(idx)
        assert episode_cost(env.episode_records) == result.total_cost

    def test_deterministic(self):
        topo, catalog, params, trace = micro_instance(seed=11)
        a = oracle_optimal(topo, catalog, params, trace)
        b = oracle_optimal(topo, catalog, params, trace)
        assert a.total_cost == b.total_cost
        assert a.action_indices == b.action_indices
        assert a.states_expanded == b.states_expanded


class TestOrdering:
    def test_oracle_le_greedy_le_random_mean(self):
        for seed in range(50):
            topo, catalog, params, trace = micro_instance(seed=100 + seed,
                                                          n_requests=5)
            if not trace:
                continue
            env = make_env(topo, catalog, params)
            oracle_cost = oracle_optimal(topo, catalog, params, trace).total_cost
            greedy_cost = episode_cost(greedy_episode(env, trace))
            random_mean = np.mean([
                episode_cost(random_episode(env, trace, seed=[seed, s]))
                for s in range(20)
            ])
            assert oracle_cost <= greedy_cost <= random_mean


class TestRunEpisode:
    def test_decision_time_recorded(self):
        topo, catalog, params, trace = micro_instance(seed=13)
        env = make_env(topo, catalog, params)
        records = run_episode(env, trace, greedy_choose)
        assert all(r.decision_us > 0 for r in records)
        untimed = run_episode(env, trace, greedy_choose, time_decisions=False)
        assert all(r.decision_us == 0.0 for r in untimed)
