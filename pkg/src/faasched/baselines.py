"""Non-learning schedulers: myopic greedy, uniform random, and an exact
whole-horizon optimizer.

The oracle enumerates the full action tree (every placement plus reject at
every step) depth-first over environment snapshots, pruning branches whose
partial cost already meets the incumbent; remaining cost is bounded below by
zero, so the pruning is exact. Rejections are penalty-priced in its
objective, i.e. it optimizes exactly the reward the agents see. Intended for
micro-instances (about 4 nodes and 8 requests); a state guard aborts larger
searches.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .costs import CostParams, Money
from .env import DEFAULT_F_CAP, DEFAULT_KEEPALIVE_SLOTS, EpisodeRecord, ServerlessEnv, action_to_index
from .topology import Topology
from .workload import FunctionType, Request


class OracleLimitError(RuntimeError):
    """The search expanded more states than allowed; use a smaller instance."""


def run_episode(env: ServerlessEnv, trace: Sequence[Request],
                choose: Callable[[ServerlessEnv], int],
                time_decisions: bool = True) -> list[EpisodeRecord]:
    """Drive one episode with `choose`; only the selection call is timed."""
    env.reset(trace)
    while not env.done:
        t0 = time.perf_counter_ns()
        index = choose(env)
        decision_us = (time.perf_counter_ns() - t0) / 1000.0
        env.step_index(index, decision_us=decision_us if time_decisions else 0.0)
    return env.episode_records


def greedy_choose(env: ServerlessEnv) -> int:
    """Cheapest feasible placement by immediate cost; reject only if none."""
    req = env.current_request()
    best_index = 2 * env.n_nodes
    best_cost: Money | None = None
    for action in env.feasible_actions():
        total = env.action_cost(action, req).total
        if best_cost is None or total < best_cost:
            best_cost = total
            best_index = action_to_index(action, env.n_nodes)
    return best_index


def greedy_episode(env: ServerlessEnv, trace: Sequence[Request]) -> list[EpisodeRecord]:
    return run_episode(env, trace, greedy_choose)


def random_episode(env: ServerlessEnv, trace: Sequence[Request],
                   seed) -> list[EpisodeRecord]:
    """Uniform over feasible actions including reject; seeded."""
    rng = np.random.default_rng(seed)

    def choose(e: ServerlessEnv) -> int:
        feasible = np.flatnonzero(e.feasible_mask())
        return int(feasible[rng.integers(0, feasible.size)])

    return run_episode(env, trace, choose)


@dataclass(frozen=True)
class OracleResult:
    total_cost: Money
    action_indices: list[int]
    states_expanded: int
    wall_time_s: float
    records: list[EpisodeRecord]


def oracle_optimal(
    topology: Topology,
    catalog: Sequence[FunctionType],
    cost_params: CostParams,
    trace: Sequence[Request],
    max_states: int = 2_000_000,
    keepalive_slots: int = DEFAULT_KEEPALIVE_SLOTS,
    f_cap: int = DEFAULT_F_CAP,
    prune: bool = True,
) -> OracleResult:
    """Exact minimum total cost (rejection penalties included) for a trace.

    Children are visited cheapest-first, which both finds a good incumbent
    early and lets pruning cut whole sibling suffixes. Deterministic: among
    equal-cost optima the lexicographically smallest (cost, action index)
    sequence wins.
    """
    start = time.perf_counter()
    env = ServerlessEnv(topology, catalog, cost_params,
                        keepalive_slots=keepalive_slots, f_cap=f_cap)
    if not trace:
        return OracleResult(0, [], 0, time.perf_counter() - start, [])

    env.reset(trace)
    reject_index = 2 * env.n_nodes
    penalty = env.params.reject_penalty_micro
    best_cost: Money | None = None
    best_seq: list[int] | None = None
    seq: list[int] = []
    states = 0

    def children(e: ServerlessEnv) -> list[tuple[Money, int]]:
        req = e.current_request()
        opts = [(e.action_cost(a, req).total, action_to_index(a, e.n_nodes))
                for a in e.feasible_actions()]
        opts.append((penalty, reject_index))
        opts.sort()
        return opts

    def dfs(partial: Money) -> None:
        nonlocal best_cost, best_seq, states
        if env.done:
            if best_cost is None or partial < best_cost:
                best_cost = partial
                best_seq = list(seq)
            return
        for cost, index in children(env):
            child_cost = partial + cost
            if prune and best_cost is not None and child_cost >= best_cost:
                break  # children are cost-sorted: the rest prune too
            states += 1
            if states > max_states:
                raise OracleLimitError(
                    f"expanded more than {max_states} states; "
                    "use a smaller instance or raise max_states")
            snap = env._snapshot()
            env.step_index(index)
            seq.append(index)
            dfs(child_cost)
            seq.pop()
            env._restore(snap)

    dfs(0)
    wall = time.perf_counter() - start

    # replay through a fresh environment: produces the episode log and
    # cross-checks the search's transition bookkeeping
    replay_env = ServerlessEnv(topology, catalog, cost_params,
                               keepalive_slots=keepalive_slots, f_cap=f_cap)
    replay_env.reset(trace)
    per_decision_us = wall * 1e6 / len(trace)
    for index in best_seq:
        replay_env.step_index(index, decision_us=per_decision_us)
    records = replay_env.episode_records
    replay_cost = sum(-r.reward for r in records)
    if replay_cost != best_cost:
        raise RuntimeError(
            f"oracle replay mismatch: search {best_cost}, replay {replay_cost}")
    return OracleResult(
        total_cost=best_cost,
        action_indices=list(best_seq),
        states_expanded=states,
        wall_time_s=wall,
        records=records,
    )


def relabel_episode(records: Sequence[EpisodeRecord], episode: int) -> list[EpisodeRecord]:
    """Rewrite the episode index, e.g. when merging per-trace oracle runs."""
    return [replace(r, episode=episode) for r in records]
