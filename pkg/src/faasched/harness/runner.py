"""Experiment orchestration: scenario assembly, training, evaluation, compare.

Every scheduler in a comparison sees the same evaluation traces for a given
seed; training and evaluation draw from disjoint seed streams. Evaluation
episodes run sequentially here; outputs are keyed by (scheduler, episode) so
a parallel driver could merge them identically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Sequence

from ..agents import DqnPolicy, PpoPolicy, TrainResult, train
from ..baselines import (
    OracleResult,
    greedy_choose,
    oracle_optimal,
    random_episode,
    relabel_episode,
    run_episode,
)
from ..costs import parse_money
from ..env import EpisodeRecord, ServerlessEnv
from ..nn import Mlp
from ..topology import Topology, generate_topology, load_topology, save_topology
from ..workload import (
    FunctionType,
    Request,
    default_catalog,
    generate_trace,
    load_catalog,
    load_trace,
    save_catalog,
    save_trace,
)
from .config import Config, ConfigError
from .metrics import (
    SummaryStats,
    summarize,
    write_curve_csv,
    write_episode_csv,
    write_summary_csv,
    write_timing_csv,
)

# seed streams: topology, training traces, evaluation traces, agent training,
# random baseline
_STREAM_TOPOLOGY = 101
_STREAM_TRAIN_TRACE = 102
_STREAM_EVAL_TRACE = 103
_STREAM_AGENT = 104
_STREAM_RANDOM = 105


def _need_seed(seed: int | None, what: str) -> int:
    if seed is None:
        raise ConfigError(f"--seed is required: {what} is stochastic")
    return seed


@dataclass
class Scenario:
    topology: Topology
    catalog: list[FunctionType]
    config: Config

    def make_env(self) -> ServerlessEnv:
        return ServerlessEnv(
            self.topology, self.catalog, self.config.costs,
            keepalive_slots=self.config.env.keepalive_slots,
            f_cap=self.config.env.f_cap,
        )


def build_scenario(config: Config, seed: int | None) -> Scenario:
    t = config.topology
    if t.nodes_file is not None:
        if t.edges_file is not None:
            topology = load_topology(t.nodes_file, edges_file=t.edges_file)
        else:
            topology = load_topology(t.nodes_file, radius_m=t.radius_m)
    else:
        topology = generate_topology(
            t.n_nodes, t.classes, t.area_m, t.radius_m,
            seed=[_need_seed(seed, "topology generation"), _STREAM_TOPOLOGY],
        )

    if config.catalog.file is not None:
        catalog = load_catalog(config.catalog.file)
    else:
        catalog = default_catalog(config.costs, topology)
    if config.catalog.budget_override is not None:
        budget = parse_money(config.catalog.budget_override)
        catalog = [replace(fn, budget=budget) for fn in catalog]
    return Scenario(topology=topology, catalog=catalog, config=config)


def _trace(scenario: Scenario, stream: int, index: int, seed: int | None) -> list[Request]:
    trace_cfg = scenario.config.trace
    if trace_cfg.file is not None:
        return load_trace(trace_cfg.file, scenario.catalog)
    mix = trace_cfg.mix
    if mix is None:
        mix = tuple(1.0 / len(scenario.catalog) for _ in scenario.catalog)
    return generate_trace(
        scenario.topology, scenario.catalog, trace_cfg.horizon,
        trace_cfg.arrival_rate, mix,
        seed=[_need_seed(seed, "trace generation"), stream, index],
    )


def training_env_factory(scenario: Scenario, seed: int | None):
    """Factory for the training loop: fresh trace per episode, one shared env."""
    env = scenario.make_env()

    def factory(episode: int):
        return env, _trace(scenario, _STREAM_TRAIN_TRACE, episode, seed)

    return factory


def eval_traces(scenario: Scenario, episodes: int, seed: int | None) -> list[list[Request]]:
    return [_trace(scenario, _STREAM_EVAL_TRACE, e, seed) for e in range(episodes)]


def train_scheduler(scenario: Scenario, algo: str, seed: int | None) -> TrainResult:
    config = scenario.config
    hyper = config.dqn if algo == "dqn" else config.ppo
    return train(algo, training_env_factory(scenario, seed), hyper,
                 config.compare.train_episodes,
                 _need_seed(seed, f"{algo} training"))


def policy_for(result: TrainResult):
    if result.algo == "dqn":
        return DqnPolicy(result.models["q"])
    return PpoPolicy(result.models["policy"])


def policy_episode(env: ServerlessEnv, trace: Sequence[Request], policy) -> list[EpisodeRecord]:
    def choose(e: ServerlessEnv) -> int:
        return policy.select(e.encode_observation(), e.feasible_mask())

    return run_episode(env, trace, choose)


def evaluate_scheduler(
    scenario: Scenario,
    scheduler: str,
    traces: Sequence[list[Request]],
    seed: int | None,
    policy=None,
) -> list[EpisodeRecord]:
    """Run one scheduler over the shared evaluation traces; returns all records."""
    records: list[EpisodeRecord] = []
    compare_cfg = scenario.config.compare
    if scheduler == "oracle":
        for episode, trace in enumerate(traces):
            result = oracle_optimal(
                scenario.topology, scenario.catalog, scenario.config.costs, trace,
                max_states=compare_cfg.oracle_max_states,
                keepalive_slots=scenario.config.env.keepalive_slots,
                f_cap=scenario.config.env.f_cap,
            )
            records.extend(relabel_episode(result.records, episode))
        return records

    env = scenario.make_env()
    for episode, trace in enumerate(traces):
        if scheduler == "greedy":
            episode_records = run_episode(env, trace, greedy_choose)
        elif scheduler == "random":
            episode_records = random_episode(
                env, trace,
                seed=[_need_seed(seed, "random baseline"), _STREAM_RANDOM, episode])
        elif scheduler in ("dqn", "ppo"):
            if policy is None:
                raise ValueError(f"{scheduler} evaluation requires a trained policy")
            episode_records = policy_episode(env, trace, policy)
        else:
            raise ConfigError(f"unknown scheduler {scheduler!r}")
        records.extend(relabel_episode(episode_records, episode))
    return records


def _assert_shared_traces(per_scheduler: dict[str, list[EpisodeRecord]]) -> None:
    # every scheduler must have seen the identical request sequence
    reference = None
    for name, records in per_scheduler.items():
        key = [(r.episode, r.t, r.origin, r.function) for r in records]
        if reference is None:
            reference = key
        elif key != reference:
            raise RuntimeError(f"evaluation traces diverged for scheduler {name}")


def _save_models(result: TrainResult, models_dir: str) -> None:
    os.makedirs(models_dir, exist_ok=True)
    for name, net in result.models.items():
        net.save(os.path.join(models_dir, f"{result.algo}_{name}.npz"))


def load_policy(algo: str, models_dir: str):
    if algo == "dqn":
        return DqnPolicy(Mlp.load(os.path.join(models_dir, "dqn_q.npz")))
    if algo == "ppo":
        return PpoPolicy(Mlp.load(os.path.join(models_dir, "ppo_policy.npz")))
    raise ConfigError(f"unknown algorithm {algo!r}")


def run_compare(config: Config, seed: int | None, out_dir: str) -> list[tuple[str, SummaryStats]]:
    """Evaluate every configured scheduler on identical traces; write outputs.

    summary.csv carries the deterministic cost and acceptance columns;
    wall-clock decision times go to timing.csv.
    """
    scenario = build_scenario(config, seed)
    compare_cfg = config.compare
    traces = eval_traces(scenario, compare_cfg.eval_episodes, seed)

    os.makedirs(out_dir, exist_ok=True)
    episodes_dir = os.path.join(out_dir, "episodes")
    os.makedirs(episodes_dir, exist_ok=True)

    rows: list[tuple[str, SummaryStats]] = []
    per_scheduler: dict[str, list[EpisodeRecord]] = {}
    for scheduler in compare_cfg.schedulers:
        policy = None
        if scheduler in ("dqn", "ppo"):
            result = train_scheduler(scenario, scheduler, seed)
            curves_dir = os.path.join(out_dir, "curves")
            os.makedirs(curves_dir, exist_ok=True)
            write_curve_csv(os.path.join(curves_dir, f"{scheduler}.csv"), result.curve)
            _save_models(result, os.path.join(out_dir, "models"))
            policy = policy_for(result)
        records = evaluate_scheduler(scenario, scheduler, traces, seed, policy)
        per_scheduler[scheduler] = records
        write_episode_csv(os.path.join(episodes_dir, f"{scheduler}.csv"), records)
        rows.append((scheduler, summarize(records)))

    _assert_shared_traces(per_scheduler)
    write_summary_csv(os.path.join(out_dir, "summary.csv"), rows)
    write_timing_csv(os.path.join(out_dir, "timing.csv"), rows)
    return rows


def run_train(config: Config, algo: str, seed: int | None, out_dir: str) -> TrainResult:
    scenario = build_scenario(config, seed)
    result = train_scheduler(scenario, algo, seed)
    os.makedirs(out_dir, exist_ok=True)
    curves_dir = os.path.join(out_dir, "curves")
    os.makedirs(curves_dir, exist_ok=True)
    write_curve_csv(os.path.join(curves_dir, f"{algo}.csv"), result.curve)
    _save_models(result, os.path.join(out_dir, "models"))
    return result


def run_eval(config: Config, algo: str, models_dir: str, seed: int | None,
             out_dir: str) -> SummaryStats:
    scenario = build_scenario(config, seed)
    traces = eval_traces(scenario, config.compare.eval_episodes, seed)
    policy = load_policy(algo, models_dir)
    records = evaluate_scheduler(scenario, algo, traces, seed, policy)
    return _write_single(out_dir, algo, records)


def run_baseline(config: Config, scheduler: str, seed: int | None,
                 out_dir: str) -> SummaryStats:
    if scheduler not in ("greedy", "random"):
        raise ConfigError(f"baseline scheduler must be greedy or random, got {scheduler!r}")
    scenario = build_scenario(config, seed)
    traces = eval_traces(scenario, config.compare.eval_episodes, seed)
    records = evaluate_scheduler(scenario, scheduler, traces, seed)
    return _write_single(out_dir, scheduler, records)


def run_oracle(config: Config, seed: int | None, out_dir: str) -> list[OracleResult]:
    """Solve each evaluation trace exactly; writes optimum.csv plus the log."""
    import csv

    scenario = build_scenario(config, seed)
    traces = eval_traces(scenario, config.compare.eval_episodes, seed)
    os.makedirs(out_dir, exist_ok=True)
    results = []
    records: list[EpisodeRecord] = []
    for episode, trace in enumerate(traces):
        result = oracle_optimal(
            scenario.topology, scenario.catalog, config.costs, trace,
            max_states=config.compare.oracle_max_states,
            keepalive_slots=config.env.keepalive_slots, f_cap=config.env.f_cap,
        )
        results.append(result)
        records.extend(relabel_episode(result.records, episode))
    from ..costs import money_str

    with open(os.path.join(out_dir, "optimum.csv"), "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["episode", "total_cost", "n_requests", "states_expanded",
                         "wall_time_s"])
        for episode, result in enumerate(results):
            writer.writerow([episode, money_str(result.total_cost),
                             len(result.action_indices), result.states_expanded,
                             repr(result.wall_time_s)])
    episodes_dir = os.path.join(out_dir, "episodes")
    os.makedirs(episodes_dir, exist_ok=True)
    write_episode_csv(os.path.join(episodes_dir, "oracle.csv"), records)
    return results


def run_gen_topology(config: Config, seed: int | None, out_dir: str) -> Topology:
    scenario = build_scenario(config, seed)
    os.makedirs(out_dir, exist_ok=True)
    save_topology(scenario.topology, os.path.join(out_dir, "nodes.csv"),
                  os.path.join(out_dir, "edges.csv"))
    return scenario.topology


def run_gen_trace(config: Config, seed: int | None, out_dir: str) -> list[Request]:
    scenario = build_scenario(config, seed)
    trace = _trace(scenario, _STREAM_EVAL_TRACE, 0, seed)
    os.makedirs(out_dir, exist_ok=True)
    save_trace(os.path.join(out_dir, "trace.csv"), trace)
    save_catalog(os.path.join(out_dir, "catalog.csv"), scenario.catalog)
    return trace


def _write_single(out_dir: str, name: str, records: list[EpisodeRecord]) -> SummaryStats:
    os.makedirs(out_dir, exist_ok=True)
    episodes_dir = os.path.join(out_dir, "episodes")
    os.makedirs(episodes_dir, exist_ok=True)
    write_episode_csv(os.path.join(episodes_dir, f"{name}.csv"), records)
    stats = summarize(records)
    write_summary_csv(os.path.join(out_dir, "summary.csv"), [(name, stats)])
    write_timing_csv(os.path.join(out_dir, "timing.csv"), [(name, stats)])
    return stats
