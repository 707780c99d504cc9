"""Training loop shared by the two learning schedulers.

The loop is the classic observe / select / reward / update cycle, run for a
fixed episode budget over environments supplied by a factory. Single-threaded
and deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..costs import Money
from ..env import ServerlessEnv
from ..nn import Adam, Mlp
from ..workload import Request
from .common import EpisodeSource, ReplayBuffer, Transition, TrainingDiverged
from .dqn import DqnHyper, dqn_select, dqn_train_step, epsilon_by_step, target_sync
from .ppo import PpoHyper, ppo_rollout, ppo_update

EnvFactory = Callable[[int], tuple[ServerlessEnv, list[Request]]]

# rng stream tags so the exploration, init, and update streams never overlap
_STREAM_ACT = 11
_STREAM_INIT_A = 12
_STREAM_INIT_B = 13
_STREAM_UPDATE = 14


@dataclass(frozen=True)
class CurveRecord:
    episode: int
    total_cost: Money
    acceptance_rate: float
    mean_loss: float
    epsilon_or_clipfrac: float


@dataclass
class TrainResult:
    algo: str
    models: dict[str, Mlp]
    curve: list[CurveRecord]


def train(algo: str, env_factory: EnvFactory, hyper, episodes: int,
          seed: int) -> TrainResult:
    """Train a scheduler for `episodes` episodes; returns models and curve.

    `env_factory(i)` must be callable for i=0 even when episodes=0 (it sizes
    the networks). Aborts with TrainingDiverged if parameters go non-finite.
    """
    if algo == "dqn":
        if not isinstance(hyper, DqnHyper):
            raise TypeError("dqn training requires DqnHyper")
        return _train_dqn(env_factory, hyper, episodes, seed)
    if algo == "ppo":
        if not isinstance(hyper, PpoHyper):
            raise TypeError("ppo training requires PpoHyper")
        return _train_ppo(env_factory, hyper, episodes, seed)
    raise ValueError(f"unknown algorithm {algo!r}")


def _check_finite(net: Mlp, what: str) -> None:
    if not net.all_finite():
        raise TrainingDiverged(f"non-finite parameter in {what}")


def _train_dqn(env_factory: EnvFactory, hyper: DqnHyper, episodes: int,
               seed: int) -> TrainResult:
    env0, _ = env_factory(0)
    dims = [env0.observation_size, *hyper.hidden, env0.n_actions]
    qnet = Mlp.init(dims, seed=[seed, _STREAM_INIT_A])
    target_net = qnet.copy()
    optimizer = Adam(hyper.lr)
    buffer = ReplayBuffer(hyper.buffer_capacity)
    rng = np.random.default_rng([seed, _STREAM_ACT])

    curve: list[CurveRecord] = []
    source = EpisodeSource(env_factory, max_episodes=episodes)
    global_step = 0
    train_steps = 0
    losses: list[float] = []
    while not source.exhausted:
        obs, mask = source.current()
        epsilon = epsilon_by_step(hyper, global_step)
        action = dqn_select(qnet, obs, mask, epsilon, rng)
        reward, obs_next, mask_next, done = source.step(action)
        buffer.push(Transition(obs, action, reward, obs_next, done, mask_next))
        if len(buffer) >= hyper.batch_size:
            loss = dqn_train_step(qnet, target_net, optimizer,
                                  buffer.sample(hyper.batch_size, rng), hyper)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"dqn loss became {loss}")
            losses.append(loss)
            train_steps += 1
            if train_steps % hyper.target_sync_period == 0:
                target_sync(qnet, target_net)
        global_step += 1
        if done:
            stat = source.completed[-1]
            curve.append(CurveRecord(
                episode=stat.episode, total_cost=stat.total_cost,
                acceptance_rate=stat.acceptance_rate,
                mean_loss=float(np.mean(losses)) if losses else 0.0,
                epsilon_or_clipfrac=epsilon_by_step(hyper, global_step),
            ))
            losses = []
            _check_finite(qnet, "dqn q-network")
    return TrainResult(algo="dqn", models={"q": qnet}, curve=curve)


def _train_ppo(env_factory: EnvFactory, hyper: PpoHyper, episodes: int,
               seed: int) -> TrainResult:
    env0, _ = env_factory(0)
    policy_net = Mlp.init([env0.observation_size, *hyper.hidden, env0.n_actions],
                          seed=[seed, _STREAM_INIT_A])
    value_net = Mlp.init([env0.observation_size, *hyper.hidden, 1],
                         seed=[seed, _STREAM_INIT_B])
    policy_opt = Adam(hyper.lr)
    value_opt = Adam(hyper.lr)
    act_rng = np.random.default_rng([seed, _STREAM_ACT])
    update_rng = np.random.default_rng([seed, _STREAM_UPDATE])

    curve: list[CurveRecord] = []
    source = EpisodeSource(env_factory, max_episodes=episodes)
    reported = 0
    while not source.exhausted:
        trajectory = ppo_rollout(source, policy_net, value_net,
                                 hyper.rollout_steps, act_rng)
        if len(trajectory) == 0:
            break
        stats = ppo_update(policy_net, value_net, policy_opt, value_opt,
                           trajectory, hyper, update_rng)
        _check_finite(policy_net, "ppo policy network")
        _check_finite(value_net, "ppo value network")
        for stat in source.completed[reported:]:
            curve.append(CurveRecord(
                episode=stat.episode, total_cost=stat.total_cost,
                acceptance_rate=stat.acceptance_rate,
                mean_loss=stats.policy_loss + stats.value_loss,
                epsilon_or_clipfrac=stats.clip_fraction,
            ))
        reported = len(source.completed)
    return TrainResult(algo="ppo",
                       models={"policy": policy_net, "value": value_net},
                       curve=curve)
