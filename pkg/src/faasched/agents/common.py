"""Shared agent machinery: transitions, replay, masked action distributions.

Action feasibility is enforced by masking rather than by penalizing illegal
choices: infeasible entries are excluded from argmax and carry zero
probability under the policy. The explicit reject action keeps every mask
non-empty.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..costs import MICRO_PER_DOLLAR, Money
from ..env import ServerlessEnv
from ..workload import Request


class TrainingDiverged(RuntimeError):
    """A parameter or loss became non-finite during training."""


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    done: bool
    mask_next: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring of transitions; oldest entries evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._ring: deque[Transition] = deque(maxlen=capacity)

    def push(self, transition: Transition) -> None:
        self._ring.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        idx = rng.integers(0, len(self._ring), size=batch_size)
        return [self._ring[i] for i in idx]

    def __len__(self) -> int:
        return len(self._ring)

    def __iter__(self):
        return iter(self._ring)


def masked_argmax(values: np.ndarray, mask: np.ndarray) -> int:
    """Index of the largest feasible value; ties resolve to the lowest index."""
    if not mask.any():
        raise ValueError("mask has no feasible action")
    masked = np.where(mask, values, -np.inf)
    return int(np.argmax(masked))


def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Log-probabilities with infeasible entries at -inf. Works on 1-D or 2-D."""
    z = np.where(mask, logits, -np.inf)
    zmax = np.max(z, axis=-1, keepdims=True)
    ez = np.exp(z - zmax)
    return z - zmax - np.log(np.sum(ez, axis=-1, keepdims=True))


def masked_probs(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.exp(masked_log_softmax(logits, mask))


def sample_masked(logits: np.ndarray, mask: np.ndarray,
                  rng: np.random.Generator) -> tuple[int, float]:
    """Draw an action from the masked softmax; returns (index, log-prob)."""
    logp = masked_log_softmax(logits, mask)
    p = np.exp(logp)
    a = int(rng.choice(len(p), p=p / p.sum()))
    return a, float(logp[a])


def entropy_from_logp(logp: np.ndarray) -> np.ndarray:
    """Shannon entropy per row of masked log-probabilities."""
    p = np.exp(logp)
    safe_logp = np.where(p > 0.0, logp, 0.0)  # avoid 0 * -inf
    return -np.sum(p * safe_logp, axis=-1)


@dataclass(frozen=True)
class EpisodeStat:
    episode: int
    total_cost: Money
    accepted: int
    n_requests: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.n_requests


class EpisodeSource:
    """Streams environment transitions across episode boundaries.

    `env_factory(i)` returns the (env, trace) pair for episode i; factories
    may hand back the same env instance every time. When an episode finishes,
    the source records its stats and silently resets into the next episode,
    so callers see an uninterrupted stream of at most `max_episodes`
    episodes. Rewards are surfaced in dollars (float) for learning.
    """

    def __init__(self, env_factory: Callable[[int], tuple[ServerlessEnv, list[Request]]],
                 max_episodes: int):
        self._factory = env_factory
        self.max_episodes = max_episodes
        self.completed: list[EpisodeStat] = []
        self.env: ServerlessEnv | None = None
        self._obs: np.ndarray | None = None
        self._mask: np.ndarray | None = None
        self._episode = 0
        self._cost: Money = 0
        self._accepted = 0
        self._steps = 0
        self.exhausted = max_episodes <= 0
        if not self.exhausted:
            self._begin(0)

    def _begin(self, episode: int) -> None:
        self.env, trace = self._factory(episode)
        self._obs = self.env.reset(trace)
        self._mask = self.env.feasible_mask()
        self._episode = episode
        self._cost = 0
        self._accepted = 0
        self._steps = 0

    def current(self) -> tuple[np.ndarray, np.ndarray]:
        if self.exhausted:
            raise RuntimeError("episode source exhausted")
        return self._obs, self._mask

    def step(self, action_index: int) -> tuple[float, np.ndarray, np.ndarray, bool]:
        """Apply the action; returns (reward_dollars, s_next, mask_next, done).

        On episode end, s_next/mask_next describe the terminal state (zeros,
        reject-only); the next current() is already the following episode.
        """
        if self.exhausted:
            raise RuntimeError("episode source exhausted")
        out = self.env.step_index(action_index)
        self._cost += -out.reward
        self._accepted += int(out.accepted)
        self._steps += 1
        reward = out.reward / MICRO_PER_DOLLAR
        if out.done:
            terminal_mask = self.env.feasible_mask()
            self.completed.append(EpisodeStat(
                episode=self._episode, total_cost=self._cost,
                accepted=self._accepted, n_requests=self._steps,
            ))
            if self._episode + 1 < self.max_episodes:
                self._begin(self._episode + 1)
            else:
                self.exhausted = True
                self._obs = None
                self._mask = None
            return reward, out.observation, terminal_mask, True
        self._obs = out.observation
        self._mask = self.env.feasible_mask()
        return reward, self._obs, self._mask, False
