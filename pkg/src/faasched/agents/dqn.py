"""Value-based scheduler: Q-network with experience replay and a target net.

Action selection is epsilon-greedy restricted to feasible actions. Training
regresses Q(s,a) onto the one-step bootstrap target, where the max over next
actions ranges only over the recorded feasibility mask of the next state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import Adam, Mlp
from .common import Transition, masked_argmax


@dataclass(frozen=True)
class DqnHyper:
    gamma: float = 0.99
    lr: float = 1e-3
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 20_000
    batch_size: int = 64
    target_sync_period: int = 500
    buffer_capacity: int = 50_000
    hidden: tuple[int, ...] = (128, 128)

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        for name in ("epsilon_start", "epsilon_end"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.epsilon_decay_steps < 1 or self.batch_size < 1:
            raise ValueError("epsilon_decay_steps and batch_size must be >= 1")
        if self.target_sync_period < 1 or self.buffer_capacity < 1:
            raise ValueError("target_sync_period and buffer_capacity must be >= 1")


def epsilon_by_step(hyper: DqnHyper, step: int) -> float:
    """Linear schedule from epsilon_start to epsilon_end over decay_steps."""
    frac = min(max(step, 0) / hyper.epsilon_decay_steps, 1.0)
    return hyper.epsilon_start + frac * (hyper.epsilon_end - hyper.epsilon_start)


def dqn_select(qnet: Mlp, observation: np.ndarray, mask: np.ndarray,
               epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over feasible actions; greedy ties go to the lowest index."""
    feasible = np.flatnonzero(mask)
    if feasible.size == 0:
        raise ValueError("mask has no feasible action")
    if rng.random() < epsilon:
        return int(feasible[rng.integers(0, feasible.size)])
    return masked_argmax(qnet.forward(observation), mask)


def bellman_targets(rewards: np.ndarray, gamma: float, q_next: np.ndarray,
                    mask_next: np.ndarray, dones: np.ndarray) -> np.ndarray:
    """y = r + gamma * max over feasible a' of Q(s', a'); y = r at terminals."""
    masked = np.where(mask_next, q_next, -np.inf)
    max_next = np.max(masked, axis=1)
    return np.where(dones, rewards, rewards + gamma * max_next)


def dqn_train_step(qnet: Mlp, target_net: Mlp, optimizer: Adam,
                   batch: list[Transition], hyper: DqnHyper) -> float:
    """One gradient step on the mean squared Bellman error; returns the loss."""
    if not batch:
        raise ValueError("batch must be non-empty")
    s = np.stack([tr.s for tr in batch])
    a = np.array([tr.a for tr in batch], dtype=np.int64)
    r = np.array([tr.r for tr in batch])
    s_next = np.stack([tr.s_next for tr in batch])
    dones = np.array([tr.done for tr in batch], dtype=bool)
    mask_next = np.stack([tr.mask_next for tr in batch])

    q_next = target_net.forward(s_next)
    y = bellman_targets(r, hyper.gamma, q_next, mask_next, dones)

    q, cache = qnet.forward_cache(s)
    rows = np.arange(len(batch))
    diff = q[rows, a] - y
    loss = float(np.mean(diff * diff))
    grad_q = np.zeros_like(q)
    grad_q[rows, a] = 2.0 * diff / len(batch)
    grads, _ = qnet.backward(cache, grad_q)
    qnet.apply_gradients(optimizer, grads)
    return loss


def target_sync(qnet: Mlp, target_net: Mlp) -> None:
    """Hard-copy the online parameters into the target network."""
    target_net.copy_from(qnet)


class DqnPolicy:
    """Greedy (epsilon=0) wrapper used for evaluation."""

    def __init__(self, qnet: Mlp):
        self.qnet = qnet

    def select(self, observation: np.ndarray, mask: np.ndarray) -> int:
        return masked_argmax(self.qnet.forward(observation), mask)
