"""Policy-gradient scheduler: clipped surrogate objective over masked softmax.

Rollouts sample actions from the policy restricted to feasible actions
(infeasible logits pinned at -inf). Updates maximize
mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A)) with rho the new/old probability
ratio, plus an entropy bonus; the critic regresses onto GAE returns.
Gradients with respect to the logits are computed analytically and pushed
through the network's reverse mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import Adam, Mlp
from .common import (
    EpisodeSource,
    entropy_from_logp,
    masked_argmax,
    masked_log_softmax,
    sample_masked,
)


@dataclass(frozen=True)
class PpoHyper:
    gamma: float = 0.99
    lr: float = 3e-4
    clip_ratio: float = 0.2
    rollout_steps: int = 2048
    epochs: int = 4
    minibatch_size: int = 256
    gae_lambda: float = 0.95
    vf_coef: float = 0.5
    ent_coef: float = 0.01
    hidden: tuple[int, ...] = (128, 128)

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.clip_ratio <= 0.0:
            raise ValueError("clip_ratio must be > 0")
        if not (0.0 <= self.gae_lambda <= 1.0):
            raise ValueError("gae_lambda must be in [0, 1]")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.rollout_steps < 1 or self.epochs < 1 or self.minibatch_size < 1:
            raise ValueError("rollout_steps, epochs, minibatch_size must be >= 1")


@dataclass
class Trajectory:
    observations: np.ndarray  # (T, obs)
    actions: np.ndarray       # (T,) int64
    logprobs: np.ndarray      # (T,) at sample time
    rewards: np.ndarray       # (T,) dollars
    values: np.ndarray        # (T,)
    dones: np.ndarray         # (T,) bool
    masks: np.ndarray         # (T, n_actions) bool
    bootstrap_value: float    # V(s_T); ignored when the last step is terminal

    def __len__(self) -> int:
        return len(self.actions)


def ppo_rollout(source: EpisodeSource, policy_net: Mlp, value_net: Mlp,
                steps: int, rng: np.random.Generator) -> Trajectory:
    """Collect up to `steps` transitions, resetting across episode ends.

    Stops early if the source runs out of episodes. The bootstrap value is
    the critic's estimate of the state following the last stored transition
    (zeroed by the done flag when that transition ended an episode).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    obs_l, act_l, logp_l, rew_l, val_l, done_l, mask_l = [], [], [], [], [], [], []
    for _ in range(steps):
        if source.exhausted:
            break
        obs, mask = source.current()
        logits = policy_net.forward(obs)
        a, logp = sample_masked(logits, mask, rng)
        value = float(value_net.forward(obs)[0])
        reward, _, _, done = source.step(a)
        obs_l.append(obs)
        act_l.append(a)
        logp_l.append(logp)
        rew_l.append(reward)
        val_l.append(value)
        done_l.append(done)
        mask_l.append(mask)
    if not obs_l:
        return Trajectory(np.zeros((0, 0)), np.zeros(0, dtype=np.int64), np.zeros(0),
                          np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool),
                          np.zeros((0, 0), dtype=bool), 0.0)
    if done_l[-1] or source.exhausted:
        bootstrap = 0.0
    else:
        next_obs, _ = source.current()
        bootstrap = float(value_net.forward(next_obs)[0])
    return Trajectory(
        observations=np.stack(obs_l),
        actions=np.array(act_l, dtype=np.int64),
        logprobs=np.array(logp_l),
        rewards=np.array(rew_l),
        values=np.array(val_l),
        dones=np.array(done_l, dtype=bool),
        masks=np.stack(mask_l),
        bootstrap_value=bootstrap,
    )


def compute_advantages(trajectory: Trajectory, gamma: float,
                       lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation.

    delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t)
    A_t     = delta_t + gamma*lam*(1-done_t)*A_{t+1}
    returns_t = A_t + V(s_t)
    """
    T = len(trajectory)
    adv = np.zeros(T)
    running = 0.0
    for t in range(T - 1, -1, -1):
        v_next = trajectory.bootstrap_value if t == T - 1 else trajectory.values[t + 1]
        nonterminal = 1.0 - float(trajectory.dones[t])
        delta = (trajectory.rewards[t] + gamma * v_next * nonterminal
                 - trajectory.values[t])
        running = delta + gamma * lam * nonterminal * running
        adv[t] = running
    return adv, adv + trajectory.values


@dataclass(frozen=True)
class PpoUpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


def clipped_surrogate(ratio: np.ndarray, advantage: np.ndarray,
                      clip_ratio: float) -> np.ndarray:
    """Per-sample objective min(rho*A, clip(rho)*A)."""
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    return np.minimum(ratio * advantage, clipped * advantage)


def ppo_update(policy_net: Mlp, value_net: Mlp, policy_opt: Adam, value_opt: Adam,
               trajectory: Trajectory, hyper: PpoHyper,
               rng: np.random.Generator) -> PpoUpdateStats:
    """Several epochs of minibatch updates on one trajectory.

    Advantages are normalized once per update (zero mean, unit std). Both
    networks are stepped; returns mean diagnostics across minibatches.
    """
    T = len(trajectory)
    if T == 0:
        raise ValueError("trajectory is empty")
    adv, returns = compute_advantages(trajectory, hyper.gamma, hyper.gae_lambda)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)

    n_actions = trajectory.masks.shape[1]
    p_losses, v_losses, entropies, clipfracs = [], [], [], []
    for _ in range(hyper.epochs):
        order = rng.permutation(T)
        for start in range(0, T, hyper.minibatch_size):
            mb = order[start:start + hyper.minibatch_size]
            obs = trajectory.observations[mb]
            acts = trajectory.actions[mb]
            masks = trajectory.masks[mb]
            logp_old = trajectory.logprobs[mb]
            adv_mb = adv[mb]
            ret_mb = returns[mb]
            B = len(mb)
            rows = np.arange(B)

            logits, cache = policy_net.forward_cache(obs)
            logp_all = masked_log_softmax(logits, masks)
            probs = np.exp(logp_all)
            logp_new = logp_all[rows, acts]
            ratio = np.exp(logp_new - logp_old)

            surr = clipped_surrogate(ratio, adv_mb, hyper.clip_ratio)
            entropy = entropy_from_logp(logp_all)
            policy_loss = -float(np.mean(surr)) - hyper.ent_coef * float(np.mean(entropy))

            # d(-mean surr)/dlogits: the ratio branch is active when
            # rho*A <= clip(rho)*A; the clipped branch has zero gradient.
            clipped = np.clip(ratio, 1.0 - hyper.clip_ratio, 1.0 + hyper.clip_ratio)
            active = (ratio * adv_mb) <= (clipped * adv_mb)
            coef = np.where(active, -(adv_mb * ratio) / B, 0.0)
            onehot = np.zeros_like(probs)
            onehot[rows, acts] = 1.0
            grad_logits = coef[:, None] * (onehot - probs)
            # entropy bonus: dH/dlogit_k = -p_k (logp_k + H); masked entries
            # have p=0 and contribute nothing (logp pinned to avoid 0*inf)
            safe_logp = np.where(probs > 0.0, logp_all, 0.0)
            grad_logits += (hyper.ent_coef / B) * probs * (safe_logp + entropy[:, None])

            grads, _ = policy_net.backward(cache, grad_logits)
            policy_net.apply_gradients(policy_opt, grads)

            v, cache_v = value_net.forward_cache(obs)
            v = v[:, 0]
            diff = v - ret_mb
            value_loss = float(np.mean(diff * diff))
            grad_v = (hyper.vf_coef * 2.0 * diff / B)[:, None]
            v_grads, _ = value_net.backward(cache_v, grad_v)
            value_net.apply_gradients(value_opt, v_grads)

            p_losses.append(policy_loss)
            v_losses.append(value_loss)
            entropies.append(float(np.mean(entropy)))
            clipfracs.append(float(np.mean(np.abs(ratio - 1.0) > hyper.clip_ratio)))

    return PpoUpdateStats(
        policy_loss=float(np.mean(p_losses)),
        value_loss=float(np.mean(v_losses)),
        entropy=float(np.mean(entropies)),
        clip_fraction=float(np.mean(clipfracs)),
    )


class PpoPolicy:
    """Deterministic (argmax) wrapper used for evaluation."""

    def __init__(self, policy_net: Mlp):
        self.policy_net = policy_net

    def select(self, observation: np.ndarray, mask: np.ndarray) -> int:
        return masked_argmax(self.policy_net.forward(observation), mask)
