from .common import (
    EpisodeSource,
    EpisodeStat,
    ReplayBuffer,
    TrainingDiverged,
    Transition,
    entropy_from_logp,
    masked_argmax,
    masked_log_softmax,
    masked_probs,
    sample_masked,
)
from .dqn import (
    DqnHyper,
    DqnPolicy,
    bellman_targets,
    dqn_select,
    dqn_train_step,
    epsilon_by_step,
    target_sync,
)
from .ppo import (
    PpoHyper,
    PpoPolicy,
    PpoUpdateStats,
    Trajectory,
    clipped_surrogate,
    compute_advantages,
    ppo_rollout,
    ppo_update,
)
from .train import CurveRecord, EnvFactory, TrainResult, train

__all__ = [
    "CurveRecord",
    "DqnHyper",
    "DqnPolicy",
    "EnvFactory",
    "EpisodeSource",
    "EpisodeStat",
    "PpoHyper",
    "PpoPolicy",
    "PpoUpdateStats",
    "ReplayBuffer",
    "TrainResult",
    "TrainingDiverged",
    "Trajectory",
    "Transition",
    "bellman_targets",
    "clipped_surrogate",
    "compute_advantages",
    "dqn_select",
    "dqn_train_step",
    "entropy_from_logp",
    "epsilon_by_step",
    "masked_argmax",
    "masked_log_softmax",
    "masked_probs",
    "ppo_rollout",
    "ppo_update",
    "sample_masked",
    "target_sync",
    "train",
]
