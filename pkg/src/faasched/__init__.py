"""Cost-aware serverless function placement on heterogeneous edge networks.

Simulator, trainable DQN/PPO schedulers, greedy/random baselines, and an
exact branch-and-bound oracle for desk-scale verification.
"""

from .costs import CostBreakdown, CostParams, Money, UnroutableError, money_str, to_micro
from .env import (
    Action,
    Container,
    EnvError,
    EpisodeRecord,
    ServerlessEnv,
    StepOutcome,
    action_to_index,
    index_to_action,
)
from .topology import EdgeNode, Topology, TopologyError, generate_topology, load_topology, save_topology
from .workload import (
    FunctionType,
    Request,
    WorkloadError,
    default_catalog,
    generate_trace,
    load_catalog,
    load_trace,
    save_catalog,
    save_trace,
)

__version__ = "0.1.0"
