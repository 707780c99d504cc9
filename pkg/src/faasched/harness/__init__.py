from .config import Config, ConfigError, load_config
from .metrics import (
    EPISODE_LOG_HEADER,
    SummaryStats,
    nearest_rank,
    summarize,
    write_curve_csv,
    write_episode_csv,
    write_summary_csv,
    write_timing_csv,
)
from .runner import (
    Scenario,
    build_scenario,
    eval_traces,
    evaluate_scheduler,
    load_policy,
    policy_episode,
    policy_for,
    run_baseline,
    run_compare,
    run_eval,
    run_gen_topology,
    run_gen_trace,
    run_oracle,
    run_train,
    train_scheduler,
    training_env_factory,
)

__all__ = [
    "Config",
    "ConfigError",
    "EPISODE_LOG_HEADER",
    "Scenario",
    "SummaryStats",
    "build_scenario",
    "eval_traces",
    "evaluate_scheduler",
    "load_config",
    "load_policy",
    "nearest_rank",
    "policy_episode",
    "policy_for",
    "run_baseline",
    "run_compare",
    "run_eval",
    "run_gen_topology",
    "run_gen_trace",
    "run_oracle",
    "run_train",
    "summarize",
    "train_scheduler",
    "training_env_factory",
    "write_curve_csv",
    "write_episode_csv",
    "write_summary_csv",
    "write_timing_csv",
]
