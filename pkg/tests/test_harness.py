import numpy as np
import pytest

from faasched.cli import main
from faasched.env import EpisodeRecord
from faasched.harness import (
    ConfigError,
    load_config,
    nearest_rank,
    run_compare,
    summarize,
)


def record(total, accepted=True, episode=0, t=0, decision_us=10.0):
    if accepted:
        return EpisodeRecord(episode=episode, t=t, origin=0, function=0, target=0,
                             spawned=True, accepted=True, c_s=0, c_e=total, c_t=0,
                             total=total, reward=-total, decision_us=decision_us)
    return EpisodeRecord(episode=episode, t=t, origin=0, function=0, target=None,
                         spawned=None, accepted=False, c_s=None, c_e=None,
                         c_t=None, total=None, reward=-5_000_000,
                         decision_us=decision_us)


MICRO_ARGS = [
    "--set", "topology.n_nodes=3", "--set", "topology.radius_m=1500",
    "--set", "trace.horizon=4", "--set", "trace.arrival_rate=1.2",
]


class TestSummarize:
    def test_nearest_rank_on_1_to_100(self):
        totals = list(range(1, 101))
        stats = summarize([record(v) for v in totals])
        assert stats.p95 == 95
        assert stats.p50 == 50
        assert stats.p5 == 5
        assert stats.p25 == 25

    def test_single_record_all_percentiles_equal(self):
        stats = summarize([record(7)])
        assert (stats.p5, stats.p25, stats.p50, stats.p75, stats.p95) == (7,) * 5
        assert stats.mean == 7

    def test_acceptance_rate_exact(self):
        records = [record(10) for _ in range(8)] + [record(0, accepted=False)] * 2
        stats = summarize(records)
        assert stats.acceptance_rate == 0.8

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        records = [record(int(v), accepted=bool(a), decision_us=float(d))
                   for v, a, d in zip(rng.integers(1, 1000, 50),
                                      rng.random(50) < 0.7,
                                      rng.random(50) * 100)]
        base = summarize(records)
        for seed in range(5):
            shuffled = list(records)
            np.random.default_rng(seed).shuffle(shuffled)
            assert summarize(shuffled) == base

    def test_all_rejected_has_no_cost_stats(self):
        stats = summarize([record(0, accepted=False)] * 4)
        assert stats.mean is None and stats.p95 is None
        assert stats.acceptance_rate == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_decision_time_sums(self):
        stats = summarize([record(5, decision_us=100.0),
                           record(6, decision_us=50.0)])
        assert stats.total_decision_time_s == pytest.approx(150e-6)
        assert stats.per_decision_time_us == pytest.approx(75.0)

    def test_nearest_rank_exact_integer_math(self):
        values = list(range(1, 21))
        assert nearest_rank(values, 5) == 1      # ceil(1.0) = 1
        assert nearest_rank(values, 50) == 10
        assert nearest_rank(values, 95) == 19
        assert nearest_rank([42], 5) == 42


class TestConfig:
    def test_defaults_load(self):
        config = load_config(None, [])
        assert config.dqn.gamma == 0.99
        assert config.compare.eval_episodes == 50

    def test_unknown_key_named(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[topology]\nfrobnicate = 3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="topology.frobnicate"):
            load_config(p, [])

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[nope]\nx = 1\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="nope"):
            load_config(p, [])

    def test_gamma_range_enforced(self):
        with pytest.raises(ConfigError, match="gamma"):
            load_config(None, ["dqn.gamma=1.5"])

    def test_overrides_apply(self):
        config = load_config(None, ["ppo.clip_ratio=0.3", "env.keepalive_slots=4"])
        assert config.ppo.clip_ratio == 0.3
        assert config.env.keepalive_slots == 4

    def test_file_and_overrides_compose(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[dqn]\ngamma = 0.9\nbatch_size = 16\n", encoding="utf-8")
        config = load_config(p, ["dqn.gamma=0.95"])
        assert config.dqn.gamma == 0.95
        assert config.dqn.batch_size == 16

    def test_bad_scheduler_rejected(self):
        with pytest.raises(ConfigError, match="scheduler"):
            load_config(None, ["compare.schedulers=greedy,quantum"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.ini", [])


class TestCli:
    def test_bad_config_value_exits_2(self, tmp_path):
        code = main(["train", "--algo", "dqn", "--set", "dqn.gamma=1.5",
                     "--seed", "1", "--out", str(tmp_path)])
        assert code == 2

    def test_unknown_key_exits_2(self, tmp_path):
        code = main(["compare", "--set", "dqn.warp_speed=9",
                     "--seed", "1", "--out", str(tmp_path)])
        assert code == 2

    def test_missing_seed_for_stochastic_exits_2(self, tmp_path):
        code = main(["gen-topology", "--out", str(tmp_path)])
        assert code == 2

    def test_gen_topology_and_trace(self, tmp_path):
        out = tmp_path / "gen"
        assert main(["gen-topology", *MICRO_ARGS, "--seed", "3",
                     "--out", str(out)]) == 0
        assert (out / "nodes.csv").exists() and (out / "edges.csv").exists()
        assert main(["gen-trace", *MICRO_ARGS, "--seed", "3",
                     "--out", str(out)]) == 0
        assert (out / "trace.csv").exists() and (out / "catalog.csv").exists()

    def test_oracle_micro_instance(self, tmp_path):
        out = tmp_path / "oracle"
        code = main(["oracle", *MICRO_ARGS,
                     "--set", "trace.horizon=6",
                     "--set", "compare.eval_episodes=2",
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        assert (out / "optimum.csv").exists()
        assert (out / "episodes" / "oracle.csv").exists()

    def test_compare_deterministic_summary(self, tmp_path):
        args = ["compare", *MICRO_ARGS,
                "--set", "compare.schedulers=greedy,random",
                "--set", "compare.eval_episodes=4",
                "--seed", "11"]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
        assert (out1 / "timing.csv").exists()

    def test_baseline_writes_outputs(self, tmp_path):
        out = tmp_path / "base"
        code = main(["baseline", "--scheduler", "greedy", *MICRO_ARGS,
                     "--set", "compare.eval_episodes=3",
                     "--seed", "2", "--out", str(out)])
        assert code == 0
        assert (out / "summary.csv").exists()
        assert (out / "episodes" / "greedy.csv").exists()

    def test_train_then_eval_round_trip(self, tmp_path):
        out = tmp_path / "t"
        code = main(["train", "--algo", "dqn", *MICRO_ARGS,
                     "--set", "compare.train_episodes=3",
                     "--set", "dqn.hidden=16", "--set", "dqn.batch_size=8",
                     "--seed", "4", "--out", str(out)])
        assert code == 0
        assert (out / "models" / "dqn_q.npz").exists()
        assert (out / "curves" / "dqn.csv").exists()
        code = main(["eval", "--algo", "dqn", "--models", str(out / "models"),
                     *MICRO_ARGS, "--set", "compare.eval_episodes=2",
                     "--seed", "4", "--out", str(tmp_path / "e")])
        assert code == 0
        assert (tmp_path / "e" / "summary.csv").exists()


class TestCompareInternals:
    def test_rows_match_schedulers_and_factor(self, tmp_path):
        config = load_config(None, [
            "topology.n_nodes=3", "topology.radius_m=1500",
            "trace.horizon=4", "trace.arrival_rate=1.2",
            "compare.schedulers=greedy,oracle", "compare.eval_episodes=2",
        ])
        rows = run_compare(config, seed=8, out_dir=str(tmp_path / "cmp"))
        names = [name for name, _ in rows]
        assert names == ["greedy", "oracle"]
        by_name = dict(rows)
        if by_name["greedy"].mean is not None and by_name["oracle"].mean is not None:
            assert by_name["oracle"].mean <= by_name["greedy"].mean
