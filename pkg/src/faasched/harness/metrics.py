"""Episode-log statistics and the CSV surfaces of the experiment harness.

Percentiles use the nearest-rank rule on the ascending accepted-request
totals: the p-th percentile is element ceil(p*N/100) (1-based). All money
columns are exact decimal dollars; cost/acceptance outputs are bit-for-bit
reproducible, decision-time outputs are wall-clock and are kept in a
separate file so deterministic outputs stay byte-comparable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..agents.train import CurveRecord
from ..costs import Money, money_str
from ..env import EpisodeRecord

EPISODE_LOG_HEADER = [
    "episode", "t", "origin", "function", "target", "spawned", "accepted",
    "c_s", "c_e", "c_t", "total", "reward", "decision_us",
]
SUMMARY_HEADER = [
    "scheduler", "mean", "p5", "p25", "p50", "p75", "p95",
    "acceptance_rate", "factor_vs_best",
]
TIMING_HEADER = ["scheduler", "total_decision_time_s", "per_decision_time_us"]
CURVE_HEADER = ["episode", "total_cost", "acceptance_rate", "mean_loss",
                "epsilon_or_clipfrac"]

PERCENTILE_LEVELS = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class SummaryStats:
    """Distribution of accepted-placement costs plus acceptance and timing.

    Cost fields are None when no request was accepted.
    """

    mean: Money | None
    p5: Money | None
    p25: Money | None
    p50: Money | None
    p75: Money | None
    p95: Money | None
    acceptance_rate: float
    total_decision_time_s: float
    per_decision_time_us: float


def nearest_rank(sorted_values: Sequence[Money], percentile: int) -> Money:
    """Nearest-rank percentile of an ascending sequence (exact integer math)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty sequence")
    rank = max(1, -(-percentile * n // 100))  # ceil(p*n/100), 1-based
    return sorted_values[rank - 1]


def summarize(records: Sequence[EpisodeRecord]) -> SummaryStats:
    """Aggregate one scheduler's episode logs into a summary row."""
    if not records:
        raise ValueError("no records to summarize")
    accepted_totals = sorted(r.total for r in records if r.accepted)
    if accepted_totals:
        mean = int(round(Fraction(sum(accepted_totals), len(accepted_totals))))
        pcts = {p: nearest_rank(accepted_totals, p) for p in PERCENTILE_LEVELS}
    else:
        mean = None
        pcts = {p: None for p in PERCENTILE_LEVELS}
    n_accepted = sum(1 for r in records if r.accepted)
    # fsum is exactly rounded, which keeps the result permutation-invariant
    total_us = math.fsum(r.decision_us for r in records)
    return SummaryStats(
        mean=mean,
        p5=pcts[5], p25=pcts[25], p50=pcts[50], p75=pcts[75], p95=pcts[95],
        acceptance_rate=n_accepted / len(records),
        total_decision_time_s=total_us / 1e6,
        per_decision_time_us=total_us / len(records),
    )


def _money_cell(value: Money | None) -> str:
    return "" if value is None else money_str(value)


def write_episode_csv(path, records: Sequence[EpisodeRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EPISODE_LOG_HEADER)
        for r in records:
            writer.writerow([
                r.episode, r.t, r.origin, r.function,
                "" if r.target is None else r.target,
                "" if r.spawned is None else int(r.spawned),
                int(r.accepted),
                _money_cell(r.c_s), _money_cell(r.c_e), _money_cell(r.c_t),
                _money_cell(r.total), money_str(r.reward), repr(r.decision_us),
            ])


def write_summary_csv(path, rows: Sequence[tuple[str, SummaryStats]]) -> None:
    """Deterministic summary table; appends the mean cost factor vs the best row."""
    means = [s.mean for _, s in rows if s.mean is not None]
    best = min(means) if means else None
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for name, s in rows:
            if s.mean is not None and best:
                factor = repr(s.mean / best)
            else:
                factor = ""
            writer.writerow([
                name, _money_cell(s.mean),
                _money_cell(s.p5), _money_cell(s.p25), _money_cell(s.p50),
                _money_cell(s.p75), _money_cell(s.p95),
                repr(s.acceptance_rate), factor,
            ])


def write_timing_csv(path, rows: Sequence[tuple[str, SummaryStats]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TIMING_HEADER)
        for name, s in rows:
            writer.writerow([name, repr(s.total_decision_time_s),
                             repr(s.per_decision_time_us)])


def write_curve_csv(path, curve: Sequence[CurveRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for c in curve:
            writer.writerow([c.episode, money_str(c.total_cost),
                             repr(c.acceptance_rate), repr(c.mean_loss),
                             repr(c.epsilon_or_clipfrac)])
