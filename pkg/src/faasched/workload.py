"""Function catalog and request traces.

Requests are independent single-function invocations. Traces can be loaded
from CSV or generated synthetically with Poisson arrivals, uniform origins,
and a configurable type mix; both paths yield a list sorted by time slot,
presented to the environment one request per decision step.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .costs import CostParams, Money, money_str, parse_money
from .topology import DEFAULT_NODE_CLASSES, Topology

TRACE_HEADER = ["t", "origin_node", "function_id"]
TRACE_HEADER_BUDGET = TRACE_HEADER + ["budget"]
CATALOG_HEADER = ["function_id", "mem_mb", "duration_slots", "budget"]

DEFAULT_FUNCTION_SIZES_MB = (20, 100, 180, 250)


class WorkloadError(ValueError):
    """Malformed trace/catalog input or invalid generator parameters."""


@dataclass(frozen=True)
class FunctionType:
    """One container type. `budget` is micro-dollars; None means unlimited."""

    id: int
    mem_mb: int
    duration_slots: int
    budget: Money | None

    def __post_init__(self):
        if self.mem_mb <= 0:
            raise WorkloadError(f"function {self.id}: mem_mb must be > 0")
        if self.duration_slots < 1:
            raise WorkloadError(f"function {self.id}: duration_slots must be >= 1")
        if self.budget is not None and self.budget <= 0:
            raise WorkloadError(f"function {self.id}: budget must be > 0")


@dataclass(frozen=True)
class Request:
    t: int
    origin: int
    fn_type: int
    budget: Money | None


def default_catalog(
    cost_params: CostParams | None = None,
    topology: Topology | None = None,
) -> list[FunctionType]:
    """Four container types with sizes spanning 20-250 MB, duration one slot.

    The per-type budget defaults to 3x the mean running cost across the
    reference node classes (or the given topology's nodes), which keeps both
    the accept and the reject path reachable under the default coefficients.
    """
    from .costs import running_cost
    from .topology import EdgeNode

    params = cost_params or CostParams()
    if topology is not None:
        ref_nodes = topology.nodes
    else:
        ref_nodes = tuple(
            EdgeNode(id=i, x_m=0.0, y_m=0.0, cpu_ghz=cpu, mem_mb=mem)
            for i, (cpu, mem) in enumerate(DEFAULT_NODE_CLASSES)
        )
    catalog = []
    for fid, mem_mb in enumerate(DEFAULT_FUNCTION_SIZES_MB):
        fn = FunctionType(id=fid, mem_mb=mem_mb, duration_slots=1, budget=None)
        run_costs = [running_cost(params, fn, node) for node in ref_nodes]
        budget = round(3 * Fraction(sum(run_costs), len(run_costs)))
        catalog.append(replace(fn, budget=int(budget)))
    return catalog


def _validate_catalog(catalog: Sequence[FunctionType]) -> None:
    if not catalog:
        raise WorkloadError("catalog must be non-empty")
    ids = [fn.id for fn in catalog]
    if ids != list(range(len(catalog))):
        raise WorkloadError("catalog function ids must be dense 0..n-1 in order")


def generate_trace(
    topology: Topology,
    catalog: Sequence[FunctionType],
    horizon: int,
    arrival_rate: float,
    mix: Sequence[float],
    seed=0,
) -> list[Request]:
    """Sample a synthetic request trace.

    Per slot the request count is Poisson(arrival_rate); origins are uniform
    over nodes and types follow `mix`. Same-slot requests keep generation
    order. Bit-reproducible for a fixed seed.
    """
    _validate_catalog(catalog)
    if arrival_rate < 0:
        raise WorkloadError("arrival_rate must be >= 0")
    if horizon < 0:
        raise WorkloadError("horizon must be >= 0")
    if len(mix) != len(catalog):
        raise WorkloadError("mix must have one probability per function type")
    if abs(sum(mix) - 1.0) > 1e-9:
        raise WorkloadError(f"mix must sum to 1, got {sum(mix)!r}")

    rng = np.random.default_rng(seed)
    mix_arr = np.asarray(mix, dtype=float)
    mix_arr = mix_arr / mix_arr.sum()
    trace: list[Request] = []
    for t in range(horizon):
        count = int(rng.poisson(arrival_rate))
        if count == 0:
            continue
        origins = rng.integers(0, topology.n_nodes, size=count)
        types = rng.choice(len(catalog), size=count, p=mix_arr)
        for origin, fid in zip(origins, types):
            trace.append(Request(t=t, origin=int(origin), fn_type=int(fid),
                                 budget=catalog[int(fid)].budget))
    return trace


def load_trace(path, catalog: Sequence[FunctionType]) -> list[Request]:
    """Read a trace CSV, validating types against the catalog.

    Rows out of time order are stably sorted and a warning is recorded.
    """
    _validate_catalog(catalog)
    requests: list[Request] = []
    out_of_order = False
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header not in (TRACE_HEADER, TRACE_HEADER_BUDGET):
            raise WorkloadError(f"{path}: expected header {','.join(TRACE_HEADER)}[,budget]")
        has_budget = header == TRACE_HEADER_BUDGET
        prev_t = None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            expected = 4 if has_budget else 3
            if len(row) != expected:
                raise WorkloadError(f"{path}:{lineno}: expected {expected} fields, got {len(row)}")
            try:
                t, origin, fid = int(row[0]), int(row[1]), int(row[2])
            except ValueError as exc:
                raise WorkloadError(f"{path}:{lineno}: {exc}") from exc
            if t < 0:
                raise WorkloadError(f"{path}:{lineno}: negative time slot {t}")
            if not (0 <= fid < len(catalog)):
                raise WorkloadError(f"{path}:{lineno}: unknown function_id {fid}")
            if has_budget and row[3].strip():
                budget = parse_money(row[3])
            else:
                budget = catalog[fid].budget
            if prev_t is not None and t < prev_t:
                out_of_order = True
            prev_t = t
            requests.append(Request(t=t, origin=origin, fn_type=fid, budget=budget))
    if out_of_order:
        warnings.warn(f"{path}: timestamps out of order; rows stably sorted", stacklevel=2)
        requests.sort(key=lambda r: r.t)
    return requests


def save_trace(path, trace: Sequence[Request]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER_BUDGET)
        for r in trace:
            budget = "inf" if r.budget is None else money_str(r.budget)
            writer.writerow([r.t, r.origin, r.fn_type, budget])


def load_catalog(path) -> list[FunctionType]:
    catalog = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CATALOG_HEADER:
            raise WorkloadError(f"{path}: expected header {','.join(CATALOG_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise WorkloadError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                catalog.append(FunctionType(
                    id=int(row[0]),
                    mem_mb=int(row[1]),
                    duration_slots=int(row[2]),
                    budget=parse_money(row[3]),
                ))
            except (ValueError, WorkloadError) as exc:
                raise WorkloadError(f"{path}:{lineno}: {exc}") from exc
    _validate_catalog(catalog)
    return catalog


def save_catalog(path, catalog: Sequence[FunctionType]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CATALOG_HEADER)
        for fn in catalog:
            budget = "inf" if fn.budget is None else money_str(fn.budget)
            writer.writerow([fn.id, fn.mem_mb, fn.duration_slots, budget])
