"""Deployment cost model.

A placement is priced as the sum of three components: a one-time switching
cost when a new container is created, a running cost for executing the
function, and a routing cost when the request is served away from its origin
node. Money is kept as integer micro-dollars end to end so that sums,
comparisons, and CSV round-trips are exact; each component is rounded to a
micro-dollar once, at the formula boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .topology import EdgeNode, Topology
    from .workload import FunctionType

# Money values are integer micro-dollars throughout the package.
Money = int

MICRO_PER_DOLLAR = 1_000_000


class UnroutableError(ValueError):
    """The origin cannot reach the target node; the placement is infeasible."""


def to_micro(dollars) -> Money:
    """Convert a dollar amount (float, int, str, or Decimal) to micro-dollars.

    Rounds half-to-even at micro-dollar resolution.
    """
    if isinstance(dollars, str):
        dollars = Decimal(dollars)
    if isinstance(dollars, Decimal):
        quant = (dollars * MICRO_PER_DOLLAR).quantize(Decimal(1), rounding=ROUND_HALF_EVEN)
        return int(quant)
    if isinstance(dollars, float) and not math.isfinite(dollars):
        raise ValueError(f"cannot convert {dollars!r} to money")
    return round(dollars * MICRO_PER_DOLLAR)


def money_str(amount: Money) -> str:
    """Exact decimal-dollar rendering of a micro-dollar amount."""
    sign = "-" if amount < 0 else ""
    whole, frac = divmod(abs(amount), MICRO_PER_DOLLAR)
    return f"{sign}{whole}.{frac:06d}"


def parse_money(text: str) -> Money | None:
    """Parse a decimal-dollar string; 'inf' means unlimited (None)."""
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return None
    return to_micro(Decimal(text))


@dataclass(frozen=True)
class CostParams:
    """Cost coefficients and the rejection penalty, in abstract dollars.

    alpha_switch: $.GHz/MB, scales the cold-start cost alpha*u/f.
    beta_run:     $/(MB.GHz.slot), scales the running cost beta*u*f per slot.
    delta_route:  $/(MB.hop), scales the routing cost delta*u per hop.
    reject_penalty: flat cost charged to the objective when a request is
    dropped instead of placed.
    """

    alpha_switch: float = 0.01
    beta_run: float = 0.002
    delta_route: float = 0.003
    reject_penalty: float = 5.0

    def __post_init__(self):
        for name in ("alpha_switch", "beta_run", "delta_route", "reject_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def reject_penalty_micro(self) -> Money:
        return to_micro(self.reject_penalty)


@dataclass(frozen=True)
class CostBreakdown:
    """Per-placement cost components; the total is always their exact sum."""

    c_s: Money
    c_e: Money
    c_t: Money

    def __post_init__(self):
        if self.c_s < 0 or self.c_e < 0 or self.c_t < 0:
            raise ValueError("cost components must be >= 0")

    @property
    def total(self) -> Money:
        return self.c_s + self.c_e + self.c_t


def switching_cost(params: CostParams, fn: "FunctionType", node: "EdgeNode") -> Money:
    """Cold-start cost of creating a new container for `fn` on `node`.

    Inversely proportional to the node's CPU frequency: faster nodes pull and
    initialize images quicker.
    """
    return to_micro(params.alpha_switch * fn.mem_mb / node.cpu_ghz)


def running_cost(params: CostParams, fn: "FunctionType", node: "EdgeNode") -> Money:
    """Cost of executing `fn` on `node` for its full duration.

    The per-slot rate grows with both function size and CPU frequency; the
    rate is rounded once so the result is exactly linear in duration.
    """
    per_slot = to_micro(params.beta_run * fn.mem_mb * node.cpu_ghz)
    return per_slot * fn.duration_slots


def routing_cost(
    params: CostParams,
    fn: "FunctionType",
    topology: "Topology",
    origin: int,
    target: int,
) -> Money:
    """Cost of forwarding the request from its origin to the serving node.

    Traffic volume equals the function size; zero when served locally.
    Raises UnroutableError for disconnected pairs, which callers must treat
    as infeasible rather than priced.
    """
    hop_count = topology.hops(origin, target)
    if math.isinf(hop_count):
        raise UnroutableError(f"no route from node {origin} to node {target}")
    per_hop = to_micro(params.delta_route * fn.mem_mb)
    return per_hop * hop_count


def placement_cost(
    params: CostParams,
    fn: "FunctionType",
    topology: "Topology",
    origin: int,
    target: int,
    spawn_new: bool,
) -> CostBreakdown:
    """Full cost of serving one request at `target`.

    The switching component applies only when a new container is spawned;
    reusing a warm container skips it.
    """
    c_s = switching_cost(params, fn, topology.nodes[target]) if spawn_new else 0
    c_e = running_cost(params, fn, topology.nodes[target])
    c_t = routing_cost(params, fn, topology, origin, target)
    return CostBreakdown(c_s=c_s, c_e=c_e, c_t=c_t)
