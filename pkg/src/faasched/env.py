"""Sequential placement environment.

Each decision step presents one request. The agent either places it on a
node (spawning a new container or reusing an idle warm one) or rejects it.
Accepted placements earn the negated deployment cost as reward; rejections
(explicit, or any infeasible choice) earn the negated rejection penalty and
leave the cluster untouched. Between requests the clock jumps to the next
arrival slot, releasing finished containers to the warm pool and evicting
warm containers whose keep-alive window has lapsed.

Containers reserve their function's memory for their whole lifetime, busy
and warm alike, so spawning decisions interact with node capacity.

The discrete action space is flat: index 2*v + g places on node v (g=1
spawns, g=0 reuses warm), and the last index is the explicit reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .costs import CostBreakdown, CostParams, Money, placement_cost
from .topology import Topology
from .workload import FunctionType, Request

DEFAULT_KEEPALIVE_SLOTS = 10
DEFAULT_F_CAP = 8


class EnvError(RuntimeError):
    """Environment misuse, e.g. stepping a finished episode."""


@dataclass(frozen=True)
class Action:
    """Place the current request on `target`; spawn a container iff `spawn_new`."""

    target: int
    spawn_new: bool


def action_to_index(action: Action | None, n_nodes: int) -> int:
    """Flatten an action (None = reject) into {0 .. 2*n_nodes}."""
    if action is None:
        return 2 * n_nodes
    if not (0 <= action.target < n_nodes):
        raise EnvError(f"action target {action.target} out of range")
    return 2 * action.target + int(action.spawn_new)


def index_to_action(index: int, n_nodes: int) -> Action | None:
    """Inverse of action_to_index; the top index maps to the reject (None)."""
    if index == 2 * n_nodes:
        return None
    if not (0 <= index < 2 * n_nodes):
        raise EnvError(f"action index {index} out of range for {n_nodes} nodes")
    return Action(target=index // 2, spawn_new=bool(index % 2))


@dataclass
class Container:
    """One container instance.

    Busy during slots [spawn, busy_until), idle-warm during
    [busy_until, warm_until], gone afterwards. Reserves its function's
    memory on `node` for as long as it exists.
    """

    node: int
    fn_type: int
    busy_until: int
    warm_until: int

    def is_warm_idle(self, clock: int) -> bool:
        return self.busy_until <= clock <= self.warm_until


@dataclass
class ClusterState:
    clock: int
    free_mem: list[int]
    containers: list[Container] = field(default_factory=list)


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: Money
    accepted: bool
    breakdown: CostBreakdown | None
    done: bool
    request: Request


@dataclass(frozen=True)
class EpisodeRecord:
    """One row of the episode log; cost fields are None on rejection."""

    episode: int
    t: int
    origin: int
    function: int
    target: int | None
    spawned: bool | None
    accepted: bool
    c_s: Money | None
    c_e: Money | None
    c_t: Money | None
    total: Money | None
    reward: Money
    decision_us: float


class ServerlessEnv:
    """MDP over a fixed topology, catalog, and cost model.

    One instance is single-threaded; run independent instances for parallel
    episodes. reset() binds a trace and starts an episode.
    """

    def __init__(
        self,
        topology: Topology,
        catalog: Sequence[FunctionType],
        cost_params: CostParams | None = None,
        keepalive_slots: int = DEFAULT_KEEPALIVE_SLOTS,
        f_cap: int = DEFAULT_F_CAP,
    ):
        from .workload import _validate_catalog

        _validate_catalog(catalog)
        if keepalive_slots < 0:
            raise EnvError("keepalive_slots must be >= 0")
        if f_cap < 1:
            raise EnvError("f_cap must be >= 1")
        self.topology = topology
        self.catalog = tuple(catalog)
        self.params = cost_params or CostParams()
        self.keepalive_slots = keepalive_slots
        self.f_cap = f_cap
        self.n_nodes = topology.n_nodes
        self.n_types = len(self.catalog)
        self.n_actions = 2 * self.n_nodes + 1
        self.observation_size = (
            self.n_nodes + self.n_nodes * self.n_types + self.n_nodes + self.n_types
        )
        self._episode = -1
        self._trace: list[Request] = []
        self._ptr = 0
        self._done = True
        self._state: ClusterState | None = None
        self._records: list[EpisodeRecord] = []

    # -- episode control ----------------------------------------------------

    def reset(self, trace: Sequence[Request], seed=None) -> np.ndarray:
        """Start a new episode over `trace`; returns the first observation.

        The environment itself is deterministic; `seed` is accepted for API
        uniformity with stochastic environments and ignored.
        """
        if not trace:
            raise EnvError("trace must be non-empty")
        prev_t = None
        for i, req in enumerate(trace):
            if not (0 <= req.origin < self.n_nodes):
                raise EnvError(f"request {i}: origin {req.origin} not in topology")
            if not (0 <= req.fn_type < self.n_types):
                raise EnvError(f"request {i}: unknown function type {req.fn_type}")
            if prev_t is not None and req.t < prev_t:
                raise EnvError(f"request {i}: trace not sorted by t")
            prev_t = req.t
        self._episode += 1
        self._trace = list(trace)
        self._ptr = 0
        self._done = False
        self._state = ClusterState(
            clock=self._trace[0].t,
            free_mem=[node.mem_mb for node in self.topology.nodes],
        )
        self._records = []
        return self.encode_observation()

    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode(self) -> int:
        return self._episode

    @property
    def state(self) -> ClusterState:
        if self._state is None:
            raise EnvError("reset() must be called first")
        return self._state

    @property
    def episode_records(self) -> list[EpisodeRecord]:
        return list(self._records)

    def current_request(self) -> Request:
        if self._done:
            raise EnvError("no current request: episode is done")
        return self._trace[self._ptr]

    # -- feasibility and costs ----------------------------------------------

    def action_cost(self, action: Action, request: Request | None = None) -> CostBreakdown:
        req = request if request is not None else self.current_request()
        return placement_cost(
            self.params, self.catalog[req.fn_type], self.topology,
            req.origin, action.target, action.spawn_new,
        )

    def _find_warm_idle(self, node: int, fn_type: int) -> Container | None:
        clock = self.state.clock
        for c in self.state.containers:
            if c.node == node and c.fn_type == fn_type and c.is_warm_idle(clock):
                return c
        return None

    def _action_feasible(self, action: Action, request: Request) -> bool:
        if not (0 <= action.target < self.n_nodes):
            return False
        if math.isinf(self.topology.hops(request.origin, action.target)):
            return False
        fn = self.catalog[request.fn_type]
        if action.spawn_new:
            if self.state.free_mem[action.target] < fn.mem_mb:
                return False
        else:
            if self._find_warm_idle(action.target, request.fn_type) is None:
                return False
        if request.budget is None:
            return True
        return self.action_cost(action, request).total <= request.budget

    def feasible_actions(self) -> list[Action]:
        """All placements legal for the current request, in action-index order."""
        req = self.current_request()
        out = []
        for v in range(self.n_nodes):
            for g in (False, True):
                a = Action(target=v, spawn_new=g)
                if self._action_feasible(a, req):
                    out.append(a)
        return out

    def feasible_mask(self) -> np.ndarray:
        """Boolean mask over the flat action space; reject is always allowed."""
        mask = np.zeros(self.n_actions, dtype=bool)
        mask[2 * self.n_nodes] = True
        if self._done:
            return mask
        req = self.current_request()
        for v in range(self.n_nodes):
            for g in (False, True):
                a = Action(target=v, spawn_new=g)
                if self._action_feasible(a, req):
                    mask[action_to_index(a, self.n_nodes)] = True
        return mask

    # -- transition ----------------------------------------------------------

    def step(self, action: Action | None, decision_us: float = 0.0) -> StepOutcome:
        """Apply an action to the current request and advance to the next.

        An infeasible action is coerced to a rejection with the same penalty
        as an explicit reject.
        """
        if self._done:
            raise EnvError("step() after episode end")
        req = self.current_request()
        state = self.state
        fn = self.catalog[req.fn_type]

        accepted = False
        breakdown: CostBreakdown | None = None
        target: int | None = None
        spawned: bool | None = None
        if action is not None and self._action_feasible(action, req):
            breakdown = self.action_cost(action, req)
            busy_until = state.clock + fn.duration_slots
            warm_until = busy_until + self.keepalive_slots
            if action.spawn_new:
                state.containers.append(Container(
                    node=action.target, fn_type=req.fn_type,
                    busy_until=busy_until, warm_until=warm_until,
                ))
                state.free_mem[action.target] -= fn.mem_mb
            else:
                container = self._find_warm_idle(action.target, req.fn_type)
                container.busy_until = busy_until
                container.warm_until = warm_until
            accepted = True
            target = action.target
            spawned = action.spawn_new
            reward = -breakdown.total
        else:
            reward = -self.params.reject_penalty_micro

        self._records.append(EpisodeRecord(
            episode=self._episode, t=req.t, origin=req.origin, function=req.fn_type,
            target=target, spawned=spawned, accepted=accepted,
            c_s=breakdown.c_s if breakdown else None,
            c_e=breakdown.c_e if breakdown else None,
            c_t=breakdown.c_t if breakdown else None,
            total=breakdown.total if breakdown else None,
            reward=reward, decision_us=decision_us,
        ))

        self._ptr += 1
        if self._ptr < len(self._trace):
            self._advance_clock(self._trace[self._ptr].t)
            observation = self.encode_observation()
            done = False
        else:
            self._done = True
            observation = np.zeros(self.observation_size)
            done = True
        return StepOutcome(
            observation=observation, reward=reward, accepted=accepted,
            breakdown=breakdown, done=done, request=req,
        )

    def step_index(self, action_index: int, decision_us: float = 0.0) -> StepOutcome:
        return self.step(index_to_action(action_index, self.n_nodes), decision_us)

    def _advance_clock(self, new_clock: int) -> None:
        state = self.state
        if new_clock == state.clock:
            return
        kept = []
        for c in state.containers:
            if c.warm_until < new_clock:
                state.free_mem[c.node] += self.catalog[c.fn_type].mem_mb
            else:
                kept.append(c)
        state.containers = kept
        state.clock = new_clock

    # -- observation ----------------------------------------------------------

    def container_counts(self) -> np.ndarray:
        """f[v, n]: number of containers of type n existing on node v."""
        counts = np.zeros((self.n_nodes, self.n_types), dtype=np.int64)
        for c in self.state.containers:
            counts[c.node, c.fn_type] += 1
        return counts

    def encode_observation(self, request: Request | None = None) -> np.ndarray:
        """Flat feature vector in [0,1]: free-memory ratios, capped container
        counts (row-major over nodes then types), one-hot origin, one-hot type.
        """
        req = request if request is not None else self.current_request()
        state = self.state
        caps = np.array([n.mem_mb for n in self.topology.nodes], dtype=float)
        free = np.array(state.free_mem, dtype=float) / caps
        counts = self.container_counts()
        containers = np.minimum(counts, self.f_cap).astype(float).ravel() / self.f_cap
        origin = np.zeros(self.n_nodes)
        origin[req.origin] = 1.0
        fn_onehot = np.zeros(self.n_types)
        fn_onehot[req.fn_type] = 1.0
        return np.concatenate([free, containers, origin, fn_onehot])

    # -- search support --------------------------------------------------------

    def _snapshot(self):
        state = self.state
        containers = tuple(
            (c.node, c.fn_type, c.busy_until, c.warm_until) for c in state.containers
        )
        return (state.clock, tuple(state.free_mem), containers,
                self._ptr, self._done, len(self._records))

    def _restore(self, snap) -> None:
        clock, free_mem, containers, ptr, done, n_records = snap
        state = self.state
        state.clock = clock
        state.free_mem = list(free_mem)
        state.containers = [Container(*c) for c in containers]
        self._ptr = ptr
        self._done = done
        del self._records[n_records:]
