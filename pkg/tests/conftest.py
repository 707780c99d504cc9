"""Shared builders for hand-checkable micro-instances."""

from __future__ import annotations

import numpy as np
import pytest

from faasched.costs import CostParams
from faasched.env import ServerlessEnv
from faasched.topology import EdgeNode, Topology
from faasched.workload import FunctionType, Request


def make_topology(positions, cpu_ghz=2.5, mem_mb=250, edges=None):
    """Nodes at the given (x, y) positions; shared hardware unless lists given."""
    n = len(positions)
    freqs = cpu_ghz if isinstance(cpu_ghz, (list, tuple)) else [cpu_ghz] * n
    mems = mem_mb if isinstance(mem_mb, (list, tuple)) else [mem_mb] * n
    nodes = [
        EdgeNode(id=i, x_m=float(x), y_m=float(y), cpu_ghz=float(freqs[i]),
                 mem_mb=int(mems[i]))
        for i, (x, y) in enumerate(positions)
    ]
    return Topology(nodes, edges if edges is not None else [])


def chain_topology(n=3, cpu_ghz=2.5, mem_mb=250):
    """0-1-2-...-(n-1) chain; hop(i, j) = |i - j|."""
    return make_topology(
        [(100.0 * i, 0.0) for i in range(n)],
        cpu_ghz=cpu_ghz, mem_mb=mem_mb,
        edges=[(i, i + 1) for i in range(n - 1)],
    )


def fn_type(fid=0, mem_mb=100, duration_slots=1, budget=10_000_000):
    return FunctionType(id=fid, mem_mb=mem_mb, duration_slots=duration_slots,
                        budget=budget)


@pytest.fixture
def default_params():
    return CostParams()


@pytest.fixture
def chain3():
    return chain_topology(3)


def request_at(t=0, origin=0, fid=0, budget=10_000_000):
    return Request(t=t, origin=origin, fn_type=fid, budget=budget)


def make_env(topology, catalog, params=None, **kwargs) -> ServerlessEnv:
    return ServerlessEnv(topology, catalog, params or CostParams(), **kwargs)


def rng(seed=0):
    return np.random.default_rng(seed)
