"""Minimal dense MLP with exact reverse-mode gradients and two optimizers.

Float64 throughout. Hidden layers are ReLU, the output layer is identity.
The arithmetic lives in swappable kernel modules (compiled or numpy); this
module owns parameter layout, caching, serialization, and the optimizers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels

MODEL_FORMAT_VERSION = 1


class StaleCacheError(RuntimeError):
    """backward() was handed a cache recorded before a parameter update."""


@dataclass
class ForwardCache:
    acts: list
    version: int
    was_1d: bool


class Mlp:
    """Fully connected network; weights[l] has shape (dims[l+1], dims[l])."""

    def __init__(self, dims, weights, biases):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2:
            raise ValueError("need at least input and output dims")
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ValueError("one weight matrix and bias vector per layer")
        for l, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[l + 1], dims[l]) or b.shape != (dims[l + 1],):
                raise ValueError(f"layer {l}: parameter shape mismatch")
        self.dims = dims
        self.weights = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.ascontiguousarray(b, dtype=np.float64) for b in biases]
        self._version = 0

    @classmethod
    def init(cls, dims, seed=0) -> "Mlp":
        """He-style uniform init scaled by fan-in, zero biases; seeded."""
        rng = np.random.default_rng(seed)
        dims = tuple(int(d) for d in dims)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = math.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases)

    # -- inference -----------------------------------------------------------

    def _as_batch(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.ndim == 1:
            if x.shape[0] != self.dims[0]:
                raise ValueError(f"input size {x.shape[0]} != {self.dims[0]}")
            return x.reshape(1, -1), True
        if x.ndim == 2:
            if x.shape[1] != self.dims[0]:
                raise ValueError(f"input size {x.shape[1]} != {self.dims[0]}")
            return x, False
        raise ValueError("input must be 1-D or 2-D")

    def forward(self, x) -> np.ndarray:
        batch, was_1d = self._as_batch(x)
        y, _ = kernels.forward(self.weights, self.biases, batch)
        return y[0] if was_1d else y

    def forward_cache(self, x) -> tuple[np.ndarray, ForwardCache]:
        batch, was_1d = self._as_batch(x)
        y, acts = kernels.forward(self.weights, self.biases, batch)
        cache = ForwardCache(acts=acts, version=self._version, was_1d=was_1d)
        return (y[0] if was_1d else y), cache

    def backward(self, cache: ForwardCache, grad_y):
        """Gradients of sum(grad_y * output) w.r.t. parameters and input.

        Returns (grads, grad_x) where grads aligns with params().
        """
        if cache.version != self._version:
            raise StaleCacheError("parameters changed since this cache was recorded")
        gy = np.ascontiguousarray(grad_y, dtype=np.float64)
        if cache.was_1d:
            gy = gy.reshape(1, -1)
        grad_ws, grad_bs, grad_x = kernels.backward(self.weights, cache.acts, gy)
        grads = []
        for gw, gb in zip(grad_ws, grad_bs):
            grads.append(gw)
            grads.append(gb)
        return grads, (grad_x[0] if cache.was_1d else grad_x)

    # -- parameters ------------------------------------------------------------

    def params(self) -> list:
        """Flat parameter list [w0, b0, w1, b1, ...]; arrays are live views."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def apply_gradients(self, optimizer, grads) -> None:
        optimizer.step(self.params(), grads)
        self._version += 1

    def copy(self) -> "Mlp":
        return Mlp(self.dims, [w.copy() for w in self.weights],
                   [b.copy() for b in self.biases])

    def copy_from(self, other: "Mlp") -> None:
        if self.dims != other.dims:
            raise ValueError("architecture mismatch")
        for dst, src in zip(self.params(), other.params()):
            np.copyto(dst, src)
        self._version += 1

    def all_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.params())

    # -- serialization -----------------------------------------------------------

    def save(self, path) -> None:
        arrays = {
            "format_version": np.array([MODEL_FORMAT_VERSION], dtype=np.int64),
            "layer_dims": np.array(self.dims, dtype=np.int64),
        }
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{l}"] = w
            arrays[f"b{l}"] = b
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path) -> "Mlp":
        with np.load(path) as data:
            version = int(data["format_version"][0])
            if version != MODEL_FORMAT_VERSION:
                raise ValueError(f"unsupported model format version {version}")
            dims = tuple(int(d) for d in data["layer_dims"])
            weights = [data[f"w{l}"] for l in range(len(dims) - 1)]
            biases = [data[f"b{l}"] for l in range(len(dims) - 1)]
        return cls(dims, weights, biases)


class Sgd:
    """Plain stochastic gradient descent: p <- p - lr * g."""

    def __init__(self, lr: float):
        self.lr = float(lr)

    def step(self, params, grads) -> None:
        if len(params) != len(grads):
            raise ValueError("params/grads length mismatch")
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise ValueError("gradient shape mismatch")
            kernels.sgd_update(p, g, self.lr)


class Adam:
    """Adam with standard bias correction; moment buffers allocated lazily."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m: list | None = None
        self._v: list | None = None

    def step(self, params, grads) -> None:
        if len(params) != len(grads):
            raise ValueError("params/grads length mismatch")
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(self._m) != len(params):
            raise ValueError("optimizer bound to a different parameter set")
        self.t += 1
        for p, g, m, v in zip(params, grads, self._m, self._v):
            if p.shape != g.shape or p.shape != m.shape:
                raise ValueError("gradient shape mismatch")
            kernels.adam_update(p, g, m, v, self.t, self.lr,
                                self.beta1, self.beta2, self.eps)
