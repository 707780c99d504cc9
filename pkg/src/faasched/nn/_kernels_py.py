"""Numpy (BLAS-backed) reference kernels for the MLP hot paths.

Same contract as the compiled kernels in `_kernels_cy.pyx`: all arrays are
C-contiguous float64, activations are ReLU on hidden layers and identity on
the output, weights have shape (fan_out, fan_in). The two backends agree to
floating-point accumulation order, i.e. within ~1e-12 relative, not bitwise.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def forward(weights, biases, x):
    """Run the batch `x` (B, d0) through the network.

    Returns (y, acts) where acts[l] is the input to layer l (acts[0] is x)
    and y is the identity-activated output.
    """
    acts = [x]
    a = x
    last = len(weights) - 1
    for l, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w.T + b
        a = z if l == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts[-1], acts


def backward(weights, acts, grad_y):
    """Reverse-mode gradients for a forward() call.

    Returns (grad_weights, grad_biases, grad_x) matching parameter shapes.
    """
    n_layers = len(weights)
    grad_ws = [None] * n_layers
    grad_bs = [None] * n_layers
    gz = grad_y
    for l in range(n_layers - 1, -1, -1):
        a_in = acts[l]
        grad_ws[l] = gz.T @ a_in
        grad_bs[l] = gz.sum(axis=0)
        ga = gz @ weights[l]
        if l > 0:
            gz = ga * (a_in > 0.0)
    return grad_ws, grad_bs, ga


def sgd_update(param, grad, lr):
    param -= lr * grad


def adam_update(param, grad, m, v, t, lr, beta1, beta2, eps):
    """One Adam step with standard bias correction; buffers updated in place."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * np.square(grad)
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)
