# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the MLP hot paths.

Contract mirrors `_kernels_py`: C-contiguous float64 arrays, ReLU hidden
layers, identity output, weights shaped (fan_out, fan_in). Loops are laid
out so the innermost index walks contiguous memory.
"""

from libc.math cimport sqrt

import numpy as np

NAME = "cython"


cdef void _affine(double[:, ::1] a, double[:, ::1] w, double[::1] b,
                  double[:, ::1] out, bint relu) noexcept nogil:
    # out[i, j] = sum_k a[i, k] * w[j, k] + b[j], optionally clamped at 0
    cdef Py_ssize_t B = a.shape[0], din = a.shape[1], dout = w.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(B):
        for j in range(dout):
            acc = b[j]
            for k in range(din):
                acc += a[i, k] * w[j, k]
            if relu and acc < 0.0:
                acc = 0.0
            out[i, j] = acc


def forward(list weights, list biases, x):
    cdef Py_ssize_t last = len(weights) - 1
    cdef Py_ssize_t l
    acts = [x]
    a = x
    for l in range(len(weights)):
        w = weights[l]
        b = biases[l]
        out = np.empty((a.shape[0], w.shape[0]))
        _affine(a, w, b, out, l != last)
        acts.append(out)
        a = out
    # no negative list indexing here: wraparound is off module-wide
    return a, acts


cdef void _grad_param(double[:, ::1] gz, double[:, ::1] a_in,
                      double[:, ::1] gw, double[::1] gb) noexcept nogil:
    # gw[j, k] = sum_i gz[i, j] * a_in[i, k];  gb[j] = sum_i gz[i, j]
    cdef Py_ssize_t B = gz.shape[0], dout = gz.shape[1], din = a_in.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double g
    for j in range(dout):
        gb[j] = 0.0
        for k in range(din):
            gw[j, k] = 0.0
    for i in range(B):
        for j in range(dout):
            g = gz[i, j]
            gb[j] += g
            for k in range(din):
                gw[j, k] += g * a_in[i, k]


cdef void _grad_input(double[:, ::1] gz, double[:, ::1] w, double[:, ::1] a_in,
                      double[:, ::1] ga, bint apply_relu_mask) noexcept nogil:
    # ga[i, k] = sum_j gz[i, j] * w[j, k], masked by a_in > 0 for hidden layers
    cdef Py_ssize_t B = gz.shape[0], dout = gz.shape[1], din = w.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double g
    for i in range(B):
        for k in range(din):
            ga[i, k] = 0.0
        for j in range(dout):
            g = gz[i, j]
            for k in range(din):
                ga[i, k] += g * w[j, k]
        if apply_relu_mask:
            for k in range(din):
                if a_in[i, k] <= 0.0:
                    ga[i, k] = 0.0


def backward(list weights, list acts, grad_y):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t l
    grad_ws = [None] * n_layers
    grad_bs = [None] * n_layers
    gz = grad_y
    ga = None
    for l in range(n_layers - 1, -1, -1):
        w = weights[l]
        a_in = acts[l]
        gw = np.empty_like(w)
        gb = np.empty(w.shape[0])
        _grad_param(gz, a_in, gw, gb)
        grad_ws[l] = gw
        grad_bs[l] = gb
        ga = np.empty((gz.shape[0], w.shape[1]))
        _grad_input(gz, w, a_in, ga, l > 0)
        gz = ga
    return grad_ws, grad_bs, ga


def sgd_update(param, grad, double lr):
    cdef double[::1] p = param.ravel()
    cdef double[::1] g = grad.ravel()
    cdef Py_ssize_t i
    for i in range(p.shape[0]):
        p[i] -= lr * g[i]


def adam_update(param, grad, m, v, long t, double lr,
                double beta1, double beta2, double eps):
    cdef double[::1] p = param.ravel()
    cdef double[::1] g = grad.ravel()
    cdef double[::1] mb = m.ravel()
    cdef double[::1] vb = v.ravel()
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    cdef double m_hat, v_hat
    cdef Py_ssize_t i
    for i in range(p.shape[0]):
        mb[i] = beta1 * mb[i] + (1.0 - beta1) * g[i]
        vb[i] = beta2 * vb[i] + (1.0 - beta2) * g[i] * g[i]
        m_hat = mb[i] / bc1
        v_hat = vb[i] / bc2
        p[i] -= lr * m_hat / (sqrt(v_hat) + eps)
