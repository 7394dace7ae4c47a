"""Compiled RK4 loop for the augmented heavy-ball state.

Each suite problem supplies an in-place gradient kernel ``grad(x, out)`` for a
single point. The loop mirrors the numpy stepper in :mod:`hbode.hb_ode`
operation for operation; only the libm behind ``sin`` and the summation order
of ``||v||^2`` may differ, so the two engines agree to rounding.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def quadratic_grad(x, out):
    for i in range(x.shape[0]):
        out[i] = x[i]


@numba.njit(cache=True)
def cos_sum_grad(x, out):
    for i in range(x.shape[0]):
        out[i] = math.sin(x[i])


@numba.njit(cache=True)
def rosenbrock_grad(x, out):
    d = x.shape[0]
    for i in range(d):
        out[i] = 0.0
    for i in range(d - 1):
        a = x[i]
        r = x[i + 1] - a * a
        out[i] += -400.0 * a * r - 2.0 * (1.0 - a)
        out[i + 1] += 200.0 * r


@numba.njit
def _rhs(grad, y, d, alpha, beta, xb, gb, out):
    for i in range(d):
        xb[i] = y[i]
    grad(xb, gb)
    s = 0.0
    for i in range(d):
        v = y[d + i]
        out[i] = v
        out[d + i] = -alpha * v - gb[i]
        out[2 * d + i] = y[i] - beta * y[2 * d + i]
        s += v * v
    out[3 * d] = s


@numba.njit
def rk4_loop(grad, y0, d, alpha, beta, h, n, ckpt_steps, states):
    """Advance ``n`` steps; store the state at each step listed in ``ckpt_steps``.

    ``ckpt_steps`` is increasing and starts with 0. Returns the first step
    index at which the state became non-finite, or -1.
    """
    N = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(N)
    k2 = np.empty(N)
    k3 = np.empty(N)
    k4 = np.empty(N)
    tmp = np.empty(N)
    xb = np.empty(d)
    gb = np.empty(d)
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(N):
        states[0, i] = y[i]
    row = 1
    for k in range(1, n + 1):
        _rhs(grad, y, d, alpha, beta, xb, gb, k1)
        for i in range(N):
            tmp[i] = y[i] + h2 * k1[i]
        _rhs(grad, tmp, d, alpha, beta, xb, gb, k2)
        for i in range(N):
            tmp[i] = y[i] + h2 * k2[i]
        _rhs(grad, tmp, d, alpha, beta, xb, gb, k3)
        for i in range(N):
            tmp[i] = y[i] + h * k3[i]
        _rhs(grad, tmp, d, alpha, beta, xb, gb, k4)
        finite = True
        for i in range(N):
            y[i] = y[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
            if not math.isfinite(y[i]):
                finite = False
        if not finite:
            return k
        if row < ckpt_steps.shape[0] and k == ckpt_steps[row]:
            for i in range(N):
                states[row, i] = y[i]
            row += 1
    return -1


GRAD_KERNELS = {
    "quadratic": quadratic_grad,
    "cos_sum": cos_sum_grad,
    "rosenbrock": rosenbrock_grad,
}
