"""Fixed-step integration of the heavy-ball flow ``x'' = -alpha x' - grad f(x)``.

The state is augmented with two extra components so that every diagnostic is
produced at integrator accuracy:

* ``m(t) = int_0^t exp(-alpha (t - s)) x(s) ds`` obeys ``m' = x - alpha m``.
  The exponentially weighted average of the path is then
  ``alpha m(t) / (1 - exp(-alpha t))``. Storing ``m`` rather than
  ``int exp(alpha s) x(s) ds`` keeps the state bounded for any horizon.
* ``e_diss(t) = int_0^t ||x'(s)||^2 ds`` obeys ``e_diss' = ||x'||^2``.

Internally the state is a flat vector ``[x, v, m, e_diss]`` of length
``3 * dim + 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import csvio
from .errors import (ContractViolation, DegenerateScheduleError,
                     DivergenceError)

__all__ = [
    "Method",
    "OdeParams",
    "HbState",
    "StateDerivative",
    "Checkpoint",
    "Trajectory",
    "alpha_for_horizon",
    "auto_step",
    "rhs",
    "integrate",
    "avg_point",
    "weight_at",
    "write_checkpoints_csv",
]


class Method(str, enum.Enum):
    RK4 = "RK4"
    SEMI_IMPLICIT_EULER = "SemiImplicitEuler"


def alpha_for_horizon(L2, delta_f, T):
    """Friction that balances the two error terms of the horizon-``T`` bound.

    ``alpha = (3 L2)^(2/7) (delta_f / T)^(1/7)``
    """
    if T <= 0:
        raise ContractViolation(f"T must be positive, got {T}")
    if L2 < 0 or delta_f < 0:
        raise ContractViolation("L2 and delta_f must be nonnegative")
    if L2 == 0 or delta_f == 0:
        raise DegenerateScheduleError(
            f"schedule gives alpha = 0 (L2={L2}, delta_f={delta_f}); "
            "pass an explicit alpha")
    return (3.0 * L2) ** (2.0 / 7.0) * (delta_f / T) ** (1.0 / 7.0)


def auto_step(alpha, T, L1=None):
    """Default step size.

    The fastest linear modes of the flow decay or rotate at rates ``alpha``
    and ``sqrt(L1)``, so the step keeps ``alpha * h <= 0.01`` and, when
    ``L1`` is known, ``sqrt(L1) * h <= 0.01``. Without ``L1`` the step is
    additionally capped at ``min(0.01, T / 1e4)``.
    """
    rate = alpha if L1 is None else max(alpha, math.sqrt(L1))
    h = 0.01 / rate if rate > 0 else 0.01
    if L1 is None:
        h = min(h, 0.01, T / 1e4)
    return min(h, T)


@dataclass(frozen=True)
class OdeParams:
    """Integration settings.

    ``h`` is a target: the integrator uses ``n_steps = ceil(T / h)`` equal
    steps of size ``T / n_steps``, so the final checkpoint lands on ``T``.
    """

    alpha: float
    T: float
    h: float
    method: Method = Method.RK4
    checkpoint_stride: int = 100

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.alpha > 0:
            raise ContractViolation(f"alpha must be positive, got {self.alpha}")
        if not self.T > 0:
            raise ContractViolation(f"T must be positive, got {self.T}")
        if not 0 < self.h <= self.T * (1 + 1e-12):
            raise ContractViolation(f"need 0 < h <= T, got h={self.h}, T={self.T}")
        if int(self.checkpoint_stride) < 1:
            raise ContractViolation("checkpoint_stride must be a positive integer")
        object.__setattr__(self, "checkpoint_stride", int(self.checkpoint_stride))

    @property
    def n_steps(self):
        # guard against T/h landing a few ulps above an integer
        return max(1, math.ceil(self.T / self.h * (1 - 1e-12)))

    @property
    def step(self):
        return self.T / self.n_steps


@dataclass(frozen=True)
class HbState:
    t: float
    x: np.ndarray
    v: np.ndarray
    m: np.ndarray
    e_diss: float = 0.0

    @classmethod
    def initial(cls, x0):
        x0 = np.array(x0, dtype=float)
        z = np.zeros_like(x0)
        return cls(0.0, x0, z, z.copy(), 0.0)


class StateDerivative(NamedTuple):
    dx: np.ndarray
    dv: np.ndarray
    dm: np.ndarray
    de: float


def rhs(p, alpha, s):
    """Time derivative of the augmented state."""
    x = p._check(s.x)
    v = np.asarray(s.v, dtype=float)
    m = np.asarray(s.m, dtype=float)
    if v.shape != x.shape or m.shape != x.shape:
        raise ContractViolation("x, v and m must share a shape")
    return StateDerivative(dx=v.copy(), dv=-alpha * v - p.eval_grad(x),
                           dm=x - alpha * m, de=float(v @ v))


@dataclass(frozen=True)
class Checkpoint:
    t: float
    x: np.ndarray
    v: np.ndarray
    m: np.ndarray
    x_bar: np.ndarray
    grad_norm_x: float
    grad_norm_xbar: float
    phi: float
    e_diss: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Checkpointed solution; indexable as a sequence of :class:`Checkpoint`.

    Array attributes have one row per checkpoint. ``alpha`` is the friction
    used by the dynamics and ``avg_alpha`` the rate used by the averaging
    state (they coincide except under the test hook of :func:`integrate`).
    """

    problem: object
    params: OdeParams
    avg_alpha: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    m: np.ndarray
    e_diss: np.ndarray
    x_bar: np.ndarray
    grad_norm_x: np.ndarray
    grad_norm_xbar: np.ndarray
    phi: np.ndarray

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def energy_residual(self):
        """``Phi(t) + alpha * e_diss(t) - Phi(0)``, zero for the exact flow."""
        return self.phi + self.alpha * self.e_diss - self.phi[0]

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i):
        return Checkpoint(float(self.t[i]), self.x[i], self.v[i], self.m[i],
                          self.x_bar[i], float(self.grad_norm_x[i]),
                          float(self.grad_norm_xbar[i]), float(self.phi[i]),
                          float(self.e_diss[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def subsample(self, k):
        """Every ``k``-th checkpoint plus the last one.

        Applied to a run at stride ``s`` this reproduces the grid of the same
        run at stride ``k * s``.
        """
        idx = np.arange(0, len(self.t), int(k))
        if idx[-1] != len(self.t) - 1:
            idx = np.append(idx, len(self.t) - 1)
        arrays = {name: getattr(self, name)[idx] for name in
                  ("t", "x", "v", "m", "e_diss", "x_bar", "grad_norm_x",
                   "grad_norm_xbar", "phi")}
        params = OdeParams(self.params.alpha, self.params.T, self.params.h,
                           self.params.method,
                           self.params.checkpoint_stride * int(k))
        return Trajectory(self.problem, params, self.avg_alpha, **arrays)

    def index_of(self, t):
        """Index of the checkpoint at time ``t``; raises if ``t`` is off-grid."""
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ContractViolation(f"t={t} is not a checkpoint time")
        return i


def _make_flat_rhs(grad, dim, alpha, avg_alpha):
    d = dim

    def F(y):
        x = y[:d]
        v = y[d:2 * d]
        out = np.empty_like(y)
        out[:d] = v
        out[d:2 * d] = -alpha * v - grad(x)
        out[2 * d:3 * d] = x - avg_alpha * y[2 * d:3 * d]
        out[3 * d] = v @ v
        return out

    return F


def _rk4_stepper(F, h):
    h2 = 0.5 * h
    h6 = h / 6.0

    def step(y):
        k1 = F(y)
        k2 = F(y + h2 * k1)
        k3 = F(y + h2 * k2)
        k4 = F(y + h * k3)
        return y + h6 * (k1 + 2.0 * (k2 + k3) + k4)

    return step


def _semi_implicit_euler_stepper(grad, dim, alpha, avg_alpha, h):
    d = dim

    def step(y):
        x = y[:d]
        v = y[d:2 * d]
        m = y[2 * d:3 * d]
        out = np.empty_like(y)
        v_new = v + h * (-alpha * v - grad(x))
        x_new = x + h * v_new
        out[:d] = x_new
        out[d:2 * d] = v_new
        out[2 * d:3 * d] = m + h * (x_new - avg_alpha * m)
        out[3 * d] = y[3 * d] + h * (v_new @ v_new)
        return out

    return step


def _compiled_grad(p):
    """Compiled gradient kernel for suite problems, or None."""
    try:
        from . import _kernels, problems
    except ImportError:  # numba missing
        return None
    table = {problems._quad_grad: _kernels.quadratic_grad,
             problems._cos_grad: _kernels.cos_sum_grad,
             problems._rb_grad: _kernels.rosenbrock_grad}
    return table.get(p.grad)


def integrate(p, params, x0=None, avg_alpha=None, engine="auto"):
    """Integrate from ``x(0) = x0, x'(0) = 0`` to ``t = T``.

    Checkpoints are taken at ``t = 0``, every ``checkpoint_stride`` steps,
    and at ``t = T``.

    Parameters
    ----------
    p : Problem
    params : OdeParams
    x0 : array_like, optional
        Defaults to ``p.x0``.
    avg_alpha : float, optional
        Rate used in the averaging-state equation. Defaults to
        ``params.alpha``; any other value breaks the averaging identities and
        exists only to build negative controls.
    engine : {"auto", "numba", "numpy"}
        RK4 backend. ``"auto"`` uses the compiled loop when the problem has a
        compiled gradient kernel. SemiImplicitEuler always runs on numpy.

    Raises
    ------
    DivergenceError
        If the state becomes non-finite; ``err.step`` holds the step index.
    """
    x0 = p._check(p.x0 if x0 is None else x0)
    if x0.ndim != 1:
        raise ContractViolation("x0 must be a single point")
    d = p.dim
    alpha = float(params.alpha)
    beta = alpha if avg_alpha is None else float(avg_alpha)
    n = params.n_steps
    h = params.step
    stride = params.checkpoint_stride

    if engine not in ("auto", "numba", "numpy"):
        raise ContractViolation(f"unknown engine {engine!r}")

    idx = list(range(0, n, stride)) + [n]
    states = np.empty((len(idx), 3 * d + 1))
    y = np.zeros(3 * d + 1)
    y[:d] = x0
    t = params.T * np.array(idx, dtype=float) / n

    kernel = None
    if params.method is Method.RK4 and engine != "numpy":
        kernel = _compiled_grad(p)
        if kernel is None and engine == "numba":
            raise ContractViolation(f"no compiled kernel for {p.name!r}")
    if kernel is not None:
        from ._kernels import rk4_loop
        bad = rk4_loop(kernel, y, d, alpha, beta, h, n,
                       np.array(idx, dtype=np.int64), states)
        if bad >= 0:
            raise DivergenceError(
                f"non-finite state at step {bad} (t={params.T * bad / n:g})",
                step=bad)
        return _build_trajectory(p, params, beta, t, states)

    if params.method is Method.RK4:
        step = _rk4_stepper(_make_flat_rhs(p.grad, d, alpha, beta), h)
    else:
        step = _semi_implicit_euler_stepper(p.grad, d, alpha, beta, h)
    states[0] = y
    row = 1
    next_ckpt = idx[1]
    isfinite = np.isfinite
    for k in range(1, n + 1):
        y = step(y)
        if not isfinite(y).all():
            raise DivergenceError(
                f"non-finite state at step {k} (t={params.T * k / n:g})", step=k)
        if k == next_ckpt:
            states[row] = y
            row += 1
            if row < len(idx):
                next_ckpt = idx[row]
    return _build_trajectory(p, params, beta, t, states)


def _build_trajectory(p, params, beta, t, states):
    d = p.dim
    x = states[:, :d]
    v = states[:, d:2 * d]
    m = states[:, 2 * d:3 * d]
    e = states[:, 3 * d]
    x_bar = np.empty_like(x)
    x_bar[0] = x[0]
    x_bar[1:] = beta * m[1:] / -np.expm1(-beta * t[1:, None])
    gx = np.linalg.norm(p.eval_grad(x), axis=-1)
    gxb = np.linalg.norm(p.eval_grad(x_bar), axis=-1)
    phi = 0.5 * np.sum(v * v, axis=-1) + p.eval_f(x)
    return Trajectory(p, params, beta, t, x, v, m, e, x_bar, gx, gxb,
                      np.asarray(phi, dtype=float))


def avg_point(s, alpha):
    """Weighted average ``alpha m(t) / (1 - exp(-alpha t))`` of the path so far.

    Undefined at ``t = 0``, where the average is taken to be ``x(0)``.
    """
    if not s.t > 0:
        raise ContractViolation(f"avg_point needs t > 0, got {s.t}")
    return alpha * np.asarray(s.m, dtype=float) / -math.expm1(-alpha * s.t)


def weight_at(s, t, alpha):
    """Averaging density ``alpha e^{alpha s} / (e^{alpha t} - 1)`` on ``[0, t]``.

    Evaluated as ``alpha e^{-alpha (t - s)} / (1 - e^{-alpha t})`` so that
    large ``alpha * t`` does not overflow. ``s`` may be an array.
    """
    if not t > 0:
        raise ContractViolation(f"t must be positive, got {t}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > t):
        raise ContractViolation(f"s must lie in [0, {t}]")
    w = alpha * np.exp(-alpha * (t - s)) / -math.expm1(-alpha * t)
    return float(w) if w.ndim == 0 else w


def write_checkpoints_csv(path, traj):
    """Write ``t, grad_norm_x, grad_norm_xbar, phi, e_diss, energy_residual``."""
    csvio.write_columns(path, csvio.CHECKPOINT_COLUMNS,
                        [traj.t, traj.grad_norm_x, traj.grad_norm_xbar,
                         traj.phi, traj.e_diss, traj.energy_residual])
