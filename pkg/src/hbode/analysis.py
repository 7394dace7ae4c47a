"""Bounds and numerical checks on integrated heavy-ball trajectories.

All integrals over a trajectory use the composite trapezoidal rule on the
checkpoint grid, so their accuracy is governed by ``checkpoint_stride * h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import (ContractViolation, HorizonTooShortError,
                     InsufficientCheckpointsError, WeightNormalizationError)
from .hb_ode import weight_at

__all__ = [
    "BoundReport",
    "RateFit",
    "leading_bound",
    "finite_T_bound",
    "bound_report",
    "trapezoid",
    "cumulative_trapezoid",
    "grad_avg_identity_residual",
    "lemma34_check",
    "lemma33_check",
    "lemma32_residual",
    "nested_kernel",
    "exp_kernel",
    "exp_kernel_bound",
    "second_term_integral",
    "min_grad_norm",
    "fit_rate",
    "inequality_holds",
]


def trapezoid(y, x, axis=0):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape[axis] < 2:
        return np.zeros(np.delete(y.shape, axis)) if y.ndim > 1 else 0.0
    return np.trapezoid(y, x, axis=axis)


def cumulative_trapezoid(y, x):
    """Running trapezoidal integral along axis 0, starting from 0."""
    y = np.asarray(y, dtype=float)
    dx = np.diff(np.asarray(x, dtype=float))
    if y.ndim > 1:
        dx = dx.reshape((-1,) + (1,) * (y.ndim - 1))
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * dx * (y[1:] + y[:-1]), axis=0)
    return out


def inequality_holds(lhs, rhs, rel=1e-9):
    """``lhs <= rhs + rel * (1 + |rhs|)``, the slack used for bound checks."""
    return lhs <= rhs + rel * (1.0 + abs(rhs))


# bounds ----------------------------------------------------------------------

def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ContractViolation(f"{k} must be positive, got {v}")


def leading_bound(L2, delta_f, T):
    """Leading term ``(7/6) (3 L2)^(1/7) (delta_f / T)^(4/7)`` of the
    horizon-``T`` bound on ``min_t ||grad f(x_bar(t))||``."""
    _positive(L2=L2, delta_f=delta_f, T=T)
    return 7.0 / 6.0 * (3.0 * L2) ** (1.0 / 7.0) * (delta_f / T) ** (4.0 / 7.0)


def finite_T_bound(L2, delta_f, T, alpha):
    """Exact bound ``(sqrt(alpha T delta_f) + L2 delta_f / (2 alpha^3)) / (T - 3/(2 alpha))``.

    Valid for any friction ``alpha``; with the scheduled friction it equals
    :func:`leading_bound` divided by ``1 - 3 / (2 alpha T)``.

    Raises
    ------
    HorizonTooShortError
        If ``T <= 3 / (2 alpha)``.
    """
    if L2 < 0 or delta_f < 0:
        raise ContractViolation("L2 and delta_f must be nonnegative")
    _positive(T=T, alpha=alpha)
    effective = T - 1.5 / alpha
    if effective <= 0:
        raise HorizonTooShortError(
            f"T={T} <= 3/(2 alpha)={1.5 / alpha}; the bound is vacuous")
    num = math.sqrt(alpha * T * delta_f) + L2 * delta_f / (2.0 * alpha ** 3)
    return num / effective


@dataclass
class BoundReport:
    T: float
    alpha: float
    min_grad_norm_xbar: float
    t_star: float
    leading_bound: float
    finite_T_bound: float
    satisfied: bool

    def as_row(self):
        return {"T": self.T, "alpha": self.alpha,
                "min_grad_norm_xbar": self.min_grad_norm_xbar,
                "t_star": self.t_star, "leading_bound": self.leading_bound,
                "finite_T_bound": self.finite_T_bound,
                "satisfied": self.satisfied}


def bound_report(traj, L2, delta_f):
    """Compare the grid minimum of ``||grad f(x_bar)||`` with the bounds.

    ``finite_T_bound`` is NaN (and ``satisfied`` False) when the horizon is
    too short for the bound to be defined. The minimum over checkpoints can
    only exceed the continuous minimum, so a pass here is conservative.
    """
    T = traj.params.T
    alpha = traj.alpha
    t_star, value = min_grad_norm(traj)
    try:
        lead = leading_bound(L2, delta_f, T)
    except ContractViolation:
        lead = math.nan
    try:
        fin = finite_T_bound(L2, delta_f, T, alpha)
    except HorizonTooShortError:
        fin = math.nan
    ok = bool(not math.isnan(fin) and inequality_holds(value, fin))
    return BoundReport(T, alpha, value, t_star, lead, fin, ok)


def min_grad_norm(traj):
    """``(t_star, min ||grad f(x_bar)||)`` over checkpoints; earliest t on ties."""
    g = np.asarray(traj.grad_norm_xbar)
    if g.size == 0:
        raise ContractViolation("empty trajectory")
    i = int(np.argmin(g))
    return float(traj.t[i]), float(g[i])


# identities ----------------------------------------------------------------

def _prefix(traj, t):
    i = traj.index_of(t)
    if i + 1 < 3:
        raise InsufficientCheckpointsError(
            f"need at least 3 checkpoints in [0, {t}], have {i + 1}")
    if not traj.t[i] > 0:
        raise ContractViolation("t must be positive")
    return i


def grad_avg_identity_residual(p, traj, alpha, t):
    """Residual of the gradient-average identity at checkpoint time ``t``.

    For the heavy-ball flow with friction ``alpha``, integrating by parts gives
    ``int_0^t w_t(s) grad f(x(s)) ds = -alpha / (1 - e^{-alpha t}) x'(t)``.
    The left side is evaluated by trapezoidal quadrature on the checkpoints in
    ``[0, t]``; ``alpha`` is the rate of the averaging weight.
    """
    i = _prefix(traj, t)
    t = float(traj.t[i])
    s = traj.t[:i + 1]
    g = p.eval_grad(traj.x[:i + 1])
    w = weight_at(np.clip(s, 0.0, t), t, alpha)
    q = trapezoid(w[:, None] * g, s)
    target = -alpha / -math.expm1(-alpha * t) * traj.v[i]
    return float(np.linalg.norm(q - target))


def lemma34_check(traj, alpha, delta_f, tol=None):
    """``alpha * int_0^t ||x'||^2 <= delta_f + tol`` at every checkpoint.

    ``tol`` defaults to ``1e-9 * (1 + |delta_f|)``.
    """
    if tol is None:
        tol = 1e-9 * (1 + abs(delta_f))
    return bool(np.all(alpha * np.asarray(traj.e_diss) <= delta_f + tol))


def lemma33_check(p, traj, alpha, t):
    """Both sides of the per-time bound on ``||grad f(x_bar(t))||``.

    ``rhs = alpha / (1 - e^{-alpha t}) ||x'(t)||
           + L2 / (2 (1 - e^{-alpha t})^2) int_0^t ||x'(s)||^2 e^{-alpha (t-s)} (t-s) ds``

    Returns ``(lhs, rhs)``; the caller decides the slack.
    """
    i = _prefix(traj, t)
    t = float(traj.t[i])
    s = traj.t[:i + 1]
    c = -math.expm1(-alpha * t)
    vsq = np.sum(traj.v[:i + 1] ** 2, axis=-1)
    lag = t - s
    memory = trapezoid(vsq * np.exp(-alpha * lag) * lag, s)
    rhs = alpha / c * math.sqrt(vsq[-1]) + 0.5 * p.L2 / c ** 2 * memory
    return float(traj.grad_norm_xbar[i]), float(rhs)


def second_term_integral(traj, alpha):
    """``int_0^T int_0^t ||x'(s)||^2 e^{-alpha (t-s)} (t-s) ds dt``.

    Both integrals are trapezoidal on the checkpoint grid. The inner one is
    advanced by a two-term recurrence: with ``u_j`` the quadrature weight
    times ``||x'(t_j)||^2``, ``S0_k = sum_{j<k} u_j e^{-alpha (t_k - t_j)}``
    and ``S1_k`` the same sum with the extra factor ``t_k - t_j`` satisfy
    ``S0' = E (S0 + u_k)`` and ``S1' = E (S1 + dt (S0 + u_k))`` with
    ``E = e^{-alpha dt}``. ``S1_k`` is the inner integral at ``t_k``.
    """
    t = np.asarray(traj.t, dtype=float)
    g = np.sum(np.asarray(traj.v) ** 2, axis=-1)
    dt = np.diff(t)
    q = np.zeros_like(t)
    q[:-1] += 0.5 * dt
    q[1:] += 0.5 * dt
    u = q * g
    decay = np.exp(-alpha * dt)
    inner = np.zeros_like(t)
    s0 = s1 = 0.0
    for k in range(len(dt)):
        a = s0 + u[k]
        s1 = decay[k] * (s1 + dt[k] * a)
        s0 = decay[k] * a
        inner[k + 1] = s1
    return float(np.trapezoid(inner, t))


# averaging-error bound -------------------------------------------------------

def nested_kernel(s, w):
    """``K(s) = int_0^s dsigma int_s^t dtau w(sigma) w(tau) (tau - sigma)``.

    The integrand separates, so with ``A = int_0^s w``, ``B = int_0^s sigma w``,
    ``C = int_s^t w`` and ``D = int_s^t tau w`` one has ``K = A D - B C``. All
    four are running trapezoidal sums on the grid ``s``.
    """
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    A = cumulative_trapezoid(w, s)
    B = cumulative_trapezoid(s * w, s)
    C = A[-1] - A
    D = B[-1] - B
    return A * D - B * C


def exp_kernel(s, t, alpha):
    """Closed form of :func:`nested_kernel` for the weight ``w_t`` of rate ``alpha``."""
    s = np.asarray(s, dtype=float)
    g = 1.0 / -math.expm1(-alpha * t)
    E = np.exp(-alpha * (t - s))
    E0 = math.exp(-alpha * t)
    ia = 1.0 / alpha
    A = g * (E - E0)
    B = g * (E * (s - ia) + E0 * ia)
    C = g * (1.0 - E)
    D = g * ((t - ia) - E * (s - ia))
    return np.maximum(A * D - B * C, 0.0)


def exp_kernel_bound(s, t, alpha):
    """Upper bound ``e^{-alpha (t-s)} (t-s) / (1 - e^{-alpha t})^2`` on
    :func:`exp_kernel`, obtained by dropping a nonpositive term."""
    s = np.asarray(s, dtype=float)
    return np.exp(-alpha * (t - s)) * (t - s) / math.expm1(-alpha * t) ** 2


def lemma32_residual(s, z, w, p, zdot=None, alpha=None, norm_tol=1e-10):
    """Both sides of the averaging-error bound for a sampled path.

    ``lhs = || grad f(z_bar) - int w grad f(z) ||`` with ``z_bar = int w z``;
    ``rhs = (L2 / 2) int ||z'(s)||^2 K(s) ds``.

    Parameters
    ----------
    s : (n,) array
        Increasing grid on ``[0, t]``.
    z : (n, dim) array
        Path samples.
    w : (n,) array
        Nonnegative weight samples integrating to one.
    zdot : (n, dim) array, optional
        Path derivative; estimated with second-order differences if omitted.
    alpha : float, optional
        Declares ``w`` to be the exponential weight of this rate. The kernel
        then uses its closed form and ``w`` is checked pointwise against it
        instead of through quadrature.

    Raises
    ------
    WeightNormalizationError
        If ``w`` is negative or not normalised within ``norm_tol``.
    """
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.ndim != 2 or z.shape[0] != s.size or w.shape != s.shape:
        raise ContractViolation("s, z, w must have matching lengths")
    if s.size < 3:
        raise InsufficientCheckpointsError("need at least 3 nodes")
    if np.any(w < 0):
        raise WeightNormalizationError("weights must be nonnegative")
    t = s[-1] - s[0]
    if alpha is None:
        mass = trapezoid(w, s)
        if abs(mass - 1.0) > norm_tol:
            raise WeightNormalizationError(
                f"weights integrate to {mass!r}, not 1")
        K = nested_kernel(s, w)
    else:
        exact = weight_at(s - s[0], t, alpha)
        if not np.allclose(w, exact, rtol=norm_tol, atol=0.0):
            raise WeightNormalizationError(
                "weights do not match the exponential density")
        K = exp_kernel(s - s[0], t, alpha)
    if zdot is None:
        zdot = np.gradient(z, s, axis=0, edge_order=2)
    z_bar = trapezoid(w[:, None] * z, s)
    avg_grad = trapezoid(w[:, None] * p.eval_grad(z), s)
    lhs = float(np.linalg.norm(p.eval_grad(z_bar) - avg_grad))
    speed2 = np.sum(np.asarray(zdot, dtype=float) ** 2, axis=-1)
    rhs = 0.5 * p.L2 * trapezoid(speed2 * K, s)
    return lhs, float(rhs)


# rates -----------------------------------------------------------------------

@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: List[Tuple[float, float]] = field(default_factory=list)


def fit_rate(points):
    """Least-squares line through ``(log T, log value)``.

    The slope estimates the exponent ``p`` in ``value ~ c * T^p``.
    """
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 3:
        raise ContractViolation(f"need at least 3 points, got {len(pts)}")
    T = np.array([a for a, _ in pts])
    v = np.array([b for _, b in pts])
    if np.any(T <= 0) or np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ContractViolation("rate fit needs positive finite values")
    lx, ly = np.log(T), np.log(v)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2,
                   list(zip(lx.tolist(), ly.tolist())))
