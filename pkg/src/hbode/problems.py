"""Smooth test objectives with exact derivatives and Lipschitz metadata.

Every objective accepts points of shape ``(..., dim)`` so that gradients along a
whole trajectory can be evaluated in one call.

The suite:

``quadratic``
    ``0.5 * ||x||^2``. Gradient Lipschitz constant 1, Hessian constant, so
    ``L2 == 0``. Trajectories of the heavy-ball flow are available in closed
    form, which makes it the reference problem for integrator accuracy.
``cos_sum``
    ``sum_i (1 - cos x_i)``. Nonconvex, ``L1 == L2 == 1``, ``inf f == 0``.
``rosenbrock``
    Chained Rosenbrock. The gradient is not globally Lipschitz, so ``L1`` is
    left as ``None``; ``L2`` is certified only on a box (see
    :func:`rosenbrock_hessian_lipschitz`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation

__all__ = [
    "Problem",
    "make_problem",
    "PROBLEM_NAMES",
    "quadratic",
    "cos_sum",
    "rosenbrock",
    "rosenbrock_hessian_lipschitz",
]


@dataclass(frozen=True, eq=False)
class Problem:
    """A twice-differentiable objective with certified constants.

    Attributes
    ----------
    name : str
        Registry key.
    dim : int
        Ambient dimension.
    L1 : float or None
        Gradient Lipschitz constant, ``None`` when no global constant exists.
    L2 : float
        Hessian Lipschitz constant (on ``box`` when one is given).
    f_inf : float
        Certified lower bound on ``inf f``.
    x0 : ndarray
        Initial point.
    box : float or None
        Half-width of the cube ``[-box, box]^dim`` on which ``L2`` is
        certified. ``None`` means the constant is global.
    """

    name: str
    dim: int
    L1: Optional[float]
    L2: float
    f_inf: float
    x0: np.ndarray
    f: Callable[[np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    grad: Callable[[np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    hess: Callable[[np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    hvp: Callable[[np.ndarray, np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    box: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ContractViolation(f"dim must be positive, got {self.dim}")
        x0 = np.array(self.x0, dtype=float)
        if x0.shape != (self.dim,):
            raise ContractViolation(
                f"x0 has shape {x0.shape}, expected ({self.dim},)")
        x0.flags.writeable = False
        object.__setattr__(self, "x0", x0)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ContractViolation(
                f"{self.name}: expected trailing dimension {self.dim}, "
                f"got shape {x.shape}")
        return x

    def eval_f(self, x):
        """Objective value; a float for a single point, an array for a batch."""
        x = self._check(x)
        out = self.f(x)
        return float(out) if x.ndim == 1 else out

    def eval_grad(self, x):
        return self.grad(self._check(x))

    def hess_matrix(self, x):
        """Dense Hessian at a single point, shape ``(dim, dim)``."""
        x = self._check(x)
        if x.ndim != 1:
            raise ContractViolation("hess_matrix takes a single point")
        return self.hess(x)

    def hess_vec(self, x, u):
        x = self._check(x)
        u = self._check(u)
        if x.shape != u.shape:
            raise ContractViolation(
                f"point and direction shapes differ: {x.shape} vs {u.shape}")
        return self.hvp(x, u)

    def delta_f(self):
        """Initial optimality gap ``f(x0) - f_inf``."""
        return self.eval_f(self.x0) - self.f_inf

    def in_box(self, x):
        """True when every point of ``x`` lies where ``L2`` is certified."""
        if self.box is None:
            return True
        return bool(np.all(np.abs(np.asarray(x)) <= self.box))

    def with_x0(self, x0):
        return dataclasses.replace(self, x0=np.array(x0, dtype=float))


# quadratic ------------------------------------------------------------------

def _quad_f(x):
    return 0.5 * np.sum(x * x, axis=-1)


def _quad_grad(x):
    return np.array(x, dtype=float, copy=True)


def _quad_hess(x):
    return np.eye(x.shape[-1])


def _quad_hvp(x, u):
    return np.array(u, dtype=float, copy=True)


def quadratic(dim=1, x0=None):
    if x0 is None:
        x0 = np.ones(dim)
    return Problem("quadratic", dim, L1=1.0, L2=0.0, f_inf=0.0, x0=x0,
                   f=_quad_f, grad=_quad_grad, hess=_quad_hess, hvp=_quad_hvp)


# cos_sum --------------------------------------------------------------------
#
# Hessian is diag(cos x_i); |cos a - cos b| <= |a - b| gives L1 = L2 = 1.

def _cos_f(x):
    # 1 - cos x = 2 sin^2(x/2) keeps relative accuracy near the minimizer
    return 2.0 * np.sum(np.sin(0.5 * x) ** 2, axis=-1)


def _cos_grad(x):
    return np.sin(x)


def _cos_hess(x):
    return np.diag(np.cos(x))


def _cos_hvp(x, u):
    return np.cos(x) * u


def cos_sum(dim=10, x0=None):
    """``sum_i (1 - cos x_i)``.

    The default start ``x0_i = pi * i / (dim + 1)``, ``i = 1..dim`` is not a
    stationary point and has ``f(x0) = dim`` exactly, because the cosines of
    ``pi * i / (dim + 1)`` cancel in pairs.
    """
    if x0 is None:
        x0 = np.pi * np.arange(1, dim + 1) / (dim + 1)
    return Problem("cos_sum", dim, L1=1.0, L2=1.0, f_inf=0.0, x0=x0,
                   f=_cos_f, grad=_cos_grad, hess=_cos_hess, hvp=_cos_hvp)


# rosenbrock -----------------------------------------------------------------

ROSENBROCK_BOX = 2.0


def rosenbrock_hessian_lipschitz(box):
    """Certified Hessian Lipschitz constant of chained Rosenbrock on a cube.

    The only nonzero third derivatives of ``100 (x_{i+1} - x_i^2)^2`` are
    ``d^3/dx_i^3 = 2400 x_i`` and ``d^3/dx_i^2 dx_{i+1} = -400``. Contracting
    the tensor with a unit vector ``u`` gives a symmetric tridiagonal matrix
    whose rows have absolute sums at most ``2400 |x_j| + 400 + 400 + 400``.
    Gershgorin then bounds its operator norm by ``2400 * box + 1200``, and the
    mean value theorem along segments (the cube is convex) transfers this to
    ``||H(x) - H(y)|| <= L2 ||x - y||``.
    """
    return 2400.0 * box + 1200.0


def _rb_f(x):
    a = x[..., :-1]
    b = x[..., 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=-1)


def _rb_grad(x):
    a = x[..., :-1]
    b = x[..., 1:]
    r = b - a * a
    g = np.zeros_like(x, dtype=float)
    g[..., :-1] += -400.0 * a * r - 2.0 * (1.0 - a)
    g[..., 1:] += 200.0 * r
    return g


def _rb_hess(x):
    d = x.shape[-1]
    H = np.zeros((d, d))
    a = x[:-1]
    b = x[1:]
    idx = np.arange(d - 1)
    H[idx, idx] += 1200.0 * a * a - 400.0 * b + 2.0
    H[idx + 1, idx + 1] += 200.0
    H[idx, idx + 1] = -400.0 * a
    H[idx + 1, idx] = -400.0 * a
    return H


def _rb_hvp(x, u):
    a = x[..., :-1]
    b = x[..., 1:]
    ua = u[..., :-1]
    ub = u[..., 1:]
    out = np.zeros_like(u, dtype=float)
    out[..., :-1] += (1200.0 * a * a - 400.0 * b + 2.0) * ua - 400.0 * a * ub
    out[..., 1:] += 200.0 * ub - 400.0 * a * ua
    return out


def rosenbrock(dim=2, x0=None, box=ROSENBROCK_BOX):
    if dim < 2:
        raise ContractViolation("rosenbrock needs dim >= 2")
    if x0 is None:
        x0 = np.where(np.arange(dim) % 2 == 0, -1.2, 1.0)
    return Problem("rosenbrock", dim, L1=None,
                   L2=rosenbrock_hessian_lipschitz(box), f_inf=0.0, x0=x0,
                   f=_rb_f, grad=_rb_grad, hess=_rb_hess, hvp=_rb_hvp, box=box)


_REGISTRY = {
    "quadratic": quadratic,
    "cos_sum": cos_sum,
    "rosenbrock": rosenbrock,
}

PROBLEM_NAMES = tuple(_REGISTRY)


def make_problem(name, dim, x0=None):
    """Look up a suite problem by name, e.g. ``make_problem("cos_sum", 10)``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ContractViolation(
            f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}"
        ) from None
    return factory(dim=dim, x0=x0)
