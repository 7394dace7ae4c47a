"""Plain gradient descent, used only as a reference curve."""

import numpy as np

from ..errors import ContractViolation, DivergenceError


def run_gd_baseline(p, steps, step_size, x0=None, blowup=1e8):
    """Iterate ``x <- x - step_size * grad f(x)`` for ``steps`` steps.

    Returns ``(iterates, grad_norms)`` with ``steps + 1`` rows each, the first
    row being the starting point.

    Raises
    ------
    DivergenceError
        When an iterate is non-finite or the gradient norm grows past
        ``blowup`` times its initial value.
    """
    if not step_size > 0:
        raise ContractViolation(f"step_size must be positive, got {step_size}")
    x = np.array(p.x0 if x0 is None else x0, dtype=float)
    xs = np.empty((steps + 1, p.dim))
    gn = np.empty(steps + 1)
    g = p.eval_grad(x)
    xs[0], gn[0] = x, np.linalg.norm(g)
    limit = blowup * max(gn[0], 1.0)
    for k in range(1, steps + 1):
        x = x - step_size * g
        g = p.eval_grad(x)
        xs[k], gn[k] = x, np.linalg.norm(g)
        if not (np.all(np.isfinite(x)) and gn[k] <= limit):
            raise DivergenceError(
                f"gradient descent diverged at iteration {k} "
                f"(step size {step_size})", step=k)
    return xs, gn
