"""Heavy-ball ODE laboratory.

Integrates ``x'' = -alpha x' - grad f(x)`` together with its exponentially
weighted average trajectory, and checks the gradient-norm bounds that hold
along it.
"""

from .errors import (ContractViolation, DegenerateScheduleError,
                     DivergenceError, HbodeError, HorizonTooShortError)
from .hb_ode import (Checkpoint, HbState, Method, OdeParams, Trajectory,
                     alpha_for_horizon, auto_step, avg_point, integrate, rhs,
                     weight_at)
from .problems import Problem, make_problem

__version__ = "0.1.0"
