"""
Plain gradient descent for context
==================================

Gradient descent with step ``0.5`` on ``cos_sum`` next to the gradient norm
along the heavy-ball trajectory and its average, plotted against time
(one descent step counted as ``0.5`` time units).
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from hbode import OdeParams, alpha_for_horizon, integrate
from hbode.harness import run_gd_baseline
from hbode.problems import cos_sum

p = cos_sum(10)
_, gd = run_gd_baseline(p, 400, 0.5)

T = 200.0
alpha = alpha_for_horizon(p.L2, p.delta_f(), T)
traj = integrate(p, OdeParams(alpha, T, 0.01, checkpoint_stride=10))

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy([0.5 * k for k in range(len(gd))],
            gd, label="gradient descent")
ax.semilogy(traj.t, traj.grad_norm_x, label=r"$\|\nabla f(x(t))\|$")
ax.semilogy(traj.t, traj.grad_norm_xbar, label=r"$\|\nabla f(\bar x(t))\|$")
ax.set_xlabel("t")
ax.legend()
fig.savefig("gd_baseline.svg")
print("final grad norms:", gd[-1], traj.grad_norm_x[-1], traj.grad_norm_xbar[-1])
