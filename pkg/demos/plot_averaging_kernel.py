"""
Averaging error and its double-integral kernel
==============================================

For a path ``z`` and a probability weight ``w`` on ``[0, t]``, the gap
between the gradient at the average and the average gradient is bounded by
``(L2 / 2) int |z'(s)|^2 K(s) ds`` with
``K(s) = int_0^s int_s^t w(sigma) w(tau) (tau - sigma)``.
``K`` is computed here by running sums, by its closed form for the
exponential weight, and checked on random cubic paths.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hbode import analysis, weight_at
from hbode.problems import cos_sum

t, alpha = 4.0, 1.5
s = np.linspace(0, t, 4001)
K_num = analysis.nested_kernel(s, weight_at(s, t, alpha))
K_exact = analysis.exp_kernel(s, t, alpha)
print("max |K_num - K_exact| =", np.max(np.abs(K_num - K_exact)))

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(s, K_exact, label="exponential weight")
ax.plot(s, analysis.exp_kernel_bound(s, t, alpha), "--", label="simple upper bound")
ax.plot(s, analysis.nested_kernel(s, np.full_like(s, 1 / t)), label="uniform weight")
ax.legend()
fig.savefig("averaging_kernel.svg")

# %%
# Random cubic paths in two dimensions

p = cos_sum(2)
rng = np.random.default_rng(0)
s = np.linspace(0, 1, 10001)
P = np.stack([s ** k for k in range(4)], axis=1)
dP = np.stack([k * s ** max(k - 1, 0) for k in range(4)], axis=1)
for _ in range(5):
    c = rng.uniform(-1, 1, (4, 2))
    lhs, rhs = analysis.lemma32_residual(s, P @ c, weight_at(s, 1.0, 3.0), p,
                                         zdot=dP @ c, alpha=3.0)
    print(f"lhs={lhs:.3e} rhs={rhs:.3e}")
