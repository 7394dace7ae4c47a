"""SVG figures from the CSV outputs; optional, never read by checks."""

import os

import numpy as np

from .. import csvio
from ..errors import SchemaError


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_sweep(data, path):
    plt = _pyplot()
    T = csvio.float_column(data, "T")
    gmin = csvio.float_column(data, "min_grad_norm_xbar")
    bound = csvio.float_column(data, "finite_T_bound")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ok = gmin > 0
    ax.loglog(T[ok], gmin[ok], "o-", label=r"$\min_t \|\nabla f(\bar x(t))\|$")
    ax.loglog(T, bound, "s--", label="finite-horizon bound")
    ref = bound[np.isfinite(bound)]
    if ref.size:
        T0 = T[np.isfinite(bound)][0]
        ax.loglog(T, ref[0] * (T / T0) ** (-4.0 / 7.0), "k:", label=r"$T^{-4/7}$")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("gradient norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_run(data, path):
    plt = _pyplot()
    t = csvio.float_column(data, "t")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(t, csvio.float_column(data, "energy_residual"),
            label=r"$\Phi(t) + \alpha e_{diss}(t) - \Phi(0)$")
    ax.set_xlabel("t")
    ax.set_ylabel("energy identity residual")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_csv(csv_path, out_dir=None):
    """Render the figure matching the CSV's schema; returns the SVG path."""
    header, data = csvio.read_table(csv_path)
    stem = os.path.splitext(os.path.basename(csv_path))[0]
    out_dir = out_dir or os.path.dirname(os.path.abspath(csv_path))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, stem + ".svg")
    if header == csvio.CHECKPOINT_COLUMNS:
        plot_run(data, path)
    elif "min_grad_norm_xbar" in header:
        plot_sweep(data, path)
    else:  # pragma: no cover - read_table already filters headers
        raise SchemaError(f"{csv_path}: nothing to plot")
    return path
