"""Drivers behind the ``hbode`` subcommands.

Each ``cmd_*`` function writes its artifacts, prints a human-readable report
and returns a process exit code.
"""

from __future__ import annotations

import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import analysis, csvio
from ..errors import HbodeError, HorizonTooShortError
from ..hb_ode import (OdeParams, alpha_for_horizon, auto_step, integrate,
                      weight_at,
                      write_checkpoints_csv)
from .config import sampling_seed

IDENTITY_RTOL = 1e-6
INEQUALITY_SLACK = 1e-9
GRAD_AVG_ATOL = 1e-4


@dataclass
class SweepRecord:
    T: float
    alpha: float
    min_grad_norm_xbar: float
    t_star: float
    leading_bound: float
    finite_T_bound: float
    satisfied: bool
    step_count: int
    wall_time_seconds: float
    error: str = ""

    def as_row(self):
        return dict(vars(self))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}  {self.name:<28s} value={self.value:.6g} "
                f"threshold={self.threshold:.6g} {self.detail}").rstrip()


def resolve_alpha(cfg, p, T):
    if cfg.alpha_override is not None:
        return float(cfg.alpha_override)
    return alpha_for_horizon(p.L2, p.delta_f(), T)


def resolve_h(cfg, p, alpha, T):
    if cfg.h_rule == "auto":
        return auto_step(alpha, T, p.L1)
    return float(cfg.h_rule)


def run_single(cfg, T, stride=None, avg_alpha_scale=1.0):
    """Integrate one horizon of ``cfg``; returns ``(problem, trajectory)``."""
    p = cfg.build_problem()
    alpha = resolve_alpha(cfg, p, T)
    h = resolve_h(cfg, p, alpha, T)
    params = OdeParams(alpha, T, h, cfg.method,
                       cfg.checkpoint_stride if stride is None else stride)
    traj = integrate(p, params, avg_alpha=alpha * avg_alpha_scale)
    return p, traj


def _time_slug(T):
    return ("%g" % T).replace("+", "")


# run -------------------------------------------------------------------------

def run_summary(p, traj):
    """Diagnostics for one trajectory, as an ordered dict of scalars."""
    alpha = traj.alpha
    df = p.delta_f()
    rep = analysis.bound_report(traj, p.L2, df)
    res = traj.energy_residual
    return {
        "problem": p.name, "dim": p.dim, "T": traj.params.T, "alpha": alpha,
        "h": traj.params.step, "step_count": traj.params.n_steps,
        "min_grad_norm_xbar": rep.min_grad_norm_xbar, "t_star": rep.t_star,
        "leading_bound": rep.leading_bound,
        "finite_T_bound": rep.finite_T_bound, "satisfied": rep.satisfied,
        "energy_residual_max": float(np.max(np.abs(res))),
        "energy_residual_rel": float(np.max(np.abs(res)) / (1 + abs(traj.phi[0]))),
        "lemma34_excess": float(np.max(alpha * traj.e_diss) - df),
        "grad_avg_residual_T": analysis.grad_avg_identity_residual(
            p, traj, traj.avg_alpha, traj.t[-1]) if len(traj) >= 3 else math.nan,
        "in_box": p.in_box(traj.x),
    }


def run_checks(p, summary):
    df = p.delta_f()
    checks = [
        CheckResult("energy_identity", summary["energy_residual_rel"] <= IDENTITY_RTOL,
                    summary["energy_residual_rel"], IDENTITY_RTOL,
                    "max |Phi + alpha e_diss - Phi(0)| / (1 + |Phi(0)|)"),
        CheckResult("dissipation_bound", summary["lemma34_excess"]
                    <= INEQUALITY_SLACK * (1 + df),
                    summary["lemma34_excess"], INEQUALITY_SLACK * (1 + df),
                    "max alpha e_diss - delta_f"),
        CheckResult("hessian_certificate_box", bool(summary["in_box"]),
                    float(summary["in_box"]), 1.0, "trajectory inside L2 box"),
    ]
    if not math.isnan(summary["finite_T_bound"]):
        checks.append(CheckResult(
            "finite_T_bound", bool(summary["satisfied"]),
            summary["min_grad_norm_xbar"], summary["finite_T_bound"],
            "min ||grad f(x_bar)|| vs finite-horizon bound"))
    return checks


def cmd_run(cfg, out=None):
    out = out or sys.stdout
    T = cfg.T_grid[0]
    try:
        p, traj = run_single(cfg, T)
        summary = run_summary(p, traj)
        if math.isnan(summary["finite_T_bound"]):
            raise HorizonTooShortError(
                f"T={T} <= 3/(2 alpha)={1.5 / traj.alpha:g}; bound is vacuous")
    except HbodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"run_T{_time_slug(T)}.csv")
    write_checkpoints_csv(path, traj)
    print(" ".join(f"{k}={csvio.format_value(v)}" for k, v in summary.items()),
          file=out)
    checks = run_checks(p, summary)
    for c in checks:
        print(c.line(), file=out)
    print(f"wrote {path}", file=out)
    return 0 if all(c.passed for c in checks) else 1


# sweep -----------------------------------------------------------------------

def _sweep_row(cfg, T):
    t0 = time.perf_counter()
    alpha = step_count = math.nan
    try:
        p = cfg.build_problem()
        alpha = resolve_alpha(cfg, p, T)
        h = resolve_h(cfg, p, alpha, T)
        params = OdeParams(alpha, T, h, cfg.method, cfg.checkpoint_stride)
        step_count = params.n_steps
        traj = integrate(p, params)
        rep = analysis.bound_report(traj, p.L2, p.delta_f())
        err = "" if not math.isnan(rep.finite_T_bound) else "horizon too short"
        return SweepRecord(T, alpha, rep.min_grad_norm_xbar, rep.t_star,
                           rep.leading_bound, rep.finite_T_bound, rep.satisfied,
                           step_count, time.perf_counter() - t0, err)
    except HbodeError as exc:
        return SweepRecord(T, alpha, math.nan, math.nan, math.nan, math.nan,
                           False, step_count, time.perf_counter() - t0,
                           f"{type(exc).__name__}: {exc}")


def sweep(cfg):
    """One :class:`SweepRecord` per horizon, in grid order.

    Rows are independent; with ``cfg.workers > 1`` they run in separate
    processes and are collected back in grid order.
    """
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_sweep_row, [cfg] * len(cfg.T_grid), cfg.T_grid))
    return [_sweep_row(cfg, T) for T in cfg.T_grid]


def sweep_rates(records):
    """Rate fits keyed by quantity; ``None`` where fewer than 3 usable points."""
    fits = {}
    for name in ("min_grad_norm_xbar", "leading_bound", "finite_T_bound"):
        pts = [(r.T, getattr(r, name)) for r in records
               if getattr(r, name) > 0 and math.isfinite(getattr(r, name))]
        fits[name] = analysis.fit_rate(pts) if len(pts) >= 3 else None
    return fits


RATE_COLUMNS = ("quantity", "slope", "intercept", "r_squared", "n_points")


def cmd_sweep(cfg, out=None):
    out = out or sys.stdout
    if len(cfg.T_grid) < 3:
        print("error: a sweep needs at least 3 horizons", file=sys.stderr)
        return 2
    try:
        cfg.build_problem()
    except HbodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = sweep(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "sweep.csv")
    csvio.write_table(path, csvio.SWEEP_COLUMNS, [r.as_row() for r in records])
    fits = sweep_rates(records)
    rate_rows = []
    for name, fit in fits.items():
        if fit is None:
            rate_rows.append({"quantity": name, "slope": math.nan,
                              "intercept": math.nan, "r_squared": math.nan,
                              "n_points": 0})
        else:
            rate_rows.append({"quantity": name, "slope": fit.slope,
                              "intercept": fit.intercept,
                              "r_squared": fit.r_squared,
                              "n_points": len(fit.points)})
    rpath = os.path.join(cfg.output_dir, "rates.csv")
    csvio.write_table(rpath, RATE_COLUMNS, rate_rows)

    for r in records:
        status = "ok" if r.satisfied else ("ERROR " + r.error if r.error else "VIOLATED")
        print(f"T={r.T:<10.6g} alpha={r.alpha:.6g} min|grad f(x_bar)|="
              f"{r.min_grad_norm_xbar:.6g} bound={r.finite_T_bound:.6g} "
              f"steps={r.step_count} {status}", file=out)
    for row in rate_rows:
        note = "  (reported only)" if row["quantity"] == "min_grad_norm_xbar" else ""
        print(f"slope[{row['quantity']}] = {row['slope']:.6g} "
              f"(n={row['n_points']}){note}", file=out)
    print(f"reference slope -4/7 = {-4 / 7:.6g}", file=out)
    print(f"wrote {path} and {rpath}", file=out)
    return 0 if all(r.satisfied for r in records) else 1


# verify ----------------------------------------------------------------------

def _cubic_paths(rng, n_paths, dim, nodes, t_end=1.0, scale=0.5):
    s = np.linspace(0.0, t_end, nodes)
    for _ in range(n_paths):
        c = rng.uniform(-scale, scale, size=(4, dim))
        powers = np.stack([s ** k for k in range(4)], axis=1)
        dpowers = np.stack([k * s ** max(k - 1, 0) for k in range(4)], axis=1)
        yield s, powers @ c, dpowers @ c


def lemma32_suite(p, n_paths=5, nodes=2001, rate=3.0, seed=None):
    """Averaging-error bound on random cubic paths with uniform and
    exponential weights; returns the worst ``lhs - rhs``."""
    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    worst = -math.inf
    for s, z, zd in _cubic_paths(rng, n_paths, p.dim, nodes):
        t = s[-1]
        for w, a in ((np.full_like(s, 1.0 / t), None),
                     (weight_at(s, t, rate), rate)):
            lhs, rhs = analysis.lemma32_residual(s, z, w, p, zdot=zd, alpha=a)
            worst = max(worst, lhs - rhs - INEQUALITY_SLACK * (1 + abs(rhs)))
    return worst


def sampled_hessian_lipschitz(p, n_pairs=1000, seed=None, scale=5.0):
    """Largest ``||H(x) - H(y)||_2 / ||x - y||`` over random pairs.

    Pairs are drawn in the certification box when the problem has one.
    """
    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    half = p.box if p.box is not None else scale
    worst = 0.0
    for _ in range(n_pairs):
        x = rng.uniform(-half, half, p.dim)
        y = rng.uniform(-half, half, p.dim)
        dH = p.hess_matrix(x) - p.hess_matrix(y)
        worst = max(worst, np.linalg.norm(dH, 2) / np.linalg.norm(x - y))
    return worst


def verify_suite(cfg, avg_alpha_scale=1.0):
    """Run every identity and inequality check on one horizon of ``cfg``.

    The trajectory is integrated at a tenth of the configured stride; the
    configured grid is recovered by subsampling for the refinement check.
    """
    T = cfg.T_grid[0]
    fine_stride = max(1, cfg.checkpoint_stride // 10)
    p, fine = run_single(cfg, T, stride=fine_stride,
                         avg_alpha_scale=avg_alpha_scale)
    coarse = fine.subsample(cfg.checkpoint_stride // fine_stride)
    alpha = fine.alpha
    df = p.delta_f()
    checks = []

    rel = float(np.max(np.abs(fine.energy_residual)) / (1 + abs(fine.phi[0])))
    checks.append(CheckResult("energy_identity", rel <= IDENTITY_RTOL, rel,
                              IDENTITY_RTOL))

    times = [coarse.t[np.argmin(np.abs(coarse.t - frac * T))]
             for frac in (0.25, 0.5, 1.0)]
    for tt in times:
        r_c = analysis.grad_avg_identity_residual(p, coarse, fine.avg_alpha, tt)
        r_f = analysis.grad_avg_identity_residual(p, fine, fine.avg_alpha, tt)
        i = fine.index_of(tt)
        scale_ = alpha / -math.expm1(-alpha * tt) * np.linalg.norm(fine.v[i])
        # relative to the size of either side; quadrature error at the fine
        # stride is about (alpha * stride * h)^2 / 12
        rel_f = r_f / max(scale_, 1e-300)
        checks.append(CheckResult(f"grad_avg_identity@{tt:g}",
                                  r_c <= GRAD_AVG_ATOL and rel_f <= 1e-2,
                                  r_c, GRAD_AVG_ATOL,
                                  f"fine residual {r_f:.3g} (relative {rel_f:.3g})"))
        checks.append(CheckResult(f"grad_avg_refinement@{tt:g}", r_f <= r_c,
                                  r_f, r_c, "fine stride vs configured stride"))

    worst32 = lemma32_suite(p)
    checks.append(CheckResult("averaging_error_bound", worst32 <= 0, worst32, 0.0,
                              "max lhs - rhs over synthetic cubic paths"))

    worst33 = -math.inf
    for k in range(1, 9):
        tt = fine.t[np.argmin(np.abs(fine.t - k * T / 8))]
        lhs, rhs = analysis.lemma33_check(p, fine, fine.avg_alpha, tt)
        worst33 = max(worst33, lhs - rhs - 1e-6 * (1 + rhs))
    checks.append(CheckResult("per_time_gradient_bound", worst33 <= 0, worst33, 0.0,
                              "max lhs - rhs - 1e-6 (1 + rhs) over 8 times"))

    tol34 = INEQUALITY_SLACK * (1 + df)
    excess = float(np.max(alpha * fine.e_diss) - df)
    checks.append(CheckResult("dissipation_bound", excess <= tol34, excess, tol34))

    second = analysis.second_term_integral(fine, alpha)
    cap = df / alpha ** 3
    checks.append(CheckResult("memory_integral_bound", second <= 1.05 * cap,
                              second, cap, "double quadrature vs delta_f/alpha^3"))

    if p.L2 > 0:
        lip = sampled_hessian_lipschitz(p)
        checks.append(CheckResult("hessian_lipschitz_sampled",
                                  lip <= p.L2 * (1 + 1e-12), lip, p.L2))
    checks.append(CheckResult("hessian_certificate_box", p.in_box(fine.x),
                              float(np.max(np.abs(fine.x))),
                              p.box if p.box is not None else math.inf))
    rep = analysis.bound_report(coarse, p.L2, df)
    if not math.isnan(rep.finite_T_bound):
        checks.append(CheckResult("finite_T_bound", rep.satisfied,
                                  rep.min_grad_norm_xbar, rep.finite_T_bound))
    return checks


def cmd_verify(cfg, out=None, avg_alpha_scale=1.0):
    out = out or sys.stdout
    try:
        checks = verify_suite(cfg, avg_alpha_scale=avg_alpha_scale)
    except HbodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for c in checks:
        print(c.line(), file=out)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print("failed: " + ", ".join(failed), file=out)
        return 1
    print(f"all {len(checks)} checks passed", file=out)
    return 0


# bound -----------------------------------------------------------------------

def cmd_bound(L2, delta_f, T, out=None):
    out = out or sys.stdout
    try:
        alpha = alpha_for_horizon(L2, delta_f, T)
        lead = analysis.leading_bound(L2, delta_f, T)
    except HbodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"alpha = {alpha:.10g}", file=out)
    print(f"leading_bound = {lead:.10g}", file=out)
    try:
        fin = analysis.finite_T_bound(L2, delta_f, T, alpha)
        print(f"finite_T_bound = {fin:.10g}", file=out)
    except HorizonTooShortError:
        print(f"finite_T_bound = vacuous (T = {T:g} <= 3/(2 alpha) = "
              f"{1.5 / alpha:.6g})", file=out)
    return 0
