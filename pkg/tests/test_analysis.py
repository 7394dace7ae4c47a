import math
from types import SimpleNamespace

import numpy as np
import pytest

from hbode import analysis
from hbode.errors import (ContractViolation, HorizonTooShortError,
                          InsufficientCheckpointsError, WeightNormalizationError)
from hbode.hb_ode import OdeParams, alpha_for_horizon, integrate, weight_at
from hbode.problems import cos_sum, quadratic


def test_leading_bound_examples():
    assert analysis.leading_bound(1 / 3, 1, 1) == pytest.approx(7 / 6)
    assert analysis.leading_bound(1 / 3, 1, 128) == pytest.approx(7 / 96)
    assert analysis.leading_bound(1 / 3, 1, 128) == pytest.approx(0.072917, abs=1e-6)


def test_finite_T_bound_examples():
    assert analysis.finite_T_bound(1 / 3, 1, 128, 0.5) == pytest.approx(28 / 375)
    with pytest.raises(HorizonTooShortError):
        analysis.finite_T_bound(1 / 3, 1, 1, 1.0)


def test_finite_over_leading_with_schedule():
    for T in np.logspace(2, 6, 9):
        a = alpha_for_horizon(1.0, 10.0, T)
        ratio = analysis.finite_T_bound(1.0, 10.0, T, a) / analysis.leading_bound(1.0, 10.0, T)
        assert ratio == pytest.approx(1 / (1 - 1.5 / (a * T)), rel=1e-12)
    assert ratio == pytest.approx(1.0, abs=1e-4)


def test_min_grad_norm():
    single = SimpleNamespace(t=np.array([0.0]), grad_norm_xbar=np.array([3.0]))
    assert analysis.min_grad_norm(single) == (0.0, 3.0)
    ties = SimpleNamespace(t=np.arange(4.0), grad_norm_xbar=np.array([2.0, 1.0, 1.0, 5.0]))
    assert analysis.min_grad_norm(ties) == (1.0, 1.0)


def test_min_grad_norm_quadratic_closed_form():
    traj = integrate(quadratic(1), OdeParams(2.0, 10.0, 1e-3))
    t_star, value = analysis.min_grad_norm(traj)
    assert t_star == 10.0
    assert value == pytest.approx(2 * 10 * math.exp(-10) / (1 - math.exp(-20)), rel=1e-8)


def test_min_grad_norm_refinement_never_increases():
    p = cos_sum(4)
    fine = integrate(p, OdeParams(0.9, 20.0, 0.01, checkpoint_stride=10))
    coarse = fine.subsample(10)
    assert analysis.min_grad_norm(fine)[1] <= analysis.min_grad_norm(coarse)[1]


def test_bound_report_short_horizon():
    traj = integrate(cos_sum(2), OdeParams(1.0, 1.0, 0.01))
    rep = analysis.bound_report(traj, 1.0, 2.0)
    assert math.isnan(rep.finite_T_bound) and not rep.satisfied
    assert rep.as_row()["T"] == 1.0


def test_grad_avg_identity_quadratic():
    # grad f(x) = x, so the weighted gradient average is x_bar(t)
    traj = integrate(quadratic(1), OdeParams(2.0, 1.0, 1e-3, checkpoint_stride=1))
    r = analysis.grad_avg_identity_residual(quadratic(1), traj, 2.0, 1.0)
    assert r <= 1e-6
    assert -2 * traj.v[-1, 0] / (1 - math.exp(-2)) == pytest.approx(0.850918, abs=1e-6)


def test_grad_avg_identity_needs_three_checkpoints():
    traj = integrate(quadratic(1), OdeParams(2.0, 1.0, 0.01))
    with pytest.raises(InsufficientCheckpointsError):
        analysis.grad_avg_identity_residual(quadratic(1), traj, 2.0, 1.0)


def test_dissipation_check():
    traj = integrate(quadratic(1), OdeParams(2.0, 10.0, 1e-3))
    assert analysis.lemma34_check(traj, 2.0, 0.5)
    assert not analysis.lemma34_check(traj, 2.0, 0.2)
    assert traj.e_diss[0] == 0.0


def test_per_time_bound_is_equality_on_quadratic():
    traj = integrate(quadratic(1), OdeParams(2.0, 5.0, 1e-3, checkpoint_stride=10))
    for t in (0.5, 2.0, 5.0):
        lhs, rhs = analysis.lemma33_check(quadratic(1), traj, 2.0, t)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_per_time_bound_at_critical_point():
    p = cos_sum(2).with_x0([0.0, 0.0])
    traj = integrate(p, OdeParams(1.0, 2.0, 0.01, checkpoint_stride=10))
    lhs, rhs = analysis.lemma33_check(p, traj, 1.0, 2.0)
    assert lhs == 0.0 and rhs == 0.0


def test_second_term_integral_brute_force():
    p = cos_sum(3)
    a = 0.9
    traj = integrate(p, OdeParams(a, 8.0, 0.01, checkpoint_stride=4))
    t = traj.t
    g = np.sum(traj.v ** 2, axis=1)
    inner = np.zeros_like(t)
    for k in range(1, len(t)):
        lag = t[k] - t[:k + 1]
        inner[k] = np.trapezoid(g[:k + 1] * np.exp(-a * lag) * lag, t[:k + 1])
    assert analysis.second_term_integral(traj, a) == pytest.approx(
        np.trapezoid(inner, t), rel=1e-12)


def _brute_kernel(s, w):
    n = len(s)
    K = np.zeros(n)
    for i in range(n):
        ss, ww = s[:i + 1], w[:i + 1]
        tt, wt = s[i:], w[i:]
        inner = np.array([np.trapezoid(wt * (tt - sig), tt) for sig in ss])
        K[i] = np.trapezoid(ww * inner, ss)
    return K


def test_nested_kernel_matches_brute_force(rng):
    s = np.sort(np.concatenate([[0.0, 2.0], rng.uniform(0, 2, 60)]))
    w = 1 + rng.uniform(0, 1, s.size)
    np.testing.assert_allclose(analysis.nested_kernel(s, w), _brute_kernel(s, w),
                               rtol=1e-10, atol=1e-13)


def test_exp_kernel_closed_form():
    t, a = 2.5, 1.7
    s = np.linspace(0, t, 20001)
    K = analysis.exp_kernel(s, t, a)
    np.testing.assert_allclose(K, analysis.nested_kernel(s, weight_at(s, t, a)),
                               atol=1e-8)
    assert K[0] == 0.0 and K[-1] == pytest.approx(0.0, abs=1e-15)
    assert np.all(K <= analysis.exp_kernel_bound(s, t, a) + 1e-15)


def test_uniform_kernel():
    # w = 1/t gives K(s) = s (t - s) / (2 t)
    s = np.linspace(0, 3, 301)
    np.testing.assert_allclose(analysis.nested_kernel(s, np.full_like(s, 1 / 3)),
                               s * (3 - s) / 6, atol=1e-12)


def test_averaging_bound_constant_path():
    s = np.linspace(0, 1, 101)
    z = np.tile([0.4, -1.0], (101, 1))
    lhs, rhs = analysis.lemma32_residual(s, z, np.ones_like(s), cos_sum(2))
    assert lhs == pytest.approx(0.0, abs=1e-14) and rhs == pytest.approx(0.0, abs=1e-25)


def test_averaging_bound_affine_path_quadratic():
    s = np.linspace(0, 1, 101)
    z = np.outer(s, [1.0, 2.0]) + [0.5, -0.5]
    lhs, rhs = analysis.lemma32_residual(s, z, weight_at(s, 1.0, 2.0), quadratic(2),
                                         alpha=2.0)
    assert lhs == pytest.approx(0.0, abs=1e-14) and rhs == 0.0


def test_averaging_bound_cubic_path_cos_sum(rng):
    s = np.linspace(0, 1, 10001)
    c = rng.uniform(-1, 1, (4, 2))
    z = np.stack([s ** k for k in range(4)], 1) @ c
    zd = np.stack([k * s ** max(k - 1, 0) for k in range(4)], 1) @ c
    lhs, rhs = analysis.lemma32_residual(s, z, np.ones_like(s), cos_sum(2), zdot=zd)
    assert 0 < lhs <= rhs
    # finite-difference derivative gives the same answer
    _, rhs_fd = analysis.lemma32_residual(s, z, np.ones_like(s), cos_sum(2))
    assert rhs_fd == pytest.approx(rhs, rel=1e-6)


def test_averaging_bound_weight_errors():
    s = np.linspace(0, 1, 11)
    z = np.zeros((11, 2))
    with pytest.raises(WeightNormalizationError):
        analysis.lemma32_residual(s, z, np.full_like(s, 2.0), cos_sum(2))
    with pytest.raises(WeightNormalizationError):
        analysis.lemma32_residual(s, z, np.linspace(-1, 3, 11), cos_sum(2))
    with pytest.raises(WeightNormalizationError):
        analysis.lemma32_residual(s, z, weight_at(s, 1.0, 1.0), cos_sum(2), alpha=2.0)
    with pytest.raises(ContractViolation):
        analysis.lemma32_residual(s, z[:5], np.ones(11), cos_sum(2))


def test_fit_rate_exact_power_law():
    T = np.array([10.0, 100.0, 1000.0, 1e4])
    fit = analysis.fit_rate(zip(T, 3.0 * T ** (-4 / 7)))
    assert fit.slope == pytest.approx(-4 / 7, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    lead = [(T, analysis.leading_bound(1.0, 10.0, T)) for T in (1e2, 1e3, 1e4)]
    assert analysis.fit_rate(lead).slope == pytest.approx(-4 / 7, abs=1e-12)


def test_fit_rate_errors():
    with pytest.raises(ContractViolation):
        analysis.fit_rate([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(ContractViolation):
        analysis.fit_rate([(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)])


def test_inequality_holds():
    assert analysis.inequality_holds(1.0 + 1e-10, 1.0)
    assert not analysis.inequality_holds(1.0 + 1e-8, 1.0)
