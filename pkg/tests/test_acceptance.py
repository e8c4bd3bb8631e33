"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Criterion 7's uniform-measure clause asserts |slope| <= 0.05 for the
geometric difference-growth statistic of a full-dimension measure.  That
bound is not attainable: when the norm has zero growth order the adjacent
differences do not flatten, they decay geometrically (norm(eps) behaves like
c0 - c1*eps near eps = 0, so diff_n ~ 2^-n and the fitted slope is -ln 2
~= -0.693).  The clause is asserted as stated and fails with the measured
value; "no blow-up", i.e. slope <= 0.05 one-sided, does hold.
"""

import math

import numpy as np
import pytest

from conftest import random_measure_suite
from filtdim import (
    KIND_NAMES,
    QuadratureSpec,
    check_slope_bounds,
    correlation_log_derivative,
    critical_exponent,
    evaluate,
    gaussian,
    geometric_blowup_stat,
    geometric_schedule,
    guerin_exponent_check,
    lq_norm,
    lq_norm_oracle_gaussian,
    make_cantor,
    make_kind,
    make_uniform_grid,
    mu_norm,
    no_jump_exceeds,
    norm_derivative,
    point_mass,
    power_schedule,
    renyi_dimension,
    run_schedule,
    two_point,
)

GAUSS = gaussian()
LN2_LN3 = math.log(2.0) / math.log(3.0)
GUERIN_CANTOR = 0.5 * (1.0 - LN2_LN3)

# 12 lambda samples over 3 decades of eps, centered on the unit support
LAMBDAS = np.linspace(math.log(10.0 ** -1.5), math.log(10.0 ** 1.5), 12)
QS = (1.5, 2.0, 3.0)

# schedules resolve differences, not 1e-6 norms; a lighter grid is plenty
SCHED_QUAD = QuadratureSpec(points_per_scale=6, tail_tolerance=1e-9)


def report(num, name, ok, detail):
    print(f"ACCEPTANCE {num} {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    return ok


@pytest.fixture(scope="module")
def measures():
    return random_measure_suite(count=20, max_atoms=50)


@pytest.fixture(scope="module")
def derivative_suite(measures):
    """Analytic reports and finite-difference slopes shared by criteria 1 and 2."""
    step = 1e-3
    rows = []
    for mu in measures:
        for q in QS:
            for lam in LAMBDAS:
                eps = math.exp(lam)
                rep = norm_derivative(mu, GAUSS, eps, q)
                up = lq_norm(mu, GAUSS, eps * math.exp(step), q)
                dn = lq_norm(mu, GAUSS, eps * math.exp(-step), q)
                fd = (math.log(up) - math.log(dn)) / (2.0 * step)
                rows.append((mu, q, eps, rep, fd))
    return rows


def test_criterion_1_gaussian_slope_bounds(derivative_suite):
    worst_low = math.inf
    worst_high = math.inf
    all_ok = True
    for mu, q, eps, rep, _ in derivative_suite:
        ok = (-mu.dim - 1e-8 <= rep.loglog_slope <= 1e-8)
        all_ok = all_ok and ok and check_slope_bounds(rep, GAUSS, tol=1e-8).passed
        worst_low = min(worst_low, rep.loglog_slope + mu.dim)
        worst_high = min(worst_high, -rep.loglog_slope)
    assert report(1, "gaussian slope bounds", all_ok,
                  f"min slope+delta {worst_low:.3g}, min -slope {worst_high:.3g}, "
                  f"{len(derivative_suite)} samples")


def test_criterion_2_analytic_vs_finite_difference(derivative_suite, measures):
    worst = 0.0
    for _, _, _, rep, fd in derivative_suite:
        worst = max(worst, abs(rep.loglog_slope - fd))
    step = 1e-3
    for mu in measures:
        for q in (2.0, 3.0):
            for lam in LAMBDAS[::3]:
                eps = math.exp(lam)
                got = correlation_log_derivative(mu, GAUSS, eps, q)
                up = mu_norm(mu, GAUSS, eps * math.exp(step), q - 1.0)
                dn = mu_norm(mu, GAUSS, eps * math.exp(-step), q - 1.0)
                fd = (math.log(up) - math.log(dn)) / (2.0 * step)
                worst = max(worst, abs(got - fd))
    assert report(2, "analytic derivative vs finite differences", worst <= 1e-4,
                  f"max residual {worst:.3g} <= 1e-4")


def test_criterion_3_quadrature_vs_oracle(measures):
    worst = 0.0
    for mu in measures:
        for eps in (0.05, 0.2, 1.0):
            a = lq_norm(mu, GAUSS, eps, 2.0)
            b = lq_norm_oracle_gaussian(mu, eps, 2)
            worst = max(worst, abs(a - b) / b)
    assert report(3, "quadrature vs closed-form oracle", worst <= 1e-6,
                  f"max relative error {worst:.3g} <= 1e-6")


def test_criterion_4_dimension_recovery():
    mu = make_cantor(10)
    eps = [3.0 ** -k for k in range(2, 8)]
    box = renyi_dimension(make_kind("box"), mu, 2.0, eps)
    ok = abs(box.slope - LN2_LN3) <= 1e-3
    details = [f"box {box.slope:.6f}"]
    six = ("box", "ball-corr", "ball-leb", "kernel-sum", "kernel-corr", "kernel-leb")
    worst_six = 0.0
    for tag in six:
        est = renyi_dimension(make_kind(tag, GAUSS), mu, 2.0, eps)
        worst_six = max(worst_six, abs(est.slope - LN2_LN3))
        ok = ok and abs(est.slope - LN2_LN3) <= 0.03
    details.append(f"six-kind worst dev {worst_six:.4f}")
    for dim, n, scales in ((1, 256, [2.0 ** -k for k in range(2, 8)]),
                           (2, 64, [2.0 ** -k for k in range(1, 6)])):
        est = renyi_dimension(make_kind("box"), make_uniform_grid(dim, n), 2.0, scales)
        ok = ok and abs(est.slope - dim) <= 0.05
        details.append(f"uniform d{dim} {est.slope:.4f}")
    worst_point = 0.0
    for tag in KIND_NAMES:
        est = renyi_dimension(make_kind(tag, GAUSS), point_mass(), 2.0,
                              [2.0 ** -k for k in range(4, 11)])
        worst_point = max(worst_point, abs(est.slope))
    ok = ok and worst_point <= 0.02
    details.append(f"point worst {worst_point:.4f}")
    assert report(4, "dimension recovery", ok, "; ".join(details))


def test_criterion_5_guerin_identity():
    cases = (
        ("point", point_mass(), [2.0 ** k for k in range(2, 8)]),
        ("cantor", make_cantor(10), [3.0 ** k for k in range(2, 8)]),
        ("uniform", make_uniform_grid(1, 256), [2.0 ** k for k in range(2, 8)]),
    )
    ok = True
    details = []
    for name, mu, xs in cases:
        chk = guerin_exponent_check(mu, GAUSS, 2.0, xs)
        ok = ok and abs(chk.lhs - chk.rhs) <= 0.05
        details.append(f"{name} |{chk.lhs:.4f}-{chk.rhs:.4f}|={abs(chk.lhs - chk.rhs):.4f}")
    assert report(5, "growth-exponent identity", ok, "; ".join(details))


def test_criterion_6_power_law_regime():
    ok = True
    details = []
    point = point_mass()
    m1 = run_schedule(point, GAUSS, power_schedule(1.0, 2, 64), 2.0, SCHED_QUAD).m_hat
    m2 = run_schedule(point, GAUSS, power_schedule(2.0, 2, 64), 2.0, SCHED_QUAD).m_hat
    m4 = run_schedule(point, GAUSS, power_schedule(4.0, 2, 64), 2.0, SCHED_QUAD).m_hat
    ok = ok and m1 <= -0.4 and abs(m2) <= 0.1 and m4 >= 0.8
    details.append(f"point m({1},{2},{4})=({m1:.3f},{m2:.3f},{m4:.3f})")
    # depth per run keeps every schedule scale above twice the atom spacing
    mc2 = run_schedule(make_cantor(14), GAUSS, power_schedule(2.0, 2, 600),
                       2.0, SCHED_QUAD).m_hat
    ok = ok and abs(mc2 - (2.0 * GUERIN_CANTOR - 1.0)) <= 0.15
    details.append(f"cantor m(t=2)={mc2:.3f} vs {2.0 * GUERIN_CANTOR - 1.0:.3f}")
    t_star = critical_exponent(2.0, 1, LN2_LN3)
    mcs = run_schedule(make_cantor(16), GAUSS, power_schedule(t_star, 2, 19),
                       2.0, SCHED_QUAD).m_hat
    ok = ok and abs(mcs) <= 0.15
    details.append(f"cantor m(t*={t_star:.3f})={mcs:.3f}")
    assert report(6, "power-law schedule regime", ok, "; ".join(details))


def test_criterion_7_geometric_regime():
    expected = GUERIN_CANTOR * math.log(2.0)
    rep = run_schedule(make_cantor(14), GAUSS, geometric_schedule(2, 20), 2.0, SCHED_QUAD)
    slope_c = geometric_blowup_stat(rep)
    ok_cantor = abs(slope_c - expected) <= 0.5 * expected and slope_c > 0.03
    rep_u = run_schedule(make_uniform_grid(1, 4096), GAUSS, geometric_schedule(2, 11),
                         2.0, SCHED_QUAD)
    slope_u = geometric_blowup_stat(rep_u)
    ok_uniform = abs(slope_u) <= 0.05
    assert report(
        7, "geometric schedule regime", ok_cantor and ok_uniform,
        f"cantor slope {slope_c:.4f} vs {expected:.4f} +-50% "
        f"[{'ok' if ok_cantor else 'FAIL'}]; uniform slope {slope_u:.4f} vs "
        f"|slope|<=0.05 [{'ok' if ok_uniform else 'FAIL'}] -- full-dimension "
        f"differences decay at rate ln2, the zero-slope bound is unattainable "
        f"(module docstring)")


def test_criterion_8_bounded_ratios(cantor8):
    from filtdim import ratio_correlation_vs_boxes, ratio_kernel_sum_vs_boxes

    eps = [3.0 ** -k for k in range(1, 8)]
    r1 = ratio_correlation_vs_boxes(cantor8, GAUSS, eps, 2.0)
    r2 = ratio_kernel_sum_vs_boxes(cantor8, GAUSS, eps, 2.0)
    ok = max(r1) / min(r1) <= 10.0 and max(r2) / min(r2) <= 10.0
    theta = float(sum(math.exp(-2.0 * j * j) for j in range(-10, 11)))
    point_ratio = ratio_kernel_sum_vs_boxes(point_mass(), GAUSS, [1.0], 2.0)[0]
    ok = ok and abs(point_ratio - theta) <= 1e-9 * theta
    assert report(8, "bounded partition ratios", ok,
                  f"correlation spread {max(r1) / min(r1):.3f}, kernel-sum spread "
                  f"{max(r2) / min(r2):.3f} <= 10; point theta err "
                  f"{abs(point_ratio - theta):.2e}")


def test_criterion_9_continuity_contrast():
    mu = two_point()
    grid = np.linspace(0.7, 1.4, 1000)
    step = grid[1] - grid[0]
    ball = np.array([evaluate(make_kind("ball-corr"), mu, e, 2.0) for e in grid])
    jumps = np.abs(np.diff(ball))
    jump_at_one = float(np.max(jumps))
    idx = int(np.argmax(jumps))
    ok = jump_at_one >= 0.4 and abs(grid[idx] - 1.0) <= 2 * step
    kc = np.array([evaluate(make_kind("kernel-corr", GAUSS), mu, e, 2.0) for e in grid])
    ks = np.array([evaluate(make_kind("kernel-sum", GAUSS), mu, e, 2.0) for e in grid])
    ok = ok and no_jump_exceeds(kc, step).passed and no_jump_exceeds(ks, step).passed
    assert report(9, "continuity vs ball discontinuity", ok,
                  f"ball jump {jump_at_one:.3f} at eps={grid[idx]:.4f}; "
                  f"kernel curves smooth on 1000-point grid")
