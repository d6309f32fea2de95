"""Acceptance gate: one test per criterion, one pass/fail line each.

Expensive trajectories are computed once in module-scoped fixtures and
shared across criteria (the residual criteria 10 and 11 deliberately reuse
the runs of criteria 1, 4 and 5).
"""

import math
import time

import numpy as np
import pytest

import soliton_kit.picard as picard
import soliton_kit.series as series
from soliton_kit.asymptotics import estimate_limit
from soliton_kit.geometry import curvature_profile, geodesic_distance
from soliton_kit.integrate import (
    IntegratorConfig,
    integrate_negative_lambda,
    make_seed,
    residual_integral_identity,
    solve_profile,
)
from soliton_kit.model import SolitonParams, TerminationKind


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[criterion {num:02d}] {name}: {status}{suffix}")


@pytest.fixture(scope="module")
def exact_runs():
    runs = {}
    for n in (2, 3, 5):
        for lam in (1.0, 2.0):
            p = SolitonParams(n, lam, lam / n)
            runs[(n, lam)] = solve_profile(p, IntegratorConfig(r_max=100.0))
    return runs


@pytest.fixture(scope="module")
def steady_runs():
    runs = {}
    for n in (2, 3, 4, 5, 6):
        p = SolitonParams(n, 0.0, -1.0)
        t0 = time.perf_counter()
        traj = solve_profile(p, IntegratorConfig(r_max=1e6))
        runs[n] = (traj, time.perf_counter() - t0)
    return runs


@pytest.fixture(scope="module")
def expanding_runs():
    cfg5 = IntegratorConfig(r_max=1e5)
    return {
        0.2: solve_profile(SolitonParams(3, 1.0, 0.2), cfg5),
        0.5: solve_profile(SolitonParams(3, 1.0, 0.5), IntegratorConfig(r_max=1e6)),
        -0.5: solve_profile(SolitonParams(3, 1.0, -0.5), cfg5),
    }


def test_criterion_01_exact_solution_golden(exact_runs):
    worst_h = 0.0
    worst_c = 0.0
    for (n, lam), traj in exact_runs.items():
        ref = 1.0 + lam / n * traj.r
        worst_h = max(worst_h, float(np.max(np.abs(traj.h - ref) / ref)))
        sol = series.compute_coefficients(SolitonParams(n, lam, lam / n))
        worst_c = max(worst_c, float(np.max(np.abs(sol.coeffs[2:]))))
    ok = worst_h <= 1e-8 and worst_c <= 1e-14
    _report(1, "exact linear profile golden", ok, f"h err {worst_h:.2e}, coeff {worst_c:.2e}")
    assert ok


def test_criterion_02_c2_closed_form():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        lam = float(rng.uniform(-2.0, 2.0))
        mu1 = float(rng.uniform(-2.0, 2.0))
        sol = series.compute_coefficients(SolitonParams(n, lam, mu1), order=4)
        worst = max(worst, abs(sol.coeffs[2] - mu1 * (n * mu1 - lam) / (n + 3)))
    ok = worst <= 1e-14
    _report(2, "c2 closed form, 50 random triples", ok, f"worst {worst:.2e}")
    assert ok


def test_criterion_03_sign_dichotomy():
    violations = 0
    for n in (2, 3, 4):
        for lam in (0.0, 1.0):
            for mu1 in (-1.0, -0.1, 0.1, 1.0):
                traj = solve_profile(SolitonParams(n, lam, mu1), IntegratorConfig(r_max=1e4))
                m = traj.r > 0.0
                if not np.all(np.sign(mu1) * traj.hr[m] > 0.0):
                    violations += 1
    ok = violations == 0
    _report(3, "slope sign dichotomy over the grid", ok, f"{violations} violations")
    assert ok


def test_criterion_04_steady_asymptotics(steady_runs):
    failures = []
    for n, (traj, elapsed) in steady_runs.items():
        h_end = float(traj.h[-1])
        q_inf = estimate_limit(traj, "q").value
        w_inf = estimate_limit(traj, "w").value
        b1 = estimate_limit(traj, "u").value
        v_inf = estimate_limit(traj, "v").value
        target_w = (n - 4) / (n - 1)
        checks = [
            ("h_end", h_end <= 1e-3),
            ("q_inf", abs(q_inf + 1.0) <= 0.01),
            ("w_inf", abs(w_inf - target_w) <= 0.02),
            ("v_cross", abs(v_inf - target_w * b1) <= 0.02 * max(1.0, abs(b1))),
            ("runtime", elapsed < 30.0),
        ]
        if n >= 4:
            checks.append(("b1_pos", b1 >= 0.01))
        failures += [f"n={n}:{name}" for name, good in checks if not good]
    ok = not failures
    _report(4, "steady decaying asymptotics n=2..6", ok, ", ".join(failures) or "all limits in tolerance")
    assert ok, failures


def test_criterion_05_expanding_table(expanding_runs):
    failures = []

    t = expanding_runs[0.2]
    m = t.r > 0.0
    i = t.interpolant()
    if not (np.all(t.h[m] > 1.0) and np.all(t.h[m] <= 1.0 + 0.2 * t.r[m])):
        failures.append("mu1=0.2 barriers")
    if not abs(i.hr(1e5)) <= 1e-3:
        failures.append("mu1=0.2 slope")
    if not estimate_limit(t, "h").value > 1.0:
        failures.append("mu1=0.2 h_inf")

    t = expanding_runs[0.5]
    m = t.r > 0.0
    if not np.all(t.h[m] >= 1.0 + 0.5 * t.r[m]):
        failures.append("mu1=0.5 barrier")
    if not (t.termination.kind is TerminationKind.GROWTH_GUARD or t.h[-1] >= 1e6):
        failures.append("mu1=0.5 growth")

    t = expanding_runs[-0.5]
    i = t.interpolant()
    h_inf = estimate_limit(t, "h").value
    if not (0.001 < h_inf < 0.999):
        failures.append("mu1=-0.5 h_inf")
    if not abs(i.hr(1e5)) <= 1e-3:
        failures.append("mu1=-0.5 slope")

    ok = not failures
    _report(5, "expanding case table n=3", ok, ", ".join(failures) or "all three cases behave")
    assert ok, failures


def test_criterion_06_steady_positive_slope():
    failures = []
    for n in (2, 3):
        traj = solve_profile(SolitonParams(n, 0.0, 1.0), IntegratorConfig(r_max=1e6))
        m = traj.r > 0.0
        if not np.all(traj.h[m] >= 1.0 + traj.r[m]):
            failures.append(f"n={n} barrier")
        if traj.termination.kind is not TerminationKind.GROWTH_GUARD:
            failures.append(f"n={n} no growth guard")
        r_cp, _, hr_cp = traj.checkpoints()
        x = np.log(r_cp)
        shift = int(round(math.log(10.0) / np.median(np.diff(x))))
        if not np.all(hr_cp[shift:] > hr_cp[:-shift]):
            failures.append(f"n={n} slope not growing per decade")
    ok = not failures
    _report(6, "steady growing profile barriers", ok, ", ".join(failures) or "n=2,3")
    assert ok, failures


def test_criterion_07_scaling():
    worst = 0.0
    for mu1 in (-1.0, 1.0):
        for scale in (0.5, 2.0, 10.0):
            t1 = solve_profile(
                SolitonParams(3, 0.0, mu1), IntegratorConfig(r_max=2e3 * max(1.0, scale))
            )
            t2 = solve_profile(SolitonParams(3, 0.0, scale * mu1), IntegratorConfig(r_max=2e3))
            i1, i2 = t1.interpolant(), t2.interpolant()
            r_hi = min(i2.r_max, i1.r_max / scale) * 0.99
            rs = np.geomspace(1e-2, r_hi, 100)
            h2 = i2.h(rs)
            err = np.max(np.abs(i1.h(scale * rs) - h2) / np.maximum(1.0, h2))
            worst = max(worst, float(err))
    ok = worst <= 1e-8
    _report(7, "scaling invariance at lam=0", ok, f"worst {worst:.2e}")
    assert ok


def test_criterion_08_picard_contraction():
    bound = 26.0 / 33.0 + 0.05
    c_budget = 10.0
    worst_ratio = 0.0
    worst_agree = 0.0
    failures = []
    for n in (2, 3, 4):
        for lam in (0.0, 1.0):
            for mu1 in (-1.0, 0.5):
                p = SolitonParams(n, lam, mu1)
                pair, report = picard.picard_solve(p)
                try:
                    ratio = picard.empirical_contraction_ratio(report)
                    worst_ratio = max(worst_ratio, ratio)
                    if ratio > bound:
                        failures.append(f"ratio n={n},lam={lam},mu1={mu1}")
                except picard.InsufficientIterations:
                    pass  # converged instantly; no measurable ratio
                sol = series.compute_coefficients(p)
                m = pair.grid <= sol.handoff_radius
                hs, hrs = series.eval_series(sol, pair.grid[m])
                agree = max(
                    float(np.max(np.abs(pair.h_vals[m] - hs))),
                    float(np.max(np.abs(pair.w_vals[m] - hrs))),
                )
                worst_agree = max(worst_agree, agree)
                budget = 1e-8 + c_budget * (report.eps_used / report.grid_m) ** 2
                if agree > budget:
                    failures.append(f"agreement n={n},lam={lam},mu1={mu1}")
    ok = not failures
    _report(
        8, "fixed-point contraction and series agreement", ok,
        f"max ratio {worst_ratio:.3f} <= {bound:.3f}, agreement {worst_agree:.2e}, C={c_budget}",
    )
    assert ok, failures


def test_criterion_09_negative_lambda_window():
    failures = []
    for n in (2, 3, 4):
        for mu1 in (-0.5, 0.5):
            p = SolitonParams(n, -1.0, mu1)
            res = integrate_negative_lambda(p, make_seed(p), IntegratorConfig(r_max=1e6))
            traj = res.trajectory
            good = (
                res.reached_target
                and traj.r_max >= 0.99 * (n - 1) * (1.0 - 1e-12)
                and np.all((traj.h > 0.0) & (traj.h < 1e12))
                and traj.termination.kind is TerminationKind.REACHED_RMAX
            )
            if not good:
                failures.append(f"n={n},mu1={mu1}")
    ok = not failures
    _report(9, "shrinking-side guaranteed window", ok, ", ".join(failures) or "all 6 cells")
    assert ok, failures


def test_criterion_10_integral_identity(exact_runs, steady_runs, expanding_runs):
    worst = 0.0
    trajectories = (
        list(exact_runs.values())
        + [t for t, _ in steady_runs.values()]
        + list(expanding_runs.values())
    )
    for traj in trajectories:
        r_hi = traj.r_max / 10.0
        r_lo = 10.0 if r_hi > 10.0 else traj.r_max / 100.0
        worst = max(worst, residual_integral_identity(traj, r_lo, r_hi))
    ok = worst <= 1e-6
    _report(10, "integral identity residual on all shared runs", ok, f"worst {worst:.2e}")
    assert ok


def test_criterion_11_diagnostic_ode_residuals(steady_runs):
    from soliton_kit.asymptotics import diagnostic_ode_residuals

    worst = 0.0
    for traj, _ in steady_runs.values():
        res_q, res_u = diagnostic_ode_residuals(traj)
        worst = max(worst, res_q, res_u)
    ok = worst <= 1e-4
    _report(11, "first-order diagnostic equations vs finite differences", ok, f"worst {worst:.2e}")
    assert ok


def test_criterion_12_geometry_oracles(steady_runs):
    failures = []

    flat = solve_profile(SolitonParams(3, 0.0, 0.0), IntegratorConfig(r_max=1e4))
    if any(abs(geodesic_distance(flat, a) - a) > 1e-12 for a in (0.3, 7.0, 60.0)):
        failures.append("stationary t(a)=a")

    exact = solve_profile(SolitonParams(3, 1.0, 1.0 / 3.0), IntegratorConfig(r_max=1e4))
    for a in (0.5, 5.0, 80.0):
        ref = math.sqrt(3.0) * math.asinh(a / math.sqrt(3.0))
        if abs(geodesic_distance(exact, a) - ref) / ref > 1e-8:
            failures.append(f"expanding closed form a={a}")

    steady, _ = steady_runs[3]
    a = math.sqrt(steady.r_max) * 0.45
    ratio = geodesic_distance(steady, 2 * a) / geodesic_distance(steady, a)
    if abs(ratio - 4.0) > 0.05 * 4.0:
        failures.append(f"distance doubling ratio {ratio:.3f}")

    sign_table = (
        (SolitonParams(3, 0.0, -1.0), +1, +1),
        (SolitonParams(3, 0.0, 1.0), -1, -1),
        (SolitonParams(3, 1.0, 0.2), -1, -1),
        (SolitonParams(3, 1.0, -0.5), +1, +1),
    )
    for params, s_r, s_o in sign_table:
        traj = solve_profile(params, IntegratorConfig(r_max=1e4))
        grid = np.geomspace(0.1, math.sqrt(traj.r_max) * 0.9, 25)
        prof = curvature_profile(traj, grid)
        if not (np.all(s_r * prof.kappa_radial > 0) and np.all(s_o * prof.kappa_orbital > 0)):
            failures.append(f"curvature signs {params}")

    ok = not failures
    _report(12, "geometry oracles", ok, ", ".join(failures) or "distances, ratio, curvature signs")
    assert ok, failures
