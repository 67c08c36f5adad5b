"""Acceptance tests: one criterion per test, one printed PASS/FAIL line each.

Each test prints a single summary line of the form

    [criterion N] PASS|FAIL: <measured values>

before asserting, so a full run documents every criterion's outcome at its
stated tolerance.
"""

import sys
import time
from functools import partial

import numpy as np

from solitonshoot.center_manifold import biaxial_expansion_check, solve_center_poly
from solitonshoot.classifier import classify
from solitonshoot.geometry import (
    eguchi_hanson_profile,
    soliton_residual,
    taub_bolt_profile,
)
from solitonshoot.integrator import integrate
from solitonshoot.pipeline import shoot_compact, shoot_primal
from solitonshoot.search import (
    arc_params,
    conserved_drift_report,
    find_critical,
    sweep_gamma,
)
from solitonshoot.startup import launch
from solitonshoot.state_core import (
    ShootParams,
    conserved_quantities,
    rhs_biaxial_compact,
    rhs_compact,
)


def _report(num: int, ok: bool, detail: str) -> None:
    # bypass output capture so every criterion leaves one visible line
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}",
          file=sys.__stdout__)
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_conserved_c_drift():
    # the (0.6, 0.8) direction is incomplete, so the trajectory terminates
    # before s = 50; the drift is measured over the integrated range
    params = ShootParams(n=3, alpha=0.6, beta=0.8, lam=0.0)
    traj = shoot_compact(params, 50.0)
    rep = conserved_drift_report(traj)
    ok = rep["c_drift"] is not None and rep["c_drift"] < 1e-8
    _report(
        1,
        ok,
        f"c_drift={rep['c_drift']:.2e} < 1e-8 over s in [0, {traj.t[-1]:.1f}] "
        f"(C = {rep['c_value']:.6f})",
    )


def test_criterion_02_einstein_residual_on_alpha_zero_branch():
    params = ShootParams(n=4, alpha=0.0, beta=0.8, gamma=0.6)
    traj = shoot_compact(params, 60.0)
    rep = conserved_drift_report(traj)
    ok = rep["z_max"] < 1e-6
    _report(2, ok, f"scale-normalized |Z| max = {rep['z_max']:.2e} < 1e-6 "
                   f"(triaxial, s in [0, {traj.t[-1]:.1f}])")


def test_criterion_03_reference_metric_oracles():
    tb_fine = soliton_residual(taub_bolt_profile(2.5, 6.0, 201), lam=0.0)
    tb_coarse = soliton_residual(taub_bolt_profile(2.5, 6.0, 101), lam=0.0)
    eh_fine = soliton_residual(eguchi_hanson_profile(1.0, 5.0, 201), lam=0.0)
    eh_coarse = soliton_residual(eguchi_hanson_profile(1.0, 5.0, 101), lam=0.0)
    ratios = (tb_coarse / tb_fine, eh_coarse / eh_fine)
    ok = (
        tb_fine < 1e-6
        and eh_fine < 1e-6
        and all(12.0 < rat < 20.0 for rat in ratios)
    )
    _report(
        3,
        ok,
        f"Taub-Bolt residual={tb_fine:.2e}, Eguchi-Hanson residual={eh_fine:.2e} "
        f"(< 1e-6); halving ratios {ratios[0]:.1f}, {ratios[1]:.1f} (12..20)",
    )


def test_criterion_04_incompleteness_taxonomy_in_n():
    outcomes = {}
    for n in (1, 2, 3, 4, 5):
        traj = shoot_compact(ShootParams(n=n, alpha=0.0, beta=1.0), 100.0)
        outcomes[n] = traj.has_event("XiZero")
    ok = all(outcomes[n] for n in (3, 4, 5)) and not any(
        outcomes[n] for n in (1, 2)
    )
    _report(
        4,
        ok,
        "XiZero fired for n in {3,4,5} and not for n in {1,2}: "
        + str(outcomes),
    )


def test_criterion_05_critical_brackets_and_midpoints():
    started = time.time()
    details = []
    ok = True
    for n in (3, 4):
        bracket = find_critical(n, 0.0, 1e-9)
        traj = shoot_compact(bracket.params_at(bracket.midpoint), 1e5)
        cls = classify(traj)
        good = (
            bracket.width < 1e-9
            and 0.0 < bracket.t_lo < bracket.t_hi < 1.0
            and bracket.sign_lo == 1
            and bracket.sign_hi == -1
            and cls.verdict == "Complete"
            and cls.pattern == "AllZero"
            and cls.xi_limit > 0.0
        )
        ok = ok and good
        details.append(
            f"n={n}: t* in [{bracket.t_lo:.10f}, {bracket.t_hi:.10f}] "
            f"(w={bracket.width:.1e}), midpoint {cls.verdict}/{cls.pattern}, "
            f"xi_limit={cls.xi_limit:.4f}"
        )
    elapsed = time.time() - started
    ok = ok and elapsed < 300.0
    _report(5, ok, "; ".join(details) + f"; runtime {elapsed:.0f}s < 300s")


def test_criterion_06_complete_side_asymptotics():
    params = arc_params(3, 0.0, 0.2)
    traj = shoot_compact(params, 3e4)
    y1, y2 = traj.y[:, 3], traj.y[:, 4]
    max_excess = float(np.max(y1 - y2))
    xi_end = 1.0 / traj.y[-1, 0]
    # C evaluated away from the startup transient and the tail
    mid = traj.primal_samples()[len(traj.t) // 2]
    c_val = conserved_quantities(mid, lam=0.0).c
    diff = abs(xi_end - np.sqrt(-c_val))
    ok = max_excess <= 0.0 and diff < 1e-4
    _report(
        6,
        ok,
        f"max(Y1 - Y2) = {max_excess:.2e} <= 0; "
        f"|xi_end - sqrt(-C)| = {diff:.2e} < 1e-4 (C = {c_val:.6f})",
    )


def test_criterion_07_triaxial_soliton_slices():
    started = time.time()
    results = sweep_gamma(
        [0.01, -0.01, 0.02, -0.02], 1e-12, n=4, rtol=1e-11, atol=1e-13
    )
    by_gamma = {rec["gamma"]: rec for rec in results}
    ok = True
    details = []
    for gamma in (0.01, 0.02):
        plus, minus = by_gamma[gamma], by_gamma[-gamma]
        if "error" in plus or "error" in minus:
            ok = False
            details.append(f"gamma=+-{gamma}: search failed")
            continue
        pat_p = plus["midpoint_pattern"]
        pat_m = minus["midpoint_pattern"]
        swap = abs(plus["bracket"]["midpoint"] - minus["bracket"]["midpoint"])
        good = (
            {pat_p["pattern"], pat_m["pattern"]} == {"Pair12", "Pair13"}
            and pat_p["score"] < 0.02
            and pat_m["score"] < 0.02
            and swap < 1e-6
        )
        ok = ok and good
        details.append(
            f"gamma=+-{gamma}: {pat_p['pattern']}/{pat_m['pattern']} "
            f"scores {pat_p['score']:.1e}/{pat_m['score']:.1e} < 0.02, "
            f"swap |t+ - t-| = {swap:.1e} < 1e-6"
        )
    elapsed = time.time() - started
    ok = ok and elapsed < 900.0
    _report(7, ok, "; ".join(details) + f"; runtime {elapsed:.0f}s < 900s")


def test_criterion_08_center_manifold_coefficients():
    poly = solve_center_poly(2)
    c = poly.coeffs
    expected = {(2, 0, 0): 0.5, (0, 2, 0): -0.5, (0, 0, 2): -0.5,
                (0, 1, 1): 1.0}
    errs = {k: abs(c.get(k, 0.0) - v) for k, v in expected.items()}
    symmetric = all(
        abs(c.get((i, j, k), 0.0) - c.get((i, k, j), 0.0)) < 1e-12
        for (i, j, k) in c
    )
    bx = biaxial_expansion_check(solve_center_poly(2))
    ok = max(errs.values()) < 1e-8 and symmetric and bx["ci_exact"] and bx["cj_exact"]
    _report(
        8,
        ok,
        f"quadratic coefficients within {max(errs.values()):.1e} of "
        f"(1/2, -1/2, -1/2, 1), e2<->e3 symmetric, biaxial quadratic parts exact",
    )


def test_criterion_09_startup_convergence_and_recovery():
    params = ShootParams(n=4, alpha=0.6, beta=0.64, gamma=0.48)
    finals = {}
    for eps in (2e-3, 1e-3, 5e-4):
        traj = shoot_primal(params, 0.5, epsilon=eps, rtol=1e-13, atol=1e-15)
        finals[eps] = traj.final_state()
    d1 = np.linalg.norm(finals[2e-3] - finals[1e-3])
    d2 = np.linalg.norm(finals[1e-3] - finals[5e-4])
    ratio = d1 / d2

    probe = shoot_primal(params, 1e-3, epsilon=1e-4, rtol=1e-13, atol=1e-15)
    y = probe.final_state()
    r = probe.t[-1]
    alpha_hat = (y[0] - y[1] - y[2] - y[3]) / r
    beta_hat = y[4] / r
    gamma_hat = 0.5 * (y[2] - y[3])
    rec_err = max(
        abs(alpha_hat - params.alpha),
        abs(beta_hat - params.beta),
        abs(gamma_hat - params.gamma),
    )
    ok = 3.2 < ratio < 4.8 and rec_err < 1e-3
    _report(
        9,
        ok,
        f"epsilon-halving ratio = {ratio:.2f} (4 +- 0.8); recovered "
        f"(alpha, beta, gamma) within {rec_err:.1e} < 1e-3 at r = 1e-3",
    )


def test_criterion_10_triaxial_biaxial_reduction_consistency():
    # a stiff-aware multistep integration handles the startup transient
    # without seeding step-sequence noise, so the two charts can be compared
    # at the 1e-10 level; explicit RK plateaus near 1e-9 here
    params = arc_params(4, 0.0, 0.1)
    y7 = launch(params, 1e-4).state_at_eps.as_array()
    y0_full = np.concatenate([[1.0 / y7[0]], y7[1:] / y7[0]])
    y0_bi = y0_full[[0, 1, 2, 4, 5]]
    grid = np.linspace(0.0, 30.0, 301)
    kwargs = dict(
        t_eval=grid, log_conserved=False,
        method="LSODA", rtol=1e-12, atol=1e-14,
    )
    tri = integrate(
        partial(rhs_compact, lam=0.0), y0_full, 30.0,
        chart="compact", **kwargs,
    )
    bi = integrate(
        partial(rhs_biaxial_compact, lam=0.0), y0_bi, 30.0,
        chart="biaxial_compact", **kwargs,
    )
    diff = float(np.max(np.abs(tri.y - bi.compact_samples())))
    symmetry = max(
        float(np.max(np.abs(tri.y[:, 2] - tri.y[:, 3]))),
        float(np.max(np.abs(tri.y[:, 5] - tri.y[:, 6]))),
    )
    ok = diff < 1e-10 and symmetry < 1e-12
    _report(10, ok, f"max |triaxial - embedded biaxial| = {diff:.2e} < 1e-10; "
                    f"triaxial run stays symmetric to {symmetry:.1e} "
                    f"over s in [0, 30]")
