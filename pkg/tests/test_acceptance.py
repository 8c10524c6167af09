"""Acceptance suite: one test per primary criterion, one PASS/FAIL line each.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary.  Tolerances are the stated ones; nothing is loosened.
"""

import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES
from shieldperc.bounds import (PC_BOND, asymptotic_ratio, moment_ratio_bound, table1, table2,
                               upper_bound_pshield)
from shieldperc.collision import collision_bounds
from shieldperc.oracle import second_moment_bruteforce, second_moment_pair_sum, verify_edge_bound
from shieldperc.simulation import estimate_moments, paired_walk_sample
from shieldperc.walk_model import (exact_max_pointmass, tau4_upper, tau_closed_form,
                                   tau_distribution, tau_hat4_upper, tau_hat_closed_form,
                                   tau_hat_distribution)

TABLE1 = {
    9: (0.9537345, 1.545555), 10: (0.8975950, 0.943856), 11: (0.8558785, 0.697538),
    12: (0.8228655, 0.545351), 13: (0.7955493, 0.443074), 14: (0.7722449, 0.371047),
    15: (0.7519387, 0.337635), 16: (0.7339765, 0.293250), 17: (0.7179080, 0.260608),
    18: (0.7034060, 0.235671),
}
TABLE2 = {5: 0.0206815, 6: 0.0532370, 7: 0.0812421, 8: 0.0980804, 9: 0.1037889}


def record(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def test_table1_reproduction():
    t0 = time.perf_counter()
    rows = table1()
    elapsed = time.perf_counter() - t0
    misses = []
    for r in rows:
        tol = 1e-6 if r.d <= 14 else 1e-3
        for col, got, want in (("lhs1", r.lhs1, TABLE1[r.d][0]), ("lhs2", r.lhs2, TABLE1[r.d][1])):
            if abs(got - want) > tol:
                misses.append(f"d={r.d} {col} {got:.7f} vs {want} (|diff| {abs(got - want):.1e} > {tol:g})")
    ok = not misses and elapsed < 10
    detail = f"{20 - len(misses)}/20 entries within tolerance, {elapsed:.2f}s"
    if misses:
        detail += "; misses: " + "; ".join(misses)
    record("Table 1 reproduction", ok, detail)


def test_table2_reproduction():
    t0 = time.perf_counter()
    rows = table2(PC_BOND)
    elapsed = time.perf_counter() - t0
    worst = max(abs(r.p_lower - TABLE2[r.d]) for r in rows)
    flags = {r.d: r.exceeds_pc for r in rows}
    flip = flags == {5: False, 6: False, 7: True, 8: True, 9: True}
    ok = worst <= 5e-4 and flip and elapsed < 30
    record("Table 2 reproduction", ok,
           f"max |p_lower - printed| = {worst:.2e} (tol 5e-4), verdict flips 6->7: {flip}, {elapsed:.2f}s")


def test_upper_bound_values():
    u2, u3 = upper_bound_pshield(2), upper_bound_pshield(3)
    ok = f"{u2:.5f}".startswith("0.306") and f"{u3:.5f}".startswith("0.275")
    record("Upper-bound values d=2,3", ok, f"d=2: {u2:.6f}, d=3: {u3:.6f}")


def test_exact_dp_agreement():
    worst = 0.0
    dominated = True
    for d in range(2, 7):
        tau = tau_distribution(d, 4)
        hat = tau_hat_distribution(d, 4)
        tau_ex = tau_distribution(d, 4, exact=True)
        hat_ex = tau_hat_distribution(d, 4, exact=True)
        for k in (1, 2, 3):
            worst = max(worst, abs(tau.probs[k] - float(tau_closed_form(d, k))))
        for k in (0, 1, 2, 3):
            worst = max(worst, abs(hat.probs[k] - float(tau_hat_closed_form(d, k))))
        dominated &= tau_ex.probs[4] <= tau4_upper(d) and hat_ex.probs[4] <= tau_hat4_upper(d)
    ok = worst <= 1e-12 and dominated
    record("Exact-DP agreement", ok,
           f"max |DP - closed form| = {worst:.1e} over d=2..6, k=4 bounds respected: {dominated}")


def test_edge_bound_sweep():
    t0 = time.perf_counter()
    checked = violations = 0
    for d, top in ((2, 6), (3, 4)):
        for n in range(1, top + 1):
            rep = verify_edge_bound(d, n)
            checked += rep.instances_checked
            violations += rep.total_violations
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 60
    record("Edge-bound exhaustive sweep", ok,
           f"{checked} pairs, {violations} violations, {elapsed:.2f}s")


def test_exact_second_moment():
    mismatches = []
    for n in (1, 2, 3):
        for q in (Fraction(1, 2), Fraction(7, 10), Fraction(9, 10)):
            a = second_moment_pair_sum(2, n, q)
            b = second_moment_bruteforce(2, n, q)
            if a != b:
                mismatches.append(f"n={n} q={q}")
    record("Exact second-moment oracle", not mismatches,
           f"9 (n, q) cases, exact rational equality; mismatches: {mismatches or 'none'}")


def test_monte_carlo_first_moment():
    t0 = time.perf_counter()
    est = estimate_moments(2, 5, 0.3, trials=100_000, seed=20240515)
    elapsed = time.perf_counter() - t0
    target = 0.7**4 * (2 * 0.7**3) ** 5
    z = (est.mean - target) / est.mean_se
    ok = abs(z) <= 3 and est.pz_holds and elapsed < 60 and est.expected_mean == pytest.approx(target)
    record("Monte Carlo first moment", ok,
           f"mean {est.mean:.5f} vs {target:.5f} (z = {z:+.2f}), survival {est.survival:.5f} "
           f">= PZ {est.paley_zygmund:.5f} - 3SE: {est.pz_holds}, {elapsed:.2f}s")


def test_mgf_monotone_convergence():
    d, p = 10, 0.05
    q = 1 - p
    bound = moment_ratio_bound(d, p, collision_bounds(d).p2_upper).mgf
    s = paired_walk_sample(d, 200, 1_000_000, seed=7, checkpoints=(10, 50))
    vals = {n: s.mgf(q, n) for n in (10, 50, 200)}
    means = [vals[n][0] for n in (10, 50, 200)]
    nondecreasing = all(b >= a for a, b in zip(means, means[1:]))
    below = all(m <= bound + 3 * se for m, se in vals.values())
    record("MGF monotone convergence", nondecreasing and below,
           "E weight at n=10/50/200: " + "/".join(f"{m:.5f}" for m in means)
           + f", closed form {bound:.5f}")


def test_monotone_point_mass():
    bad = []
    for d in (2, 3, 4):
        vals = [exact_max_pointmass(d, j) for j in range(9)]
        bad += [(d, j) for j in range(8) if vals[j + 1] > vals[j]]
    record("Monotone point mass", not bad, f"d in {{2,3,4}}, j <= 8, increases at: {bad or 'none'}")


def test_asymptotic_trend():
    vals = [asymptotic_ratio(d) for d in (10, 20, 40, 80)]
    ok = all(b > a for a, b in zip(vals, vals[1:])) and all(v < 1 for v in vals)
    record("Asymptotic trend", ok, "ratios " + ", ".join(f"{v:.4f}" for v in vals))
