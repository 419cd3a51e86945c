"""Acceptance criteria, each checked at its stated tolerance.

Every test records a PASS/FAIL line; the full list is printed in the
terminal summary.
"""
import itertools
import time

import numpy as np

from acceptance_log import record
from dl04game.attacks import (
    ATTACKS,
    AttackKind,
    closed_form_joint,
    detection_probability,
    joint_distribution,
    q_backward,
    q_forward,
    q_prime_backward,
    q_prime_forward,
    s_ty,
)
from dl04game.equilibrium import (
    CANONICAL_SCENARIOS,
    StrategyProfile,
    expected_payoffs,
    load_fixtures,
    qber_bounds,
    replay_fixtures,
    scenario_report,
    verify_point,
)
from dl04game.infotheory import closed_form_information, conditional_entropy, information_terms
from dl04game.montecarlo import estimate_detection_run, estimate_joint
from dl04game.payoff import payoff_default
from dl04game.photonic_state import (
    ALL_KETS,
    apply_cnot,
    apply_cpbs,
    apply_hadamard,
    apply_pauli,
    apply_pbs_xy,
    apply_swap_tx,
    basis_state,
)
from solver_cache import solved
from worked_states import CONFLICTING, WORKED_STATES, build

GRID = np.linspace(0, 1, 5)
PQ_GRID = list(itertools.product(GRID, GRID))


def qber_oracle(attack, p, q):
    return {
        AttackKind.E1: (1 - q) * (1 + p) / 2,
        AttackKind.E2: (2 + 2 * p - q - 3 * p * q) / 4,
        AttackKind.E3: 0.0,
        AttackKind.E4: 0.25,
    }[attack]


def test_criterion_01_detection_probabilities():
    expected = {AttackKind.E1: 0.1875, AttackKind.E2: 0.1875, AttackKind.E3: 0.1875, AttackKind.E4: 0.375}
    t0 = time.perf_counter()
    got = {a: detection_probability(a) for a in ATTACKS}
    elapsed = time.perf_counter() - t0
    worst = max(abs(got[a] - expected[a]) for a in ATTACKS)
    ok = worst <= 1e-12
    record("01", ok, f"P_d = {[round(got[a], 12) for a in ATTACKS]}, max |err| {worst:.1e} <= 1e-12 ({elapsed * 1e3:.0f} ms)")
    assert ok


def test_criterion_02_joint_equivalence():
    t0 = time.perf_counter()
    worst = max(
        float(np.abs(joint_distribution(a, p, q).p - closed_form_joint(a, p, q).p).max()) for a in ATTACKS for p, q in PQ_GRID
    )
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    record("02", ok, f"simulated vs closed-form p_jmk on 5x5 grid: max |diff| {worst:.1e} <= 1e-12 ({elapsed:.2f} s)")
    assert ok


def test_criterion_03_qber_closed_forms():
    worst = 0.0
    for a in ATTACKS:
        for p, q in PQ_GRID:
            t = joint_distribution(a, p, q).p
            worst = max(worst, abs(t[0, 1].sum() + t[1, 0].sum() - qber_oracle(a, p, q)))
    ok = worst <= 1e-12
    record("03", ok, f"sum_(j!=m) p_jmk vs QBER closed forms: max |diff| {worst:.1e} <= 1e-12")
    assert ok


def test_criterion_04_payoff_identity():
    rng = np.random.default_rng(20240601)
    worst_sum = worst_ab = 0.0
    for _ in range(100):
        a = ATTACKS[rng.integers(4)]
        p, q = rng.random(2)
        v = payoff_default(a, p, q)
        worst_sum = max(worst_sum, abs(v.alice + v.eve - 0.25))
        worst_ab = max(worst_ab, abs(v.alice - v.bob))
    ok = worst_sum <= 1e-12 and worst_ab <= 1e-12
    record("04", ok, f"100 random points: max |alice+eve-0.25| {worst_sum:.1e}, max |alice-bob| {worst_ab:.1e}")
    assert ok


def test_criterion_05_epsilon_replay():
    t0 = time.perf_counter()
    checks = replay_fixtures(load_fixtures())
    elapsed = time.perf_counter() - t0
    worst = max(abs(c.deviations["epsilon"]) for c in checks)
    spots = {0.692404: ("E1-E2", (0.72, 0.208, 0.225)), 0.143882: ("E2-E3", (0.47, 0.055, 0.205)),
             0.152451: ("E1-E3", (0.22, 0.716, 0.88)), 0.323478: ("E1-E4", (0.75, 0.57, 0.582))}
    spot = max(abs(verify_point(s, StrategyProfile(*x)).epsilon - e) for e, (s, x) in spots.items())
    ok = len(checks) == 31 and worst <= 1e-3 and spot <= 1e-5 and elapsed < 1.0
    record("05", ok, f"{len(checks)} rows: max |eps diff| {worst:.1e} <= 1e-3; four spot rows {spot:.1e} <= 1e-5 ({elapsed:.2f} s)")
    assert ok


def test_criterion_06_payoff_replay():
    checks = replay_fixtures(load_fixtures())
    worst_a = max(abs(c.deviations["alice_payoff"]) for c in checks)
    worst_e = max(abs(c.deviations["eve_payoff"]) for c in checks)
    spot = expected_payoffs("E1-E3", StrategyProfile(0.22, 0.716, 0.88)).alice
    ok = worst_a <= 2e-3 and worst_e <= 2e-3 and abs(spot - (-0.110497)) <= 2e-3
    record("06", ok, f"31 rows: max |alice diff| {worst_a:.1e}, max |eve diff| {worst_e:.1e} <= 2e-3; (0.22,0.716,0.88) alice {spot:.6f}")
    assert ok


def test_criterion_07_mutual_information():
    worst = 0.0
    for a in ATTACKS:
        for p, q in PQ_GRID:
            generic = information_terms(joint_distribution(a, p, q))
            closed = closed_form_information(a, p, q)
            worst = max(worst, *(abs(generic[k] - closed[k]) for k in generic))
    h_ea = [conditional_entropy(joint_distribution("E2", p, q), "E", "A") for p, q in PQ_GRID]
    spread = max(abs(h - 0.811278) for h in h_ea)
    ok = worst <= 1e-9 and spread <= 1e-6
    record("07", ok, f"generic vs closed-form I: max |diff| {worst:.1e} <= 1e-9; H(E|A)_E2 within {spread:.1e} of 0.811278")
    assert ok


def test_criterion_08a_unitarity_and_inversion():
    gates = [
        lambda s: apply_hadamard(s, "y"),
        lambda s: apply_hadamard(s, "x"),
        lambda s: apply_pauli(s, "iY", "t"),
        apply_swap_tx,
        apply_cpbs,
        apply_pbs_xy,
        lambda s: apply_cnot(s, "t", "y"),
        lambda s: apply_cnot(s, "t", "x"),
        q_forward,
        q_backward,
        q_prime_forward,
        q_prime_backward,
        s_ty,
    ]
    norm_err = inv_err = 0.0
    for ket in ALL_KETS:
        s = basis_state(ket)
        for g in gates:
            norm_err = max(norm_err, abs(g(s).norm - 1))
        for fwd, back in ((q_forward, q_backward), (q_prime_forward, q_prime_backward)):
            inv_err = max(inv_err, float(np.abs(back(fwd(s)).amplitudes - s.amplitudes).max()))
    ok = norm_err <= 1e-12 and inv_err <= 1e-12
    record("08a", ok, f"norm error {norm_err:.1e}, Q^-1 Q and Q'^-1 Q' error {inv_err:.1e} on all 27 kets")
    assert ok


def test_criterion_08b_worked_states():
    mismatched = [name for name, pipeline, terms in WORKED_STATES if not pipeline().equal_up_to_phase(build(terms))]
    agreed = len(WORKED_STATES) - len(mismatched)
    ok = not mismatched
    detail = f"{agreed}/{len(WORKED_STATES)} worked states reproduced to 1e-12 up to global phase"
    if mismatched:
        detail += "; the hand derivation contradicts the gate definitions for " + ", ".join(mismatched)
        # they match what the gate definitions give
        assert set(mismatched) == set(CONFLICTING)
        assert all(p().allclose(build(CONFLICTING[n])) for n, p, _ in WORKED_STATES if n in CONFLICTING)
    record("08b", ok, detail)
    assert ok, detail


def test_criterion_09_monte_carlo():
    n = 1_000_000
    t0 = time.perf_counter()
    worst_z = 0.0
    cells = 0
    for a in ATTACKS:
        for p, q in itertools.product([0.25, 0.5, 0.75], repeat=2):
            emp = estimate_joint(a, p, q, n, seed=2024)
            worst_z = max(worst_z, float(np.abs(emp.z_scores(closed_form_joint(a, p, q).p)).max()))
            cells += 1
    det_z = 0.0
    for a in ATTACKS:
        est = estimate_detection_run(a, n, seed=99)
        expected = detection_probability(a)
        det_z = max(det_z, abs(est.p_d - expected) / est.sigma(expected))
    per_cell = (time.perf_counter() - t0) / (cells + len(ATTACKS))
    ok = worst_z <= 4 and det_z <= 4
    record("09", ok, f"{cells} cells at n=1e6: max |z| {worst_z:.2f}; P_d max |z| {det_z:.2f} (<= 4 sigma, {per_cell:.2f} s/cell)")
    assert ok


def test_criterion_10_solver_soundness():
    reports = {}
    worst = 0.0
    interior = 0
    for s in CANONICAL_SCENARIOS:
        points = solved(s.label)
        reports[s.label] = scenario_report(s, points)
        for pt in points:
            worst = max(worst, pt.interior_residual_norm())
            interior += any(f.value == "interior" for f in pt.boundary_flags)
    b = qber_bounds(reports)
    fixture_points = {}
    for row in load_fixtures():
        fixture_points.setdefault(row.scenario.label, []).append(verify_point(row.scenario, row.profile))
    fb = qber_bounds({k: scenario_report(k, v) for k, v in fixture_points.items()})
    ok = worst < 1e-8 and b.qber_upper <= 0.15 and b.qber_lower == 0
    note = "does not reach" if b.qber_upper < 0.143882 else "covers"
    record(
        "10",
        ok,
        f"{interior} points with interior coordinates, max residual there {worst:.1e} < 1e-8; "
        f"solver bounds ({b.qber_lower}, {b.qber_upper:.6f}) satisfy upper <= 0.15, lower 0 but {note} 0.143882 "
        f"(zero-error boundary equilibria give eps 0); fixture bounds ({fb.qber_lower}, {fb.qber_upper:.6f})",
    )
    assert ok
