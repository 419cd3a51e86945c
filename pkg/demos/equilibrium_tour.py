"""Mixed-strategy games between two attacks: replay the published points, then solve.

Run:  python3 demos/equilibrium_tour.py        (about 40 s at the default grid)
      python3 demos/equilibrium_tour.py 16     (coarser, a few seconds)
"""
import sys

from dl04game.equilibrium import (
    CANONICAL_SCENARIOS,
    best_response_lattice,
    find_equilibria,
    load_fixtures,
    qber_bounds,
    replay_fixtures,
    scenario_report,
)

grid_n = int(sys.argv[1]) if len(sys.argv) > 1 else 64

print("Replaying the bundled equilibrium fixtures (profile -> payoffs, expected QBER):")
checks = replay_fixtures(load_fixtures())
by_scenario = {}
for c in checks:
    by_scenario.setdefault(c.row.scenario.label, []).append(c.point)
    f_a, f_b, f_e = c.point.residuals
    flag = "" if c.printed_columns_consistent else "  (printed difference disagrees with its own columns)"
    print(
        f"  {c.row.scenario.label} {c.row.profile.as_tuple()}  eps {c.point.epsilon:.6f} "
        f"(printed {c.row.epsilon})  residuals ({f_a:+.3f}, {f_b:+.3f}, {f_e:+.3f}){flag}"
    )
print("The residuals are far from zero: these points are not exact indifference solutions.")
fixture_bounds = qber_bounds({k: scenario_report(k, v) for k, v in by_scenario.items()})
print("Bounds from the fixture set:", fixture_bounds.as_dict())
print()

print("Eve's best response in E1-E2 over (p, q), 5x5:")
rows = best_response_lattice("E1-E2", "eve", 5)
for i in range(5):
    print("  " + " ".join(f"{r['best_response']:>11}" for r in rows[i * 5 : (i + 1) * 5]))
print()

print(f"Solving every scenario on a {grid_n}-point lattice per axis:")
reports = {}
for s in CANONICAL_SCENARIOS:
    points = find_equilibria(s, grid_n=grid_n)
    rep = scenario_report(s, points)
    reports[s.label] = rep
    best = rep.min_epsilon_point
    print(
        f"  {s.label}: {len(points)} equilibria, min eps {rep.min_epsilon:.6f} at "
        f"{tuple(round(v, 4) for v in best.profile.as_tuple())} flags {[f.value for f in best.boundary_flags]}"
    )
print("Solver bounds:", qber_bounds(reports).as_dict())
print("Pure profiles with zero errors (Alice always sending 0, or Eve on the error-free attack)")
print("are equilibria, so the solver's minimum QBER is 0 in every scenario.")
