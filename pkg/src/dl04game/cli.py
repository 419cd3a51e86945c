"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .attacks import (
    ATTACKS,
    AttackKind,
    cached_detection_probability,
    closed_form_qber,
    closed_form_tables,
    control_mode_nondetection,
    gate_counts,
    joint_tables,
    qber,
)
from .equilibrium import (
    CANONICAL_SCENARIOS,
    DEFAULT_GRID_N,
    DEFAULT_TOL,
    Player,
    Scenario,
    best_response_lattice,
    find_equilibria,
    load_fixtures,
    qber_bounds,
    replay_fixtures,
    scenario_report,
)
from .infotheory import closed_form_information, information_terms
from .montecarlo import RNG_METADATA, SIGMA_BAND, estimate_detection_run, estimate_joint
from .payoff import PayoffWeights, payoff_general

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

# evaluation point for the weighted-payoff table in the full report
REFERENCE_PQ = (0.5, 0.5)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument types


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (0.0 <= v <= 1.0):
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _attack(text: str) -> AttackKind:
    try:
        return AttackKind.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown attack {text!r}; choose from e1, e2, e3, e4")


def _scenario(text: str) -> Scenario:
    try:
        return Scenario.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _player(text: str) -> Player:
    try:
        return Player.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown player {text!r}; choose alice, bob or eve")


# ---------------------------------------------------------------- config


@dataclass
class Config:
    weights: Optional[PayoffWeights] = None
    grid_n: int = DEFAULT_GRID_N
    tol: float = DEFAULT_TOL
    seed: int = 0
    mc_n: int = 100_000
    scenarios: list = field(default_factory=lambda: list(CANONICAL_SCENARIOS))

    def echo(self) -> dict:
        return {
            "weights": self.weights.as_dict() if self.weights else None,
            "grid_n": self.grid_n,
            "tol": self.tol,
            "seed": self.seed,
            "mc_n": self.mc_n,
            "scenarios": [s.label for s in self.scenarios],
        }


_CONFIG_KEYS = {"weights", "grid_n", "tol", "seed", "mc_n", "scenarios"}


def load_config(path) -> Config:
    """Read a JSON config; every problem is reported as a :class:`UsageError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    cfg = Config()
    try:
        if raw.get("weights") is not None:
            cfg.weights = PayoffWeights.from_mapping(raw["weights"])
        if "grid_n" in raw:
            cfg.grid_n = int(raw["grid_n"])
            if cfg.grid_n < 8:
                raise ValueError("grid_n must be at least 8")
        if "tol" in raw:
            cfg.tol = float(raw["tol"])
            if not cfg.tol > 0:
                raise ValueError("tol must be positive")
        if "seed" in raw:
            cfg.seed = int(raw["seed"])
        if "mc_n" in raw:
            cfg.mc_n = int(raw["mc_n"])
            if cfg.mc_n < 1:
                raise ValueError("mc_n must be at least 1")
        if "scenarios" in raw:
            cfg.scenarios = [Scenario.parse(s) for s in raw["scenarios"]]
    except (TypeError, ValueError, AttributeError) as exc:
        raise UsageError(f"{path}: {exc}")
    return cfg


# ---------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False)


def _csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in _jsonable(row).items()})
    return buf.getvalue()


def _emit(args, doc: dict, rows: list, columns: list) -> None:
    text = _csv(rows, columns) if args.format == "csv" else dumps(doc) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_attack_table(args) -> int:
    sim = joint_tables(args.attack, args.p, args.q)
    ref = closed_form_tables(args.attack, args.p, args.q)
    rows = [
        {"j": j, "m": m, "k": k, "simulated": float(sim[j, m, k]), "closed_form": float(ref[j, m, k])}
        for j in (0, 1)
        for m in (0, 1)
        for k in (0, 1)
    ]
    doc = {
        "attack": args.attack.value,
        "p": args.p,
        "q": args.q,
        "joint": {f"p{r['j']}{r['m']}{r['k']}": r["simulated"] for r in rows},
        "closed_form": {f"p{r['j']}{r['m']}{r['k']}": r["closed_form"] for r in rows},
        "max_abs_difference": float(np.abs(sim - ref).max()),
        "qber": float(qber(args.attack, args.p, args.q)),
        "p_d": cached_detection_probability(args.attack),
        "mutual_information": {k: float(v) for k, v in information_terms(sim).items()},
        "mutual_information_closed_form": closed_form_information(args.attack, args.p, args.q),
    }
    _emit(args, doc, rows, ["j", "m", "k", "simulated", "closed_form"])
    return EXIT_OK


def cmd_qber(args) -> int:
    attacks = [args.attack] if args.attack else list(ATTACKS)
    rows = []
    for a in attacks:
        rows.append(
            {
                "attack": a.value,
                "p": args.p,
                "q": args.q,
                "qber": float(qber(a, args.p, args.q)),
                "qber_closed_form": float(closed_form_qber(a, args.p, args.q)),
                "p_nd": control_mode_nondetection(a),
                "p_d": cached_detection_probability(a),
                "gate_counts": list(gate_counts(a)),
            }
        )
    _emit(args, {"attacks": rows}, rows, ["attack", "p", "q", "qber", "qber_closed_form", "p_nd", "p_d"])
    return EXIT_OK


_POINT_COLUMNS = ["p", "q", "r", "alice", "bob", "eve", "f_A", "f_B", "f_E", "epsilon", "payoff_difference", "boundary_flags"]


def _equilibria_doc(scenario: Scenario, grid_n: int, tol: float, weights) -> dict:
    points = find_equilibria(scenario, grid_n=grid_n, tol=tol, weights=weights)
    doc = {
        "scenario": scenario.label,
        "grid_n": grid_n,
        "tol": tol,
        "n_points": len(points),
        "points": [pt.as_dict() for pt in points],
        "summary": scenario_report(scenario, points).as_dict() if points else None,
    }
    if not points:
        doc["warning"] = "no equilibria found at this grid resolution"
    return doc, points


def cmd_equilibria(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    grid_n = args.grid_n or cfg.grid_n
    tol = args.tol or cfg.tol
    doc, _ = _equilibria_doc(args.scenario, grid_n, tol, cfg.weights)
    rows = [dict(p, boundary_flags=";".join(p["boundary_flags"])) for p in doc["points"]]
    _emit(args, doc, rows, _POINT_COLUMNS)
    return EXIT_OK


def _fixture_doc(path, weights=None) -> tuple:
    try:
        rows = load_fixtures(path)
    except FileNotFoundError:
        raise UsageError(f"fixture file not found: {path}")
    except (ValueError, KeyError) as exc:
        raise UsageError(f"malformed fixture file: {exc}")
    checks = replay_fixtures(rows, weights)
    doc = {
        "fixtures": str(path) if path else "bundled",
        "tolerances": {"epsilon": 1e-3, "payoff": 2e-3},
        "n_rows": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "passed": all(c.passed for c in checks),
        "rows": [c.as_dict() for c in checks],
    }
    return doc, checks


def cmd_verify(args) -> int:
    doc, checks = _fixture_doc(args.fixtures)
    rows = []
    for c in checks:
        d = c.deviations
        rows.append(
            {
                "line": c.row.line,
                "scenario": c.row.scenario.label,
                **c.row.profile.as_dict(),
                "d_epsilon": d["epsilon"],
                "d_alice": d["alice_payoff"],
                "d_eve": d["eve_payoff"],
                "d_difference": d["payoff_difference"],
                "f_A": c.point.residuals[0],
                "f_B": c.point.residuals[1],
                "f_E": c.point.residuals[2],
                "passed": c.passed,
            }
        )
    columns = ["line", "scenario", "p", "q", "r", "d_epsilon", "d_alice", "d_eve", "d_difference", "f_A", "f_B", "f_E", "passed"]
    _emit(args, doc, rows, columns)
    for c in checks:
        if not c.passed:
            print(f"row {c.row.line} ({c.row.scenario.label}): {', '.join(c.failures)} out of tolerance", file=sys.stderr)
    return EXIT_OK if doc["passed"] else EXIT_VERIFY_FAILED


def cmd_surface(args) -> int:
    rows = best_response_lattice(args.scenario, args.player, args.grid_n)
    axes = [k for k in rows[0] if k not in ("residual", "best_response")]
    doc = {"scenario": args.scenario.label, "player": args.player.value, "grid_n": args.grid_n, "axes": axes, "points": rows}
    _emit(args, doc, rows, axes + ["residual", "best_response"])
    return EXIT_OK


def _mc_doc(attack: AttackKind, p: float, q: float, n: int, seed: int, workers: int = 1) -> dict:
    est = estimate_joint(attack, p, q, n, seed, workers)
    ref = closed_form_tables(attack, p, q)
    sigma = est.sigma(ref)
    z = est.z_scores(ref)
    cells = [
        {
            "j": j,
            "m": m,
            "k": k,
            "count": int(est.counts[j, m, k]),
            "empirical": float(est.frequencies[j, m, k]),
            "analytic": float(ref[j, m, k]),
            "sigma": float(sigma[j, m, k]),
            "z": float(z[j, m, k]),
        }
        for j in (0, 1)
        for m in (0, 1)
        for k in (0, 1)
    ]
    qber_ref = float(closed_form_qber(attack, p, q))
    qber_sigma = float(np.sqrt(qber_ref * (1 - qber_ref) / n))
    det = estimate_detection_run(attack, n, seed + 1, workers)
    p_d = cached_detection_probability(attack)
    det_sigma = det.sigma(p_d)

    def band(x, ref, s):
        return bool(abs(x - ref) <= SIGMA_BAND * s) if s > 0 else bool(x == ref)

    return {
        "attack": attack.value,
        "p": p,
        "q": q,
        "n": n,
        "seed": seed,
        "rng": dict(RNG_METADATA),
        "sigma_band": SIGMA_BAND,
        "cells": cells,
        "joint_within_band": est.within_band(ref),
        "qber": {"empirical": est.qber, "analytic": qber_ref, "sigma": qber_sigma, "within_band": band(est.qber, qber_ref, qber_sigma)},
        "detection": {
            "empirical": det.p_d,
            "analytic": p_d,
            "sigma": det_sigma,
            "seed": seed + 1,
            "within_band": band(det.p_d, p_d, det_sigma),
        },
    }


def cmd_mc(args) -> int:
    doc = _mc_doc(args.attack, args.p, args.q, args.n, args.seed, args.workers)
    _emit(args, doc, doc["cells"], ["j", "m", "k", "count", "empirical", "analytic", "sigma", "z"])
    return EXIT_OK


def build_report(cfg: Config, fixtures=None) -> dict:
    scenarios = {}
    solver_reports = {}
    for s in cfg.scenarios:
        doc, points = _equilibria_doc(s, cfg.grid_n, cfg.tol, cfg.weights)
        scenarios[s.label] = doc
        if points:
            solver_reports[s.label] = scenario_report(s, points)
    fixture_doc, checks = _fixture_doc(fixtures, cfg.weights)
    fixture_reports = {}
    for s in CANONICAL_SCENARIOS:
        pts = [c.point for c in checks if c.row.scenario == s]
        if pts:
            fixture_reports[s.label] = scenario_report(s, pts)
    fixture_doc["scenario_summaries"] = {k: v.as_dict() for k, v in fixture_reports.items()}

    def bounds_or_none(reports):
        try:
            return qber_bounds(reports).as_dict()
        except ValueError:
            return None

    weights = cfg.weights or PayoffWeights()
    return {
        "tool": "dl04game",
        "version": __version__,
        "config": cfg.echo(),
        "attacks": {
            a.value: {
                "p_nd": control_mode_nondetection(a),
                "p_d": cached_detection_probability(a),
                "gate_counts": list(gate_counts(a)),
                "payoff_at_reference": {
                    "p": REFERENCE_PQ[0],
                    "q": REFERENCE_PQ[1],
                    **payoff_general(a, *REFERENCE_PQ, weights).as_dict(),
                },
            }
            for a in ATTACKS
        },
        "scenarios": scenarios,
        "fixture_replay": fixture_doc,
        "bounds": bounds_or_none(fixture_reports),
        "solver_bounds": bounds_or_none(solver_reports),
    }


def cmd_report(args) -> int:
    cfg = load_config(args.config) if args.config else Config()
    doc = build_report(cfg, args.fixtures)
    text = dumps(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dl04game", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("attack-table", help="joint distribution p_jmk for one attack")
    p.add_argument("--attack", type=_attack, required=True)
    p.add_argument("--p", type=_probability, default=0.5)
    p.add_argument("--q", type=_probability, default=0.5)
    fmt(p)
    p.set_defaults(func=cmd_attack_table)

    p = sub.add_parser("qber", help="QBER and detection probability per attack")
    p.add_argument("--attack", type=_attack)
    p.add_argument("--p", type=_probability, default=0.5)
    p.add_argument("--q", type=_probability, default=0.5)
    fmt(p)
    p.set_defaults(func=cmd_qber)

    p = sub.add_parser("equilibria", help="solve for equilibria of one scenario")
    p.add_argument("--scenario", type=_scenario, required=True)
    p.add_argument("--grid-n", type=_positive_int)
    p.add_argument("--tol", type=_positive_float)
    p.add_argument("--config")
    fmt(p)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("verify", help="replay the bundled equilibrium fixtures")
    p.add_argument("--fixtures", help="CSV file with the fixture columns (default: bundled)")
    fmt(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("surface", help="best-response lattice for plotting")
    p.add_argument("--scenario", type=_scenario, required=True)
    p.add_argument("--player", type=_player, required=True)
    p.add_argument("--grid-n", type=_positive_int, default=21)
    fmt(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("mc", help="Monte Carlo estimate against the analytic joint")
    p.add_argument("--attack", type=_attack, required=True)
    p.add_argument("--p", type=_probability, default=0.5)
    p.add_argument("--q", type=_probability, default=0.5)
    p.add_argument("--n", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    fmt(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("report", help="full pipeline report as JSON")
    p.add_argument("--config")
    p.add_argument("--fixtures")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "command", None) == "equilibria" and args.grid_n is not None and args.grid_n < 8:
        parser.print_usage(sys.stderr)
        print("dl04game: error: --grid-n must be at least 8", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "command", None) == "surface" and args.grid_n < 2:
        print("dl04game: error: --grid-n must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dl04game: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
