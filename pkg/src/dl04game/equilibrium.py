"""Mixed-strategy game over pairs of attacks.

Players: Bob picks the Z basis with probability ``p``, Alice encodes 0 with
probability ``q``, Eve launches the scenario's first attack with probability
``r``.  Equilibria are located by scanning a lattice for sign changes of the
three indifference residuals and polishing candidates with damped Newton.
Faces of the cube, where some players play pure strategies, are scanned the
same way with the pinned coordinates held fixed.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .attacks import AttackKind, cached_detection_probability, qber
from .payoff import PayoffVector, PayoffWeights, payoff_arrays

TIE_TOL = 1e-10
DEDUP_RADIUS = 1e-3
JACOBIAN_STEP = 1e-5
MAX_ITER = 100
DEFAULT_GRID_N = 64
DEFAULT_TOL = 1e-8
BOUNDARY_TOL = 1e-9
ERROR_FREE_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    first: AttackKind
    second: AttackKind

    def __post_init__(self):
        object.__setattr__(self, "first", AttackKind.parse(self.first))
        object.__setattr__(self, "second", AttackKind.parse(self.second))
        if self.first is self.second:
            raise ValueError(f"scenario needs two distinct attacks, got {self.first.value} twice")

    @classmethod
    def parse(cls, text: "str | Scenario") -> "Scenario":
        if isinstance(text, Scenario):
            return text
        parts = str(text).replace("_", "-").split("-")
        if len(parts) != 2:
            raise ValueError(f"scenario must look like 'E1-E2', got {text!r}")
        return cls(AttackKind.parse(parts[0]), AttackKind.parse(parts[1]))

    @property
    def label(self) -> str:
        return f"{self.first.value}-{self.second.value}"

    def __str__(self) -> str:
        return self.label


CANONICAL_SCENARIOS = (
    Scenario(AttackKind.E1, AttackKind.E2),
    Scenario(AttackKind.E1, AttackKind.E3),
    Scenario(AttackKind.E2, AttackKind.E3),
    Scenario(AttackKind.E1, AttackKind.E4),
)
# the scenario pairing the two strongest attacks sets the QBER ceiling
MOST_POTENT = Scenario(AttackKind.E2, AttackKind.E3)


@dataclass(frozen=True)
class StrategyProfile:
    p: float
    q: float
    r: float

    def __post_init__(self):
        for name in ("p", "q", "r"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple:
        return (self.p, self.q, self.r)

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r}


class BoundaryFlag(str, Enum):
    INTERIOR = "interior"
    AT0 = "at0"
    AT1 = "at1"

    @classmethod
    def classify(cls, value: float, tol: float = BOUNDARY_TOL) -> "BoundaryFlag":
        if value <= tol:
            return cls.AT0
        if value >= 1 - tol:
            return cls.AT1
        return cls.INTERIOR


@dataclass(frozen=True)
class EquilibriumPoint:
    profile: StrategyProfile
    payoffs: PayoffVector
    residuals: tuple
    epsilon: float
    payoff_difference: float
    boundary_flags: tuple

    @property
    def residual_norm(self) -> float:
        return max(abs(v) for v in self.residuals)

    def interior_residual_norm(self) -> float:
        """Largest residual among coordinates that are strictly interior."""
        vals = [abs(f) for f, b in zip(self.residuals, self.boundary_flags) if b is BoundaryFlag.INTERIOR]
        return max(vals, default=0.0)

    def as_dict(self) -> dict:
        return {
            **self.profile.as_dict(),
            "alice": self.payoffs.alice,
            "bob": self.payoffs.bob,
            "eve": self.payoffs.eve,
            "f_A": self.residuals[0],
            "f_B": self.residuals[1],
            "f_E": self.residuals[2],
            "epsilon": self.epsilon,
            "payoff_difference": self.payoff_difference,
            "boundary_flags": [b.value for b in self.boundary_flags],
        }


# residual index that certifies each coordinate: q is Alice's, p Bob's, r Eve's
_COORD_RESIDUAL = {0: 1, 1: 0, 2: 2}


def profile_distribution(profile: StrategyProfile) -> np.ndarray:
    """Probabilities of the eight pure triples, ordered pqr, pq(1-r), p(1-q)r, ..."""
    p, q, r = profile.as_tuple()
    out = [a * b * c for a, b, c in itertools.product((p, 1 - p), (q, 1 - q), (r, 1 - r))]
    return np.array(out)


class GameModel:
    """Vectorized payoff evaluator for one scenario and one weighting."""

    def __init__(self, scenario, weights: PayoffWeights = None):
        self.scenario = Scenario.parse(scenario)
        self.weights = weights

    def _pay(self, attack, p, q):
        return payoff_arrays(attack, p, q, self.weights)

    def expected(self, p, q, r):
        a1, b1, e1 = self._pay(self.scenario.first, p, q)
        a2, b2, e2 = self._pay(self.scenario.second, p, q)
        return (
            r * a1 + (1 - r) * a2,
            r * b1 + (1 - r) * b2,
            r * e1 + (1 - r) * e2,
        )

    def epsilon(self, p, q, r):
        return r * qber(self.scenario.first, p, q) + (1 - r) * qber(self.scenario.second, p, q)

    def residuals(self, p, q, r) -> np.ndarray:
        p, q, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, r)))
        one, zero = np.ones_like(q), np.zeros_like(q)
        f_a = self.expected(p, one, r)[0] - self.expected(p, zero, r)[0]
        f_b = self.expected(one, q, r)[1] - self.expected(zero, q, r)[1]
        f_e = self._pay(self.scenario.first, p, q)[2] - self._pay(self.scenario.second, p, q)[2]
        return np.stack([f_a, f_b, f_e], axis=-1)


def expected_payoffs(scenario, profile: StrategyProfile, weights: PayoffWeights = None) -> PayoffVector:
    a, b, e = GameModel(scenario, weights).expected(*profile.as_tuple())
    return PayoffVector(float(a), float(b), float(e))


def indifference_residuals(scenario, profile: StrategyProfile, weights: PayoffWeights = None) -> tuple:
    return tuple(float(v) for v in GameModel(scenario, weights).residuals(*profile.as_tuple()))


class Player(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"

    @classmethod
    def parse(cls, value) -> "Player":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class BestResponse:
    """A best-response correspondence value: a single pure strategy or all of [0, 1]."""

    lo: float
    hi: float

    @property
    def is_interval(self) -> bool:
        return self.lo != self.hi

    @property
    def label(self) -> str:
        if self.is_interval:
            return "indifferent"
        return str(int(self.lo))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def _response_from_residual(f: float, tie: float = TIE_TOL) -> BestResponse:
    if f > tie:
        return BestResponse(1.0, 1.0)
    if f < -tie:
        return BestResponse(0.0, 0.0)
    return BestResponse(0.0, 1.0)


def best_response(scenario, player, opponents: dict, weights: PayoffWeights = None) -> BestResponse:
    """Best response of ``player`` given the other two coordinates.

    ``opponents`` maps coordinate names to values: Alice needs ``p`` and ``r``,
    Bob ``q`` and ``r``, Eve ``p`` and ``q``.
    """
    player = Player.parse(player)
    model = GameModel(scenario, weights)
    own = {Player.ALICE: "q", Player.BOB: "p", Player.EVE: "r"}[player]
    coords = {"p": 0.5, "q": 0.5, "r": 0.5, **opponents}
    coords[own] = 0.5  # the player's own residual never depends on its own coordinate
    f = model.residuals(coords["p"], coords["q"], coords["r"])
    idx = {Player.ALICE: 0, Player.BOB: 1, Player.EVE: 2}[player]
    return _response_from_residual(float(f[idx]))


def best_response_lattice(scenario, player, grid_n: int, weights: PayoffWeights = None) -> list:
    """Correspondence labels over a ``grid_n x grid_n`` lattice of the opponents' coordinates."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    player = Player.parse(player)
    axes = {Player.ALICE: ("p", "r"), Player.BOB: ("q", "r"), Player.EVE: ("p", "q")}[player]
    ticks = np.linspace(0.0, 1.0, grid_n)
    a, b = np.meshgrid(ticks, ticks, indexing="ij")
    coords = {"p": np.full_like(a, 0.5), "q": np.full_like(a, 0.5), "r": np.full_like(a, 0.5)}
    coords[axes[0]], coords[axes[1]] = a, b
    idx = {Player.ALICE: 0, Player.BOB: 1, Player.EVE: 2}[player]
    f = GameModel(scenario, weights).residuals(coords["p"], coords["q"], coords["r"])[..., idx]
    rows = []
    for i, j in itertools.product(range(grid_n), range(grid_n)):
        rows.append(
            {
                axes[0]: float(a[i, j]),
                axes[1]: float(b[i, j]),
                "residual": float(f[i, j]),
                "best_response": _response_from_residual(float(f[i, j])).label,
            }
        )
    return rows


def _flags(x: Sequence[float]) -> tuple:
    return tuple(BoundaryFlag.classify(v) for v in x)


def _point(model: GameModel, x) -> EquilibriumPoint:
    p, q, r = (float(v) for v in x)
    a, b, e = (float(v) for v in model.expected(p, q, r))
    res = tuple(float(v) for v in model.residuals(p, q, r))
    return EquilibriumPoint(
        profile=StrategyProfile(p, q, r),
        payoffs=PayoffVector(a, b, e),
        residuals=res,
        epsilon=float(model.epsilon(p, q, r)),
        payoff_difference=e - a,
        boundary_flags=_flags((p, q, r)),
    )


def verify_point(scenario, profile: StrategyProfile, weights: PayoffWeights = None) -> EquilibriumPoint:
    """Evaluate payoffs, residuals and expected QBER at a given profile (no solving)."""
    return _point(GameModel(scenario, weights), profile.as_tuple())


def _newton(model: GameModel, free: tuple, pinned: dict, x0: np.ndarray, tol: float) -> tuple:
    """Batched damped Newton on the residuals of the free coordinates.

    ``x0`` has shape ``(n, len(free))``.  Returns the polished points and a mask
    of those that reached ``tol``.
    """
    d = len(free)
    rows = [_COORD_RESIDUAL[c] for c in free]

    def full(x):
        cols = [None] * 3
        for k, c in enumerate(free):
            cols[c] = x[:, k]
        for c, v in pinned.items():
            cols[c] = np.full(x.shape[0], v)
        return cols

    def resid(x):
        return model.residuals(*full(x))[:, rows]

    x = np.clip(x0.astype(float), 0.0, 1.0)
    f = resid(x)
    norm = np.abs(f).max(axis=1)
    active = norm >= tol
    for _ in range(MAX_ITER):
        if not active.any():
            break
        xa, fa = x[active], f[active]
        jac = np.empty((xa.shape[0], d, d))
        # keep the stencil inside the unit cube for points sitting on a face
        centre = np.clip(xa, JACOBIAN_STEP, 1 - JACOBIAN_STEP)
        for k in range(d):
            step = np.zeros(d)
            step[k] = JACOBIAN_STEP
            jac[:, :, k] = (resid(centre + step) - resid(centre - step)) / (2 * JACOBIAN_STEP)
        delta = -np.einsum("nij,nj->ni", np.linalg.pinv(jac), fa)
        na = np.abs(fa).max(axis=1)
        lam = np.ones(xa.shape[0])
        best_x, best_f, best_n = xa.copy(), fa.copy(), na.copy()
        pending = np.ones(xa.shape[0], dtype=bool)
        for _ in range(12):
            trial = np.clip(xa + lam[:, None] * delta, 0.0, 1.0)
            ft = resid(trial)
            nt = np.abs(ft).max(axis=1)
            accept = pending & (nt < na)
            best_x[accept], best_f[accept], best_n[accept] = trial[accept], ft[accept], nt[accept]
            pending &= ~accept
            if not pending.any():
                break
            lam[pending] *= 0.5
        idx = np.flatnonzero(active)
        x[idx], f[idx] = best_x, best_f
        stalled = pending
        norm[idx] = best_n
        still = best_n >= tol
        active[idx] = still & ~stalled
    return x, norm < tol


def _sign_change_cells(values: np.ndarray) -> np.ndarray:
    """Mask of lattice cells where every residual brackets zero.

    ``values`` has shape ``(n,)*d + (d,)``; the result has shape ``(n-1,)*d``.
    """
    d = values.ndim - 1
    lo = hi = None
    for corner in itertools.product((0, 1), repeat=d):
        sl = tuple(slice(c, values.shape[k] - 1 + c) for k, c in enumerate(corner))
        v = values[sl]
        lo = v if lo is None else np.minimum(lo, v)
        hi = v if hi is None else np.maximum(hi, v)
    return np.all((lo <= 0) & (hi >= 0), axis=-1)


def _face_candidates(model: GameModel, free: tuple, pinned: dict, grid_n: int, tol: float) -> list:
    if not free:
        x = np.array([[pinned[c] for c in range(3)]])
        return [x[0]]
    ticks = np.linspace(0.0, 1.0, grid_n)
    grids = np.meshgrid(*([ticks] * len(free)), indexing="ij")
    cols = [None] * 3
    for k, c in enumerate(free):
        cols[c] = grids[k]
    for c, v in pinned.items():
        cols[c] = np.full(grids[0].shape, v)
    res = model.residuals(*cols)[..., [_COORD_RESIDUAL[c] for c in free]]
    cells = np.argwhere(_sign_change_cells(res))
    if cells.size == 0:
        return []
    starts = (cells + 0.5) / (grid_n - 1)
    x, ok = _newton(model, free, pinned, starts, tol)
    out = []
    for xi in x[ok]:
        full = np.empty(3)
        for k, c in enumerate(free):
            full[c] = xi[k]
        for c, v in pinned.items():
            full[c] = v
        out.append(full)
    return out


def _is_equilibrium(res: Sequence[float], x: Sequence[float], tol: float) -> bool:
    """Pinned coordinates must be best responses and interior ones indifferent."""
    for c in range(3):
        f = res[_COORD_RESIDUAL[c]]
        flag = BoundaryFlag.classify(x[c])
        if flag is BoundaryFlag.INTERIOR:
            if abs(f) >= tol:
                return False
        elif flag is BoundaryFlag.AT1 and f < -TIE_TOL:
            return False
        elif flag is BoundaryFlag.AT0 and f > TIE_TOL:
            return False
    return True


def _dedup(points: Iterable[np.ndarray], radius: float = DEDUP_RADIUS) -> list:
    kept: list = []
    for x in sorted(points, key=lambda v: tuple(np.round(v, 12))):
        if all(np.max(np.abs(x - y)) >= radius for y in kept):
            kept.append(x)
    return kept


def find_equilibria(
    scenario,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = DEFAULT_TOL,
    weights: PayoffWeights = None,
) -> list:
    """All equilibria found at lattice resolution ``grid_n``, sorted by expected QBER."""
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    if not tol > 0:
        raise ValueError("tol must be positive")
    model = GameModel(scenario, weights)
    candidates = []
    for pattern in itertools.product((None, 0.0, 1.0), repeat=3):
        free = tuple(c for c in range(3) if pattern[c] is None)
        pinned = {c: v for c, v in enumerate(pattern) if v is not None}
        candidates.extend(_face_candidates(model, free, pinned, grid_n, tol))
    accepted = []
    for x in candidates:
        res = model.residuals(*x)
        if _is_equilibrium(res, x, tol):
            accepted.append(x)
    points = [_point(model, x) for x in _dedup(accepted)]
    points.sort(key=lambda pt: (pt.epsilon, pt.profile.as_tuple()))
    return points


def _pareto_dominant(points: Sequence[EquilibriumPoint]) -> bool:
    def weakly_better(a: EquilibriumPoint, b: EquilibriumPoint) -> bool:
        return (
            a.payoffs.alice >= b.payoffs.alice
            and a.payoffs.bob >= b.payoffs.bob
            and a.payoffs.eve >= b.payoffs.eve
        )

    return any(all(weakly_better(a, b) for b in points if b is not a) for a in points)


@dataclass(frozen=True)
class ScenarioReport:
    scenario: Scenario
    min_epsilon: float
    min_epsilon_point: EquilibriumPoint
    max_payoff_difference: float
    max_payoff_difference_point: EquilibriumPoint
    pareto_optimal_exists: bool
    n_points: int

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario.label,
            "n_points": self.n_points,
            "min_epsilon": self.min_epsilon,
            "min_epsilon_point": self.min_epsilon_point.as_dict(),
            "max_payoff_difference": self.max_payoff_difference,
            "max_payoff_difference_point": self.max_payoff_difference_point.as_dict(),
            "pareto_optimal_exists": self.pareto_optimal_exists,
        }


def scenario_report(scenario, points: Sequence[EquilibriumPoint]) -> ScenarioReport:
    if not points:
        raise ValueError("scenario_report needs at least one point")
    lo = min(points, key=lambda pt: pt.epsilon)
    hi = max(points, key=lambda pt: pt.payoff_difference)
    return ScenarioReport(
        scenario=Scenario.parse(scenario),
        min_epsilon=lo.epsilon,
        min_epsilon_point=lo,
        max_payoff_difference=hi.payoff_difference,
        max_payoff_difference_point=hi,
        pareto_optimal_exists=_pareto_dominant(points),
        n_points=len(points),
    )


@dataclass(frozen=True)
class Bounds:
    qber_lower: float
    qber_upper: float
    p_d_lower: float
    p_d_upper: float

    def as_dict(self) -> dict:
        return {
            "qber": [self.qber_lower, self.qber_upper],
            "detection_probability": [self.p_d_lower, self.p_d_upper],
        }


def qber_bounds(reports: dict) -> Bounds:
    """QBER and detection-probability bounds from per-scenario reports.

    The lower QBER bound comes from the attack that leaves no errors at all;
    the upper is the smallest equilibrium QBER of the strongest attack pair.
    """
    by_label = {Scenario.parse(k).label: v for k, v in reports.items()}
    missing = [s.label for s in CANONICAL_SCENARIOS if s.label not in by_label]
    if missing:
        raise ValueError(f"missing scenario reports: {missing}")
    ticks = np.linspace(0.0, 1.0, 11)
    worst = min(float(np.max(qber(a, *np.meshgrid(ticks, ticks)))) for a in AttackKind)
    lower = 0.0 if worst <= ERROR_FREE_TOL else min(r.min_epsilon for r in by_label.values())
    upper = by_label[MOST_POTENT.label].min_epsilon
    p_d = [cached_detection_probability(a) for a in AttackKind]
    return Bounds(lower, upper, min(p_d), max(p_d))


# ---------------------------------------------------------------- fixtures


FIXTURE_COLUMNS = ("scenario", "p", "q", "r", "alice_payoff", "eve_payoff", "payoff_difference", "epsilon")


@dataclass(frozen=True)
class FixtureRow:
    scenario: Scenario
    profile: StrategyProfile
    alice_payoff: float
    eve_payoff: float
    payoff_difference: float
    epsilon: float
    line: int = field(default=0, compare=False)


def default_fixture_path() -> Path:
    return Path(str(resources.files("dl04game") / "data" / "table2.csv"))


def load_fixtures(path=None) -> list:
    path = Path(path) if path is not None else default_fixture_path()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != FIXTURE_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(FIXTURE_COLUMNS)}")
        rows = []
        for n, rec in enumerate(reader, start=2):
            try:
                rows.append(
                    FixtureRow(
                        scenario=Scenario.parse(rec["scenario"]),
                        profile=StrategyProfile(float(rec["p"]), float(rec["q"]), float(rec["r"])),
                        alice_payoff=float(rec["alice_payoff"]),
                        eve_payoff=float(rec["eve_payoff"]),
                        payoff_difference=float(rec["payoff_difference"]),
                        epsilon=float(rec["epsilon"]),
                        line=n,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{n}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no fixture rows")
    return rows


EPSILON_TOL = 1e-3
PAYOFF_TOL = 2e-3


@dataclass(frozen=True)
class FixtureCheck:
    row: FixtureRow
    point: EquilibriumPoint

    @property
    def deviations(self) -> dict:
        return {
            "epsilon": self.point.epsilon - self.row.epsilon,
            "alice_payoff": self.point.payoffs.alice - self.row.alice_payoff,
            "eve_payoff": self.point.payoffs.eve - self.row.eve_payoff,
            "payoff_difference": self.point.payoff_difference - self.row.payoff_difference,
        }

    @property
    def failures(self) -> list:
        d = self.deviations
        bad = []
        if abs(d["epsilon"]) > EPSILON_TOL:
            bad.append("epsilon")
        for k in ("alice_payoff", "eve_payoff"):
            if abs(d[k]) > PAYOFF_TOL:
                bad.append(k)
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def printed_columns_consistent(self) -> bool:
        """Whether the printed difference agrees with the printed eve and alice columns."""
        r = self.row
        return abs(r.eve_payoff - r.alice_payoff - r.payoff_difference) <= PAYOFF_TOL

    def as_dict(self) -> dict:
        return {
            "line": self.row.line,
            "scenario": self.row.scenario.label,
            **self.row.profile.as_dict(),
            "computed": self.point.as_dict(),
            "deviations": self.deviations,
            "difference_within_tolerance": abs(self.deviations["payoff_difference"]) <= PAYOFF_TOL,
            "printed_columns_consistent": self.printed_columns_consistent,
            "failures": self.failures,
            "passed": self.passed,
        }


def replay_fixtures(rows: Sequence[FixtureRow], weights: PayoffWeights = None) -> list:
    return [FixtureCheck(row, verify_point(row.scenario, row.profile, weights)) for row in rows]
