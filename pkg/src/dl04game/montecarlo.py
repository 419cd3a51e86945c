"""Sampling oracle: run the protocol shot by shot and tabulate outcomes.

Random numbers come from numpy's PCG64.  Samples are generated in fixed-size
blocks and block ``i`` is seeded from ``SeedSequence(seed, spawn_key=(i,))``,
so results depend only on ``(seed, n)`` and never on how blocks are spread
across worker threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .attacks import (
    PREPS,
    TOL,
    AttackKind,
    PreparedState,
    _backward_branches,
    _FORWARD,
    check_probability,
    encode,
    eve_decode_rule,
    initial_state,
    prep_weights,
)
from .photonic_state import VAC, Basis, Occupancy, measure_occupancy_pair, measure_polarization, product_state

BLOCK_SIZE = 1 << 16
SIGMA_BAND = 4.0
RNG_METADATA = {
    "bit_generator": "PCG64",
    "numpy": np.__version__,
    "seeding": "SeedSequence(seed, spawn_key=(block,))",
    "block_size": BLOCK_SIZE,
}

# Eve's raw record: an (x, y) occupancy pair for unitary attacks, the two
# same-basis results (b1, b2) for intercept-resend
_PAIRS = tuple(product(Occupancy, repeat=2))
_BITS = tuple(product((0, 1), repeat=2))


@dataclass(frozen=True)
class RunRecord:
    j: int
    m: int
    k: int
    prep: PreparedState


def make_rng(seed: int, block: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _pick(rng: np.random.Generator, probs) -> int:
    probs = np.asarray(probs, dtype=float)
    return int(rng.choice(len(probs), p=probs / probs.sum()))


def _bob_bit(rng, state, prep: PreparedState) -> int:
    outs = [o for o in measure_polarization(state, "t", prep.basis) if o.detected]
    o = outs[_pick(rng, [o.probability for o in outs])]
    return o.bit


def sample_run(attack, p: float, q: float, rng: np.random.Generator) -> RunRecord:
    """One message-mode run, sampling every measurement from the exact state."""
    attack = AttackKind.parse(attack)
    check_probability("p", p)
    check_probability("q", q)
    prep = PREPS[_pick(rng, prep_weights(p))]
    j = _pick(rng, [q, 1 - q])
    if attack is AttackKind.E4:
        basis = (Basis.Z, Basis.X)[_pick(rng, [0.5, 0.5])]
        state = product_state(prep.vector, VAC, VAC)
        bits = []
        for step in range(2):
            outs = [o for o in measure_polarization(state, "t", basis) if o.detected]
            o = outs[_pick(rng, [o.probability for o in outs])]
            bits.append(o.bit)
            state = encode(o.collapsed, j) if step == 0 else o.collapsed
        k = eve_decode_rule(attack, tuple(bits))
    else:
        branches = _backward_branches(attack)
        _, back = branches[_pick(rng, [w for w, _ in branches])]
        state = back(encode(_FORWARD[attack](initial_state(prep)), j))
        outs = measure_occupancy_pair(state, min_prob=TOL)
        anc = outs[_pick(rng, [o.probability for o in outs])]
        k = eve_decode_rule(attack, (anc.x, anc.y))
        state = anc.collapsed
    m = int(_bob_bit(rng, state, prep) != prep.bit)
    return RunRecord(j=j, m=m, k=k, prep=prep)


# ---------------------------------------------------------------- vectorized tables


@dataclass(frozen=True)
class _MessageTables:
    branch: np.ndarray  # [branch]
    eve: np.ndarray  # [prep, j, branch, record]
    bob: np.ndarray  # [prep, j, branch, record, m] conditioned on the record
    k_of_record: np.ndarray  # [record]


def _conditional_bob(state, prep: PreparedState) -> np.ndarray:
    out = np.zeros(2)
    for o in measure_polarization(state, "t", prep.basis):
        if o.detected:
            out[int(o.bit != prep.bit)] += o.probability
    return out / out.sum()


@lru_cache(maxsize=None)
def _message_tables(attack: AttackKind) -> _MessageTables:
    if attack is AttackKind.E4:
        bases = (Basis.Z, Basis.X)
        eve = np.zeros((4, 2, 2, 4))
        bob = np.full((4, 2, 2, 4, 2), 0.5)
        for a, prep in enumerate(PREPS):
            start = product_state(prep.vector, VAC, VAC)
            for j, (b, basis) in product((0, 1), enumerate(bases)):
                for first in measure_polarization(start, "t", basis, min_prob=TOL):
                    for second in measure_polarization(encode(first.collapsed, j), "t", basis, min_prob=TOL):
                        rec = _BITS.index((first.bit, second.bit))
                        eve[a, j, b, rec] += first.probability * second.probability
                        bob[a, j, b, rec] = _conditional_bob(second.collapsed, prep)
        k = np.array([eve_decode_rule(attack, bits) for bits in _BITS])
        return _MessageTables(np.array([0.5, 0.5]), eve, bob, k)
    branches = _backward_branches(attack)
    nb = len(branches)
    eve = np.zeros((4, 2, nb, len(_PAIRS)))
    bob = np.full((4, 2, nb, len(_PAIRS), 2), 0.5)
    k = np.zeros(len(_PAIRS), dtype=int)
    for a, prep in enumerate(PREPS):
        for j in (0, 1):
            encoded = encode(_FORWARD[attack](initial_state(prep)), j)
            for b, (_, back) in enumerate(branches):
                for anc in measure_occupancy_pair(back(encoded), min_prob=TOL):
                    rec = _PAIRS.index((anc.x, anc.y))
                    eve[a, j, b, rec] = anc.probability
                    bob[a, j, b, rec] = _conditional_bob(anc.collapsed, prep)
                    k[rec] = eve_decode_rule(attack, (anc.x, anc.y))
    return _MessageTables(np.array([w for w, _ in branches]), eve, bob, k)


def _categorical(u: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Inverse-CDF draws: ``probs`` has the category on its last axis, one row per draw."""
    cdf = np.cumsum(probs, axis=-1)
    cdf[..., -1] = np.inf
    return (u[:, None] >= cdf).sum(axis=-1)


def _message_block(attack: AttackKind, p: float, q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    t = _message_tables(attack)
    u = rng.random((size, 5))
    prep = _categorical(u[:, 0], np.broadcast_to(prep_weights(p), (size, 4)).copy())
    j = (u[:, 1] >= q).astype(int)
    branch = _categorical(u[:, 2], np.broadcast_to(t.branch, (size, len(t.branch))).copy())
    rec = _categorical(u[:, 3], t.eve[prep, j, branch])
    m = _categorical(u[:, 4], t.bob[prep, j, branch, rec])
    k = t.k_of_record[rec]
    return np.bincount(j * 4 + m * 2 + k, minlength=8).reshape(2, 2, 2)


def _blocks(n: int) -> list:
    full, rest = divmod(n, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _run_blocks(fn, n: int, seed: int, workers: int):
    sizes = _blocks(n)
    jobs = [(i, s) for i, s in enumerate(sizes)]

    def one(job):
        i, s = job
        return fn(s, make_rng(seed, i))

    if workers <= 1 or len(jobs) == 1:
        results = [one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    return sum(results[1:], results[0])


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class EmpiricalJoint:
    counts: np.ndarray
    n: int
    seed: int
    metadata: dict = field(default_factory=lambda: dict(RNG_METADATA), compare=False)

    def __post_init__(self):
        if int(self.counts.sum()) != self.n:
            raise ValueError("counts must sum to n")

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def qber(self) -> float:
        f = self.frequencies
        return float(f[0, 1].sum() + f[1, 0].sum())

    def sigma(self, expected) -> np.ndarray:
        """Binomial standard error of each cell frequency under ``expected``."""
        e = np.asarray(expected, dtype=float)
        return np.sqrt(e * (1 - e) / self.n)

    def z_scores(self, expected) -> np.ndarray:
        e = np.asarray(expected, dtype=float)
        s = self.sigma(e)
        diff = self.frequencies - e
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(s > 0, diff / np.where(s > 0, s, 1.0), np.where(diff == 0, 0.0, np.inf))

    def within_band(self, expected, band: float = SIGMA_BAND) -> bool:
        return bool(np.all(np.abs(self.z_scores(expected)) <= band))


def estimate_joint(attack, p: float, q: float, n: int, seed: int, workers: int = 1) -> EmpiricalJoint:
    """Counts of ``(j, m, k)`` over ``n`` independent runs."""
    attack = AttackKind.parse(attack)
    check_probability("p", p)
    check_probability("q", q)
    n = _check_n(n)
    counts = _run_blocks(lambda size, rng: _message_block(attack, p, q, size, rng), n, seed, workers)
    return EmpiricalJoint(counts=counts, n=n, seed=int(seed))


# ---------------------------------------------------------------- control mode


# intercept-resend escapes a check only when Eve's basis guess matches it
_E4_LEG_PASS = 0.5


@dataclass(frozen=True)
class _ControlTables:
    alice: np.ndarray  # [prep] pass probability given detection
    anc: np.ndarray  # [prep, pair] ancilla outcome after a passed check
    branch: np.ndarray  # [branch]
    bob: np.ndarray  # [prep, pair, branch] pass probability given detection


def _check_pass(state, prep: PreparedState) -> tuple:
    outs = [o for o in measure_polarization(state, "t", prep.basis) if o.detected]
    total = sum(o.probability for o in outs)
    good = [o for o in outs if o.bit == prep.bit]
    if not good:
        return 0.0, None
    return good[0].probability / total, good[0].collapsed


@lru_cache(maxsize=None)
def _control_tables(attack: AttackKind) -> _ControlTables:
    branches = _backward_branches(attack)
    alice = np.zeros(4)
    anc = np.zeros((4, len(_PAIRS)))
    bob = np.zeros((4, len(_PAIRS), len(branches)))
    for a, prep in enumerate(PREPS):
        alice[a], passed = _check_pass(_FORWARD[attack](initial_state(prep)), prep)
        if passed is None:
            anc[a, 0] = 1.0
            continue
        for o in measure_occupancy_pair(passed, min_prob=TOL):
            rec = _PAIRS.index((o.x, o.y))
            anc[a, rec] = o.probability
            for b, (_, back) in enumerate(branches):
                bob[a, rec, b] = _check_pass(back(o.collapsed), prep)[0]
    return _ControlTables(alice, anc, np.array([w for w, _ in branches]), bob)


def _control_block(attack: AttackKind, size: int, rng: np.random.Generator) -> np.ndarray:
    """Number of runs in the block where both checks pass, as a length-1 array."""
    u = rng.random((size, 5))
    if attack is AttackKind.E4:
        ok = (u[:, 1] < _E4_LEG_PASS) & (u[:, 4] < _E4_LEG_PASS)
        return np.array([int(ok.sum())])
    t = _control_tables(attack)
    prep = np.minimum((u[:, 0] * 4).astype(int), 3)
    alice_ok = u[:, 1] < t.alice[prep]
    rec = _categorical(u[:, 2], t.anc[prep])
    branch = _categorical(u[:, 3], np.broadcast_to(t.branch, (size, len(t.branch))).copy())
    bob_ok = u[:, 4] < t.bob[prep, rec, branch]
    return np.array([int((alice_ok & bob_ok).sum())])


@dataclass(frozen=True)
class DetectionEstimate:
    p_d: float
    p_nd: float
    passes: int
    n: int
    seed: int
    metadata: dict = field(default_factory=lambda: dict(RNG_METADATA), compare=False)

    def sigma(self, expected_p_d: float) -> float:
        p_nd = 1 - 2 * expected_p_d
        return float(np.sqrt(p_nd * (1 - p_nd) / self.n) / 2)


def estimate_detection_run(attack, n: int, seed: int, workers: int = 1) -> DetectionEstimate:
    attack = AttackKind.parse(attack)
    n = _check_n(n)
    passes = int(_run_blocks(lambda size, rng: _control_block(attack, size, rng), n, seed, workers)[0])
    p_nd = passes / n
    return DetectionEstimate(p_d=(1 - p_nd) / 2, p_nd=p_nd, passes=passes, n=n, seed=int(seed))


def estimate_detection(attack, n: int, seed: int, workers: int = 1) -> float:
    """Empirical ``P_d`` from ``n`` sampled control-mode runs with uniform preparations."""
    return estimate_detection_run(attack, n, seed, workers).p_d
