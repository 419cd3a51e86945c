"""The four eavesdropping attacks on DL04, in message mode and control mode.

``E1``  Wojcik's original attack: ``Q = SWAP_tx . CPBS_txy . H_y`` on the way to
        Alice, ``Q^-1`` on the way back.
``E2``  Wojcik's symmetrized attack: ``E1`` plus, with probability 1/2, an extra
        ``S_ty = X_t Z_t CNOT_ty X_t`` after ``Q^-1``.
``E3``  Pavicic's attack built from CNOTs, a PBS and Hadamards on the ancillas.
``E4``  Intercept-resend in a random basis, same basis on both legs.

Message-mode statistics are obtained by pushing every prepared state through
the gate pipeline and measuring: Eve reads her ancillas ``(x, y)``, Bob reads
``t`` in his preparation basis.  The per-(prep, bit) outcome tables are cached,
and since the joint ``p_jmk`` is bilinear in the strategy weights it is then a
cheap contraction for any ``(p, q)``, scalar or array.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .photonic_state import (
    KET_0,
    KET_1,
    KET_MINUS,
    KET_PLUS,
    POL0,
    VAC,
    Basis,
    Occupancy,
    TriModeState,
    apply_cnot,
    apply_cpbs,
    apply_hadamard,
    apply_pauli,
    apply_pbs_xy,
    apply_swap_tx,
    measure_occupancy_pair,
    measure_polarization,
    product_state,
)

TOL = 1e-12


class SimulationError(RuntimeError):
    """An attack pipeline produced a state its decoding rules cannot handle."""


class AttackKind(str, Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"

    @classmethod
    def parse(cls, value) -> "AttackKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


ATTACKS = tuple(AttackKind)


class PreparedState(Enum):
    ZERO = ("0", Basis.Z, 0)
    ONE = ("1", Basis.Z, 1)
    PLUS = ("+", Basis.X, 0)
    MINUS = ("-", Basis.X, 1)

    def __init__(self, label, basis, bit):
        self.label = label
        self.basis = basis
        self.bit = bit

    @property
    def vector(self) -> np.ndarray:
        return {"0": KET_0, "1": KET_1, "+": KET_PLUS, "-": KET_MINUS}[self.label]


PREPS = tuple(PreparedState)


def prep_weights(p):
    """Bob's preparation weights ``(p/2, p/2, (1-p)/2, (1-p)/2)`` along the last axis."""
    p = np.asarray(p, dtype=float)
    return np.stack([p / 2, p / 2, (1 - p) / 2, (1 - p) / 2], axis=-1)


def bit_weights(q):
    q = np.asarray(q, dtype=float)
    return np.stack([q, 1 - q], axis=-1)


def check_probability(name: str, value) -> None:
    v = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


# --------------------------------------------------------------------------
# Eve's unitaries
# --------------------------------------------------------------------------


def q_forward(state: TriModeState) -> TriModeState:
    return apply_swap_tx(apply_cpbs(apply_hadamard(state, "y")))


def q_backward(state: TriModeState) -> TriModeState:
    return apply_hadamard(apply_cpbs(apply_swap_tx(state)), "y")


def s_ty(state: TriModeState) -> TriModeState:
    s = apply_pauli(state, "X", "t")
    s = apply_cnot(s, "t", "y")
    s = apply_pauli(s, "Z", "t")
    return apply_pauli(s, "X", "t")


def q_prime_forward(state: TriModeState) -> TriModeState:
    s = apply_hadamard(apply_hadamard(state, "x"), "y")
    s = apply_cnot(apply_cnot(s, "t", "x"), "t", "y")
    s = apply_pbs_xy(s)
    return apply_cnot(apply_cnot(s, "t", "x"), "t", "y")


def q_prime_backward(state: TriModeState) -> TriModeState:
    s = apply_cnot(apply_cnot(state, "t", "y"), "t", "x")
    s = apply_pbs_xy(s)
    s = apply_cnot(apply_cnot(s, "t", "y"), "t", "x")
    return apply_hadamard(apply_hadamard(s, "x"), "y")


def encode(state: TriModeState, j: int) -> TriModeState:
    """Alice's encoding ``(iY)^j`` on the travel photon."""
    return apply_pauli(state, "iY" if j else "I", "t")


def initial_state(prep: PreparedState) -> TriModeState:
    """Bob's photon in ``t`` with Eve's ancillas ready in ``|vac>_x |0>_y``."""
    return product_state(prep.vector, VAC, POL0)


_FORWARD = {AttackKind.E1: q_forward, AttackKind.E2: q_forward, AttackKind.E3: q_prime_forward}


def _backward_branches(attack: AttackKind):
    if attack is AttackKind.E1:
        return [(1.0, q_backward)]
    if attack is AttackKind.E2:
        return [(0.5, q_backward), (0.5, lambda s: s_ty(q_backward(s)))]
    if attack is AttackKind.E3:
        return [(1.0, q_prime_backward)]
    raise ValueError(f"{attack.value} has no unitary pipeline")


# --------------------------------------------------------------------------
# Message mode
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    weight: float
    state: TriModeState


def run_message_mode(attack, prep: PreparedState, j: int) -> list:
    """Final states reaching Bob for ``E1``-``E3``, as weighted branches.

    ``E2`` yields two branches of weight 1/2 (without and with ``S_ty``).
    ``E4`` is a measurement attack; see :func:`intercept_resend_outcomes`.
    """
    attack = AttackKind.parse(attack)
    if attack is AttackKind.E4:
        raise ValueError("E4 has no final state; use intercept_resend_outcomes")
    ba = _FORWARD[attack](initial_state(prep))
    encoded = encode(ba, j)
    return [Branch(w, back(encoded)) for w, back in _backward_branches(attack)]


def eve_decode_rule(attack, outcome) -> int:
    """Eve's bit ``k`` from her measurement record.

    For ``E1``-``E3`` ``outcome`` is the ``(x, y)`` occupancy pair; for ``E4`` it
    is her two same-basis results ``(b1, b2)``.
    """
    attack = AttackKind.parse(attack)
    if attack is AttackKind.E4:
        b1, b2 = outcome
        return int(b1 != b2)
    x, y = (Occupancy(o) for o in outcome)
    if attack is AttackKind.E3:
        if (x, y) == (VAC, POL0):
            return 0
        if (x, y) == (POL0, VAC):
            return 1
        raise SimulationError(f"E3 ancilla outcome x={x}, y={y} is outside the decoding table")
    return 0 if (x, y) == (VAC, POL0) else 1


def bob_decode(state: TriModeState, prep: PreparedState) -> np.ndarray:
    """``[P(m=0), P(m=1)]`` for Bob's measurement of ``t`` in his preparation basis."""
    probs = np.zeros(2)
    for o in measure_polarization(state, "t", prep.basis):
        if not o.detected:
            if o.probability > TOL:
                raise SimulationError(f"photon missing from t with probability {o.probability}")
            continue
        probs[int(o.bit != prep.bit)] += o.probability
    return probs


def intercept_resend_outcomes(prep: PreparedState, j: int) -> list:
    """Enumerate one ``E4`` run: ``(probability, eve_basis, (b1, b2), m)`` records."""
    records = []
    start = product_state(prep.vector, VAC, VAC)
    for basis in Basis:
        for first in measure_polarization(start, "t", basis):
            encoded = encode(first.collapsed, j)
            for second in measure_polarization(encoded, "t", basis):
                bob = bob_decode(second.collapsed, prep)
                for m in (0, 1):
                    prob = 0.5 * first.probability * second.probability * bob[m]
                    if prob > 0:
                        records.append((prob, basis, (first.bit, second.bit), m))
    return records


@lru_cache(maxsize=None)
def _decoded_table(attack: AttackKind, prep: PreparedState, j: int) -> np.ndarray:
    table = np.zeros((2, 2))
    if attack is AttackKind.E4:
        for prob, _, bits, m in intercept_resend_outcomes(prep, j):
            table[m, eve_decode_rule(attack, bits)] += prob
    else:
        for br in run_message_mode(attack, prep, j):
            for anc in measure_occupancy_pair(br.state, min_prob=TOL):
                k = eve_decode_rule(attack, (anc.x, anc.y))
                table[:, k] += br.weight * anc.probability * bob_decode(anc.collapsed, prep)
    table.setflags(write=False)
    return table


def decoded_outcomes(attack, prep: PreparedState, j: int) -> np.ndarray:
    """``P(m, k | prep, j)`` as a 2x2 array indexed ``[m, k]``."""
    return _decoded_table(AttackKind.parse(attack), prep, int(j))


@lru_cache(maxsize=None)
def conditional_table(attack: AttackKind) -> np.ndarray:
    """All decoded tables stacked as ``[prep, j, m, k]``."""
    out = np.array([[_decoded_table(attack, prep, j) for j in (0, 1)] for prep in PREPS])
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """``p[j, m, k]``: Alice's bit, Bob's decoded bit, Eve's decoded bit."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.shape != (2, 2, 2):
            raise ValueError(f"joint table must be 2x2x2, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def __getitem__(self, jmk) -> float:
        return float(self.p[tuple(jmk)])

    @property
    def qber(self) -> float:
        return float(self.p[0, 1].sum() + self.p[1, 0].sum())

    def is_valid(self, atol: float = TOL) -> bool:
        return bool(np.all(self.p >= -atol) and abs(self.p.sum() - 1) <= atol)

    def as_dict(self) -> dict:
        return {f"p{j}{m}{k}": float(self.p[j, m, k]) for j in (0, 1) for m in (0, 1) for k in (0, 1)}


def joint_tables(attack, p, q) -> np.ndarray:
    """Vectorized joint: broadcast ``p``, ``q`` and return shape ``(..., 2, 2, 2)``."""
    attack = AttackKind.parse(attack)
    check_probability("p", p)
    check_probability("q", q)
    return np.einsum("...a,...j,ajmk->...jmk", prep_weights(p), bit_weights(q), conditional_table(attack))


def joint_distribution(attack, p: float, q: float) -> JointDistribution:
    return JointDistribution(joint_tables(attack, p, q))


def closed_form_tables(attack, p, q) -> np.ndarray:
    """The printed per-attack formulas for ``p_jmk``, vectorized like :func:`joint_tables`."""
    attack = AttackKind.parse(attack)
    check_probability("p", p)
    check_probability("q", q)
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    t = np.zeros(p.shape + (2, 2, 2))
    if attack is AttackKind.E1:
        t[..., 0, 0, 0] = q
        t[..., 1, 0, 0] = (1 - q) / 4
        t[..., 1, 0, 1] = (1 - q) * (0.25 + p / 2)
        t[..., 1, 1, 1] = (1 - p) * (1 - q) / 2
    elif attack is AttackKind.E2:
        t[..., 0, 0, 0] = q / 8 * (5 + p)
        t[..., 0, 0, 1] = q / 8 * (1 + p)
        t[..., 0, 1, 0] = q / 8 * (1 - p)
        t[..., 0, 1, 1] = q / 8 * (1 - p)
        t[..., 1, 0, 0] = (1 - q) / 4
        t[..., 1, 0, 1] = (1 - q) * (1 + 2 * p) / 4
        t[..., 1, 1, 1] = (1 - p) * (1 - q) / 2
    elif attack is AttackKind.E3:
        t[..., 0, 0, 0] = q
        t[..., 1, 1, 1] = 1 - q
    else:
        t[..., 0, 0, 0] = 0.75 * q
        t[..., 0, 1, 0] = 0.25 * q
        t[..., 1, 0, 1] = 0.25 * (1 - q)
        t[..., 1, 1, 1] = 0.75 * (1 - q)
    return t


def closed_form_joint(attack, p: float, q: float) -> JointDistribution:
    return JointDistribution(closed_form_tables(attack, p, q))


def qber(attack, p, q):
    """Message-mode error rate: the ``j != m`` mass of the simulated joint."""
    t = joint_tables(attack, p, q)
    out = t[..., 0, 1, :].sum(axis=-1) + t[..., 1, 0, :].sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def closed_form_qber(attack, p, q):
    attack = AttackKind.parse(attack)
    check_probability("p", p)
    check_probability("q", q)
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    if attack is AttackKind.E1:
        out = (1 - q) * (1 + p) / 2
    elif attack is AttackKind.E2:
        out = (2 + 2 * p - q - 3 * p * q) / 4
    elif attack is AttackKind.E3:
        out = np.zeros_like(p)
    else:
        out = np.full_like(p, 0.25)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Control mode
# --------------------------------------------------------------------------

# Per leg, Eve escapes only when her basis guess matches the check basis.
_E4_LEG_PASS = 0.5


def _pass_probability(state: TriModeState, prep: PreparedState):
    """Detection-conditioned outcomes of a check on ``t`` in the preparation basis."""
    outs = measure_polarization(state, "t", prep.basis)
    detected = sum(o.probability for o in outs if o.detected)
    if detected <= TOL:
        raise SimulationError("no photon left in t for the control check")
    return [(o.probability / detected, o.collapsed) for o in outs if o.detected and o.bit == prep.bit]


def control_mode_pass(attack, prep: PreparedState) -> float:
    """Probability that both control checks pass for one preparation.

    Alice checks ``t`` after Eve's first intervention and returns the projected
    photon; Bob checks it again after the second.  Each check is conditioned on
    a photon being present.  Alice's projection also settles Eve's ancillas into
    definite ``(x, y)`` occupancies, which is what the second intervention sees.
    """
    attack = AttackKind.parse(attack)
    if attack is AttackKind.E4:
        return _E4_LEG_PASS * _E4_LEG_PASS
    ba = _FORWARD[attack](initial_state(prep))
    total = 0.0
    for p_alice, after_alice in _pass_probability(ba, prep):
        for anc in measure_occupancy_pair(after_alice, min_prob=TOL):
            for w, back in _backward_branches(attack):
                p_bob = sum(p for p, _ in _pass_probability(back(anc.collapsed), prep))
                total += p_alice * anc.probability * w * p_bob
    return total


def control_mode_nondetection(attack) -> float:
    """``P_nd``: uniform average of :func:`control_mode_pass` over the four preparations."""
    return float(np.mean([control_mode_pass(attack, prep) for prep in PREPS]))


def detection_probability(attack) -> float:
    """``P_d = (1 - P_nd) / 2``; the half comes from the two-leg control check."""
    return (1 - control_mode_nondetection(attack)) / 2


_GATE_COUNTS = {
    AttackKind.E1: (1, 1, 1),
    AttackKind.E2: (4, 2, 1),
    AttackKind.E3: (2, 5, 0),
    AttackKind.E4: (2, 0, 0),
}


def gate_counts(attack) -> tuple:
    """Eve's ``(one-qubit, two-qubit, three-qubit)`` gate tally."""
    return _GATE_COUNTS[AttackKind.parse(attack)]


@dataclass(frozen=True)
class AttackMetrics:
    qber: float
    p_nd: float
    p_d: float
    gate_counts: tuple


@lru_cache(maxsize=None)
def _control_constants(attack: AttackKind) -> tuple:
    p_nd = control_mode_nondetection(attack)
    return p_nd, (1 - p_nd) / 2


def attack_metrics(attack, p: float, q: float) -> AttackMetrics:
    attack = AttackKind.parse(attack)
    p_nd, p_d = _control_constants(attack)
    return AttackMetrics(qber(attack, p, q), p_nd, p_d, gate_counts(attack))


def cached_detection_probability(attack) -> float:
    return _control_constants(AttackKind.parse(attack))[1]
