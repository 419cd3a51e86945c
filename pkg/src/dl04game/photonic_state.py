"""Exact state vectors for one travel mode ``t`` and two ancilla modes ``x``, ``y``.

Each mode is a three-level system: empty (``VAC``) or one photon with
polarization 0 or 1.  A state is a dense complex array of shape ``(3, 3, 3)``
indexed ``[t, x, y]``, so the full space has 27 basis kets.

Every gate acts as the identity on empty modes.  Multi-mode gates are
permutations of the 27 kets and are built once at import time.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from itertools import product
from typing import Callable, Iterable, Optional

import numpy as np

TOL = 1e-12
_SQRT1_2 = 1 / np.sqrt(2)


class Occupancy(IntEnum):
    VAC = 0
    POL0 = 1
    POL1 = 2

    @property
    def bit(self) -> Optional[int]:
        return None if self is Occupancy.VAC else int(self) - 1

    @classmethod
    def from_bit(cls, bit: int) -> "Occupancy":
        return cls(bit + 1)

    def __str__(self) -> str:
        return "vac" if self is Occupancy.VAC else str(self.bit)


VAC, POL0, POL1 = Occupancy.VAC, Occupancy.POL0, Occupancy.POL1


class Mode(str, Enum):
    T = "t"
    X = "x"
    Y = "y"

    @property
    def axis(self) -> int:
        return "txy".index(self.value)


class Basis(str, Enum):
    Z = "Z"
    X = "X"


class Pauli(str, Enum):
    I = "I"
    X = "X"
    Z = "Z"
    IY = "iY"


BasisKet = tuple  # (t, x, y) of Occupancy

ALL_KETS: tuple = tuple(
    (Occupancy(t), Occupancy(x), Occupancy(y)) for t, x, y in product(range(3), repeat=3)
)


@dataclass(frozen=True, eq=False)
class TriModeState:
    """Immutable amplitude array over the 27 kets ``|t, x, y>``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (3, 3, 3):
            raise ValueError(f"expected shape (3, 3, 3), got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __getitem__(self, ket) -> complex:
        return complex(self.amplitudes[tuple(int(o) for o in ket)])

    def __add__(self, other: "TriModeState") -> "TriModeState":
        return TriModeState(self.amplitudes + other.amplitudes)

    def __sub__(self, other: "TriModeState") -> "TriModeState":
        return TriModeState(self.amplitudes - other.amplitudes)

    def __mul__(self, c: complex) -> "TriModeState":
        return TriModeState(self.amplitudes * c)

    __rmul__ = __mul__

    def __neg__(self) -> "TriModeState":
        return TriModeState(-self.amplitudes)

    def __truediv__(self, c: complex) -> "TriModeState":
        return TriModeState(self.amplitudes / c)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def normalized(self) -> "TriModeState":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return self / n

    def allclose(self, other: "TriModeState", atol: float = TOL) -> bool:
        return bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))

    def equal_up_to_phase(self, other: "TriModeState", atol: float = TOL) -> bool:
        overlap = np.vdot(other.amplitudes, self.amplitudes)
        if abs(overlap) < atol:
            return self.norm < atol and other.norm < atol
        phase = overlap / abs(overlap)
        return bool(np.allclose(self.amplitudes, phase * other.amplitudes, rtol=0, atol=atol))

    def terms(self, atol: float = TOL) -> dict:
        """Non-negligible amplitudes keyed by ket, handy for debugging."""
        return {ket: self[ket] for ket in ALL_KETS if abs(self[ket]) > atol}

    def __repr__(self) -> str:
        parts = [f"({a.real:+.6g}{a.imag:+.6g}j)|{t},{x},{y}>" for (t, x, y), a in self.terms().items()]
        return "TriModeState(" + " ".join(parts) + ")"


def zero_state() -> TriModeState:
    return TriModeState(np.zeros((3, 3, 3), dtype=complex))


def basis_state(ket) -> TriModeState:
    amps = np.zeros((3, 3, 3), dtype=complex)
    amps[tuple(int(o) for o in ket)] = 1.0
    return TriModeState(amps)


def product_state(t, x, y) -> TriModeState:
    """Tensor product of three single-mode vectors over ``(vac, 0, 1)``.

    Each argument is either an :class:`Occupancy` or a length-3 amplitude vector.
    """
    vecs = []
    for v in (t, x, y):
        if isinstance(v, Occupancy):
            e = np.zeros(3, dtype=complex)
            e[int(v)] = 1.0
            vecs.append(e)
        else:
            vecs.append(np.asarray(v, dtype=complex))
    return TriModeState(np.einsum("i,j,k->ijk", *vecs))


# single-mode vectors over (vac, 0, 1)
KET_VAC = np.array([1, 0, 0], dtype=complex)
KET_0 = np.array([0, 1, 0], dtype=complex)
KET_1 = np.array([0, 0, 1], dtype=complex)
KET_PLUS = (KET_0 + KET_1) * _SQRT1_2
KET_MINUS = (KET_0 - KET_1) * _SQRT1_2


def _embed(m2: np.ndarray) -> np.ndarray:
    # 2x2 polarization operator -> 3x3 operator that leaves vac alone
    m3 = np.eye(3, dtype=complex)
    m3[1:, 1:] = m2
    return m3


_HADAMARD = _embed(np.array([[1, 1], [1, -1]]) * _SQRT1_2)
_PAULI = {
    Pauli.I: _embed(np.eye(2)),
    Pauli.X: _embed(np.array([[0, 1], [1, 0]])),
    Pauli.Z: _embed(np.array([[1, 0], [0, -1]])),
    # iY = Z X: |0> -> -|1>, |1> -> |0>
    Pauli.IY: _embed(np.array([[0, 1], [-1, 0]])),
}


def apply_single(state: TriModeState, op3: np.ndarray, mode) -> TriModeState:
    """Apply a 3x3 single-mode operator to ``mode``."""
    axis = Mode(mode).axis
    out = np.moveaxis(np.tensordot(op3, state.amplitudes, axes=([1], [axis])), 0, axis)
    return TriModeState(out)


def apply_hadamard(state: TriModeState, mode) -> TriModeState:
    return apply_single(state, _HADAMARD, mode)


def apply_pauli(state: TriModeState, op, mode) -> TriModeState:
    return apply_single(state, _PAULI[Pauli(op)], mode)


def _permutation(rule: Callable) -> np.ndarray:
    """Flat index map ``src -> dst`` for a ket-level rule; checks it is a bijection."""
    dst = np.empty(27, dtype=int)
    for ket in ALL_KETS:
        dst[np.ravel_multi_index(tuple(int(o) for o in ket), (3, 3, 3))] = np.ravel_multi_index(
            tuple(int(o) for o in rule(ket)), (3, 3, 3)
        )
    if sorted(dst) != list(range(27)):
        raise AssertionError("gate rule is not a permutation of basis kets")
    return dst


def _apply_permutation(state: TriModeState, dst: np.ndarray) -> TriModeState:
    flat = state.amplitudes.reshape(27)
    out = np.zeros(27, dtype=complex)
    out[dst] = flat
    return TriModeState(out.reshape(3, 3, 3))


def _swap_tx_rule(ket):
    t, x, y = ket
    return (x, t, y)


def _route_xy(x, y, pol):
    # move a lone photon of polarization `pol` between x and y; anything else stays
    if x == pol and y == VAC:
        return VAC, pol
    if x == VAC and y == pol:
        return pol, VAC
    return x, y


def _cpbs_rule(ket):
    t, x, y = ket
    if t == VAC:
        return ket
    return (t, *_route_xy(x, y, t))


def _pbs_xy_rule(ket):
    t, x, y = ket
    return (t, *_route_xy(x, y, POL0))


_SWAP_TX = _permutation(_swap_tx_rule)
_CPBS = _permutation(_cpbs_rule)
_PBS_XY = _permutation(_pbs_xy_rule)


def apply_swap_tx(state: TriModeState) -> TriModeState:
    return _apply_permutation(state, _SWAP_TX)


def apply_cpbs(state: TriModeState) -> TriModeState:
    """Controlled PBS: the polarization held in ``t`` selects which photon hops x<->y.

    With ``t = c`` a lone polarization-``c`` photon in ``x`` or ``y`` moves to
    the other mode; orthogonally polarized photons stay put.  Kets with an
    empty ``t`` or with both ancillas occupied are left unchanged.
    """
    return _apply_permutation(state, _CPBS)


def apply_pbs_xy(state: TriModeState) -> TriModeState:
    """Polarizing beam splitter between ``x`` and ``y``: polarization 0 crosses over."""
    return _apply_permutation(state, _PBS_XY)


_CNOT_CACHE: dict = {}


def apply_cnot(state: TriModeState, control, target) -> TriModeState:
    """Flip the polarization of ``target`` when ``control`` holds polarization 1."""
    c, tg = Mode(control), Mode(target)
    if c == tg:
        raise ValueError("control and target must be different modes")
    if (c, tg) not in _CNOT_CACHE:

        def rule(ket):
            ket = list(ket)
            if ket[c.axis] == POL1 and ket[tg.axis] != VAC:
                ket[tg.axis] = POL1 if ket[tg.axis] == POL0 else POL0
            return tuple(ket)

        _CNOT_CACHE[(c, tg)] = _permutation(rule)
    return _apply_permutation(state, _CNOT_CACHE[(c, tg)])


@dataclass(frozen=True)
class MeasurementOutcome:
    detected: bool
    bit: Optional[int]
    collapsed: Optional[TriModeState]
    probability: float


def _project(state: TriModeState, axis: int, vec: np.ndarray) -> TriModeState:
    # |vec><vec| on one mode
    proj = np.outer(vec, vec.conj())
    return TriModeState(np.moveaxis(np.tensordot(proj, state.amplitudes, axes=([1], [axis])), 0, axis))


def _outcome(state: TriModeState, projected: TriModeState, **kw) -> MeasurementOutcome:
    prob = projected.norm ** 2
    collapsed = projected / np.sqrt(prob) if prob > 0 else None
    return MeasurementOutcome(collapsed=collapsed, probability=float(prob), **kw)


def measure_polarization(state: TriModeState, mode, basis=Basis.Z, *, min_prob: float = 0.0) -> list:
    """Projective measurement of one mode: no photon, bit 0 or bit 1 in ``basis``.

    Outcomes with probability ``<= min_prob`` are dropped.
    """
    axis = Mode(mode).axis
    b0, b1 = (KET_0, KET_1) if Basis(basis) is Basis.Z else (KET_PLUS, KET_MINUS)
    outcomes = [
        _outcome(state, _project(state, axis, KET_VAC), detected=False, bit=None),
        _outcome(state, _project(state, axis, b0), detected=True, bit=0),
        _outcome(state, _project(state, axis, b1), detected=True, bit=1),
    ]
    return [o for o in outcomes if o.probability > min_prob]


@dataclass(frozen=True)
class PairOutcome:
    x: Occupancy
    y: Occupancy
    collapsed: TriModeState
    probability: float


def measure_occupancy_pair(state: TriModeState, *, min_prob: float = 0.0) -> list:
    """Joint {vac, 0, 1} measurement of the ancilla modes ``x`` and ``y``."""
    amps = state.amplitudes
    out = []
    for x, y in product(Occupancy, repeat=2):
        projected = np.zeros_like(amps)
        projected[:, int(x), int(y)] = amps[:, int(x), int(y)]
        prob = float(np.sum(np.abs(projected) ** 2))
        if prob > min_prob:
            out.append(PairOutcome(x, y, TriModeState(projected / np.sqrt(prob)), prob))
    return out


def sequence(*gates: Callable) -> Callable:
    """Compose gates left to right: ``sequence(a, b)(s) == b(a(s))``."""

    def run(state: TriModeState) -> TriModeState:
        for g in gates:
            state = g(state)
        return state

    return run


def superpose(terms: Iterable) -> TriModeState:
    """Build a state from ``(amplitude, (t, x, y))`` pairs where each entry is an
    :class:`Occupancy` or a single-mode vector."""
    acc = zero_state()
    for amp, (t, x, y) in terms:
        acc = acc + amp * product_state(t, x, y)
    return acc
