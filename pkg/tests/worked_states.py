"""Hand-derived intermediate states of every attack pipeline.

Each entry is ``(name, pipeline, expected_terms)`` where ``pipeline`` is a
zero-argument callable returning the simulated state and ``expected_terms``
is a list of ``(coefficient, t, x, y)`` with mode labels:

``v`` empty, ``0``/``1`` Z-basis photon, ``+``/``-`` X-basis photon,
``a`` = |0> + |1>, ``b`` = |0> - |1>, ``A`` = |+> + |->, ``B`` = |+> - |->
(all unnormalized).
"""
import numpy as np

from dl04game.attacks import PreparedState, encode, initial_state, q_backward, q_forward, q_prime_backward, q_prime_forward, s_ty
from dl04game.photonic_state import KET_0, KET_1, KET_MINUS, KET_PLUS, KET_VAC, TriModeState, product_state

R2 = np.sqrt(2.0)
_VEC = {
    "v": KET_VAC,
    "0": KET_0,
    "1": KET_1,
    "+": KET_PLUS,
    "-": KET_MINUS,
    "a": KET_0 + KET_1,
    "b": KET_0 - KET_1,
    "A": KET_PLUS + KET_MINUS,
    "B": KET_PLUS - KET_MINUS,
}


def build(terms) -> TriModeState:
    amps = np.zeros((3, 3, 3), dtype=complex)
    for c, t, x, y in terms:
        amps = amps + c * product_state(_VEC[t], _VEC[x], _VEC[y]).amplitudes
    return TriModeState(amps)


def ket(t, x, y) -> TriModeState:
    return build([(1, t, x, y)])


def e1(prep, j):
    return lambda: q_backward(encode(q_forward(initial_state(prep)), j))


def e2_s(prep, j):
    return lambda: s_ty(q_backward(encode(q_forward(initial_state(prep)), j)))


def e3(prep, j):
    return lambda: q_prime_backward(encode(q_prime_forward(initial_state(prep)), j))


def on(gate, t, x, y):
    return lambda: gate(ket(t, x, y))


def s_after_q_backward(state):
    return s_ty(q_backward(state))


Z, O, P, M = PreparedState.ZERO, PreparedState.ONE, PreparedState.PLUS, PreparedState.MINUS
h = 1 / (2 * R2)

WORKED_STATES = [
    # E1, message mode
    ("Final_State_Bob_Zero_Alice_Zero_E1", e1(Z, 0), [(1, "0", "v", "0")]),
    ("Final_State_Bob_One_Alice_Zero_E1", e1(O, 0), [(1, "1", "v", "0")]),
    ("Final_State_Bob_Plus_Alice_Zero_E1", e1(P, 0), [(1, "+", "v", "0")]),
    ("Final_State_Bob_Minus_Alice_Zero_E1", e1(M, 0), [(1, "-", "v", "0")]),
    ("Final_State_Bob_Zero_Alice_One", e1(Z, 1), [(-1 / R2, "0", "1", "v"), (0.5, "0", "v", "0"), (-0.5, "0", "v", "1")]),
    ("Final_State_Bob_One_Alice_One", e1(O, 1), [(1 / R2, "1", "0", "v"), (0.5, "1", "v", "0"), (0.5, "1", "v", "1")]),
    (
        "Final_State_Bob_Plus_Alice_One",
        e1(P, 1),
        [(0.5, "+", "v", "0"), (-0.5, "-", "v", "1"), (-h, "+", "1", "v"), (-h, "-", "1", "v"), (h, "+", "0", "v"), (-h, "-", "0", "v")],
    ),
    (
        "Final_State_Bob_Minus_Alice_One",
        e1(M, 1),
        [(0.5, "-", "v", "0"), (-0.5, "+", "v", "1"), (-h, "+", "1", "v"), (-h, "-", "1", "v"), (-h, "+", "0", "v"), (h, "-", "0", "v")],
    ),
    # E1, control mode
    ("Control_Bob_Zero_State_Zero_Zero_Empty", on(q_backward, "0", "0", "v"), [(1 / R2, "0", "v", "0"), (1 / R2, "0", "v", "1")]),
    ("Control_Bob_One_State_One_One_Empty", on(q_backward, "1", "1", "v"), [(1 / R2, "1", "v", "0"), (-1 / R2, "1", "v", "1")]),
    ("Control_Bob_Plus_State_Plus_Zero_Empty", on(q_backward, "+", "0", "v"), [(1 / 2, "0", "v", "a"), (1 / R2, "0", "1", "v")]),
    ("Control_Bob_Plus_State_Plus_One_Empty", on(q_backward, "+", "1", "v"), [(1 / 2, "1", "v", "b"), (1 / R2, "1", "0", "v")]),
    ("Control_Bob_Plus_State_Minus_Zero_Empty", on(q_backward, "-", "0", "v"), [(1 / 2, "0", "v", "a"), (-1 / R2, "0", "1", "v")]),
    ("Control_Bob_Plus_State_Minus_One_Empty", on(q_backward, "-", "1", "v"), [(-1 / 2, "1", "v", "b"), (1 / R2, "1", "0", "v")]),
    # E2, message mode (S branch)
    ("Final_State_Bob_Zero_Alice_Zero_E2", e2_s(Z, 0), [(-1, "0", "v", "0")]),
    ("Final_State_Bob_One_Alice_Zero_E2", e2_s(O, 0), [(1, "1", "v", "0")]),
    (
        "Final_State_Bob_Plus_Alice_Zero_E2",
        e2_s(P, 0),
        [(-0.5, "+", "v", "1"), (-0.5, "-", "v", "1"), (0.5, "+", "v", "0"), (-0.5, "-", "v", "0")],
    ),
    (
        "Final_State_Bob_Minus_Alice_Zero_E2",
        e2_s(M, 0),
        [(-0.5, "+", "v", "1"), (-0.5, "-", "v", "1"), (-0.5, "+", "v", "0"), (0.5, "-", "v", "0")],
    ),
    ("Final_State_Bob_Zero_Alice_One_E2", e2_s(Z, 1), [(1 / R2, "0", "1", "v"), (-0.5, "0", "v", "1"), (0.5, "0", "v", "0")]),
    ("Final_State_Bob_One_Alice_One_E2", e2_s(O, 1), [(1 / R2, "1", "0", "v"), (0.5, "1", "v", "0"), (0.5, "1", "v", "1")]),
    (
        "Final_State_Bob_Plus_Alice_One_E2",
        e2_s(P, 1),
        [(-0.5, "-", "v", "1"), (0.5, "+", "v", "0"), (h, "-", "1", "v"), (h, "+", "1", "v"), (-h, "-", "0", "v"), (h, "+", "0", "v")],
    ),
    (
        "Final_State_Bob_Minus_Alice_One_E2",
        e2_s(M, 1),
        [(-0.5, "+", "v", "1"), (0.5, "-", "v", "0"), (h, "-", "1", "v"), (h, "+", "1", "v"), (h, "-", "0", "v"), (-h, "+", "0", "v")],
    ),
    # E2, control mode
    ("Control_E2_Bob_Zero_State_Zero_Zero_Empty", on(s_after_q_backward, "0", "0", "v"), [(-1 / R2, "0", "v", "1"), (-1 / R2, "0", "v", "0")]),
    ("Control_E2_Bob_One_State_One_One_Empty", on(s_after_q_backward, "1", "1", "v"), [(1 / R2, "1", "v", "0"), (-1 / R2, "1", "v", "1")]),
    (
        "Control_E2_Bob_Plus_State_Plus_Zero_Empty",
        on(s_after_q_backward, "+", "0", "v"),
        [(-0.5, "0", "v", "1"), (-0.5, "0", "v", "0"), (-1 / R2, "0", "1", "v")],
    ),
    (
        "Control_E2_Bob_Plus_State_Plus_One_Empty",
        on(s_after_q_backward, "+", "1", "v"),
        [(0.5, "1", "v", "0"), (0.5, "1", "v", "1"), (1 / R2, "1", "0", "v")],
    ),
    (
        "Control_E2_Bob_Plus_State_Minus_Zero_Empty",
        on(s_after_q_backward, "-", "0", "v"),
        [(-h, "+", "v", "1"), (-h, "-", "v", "1"), (-h, "+", "v", "0"), (-h, "-", "v", "0"), (0.5, "+", "1", "v"), (0.5, "-", "1", "v")],
    ),
    (
        "Control_E2_Bob_Plus_State_Minus_One_Empty",
        on(s_after_q_backward, "-", "1", "v"),
        [(-h, "+", "v", "0"), (h, "-", "v", "0"), (h, "+", "v", "1"), (-h, "-", "v", "1"), (0.5, "+", "0", "v"), (-0.5, "-", "0", "v")],
    ),
    # E3, message mode
    ("Final_State_Bob_Zero_Alice_One_E3", e3(Z, 1), [(-1, "1", "0", "v")]),
    ("Final_State_Bob_One_Alice_One_E3", e3(O, 1), [(1, "0", "0", "v")]),
    ("Final_State_Bob_Plus_Alice_One_E3", e3(P, 1), [(1, "-", "0", "v")]),
    ("Final_State_Bob_Minus_Alice_One_E3", e3(M, 1), [(-1, "+", "0", "v")]),
    ("Final_State_Bob_Zero_Alice_Zero_E3", e3(Z, 0), [(1, "0", "v", "0")]),
    ("Final_State_Bob_One_Alice_Zero_E3", e3(O, 0), [(1, "1", "v", "0")]),
    ("Final_State_Bob_Plus_Alice_Zero_E3", e3(P, 0), [(1, "+", "v", "0")]),
    ("Final_State_Bob_Minus_Alice_Zero_E3", e3(M, 0), [(1, "-", "v", "0")]),
    # E3, control mode
    ("Control_E3_Bob_Zero_State[0,0,v]", on(q_prime_backward, "0", "0", "v"), [(1 / R2, "0", "v", "0"), (1 / R2, "0", "v", "1")]),
    ("Control_E3_Bob_Zero_State[0,v,1]", on(q_prime_backward, "0", "v", "1"), [(1 / R2, "0", "v", "0"), (-1 / R2, "0", "v", "1")]),
    ("Control_E3_Bob_One_State[1,v,0]", on(q_prime_backward, "1", "v", "0"), [(1 / R2, "1", "v", "0"), (1 / R2, "1", "v", "1")]),
    ("Control_E3_Bob_One_State[1,1,v]", on(q_prime_backward, "1", "1", "v"), [(1 / R2, "1", "v", "0"), (-1 / R2, "1", "v", "1")]),
    ("Control_E3_Bob_Plus_State[+,0,v]", on(q_prime_backward, "+", "0", "v"), [(h, "A", "v", "a"), (h, "B", "a", "v")]),
    ("Control_E3_Bob_Plus_State[+,v,1]", on(q_prime_backward, "+", "v", "1"), [(h, "A", "v", "b"), (h, "B", "b", "v")]),
    ("Control_E3_Bob_Plus_State[+,v,0]", on(q_prime_backward, "+", "v", "0"), [(h, "A", "a", "v"), (h, "B", "v", "a")]),
    ("Control_E3_Bob_Plus_State[+,1,v]", on(q_prime_backward, "+", "1", "v"), [(h, "A", "b", "v"), (h, "B", "v", "b")]),
    ("Control_E3_Bob_Plus_State[-,0,v]", on(q_prime_backward, "-", "0", "v"), [(h, "A", "v", "a"), (-h, "B", "a", "v")]),
    ("Control_E3_Bob_Plus_State[-,v,1]", on(q_prime_backward, "-", "v", "1"), [(h, "A", "v", "b"), (-h, "B", "b", "v")]),
    ("Control_E3_Bob_Plus_State[-,v,0]", on(q_prime_backward, "-", "v", "0"), [(h, "A", "a", "v"), (-h, "B", "v", "a")]),
    ("Control_E3_Bob_Plus_State[-,1,v]", on(q_prime_backward, "-", "1", "v"), [(h, "A", "b", "v"), (-h, "B", "v", "b")]),
]

# Worked states that contradict the gate definitions used everywhere else,
# mapped to what those definitions give.  The first drops the CNOT flip of
# S_ty on |1,vac,0>.
CONFLICTING = {
    "Final_State_Bob_Zero_Alice_Zero_E2": [(-1, "0", "v", "1")],
    # the hand derivation loses the minus sign of its own input state
    "Control_E2_Bob_Plus_State_Plus_One_Empty": [(0.5, "1", "v", "0"), (-0.5, "1", "v", "1"), (1 / R2, "1", "0", "v")],
}
