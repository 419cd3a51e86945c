"""Entropies and mutual information over ``p[j, m, k]`` tables (bits).

All functions accept a single 2x2x2 table or a stack of them with shape
``(..., 2, 2, 2)``; the party axes are always the last three.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .attacks import AttackKind, JointDistribution

# Alice's bit j, Bob's decode m, Eve's decode k
PARTY_AXIS = {"A": 0, "B": 1, "E": 2}


class PairSelector(str, Enum):
    AB = "AB"
    AE = "AE"
    BE = "BE"


def shannon_term(x):
    """``-x log2 x`` with ``0 log 0 = 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1e-15) or np.any(arr > 1 + 1e-15) or not np.all(np.isfinite(arr)):
        raise ValueError(f"probability outside [0, 1]: {x!r}")
    arr = np.clip(arr, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(arr > 0, -arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def _table(joint) -> np.ndarray:
    return joint.p if isinstance(joint, JointDistribution) else np.asarray(joint, dtype=float)


def _marginal(t: np.ndarray, keep: str) -> np.ndarray:
    drop = tuple(-3 + PARTY_AXIS[p] for p in "ABE" if p not in keep)
    return t.sum(axis=drop) if drop else t


def entropy(joint, parties: str = "ABE"):
    """Joint Shannon entropy of the named parties, e.g. ``entropy(t, "AE")``."""
    m = _marginal(_table(joint), parties)
    n = len(parties)
    out = shannon_term(m).reshape(m.shape[: m.ndim - n] + (-1,)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def conditional_entropy(joint, target: str, condition: str):
    """``H(target | condition) = H(target, condition) - H(condition)``."""
    return entropy(joint, "".join(sorted(target + condition, key="ABE".index))) - entropy(joint, condition)


def mutual_information(joint, pair):
    """``I(X, Y) = H(X) + H(Y) - H(X, Y)`` from the marginals of the joint table."""
    a, b = PairSelector(pair).value
    return entropy(joint, a) + entropy(joint, b) - entropy(joint, a + b)


def information_terms(joint) -> dict:
    return {pair.value: mutual_information(joint, pair) for pair in PairSelector}


def closed_form_information(attack, p: float, q: float) -> dict:
    """Per-attack closed forms for ``I(A,B)``, ``I(A,E)``, ``I(B,E)``.

    These are transcribed expressions kept as an independent check on
    :func:`mutual_information`.  The ``E2`` ``H(B)`` argument uses
    ``(2 + 2p + q - pq)/4``, the complement of ``P(m=1) = (1-p)(2-q)/4``.
    """
    h = shannon_term
    attack = AttackKind.parse(attack)
    if attack is AttackKind.E1:
        h_b_given_a = (1 - q) * (h((1 - p) / 2) + h((1 + p) / 2))
        h_b = h(q + (1 - q) * (1 + p) / 2) + h((1 - p) * (1 - q) / 2)
        h_a = h(q) + h(1 - q)
        h_a_given_e = 0.0
        if q > 0:
            s = 1 + 3 * q
            h_a_given_e = s / 4 * (h(4 * q / s) + h((1 - q) / s))
        h_b_alt = h((p + q - p * q + 1) / 2) + h((1 - p) * (1 - q) / 2)
        h_b_given_e = 0.75 * (1 - q) * (h((1 + 2 * p) / 3) + h(2 * (1 - p) / 3))
        return {
            "AB": h_b - h_b_given_a,
            "AE": h_a - h_a_given_e,
            "BE": h_b_alt - h_b_given_e,
        }
    if attack is AttackKind.E2:
        h_b_given_a = q * (h((3 + p) / 4) + h((1 - p) / 4)) + (1 - q) * (h((1 + p) / 2) + h((1 - p) / 2))
        s0 = 2 + 2 * p + q - p * q
        s1 = (1 - p) * (2 - q)
        h_b = h(s0 / 4) + h(s1 / 4)
        h_e = h((1 + 2 * q) / 4) + h((3 - 2 * q) / 4)
        h_e_given_a = h(0.25) + h(0.75)
        h_e_given_b = s0 / 4 * (h((2 + 3 * q + p * q) / (2 * s0)) + h((2 + 4 * p - q - 3 * p * q) / (2 * s0)))
        if s1 > 0:
            h_e_given_b += s1 / 4 * (h(q / (2 * (2 - q))) + h((4 - 3 * q) / (2 * (2 - q))))
        return {
            "AB": h_b - h_b_given_a,
            "AE": h_e - h_e_given_a,
            "BE": h_e - h_e_given_b,
        }
    if attack is AttackKind.E3:
        h_a = h(q) + h(1 - q)
        return {"AB": h_a, "AE": h_a, "BE": h_a}
    h_b = h((1 + 2 * q) / 4) + h((3 - 2 * q) / 4)
    h_quarter = h(0.25) + h(0.75)
    return {"AB": h_b - h_quarter, "AE": h(q) + h(1 - q), "BE": h_b - h_quarter}
