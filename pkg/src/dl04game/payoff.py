"""Three-party payoffs built from mutual information, QBER, detection and gate cost."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .attacks import AttackKind, cached_detection_probability, check_probability, gate_counts, joint_tables
from .infotheory import mutual_information

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class PayoffWeights:
    """Component weights.  ``w_a..w_d`` weight the legitimate parties' terms and
    ``w_e..w_k`` Eve's; each group sums to one.

    ``w_i, w_j, w_k`` multiply raw gate counts, so they mix units with the
    information terms measured in bits.
    """

    w_a: float = 0.25
    w_b: float = 0.25
    w_c: float = 0.25
    w_d: float = 0.25
    w_e: float = 0.25
    w_f: float = 0.25
    w_g: float = 0.25
    w_h: float = 0.25
    w_i: float = 0.0
    w_j: float = 0.0
    w_k: float = 0.0

    def __post_init__(self):
        values = asdict(self)
        bad = [k for k, v in values.items() if not np.isfinite(v) or v < 0]
        if bad:
            raise ValueError(f"weights must be finite and non-negative: {bad}")
        legit = self.w_a + self.w_b + self.w_c + self.w_d
        eve = self.w_e + self.w_f + self.w_g + self.w_h + self.w_i + self.w_j + self.w_k
        if abs(legit - 1) > WEIGHT_TOL or abs(eve - 1) > WEIGHT_TOL:
            raise ValueError(f"weight groups must each sum to 1 (got {legit!r} and {eve!r})")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "PayoffWeights":
        unknown = set(mapping) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown weight names: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in mapping.items()})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_WEIGHTS = PayoffWeights()


@dataclass(frozen=True)
class PayoffVector:
    alice: float
    bob: float
    eve: float

    def as_dict(self) -> dict:
        return asdict(self)


def payoff_components(attack, p, q) -> dict:
    """The ingredients every payoff is built from, evaluated (vectorized) at ``(p, q)``."""
    attack = AttackKind.parse(attack)
    t = joint_tables(attack, p, q)
    qb = t[..., 0, 1, :].sum(axis=-1) + t[..., 1, 0, :].sum(axis=-1)
    return {
        "I_AB": mutual_information(t, "AB"),
        "I_AE": mutual_information(t, "AE"),
        "I_BE": mutual_information(t, "BE"),
        "qber": qb,
        "p_d": cached_detection_probability(attack),
        "gates": gate_counts(attack),
    }


def payoff_arrays(attack, p, q, weights: PayoffWeights = None) -> tuple:
    """``(alice, bob, eve)`` payoffs; with ``weights=None`` the equal-weight form."""
    c = payoff_components(attack, p, q)
    alarm = (c["p_d"] + c["qber"]) / 2
    if weights is None:
        alice = 0.25 * (c["I_AB"] - c["I_AE"] - c["I_BE"] + alarm)
        eve = 0.25 * (-c["I_AB"] + c["I_AE"] + c["I_BE"] + 1 - alarm)
        return alice, alice, eve
    w = weights
    n1, n2, n3 = c["gates"]
    alice = w.w_a * c["I_AB"] - w.w_b * c["I_AE"] - w.w_c * c["I_BE"] + w.w_d * alarm
    bob = w.w_a * c["I_AB"] - w.w_c * c["I_AE"] - w.w_b * c["I_BE"] + w.w_d * alarm
    eve = (
        -w.w_e * c["I_AB"]
        + w.w_f * c["I_AE"]
        + w.w_g * c["I_BE"]
        + w.w_h * (1 - alarm)
        - w.w_i * n1
        - w.w_j * n2
        - w.w_k * n3
    )
    return alice, bob, eve


def payoff_general(attack, p: float, q: float, weights: PayoffWeights) -> PayoffVector:
    if not isinstance(weights, PayoffWeights):
        raise TypeError("weights must be a PayoffWeights instance")
    check_probability("p", p)
    check_probability("q", q)
    return PayoffVector(*(float(v) for v in payoff_arrays(attack, p, q, weights)))


def payoff_default(attack, p: float, q: float) -> PayoffVector:
    check_probability("p", p)
    check_probability("q", q)
    return PayoffVector(*(float(v) for v in payoff_arrays(attack, p, q)))
