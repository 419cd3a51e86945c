"""Walk one photon through each eavesdropping attack and show what everyone learns.

Run:  python3 demos/attack_tour.py
"""
from dl04game.attacks import (
    ATTACKS,
    PreparedState,
    attack_metrics,
    initial_state,
    joint_distribution,
    q_forward,
    run_message_mode,
)
from dl04game.infotheory import information_terms
from dl04game.payoff import payoff_default

P, Q = 0.5, 0.5

print("Bob sends |0> in the travel mode; Eve's ancillas start as |vac>_x |0>_y.")
start = initial_state(PreparedState.ZERO)
print("  before Eve:", start)
print("  after Eve's forward unitary:", q_forward(start))
print()

print("Alice flips the bit (iY). What reaches Bob after Eve's return unitary:")
for br in run_message_mode("E1", PreparedState.ZERO, 1):
    print("  E1:", br.state)
print()

print(f"Joint p[j, m, k] and derived quantities at p={P}, q={Q}")
for attack in ATTACKS:
    joint = joint_distribution(attack, P, Q)
    info = information_terms(joint)
    m = attack_metrics(attack, P, Q)
    pay = payoff_default(attack, P, Q)
    nonzero = {k: round(v, 4) for k, v in joint.as_dict().items() if v > 1e-12}
    print(f"  {attack.value}: {nonzero}")
    print(
        f"      QBER {m.qber:.4f}  P_d {m.p_d:.4f}  gates {m.gate_counts}  "
        f"I(A,B) {info['AB']:.3f}  I(A,E) {info['AE']:.3f}  I(B,E) {info['BE']:.3f}"
    )
    print(f"      payoffs: alice=bob {pay.alice:+.4f}, eve {pay.eve:+.4f}")
print()
print("E3 leaves no bit errors at all, which is why it sets the zero lower bound on QBER.")
