"""Game-theoretic security analysis of a two-way photonic direct-communication
protocol under four eavesdropping attacks."""

__version__ = "0.1.0"

from .attacks import AttackKind, PreparedState, SimulationError, joint_distribution, qber
from .equilibrium import Scenario, StrategyProfile, find_equilibria, verify_point
from .payoff import PayoffVector, PayoffWeights, payoff_default, payoff_general

__all__ = [
    "AttackKind",
    "PayoffVector",
    "PayoffWeights",
    "PreparedState",
    "Scenario",
    "SimulationError",
    "StrategyProfile",
    "find_equilibria",
    "joint_distribution",
    "payoff_default",
    "payoff_general",
    "qber",
    "verify_point",
]
