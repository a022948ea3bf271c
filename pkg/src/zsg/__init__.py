"""Learning pure equilibria in zero-sum matrix games from bandit feedback."""
from __future__ import annotations

from .matrix_game import (
    GapProfile,
    MinimaxSolverError,
    MixedProfile,
    NoPureEquilibriumError,
    PayoffMatrix,
    PureEquilibrium,
    compute_gaps,
    eps_ne_satisfied,
    find_pure_ne,
    joint_probabilities,
    solve_minimax,
)

__version__ = "0.1.0"
