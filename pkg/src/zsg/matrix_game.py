"""Two-player zero-sum matrix games.

The row player picks i and receives A(i, j), the column player picks j and
pays it. This module holds the game representation plus the equilibrium
machinery everything else builds on: pure saddle points, per-pair gap
profiles, approximate-equilibrium tests, and an exact minimax LP solver.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

EQ_TOL = 1e-9        # equality comparisons on derived quantities
RESIDUAL_TOL = 1e-7  # minimax optimality residuals

__all__ = [
    "EQ_TOL",
    "RESIDUAL_TOL",
    "NoPureEquilibriumError",
    "MinimaxSolverError",
    "PayoffMatrix",
    "PureEquilibrium",
    "MixedProfile",
    "GapProfile",
    "find_pure_ne",
    "compute_gaps",
    "eps_ne_satisfied",
    "solve_minimax",
    "joint_probabilities",
]


class NoPureEquilibriumError(ValueError):
    """Raised when a quantity that needs a pure saddle point is requested."""


class MinimaxSolverError(RuntimeError):
    """Raised when the minimax LP cannot be solved to tolerance."""


def _entries(matrix) -> np.ndarray:
    """Coerce a PayoffMatrix or array-like to a validated 2-d float array."""
    if isinstance(matrix, PayoffMatrix):
        return matrix.values
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"payoff matrix must be 2-d and non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("payoff matrix entries must be finite")
    return a


class PayoffMatrix:
    """Immutable m x l payoff matrix for the row player.

    :param entries: row-major array-like of finite floats.
    """

    def __init__(self, entries):
        a = _entries(entries)
        a.setflags(write=False)
        self.values = a

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def l(self) -> int:
        return self.values.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.m * self.l

    def pairs(self) -> Iterable[Tuple[int, int]]:
        """All action pairs in row-major order."""
        for i in range(self.m):
            for j in range(self.l):
                yield (i, j)

    def to_json(self) -> str:
        return json.dumps(
            {"m": self.m, "l": self.l, "entries": [float(x) for x in self.values.ravel()]}
        )

    @classmethod
    def from_json(cls, text: str) -> "PayoffMatrix":
        doc = json.loads(text)
        try:
            m, l = int(doc["m"]), int(doc["l"])
            entries = doc["entries"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"matrix JSON needs m, l, and entries: missing {exc}") from exc
        if len(entries) != m * l:
            raise ValueError(f"expected {m * l} entries, got {len(entries)}")
        return cls(np.asarray(entries, dtype=float).reshape(m, l))

    def __repr__(self) -> str:
        return f"PayoffMatrix({self.values.tolist()!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PayoffMatrix) and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class PureEquilibrium:
    """A saddle point: A(i, j) is the maximum of column j and the minimum of row i."""

    row: int
    col: int
    value: float


@dataclass(frozen=True)
class MixedProfile:
    """Optimal mixed strategies and the game value they guarantee."""

    p: np.ndarray
    q: np.ndarray
    value: float


@dataclass
class GapProfile:
    """Per-pair suboptimality gaps.

    delta_max(i, j) is the row player's shortfall against the best reply in
    column j, delta_min(i, j) the column player's shortfall within row i,
    delta their sum. The signed gap to the saddle value exists only when the
    game has a pure equilibrium.
    """

    delta_max: np.ndarray
    delta_min: np.ndarray
    delta: np.ndarray
    equilibrium: Optional[PureEquilibrium] = None
    unique: bool = False
    _delta_star: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def delta_star(self) -> np.ndarray:
        if self._delta_star is None:
            raise NoPureEquilibriumError("delta_star needs a pure equilibrium")
        return self._delta_star


def find_pure_ne(matrix) -> Tuple[Optional[PureEquilibrium], bool]:
    """Locate a pure saddle point if one exists.

    Returns the lexicographically smallest saddle pair plus a flag that is
    True exactly when the saddle pair is unique. Comparisons are exact, ties
    in payoff produce multiple saddles and clear the flag.
    """
    a = _entries(matrix)
    col_max = a.max(axis=0, keepdims=True)
    row_min = a.min(axis=1, keepdims=True)
    mask = (a >= col_max) & (a <= row_min)
    hits = np.argwhere(mask)
    if hits.shape[0] == 0:
        return None, False
    i, j = (int(x) for x in hits[0])
    return PureEquilibrium(i, j, float(a[i, j])), hits.shape[0] == 1


def compute_gaps(matrix) -> GapProfile:
    """All four gap arrays for every pair, in one pass."""
    a = _entries(matrix)
    delta_max = a.max(axis=0, keepdims=True) - a
    delta_min = a - a.min(axis=1, keepdims=True)
    ne, unique = find_pure_ne(a)
    delta_star = ne.value - a if ne is not None else None
    return GapProfile(
        delta_max=delta_max,
        delta_min=delta_min,
        delta=delta_max + delta_min,
        equilibrium=ne,
        unique=unique,
        _delta_star=delta_star,
    )


def eps_ne_satisfied(
    matrix,
    i: int,
    j: int,
    eps: float,
    active_rows: Optional[Sequence[int]] = None,
    active_cols: Optional[Sequence[int]] = None,
) -> bool:
    """Check the relaxed saddle inequalities for pair (i, j).

    (i, j) passes when no active row improves on A(i, j) by more than eps
    within column j and no active column undercuts it by more than eps within
    row i. Rows and columns outside the active sets are ignored, which is how
    callers restrict the test to pairs still in play.
    """
    a = _entries(matrix)
    m, l = a.shape
    if not (0 <= i < m and 0 <= j < l):
        raise ValueError(f"pair ({i}, {j}) out of range for {m}x{l} matrix")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rows = np.arange(m) if active_rows is None else np.asarray(list(active_rows), dtype=int)
    cols = np.arange(l) if active_cols is None else np.asarray(list(active_cols), dtype=int)
    if rows.size == 0 or cols.size == 0:
        raise ValueError("active sets must be non-empty")
    if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= l:
        raise ValueError("active sets out of range")
    return bool(a[rows, j].max() - eps <= a[i, j] <= a[i, cols].min() + eps)


def joint_probabilities(p, q) -> np.ndarray:
    """Outer product of two strategy vectors, the play distribution over pairs."""
    pv = np.asarray(p, dtype=float)
    qv = np.asarray(q, dtype=float)
    for name, v in (("p", pv), ("q", qv)):
        if v.ndim != 1 or v.size == 0:
            raise ValueError(f"{name} must be a non-empty vector")
        if v.min() < 0 or abs(v.sum() - 1.0) > EQ_TOL:
            raise ValueError(f"{name} is not a probability vector")
    return np.outer(pv, qv)


# --- minimax LP ---------------------------------------------------------
#
# With every entry shifted to be at least 1 the game value is positive and
# the column player's problem becomes the LP  max 1'y  s.t.  B y <= 1, y >= 0
# with q = y / 1'y. The row player's strategy falls out of the dual values
# carried in the slack columns of the same tableau, so one solve serves both.

_SIMPLEX_EPS = 1e-9


def _simplex_max(B: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """Maximize 1'y subject to B y <= 1, y >= 0 on a dense tableau.

    Returns (y, duals, objective). Dantzig pricing with a switch to Bland's
    rule after a stall budget, so the pivot loop always terminates.
    """
    m, l = B.shape
    tab = np.zeros((m + 1, l + m + 1))
    tab[:m, :l] = B
    tab[:m, l : l + m] = np.eye(m)
    tab[:m, -1] = 1.0
    tab[m, :l] = -1.0
    basis = list(range(l, l + m))

    max_iters = 100 + 25 * (m + l)
    bland_after = 50 + 5 * (m + l)
    for it in range(max_iters):
        costs = tab[m, : l + m]
        if it < bland_after:
            e = int(np.argmin(costs))
            if costs[e] >= -_SIMPLEX_EPS:
                break
        else:
            negatives = np.flatnonzero(costs < -_SIMPLEX_EPS)
            if negatives.size == 0:
                break
            e = int(negatives[0])
        col = tab[:m, e]
        feasible = col > _SIMPLEX_EPS
        if not feasible.any():
            # cannot happen for a bounded game LP, defend anyway
            raise MinimaxSolverError(f"unbounded minimax LP for matrix {B.tolist()}")
        ratios = np.where(feasible, tab[:m, -1] / np.where(feasible, col, 1.0), np.inf)
        r = int(np.argmin(ratios))
        if it >= bland_after:
            # smallest basis index among the tied rows, anti-cycling
            best = ratios[r]
            tied = [k for k in range(m) if feasible[k] and ratios[k] <= best + _SIMPLEX_EPS]
            r = min(tied, key=lambda k: basis[k])
        pivot = tab[r, e]
        tab[r] /= pivot
        for k in range(m + 1):
            if k != r and abs(tab[k, e]) > 0.0:
                tab[k] -= tab[k, e] * tab[r]
        basis[r] = e
    else:
        raise MinimaxSolverError(f"pivot budget exceeded on matrix {B.tolist()}")

    y = np.zeros(l)
    for r, b in enumerate(basis):
        if b < l:
            y[b] = tab[r, -1]
    duals = tab[m, l : l + m].copy()
    return y, duals, float(tab[m, -1])


def _closed_form_2x2(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    # interior equilibrium of a saddle-free 2x2 game
    (w, x), (y, z) = a
    denom = w - x - y + z
    p0 = (z - y) / denom
    q0 = (z - x) / denom
    value = (w * z - x * y) / denom
    return np.array([p0, 1.0 - p0]), np.array([q0, 1.0 - q0]), value


def solve_minimax(matrix) -> MixedProfile:
    """Optimal mixed strategies for both players and the game value.

    Shifts entries so the value is positive, solves the induced LP with the
    dense simplex above, and undoes the shift on the reported value. The
    shift is canonical (minimum entry mapped to 1) so adding a constant to
    the matrix reproduces identical strategies.
    """
    a = _entries(matrix)
    m, l = a.shape
    shift = 1.0 - a.min()
    y, duals, objective = _simplex_max(a + shift)
    if objective <= _SIMPLEX_EPS:
        raise MinimaxSolverError(f"degenerate objective for matrix {a.tolist()}")
    q = np.clip(y, 0.0, None)
    q /= q.sum()
    p = np.clip(duals, 0.0, None)
    p /= p.sum()
    value = 1.0 / objective - shift

    worst_row = float(np.min(p @ a))
    best_col = float(np.max(a @ q))
    if best_col - value > RESIDUAL_TOL or value - worst_row > RESIDUAL_TOL:
        raise MinimaxSolverError(
            f"optimality residuals too large for matrix {a.tolist()}: "
            f"value={value}, row guarantee={worst_row}, column exposure={best_col}"
        )
    if m == 2 and l == 2 and find_pure_ne(a)[0] is None:
        p2, q2, v2 = _closed_form_2x2(a)
        if (
            np.abs(p - p2).max() > RESIDUAL_TOL
            or np.abs(q - q2).max() > RESIDUAL_TOL
            or abs(value - v2) > RESIDUAL_TOL
        ):
            raise MinimaxSolverError(f"2x2 cross-check failed for matrix {a.tolist()}")
    return MixedProfile(p=p, q=q, value=value)
