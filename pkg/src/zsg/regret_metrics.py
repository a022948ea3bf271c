"""Regret accounting and the analytic regret ceilings.

Two bookkeeping views of a finished run: counts weighted by gaps (external
and saddle-relative regret) and the per-step cumulative distance between the
game value and the true mean payoff of the played pair. The bound_* functions
evaluate the corresponding analytic guarantees literally, including their
signed saddle-relative terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix_game import GapProfile, NoPureEquilibriumError, _entries, compute_gaps

__all__ = [
    "RegretReport",
    "BoundInputs",
    "regret_from_counts",
    "abs_regret_series",
    "bound_etc",
    "bound_etc_min",
    "ae_lambda_floor",
    "nue_lambda_floor",
    "bound_ae_nash",
    "bound_ae_external",
    "bound_nue_nash",
    "bound_nue_external",
]


@dataclass
class RegretReport:
    """Count-weighted regret totals for one run.

    r_max charges the row player's per-column shortfalls, r_min the column
    player's per-row shortfalls, external their sum. The saddle-relative
    total exists only when the game has a pure equilibrium and can be
    negative.
    """

    r_max: float
    r_min: float
    external: float
    _nash: Optional[float] = None

    @property
    def nash(self) -> float:
        if self._nash is None:
            raise NoPureEquilibriumError("saddle-relative regret needs a pure equilibrium")
        return self._nash


def regret_from_counts(gaps_or_matrix, counts) -> RegretReport:
    """Weigh final play counts by the per-pair gaps.

    Accepts either a precomputed gap profile or the true matrix itself.
    """
    if isinstance(gaps_or_matrix, GapProfile):
        g = gaps_or_matrix
    else:
        g = compute_gaps(_entries(gaps_or_matrix))
    n = np.asarray(counts)
    if n.shape != g.delta.shape:
        raise ValueError(f"counts shape {n.shape} does not match gaps {g.delta.shape}")
    if not np.issubdtype(n.dtype, np.integer) or n.min() < 0:
        raise ValueError("counts must be nonnegative integers")
    r_max = float((g.delta_max * n).sum())
    r_min = float((g.delta_min * n).sum())
    nash = float((g._delta_star * n).sum()) if g.equilibrium is not None else None
    return RegretReport(r_max=r_max, r_min=r_min, external=r_max + r_min, _nash=nash)


def abs_regret_series(matrix, value: float, trace) -> np.ndarray:
    """Cumulative |value - A(i_t, j_t)| over a play sequence.

    Distances use the true mean payoffs, not the noisy observations. trace is
    anything with integer index arrays i and j.
    """
    a = _entries(matrix)
    return np.cumsum(np.abs(value - a[trace.i, trace.j]))


# --- explore-commit guarantees -------------------------------------------


def bound_etc(matrix, sigma: float, k: int, T: int) -> float:
    """Expected saddle-relative regret ceiling for uniform explore-commit.

    k * sum of signed gaps for the explore phase plus the commit phase
    weighted by the misidentification ceiling exp(-k delta^2 / 16 sigma^2)
    per pair.
    """
    a = _entries(matrix)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    n_pairs = a.size
    if n_pairs * k > T:
        raise ValueError(f"exploration {n_pairs}*{k} exceeds horizon {T}")
    g = compute_gaps(a)
    star = g.delta_star
    decay = np.exp(-k * g.delta**2 / (16.0 * sigma**2))
    return float(k * star.sum() + (T - n_pairs * k) * (star * decay).sum())


def bound_etc_min(delta: float, sigma: float, T: int) -> float:
    """Horizon-capped ceiling for a game with a single positive gap delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if T < 1:
        raise ValueError("T must be at least 1")
    log_arg = delta**2 * T / (16.0 * sigma**2)
    tuned = delta + 16.0 * sigma**2 / delta * (1.0 + max(0.0, math.log(log_arg)))
    return float(min(T * delta, tuned))


# --- elimination guarantees ----------------------------------------------


def ae_lambda_floor(sigma: float, T: int) -> float:
    """Smallest admissible gap threshold for the uniform halving bounds."""
    return 4.0 * sigma * math.sqrt(math.e / T)


def nue_lambda_floor(sigma: float, T: int) -> float:
    """Smallest admissible gap threshold for the weighted halving bounds."""
    return 4.0 * sigma * (math.e / T) ** 0.25


@dataclass(frozen=True)
class BoundInputs:
    """Shared parameters of the elimination bounds.

    lam partitions the suboptimal pairs into resolvable (gap above lam) and
    unresolvable ones. Leave it None to use the smallest value the bound at
    hand admits.
    """

    sigma: float
    T: int
    lam: Optional[float] = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.lam is not None and not (self.lam > 0):
            raise ValueError("lam must be positive")

    def resolve_lambda(self, floor: float) -> float:
        if self.lam is None:
            return floor
        if self.lam < floor * (1.0 - 1e-12):
            raise ValueError(f"lam {self.lam} below its floor {floor}")
        return self.lam


def _partition(delta: np.ndarray, lam: float):
    # zero-gap pairs (the equilibrium and exact ties) belong to neither class
    return delta > lam, (delta > 0) & (delta <= lam)


def _elimination_bound(matrix, inputs: BoundInputs, variant: str, nash: bool) -> float:
    a = _entries(matrix)
    sigma, T = inputs.sigma, inputs.T
    floor_fn = ae_lambda_floor if variant == "ae" else nue_lambda_floor
    log_coeff = 256.0 if variant == "ae" else 512.0
    lam = inputs.resolve_lambda(floor_fn(sigma, T))
    g = compute_gaps(a)
    wide, narrow = _partition(g.delta, lam)

    total = 0.0
    d = g.delta[wide]
    log_term = np.log(d**2 * T / (256.0 * sigma**2))
    if nash:
        star = g.delta_star
        total += float(
            (star[wide] * (1.0 + 768.0 * sigma**2 / d**2
                           + log_coeff * sigma**2 / d**2 * log_term)).sum()
        )
        if narrow.any():
            total += float((star[narrow] * 512.0 * sigma**2 / lam**2).sum())
            total += float(star[narrow].max()) * T
    else:
        total += float((d + 768.0 * sigma**2 / d + log_coeff * sigma**2 / d * log_term).sum())
        if variant == "ae":
            # one horizon charge regardless of how many narrow pairs exist
            total += float(narrow.sum()) * 512.0 * sigma**2 / lam
            total += lam * T
        else:
            # the weighted variant charges the horizon per narrow pair
            total += float(narrow.sum()) * (512.0 * sigma**2 / lam + lam * T)
    return total


def bound_ae_nash(matrix, inputs: BoundInputs) -> float:
    """Saddle-relative regret ceiling for uniform halving.

    Evaluated literally: signed gaps keep their sign in every term, and the
    narrow-pair horizon term is the largest signed gap among narrow pairs
    times T (zero when no pair is narrow).
    """
    return _elimination_bound(matrix, inputs, "ae", nash=True)


def bound_ae_external(matrix, inputs: BoundInputs) -> float:
    """External regret ceiling for uniform halving."""
    return _elimination_bound(matrix, inputs, "ae", nash=False)


def bound_nue_nash(matrix, inputs: BoundInputs) -> float:
    """Saddle-relative regret ceiling for weighted halving."""
    return _elimination_bound(matrix, inputs, "nue", nash=True)


def bound_nue_external(matrix, inputs: BoundInputs) -> float:
    """External regret ceiling for weighted halving."""
    return _elimination_bound(matrix, inputs, "nue", nash=False)
