"""Stochastic bandit feedback for a fixed matrix game.

One environment owns one noise stream. Learners only see noisy payoffs of
the pairs they play, never the matrix itself, and keep their own running
per-pair means in an EmpiricalEstimate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_game import _entries

__all__ = ["NoiseModel", "EnvHandle", "EmpiricalEstimate"]


@dataclass(frozen=True)
class NoiseModel:
    """Additive observation noise. Only mean-zero Gaussian is supported."""

    sigma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported noise kind {self.kind!r}")
        if not (self.sigma >= 0.0) or not np.isfinite(self.sigma):
            raise ValueError("sigma must be finite and nonnegative")


class EnvHandle:
    """Bandit access to one payoff matrix.

    A handle is single-owner: one learner consumes its stream in play order.
    Observations are truth plus sigma times a standard normal draw, and a
    batch request consumes exactly the same draws as the equivalent sequence
    of single requests, so the two access styles are interchangeable.

    :param matrix: PayoffMatrix or array-like payoffs for the row player.
    :param noise: NoiseModel, or a bare sigma.
    :param seed: 64-bit seed for the observation stream.
    """

    def __init__(self, matrix, noise, seed: int = 0):
        self.truth = _entries(matrix)
        self.noise = noise if isinstance(noise, NoiseModel) else NoiseModel(float(noise))
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)

    @property
    def shape(self) -> tuple[int, int]:
        return self.truth.shape

    def sample_payoff(self, i: int, j: int) -> float:
        """One noisy observation of pair (i, j)."""
        m, l = self.truth.shape
        if not (0 <= i < m and 0 <= j < l):
            raise ValueError(f"pair ({i}, {j}) out of range for {m}x{l} game")
        return float(self.truth[i, j] + self.noise.sigma * self.rng.standard_normal())

    def sample_payoffs(self, ii, jj) -> np.ndarray:
        """Noisy observations for a whole play sequence at once."""
        ii = np.asarray(ii, dtype=int)
        jj = np.asarray(jj, dtype=int)
        if ii.shape != jj.shape or ii.ndim != 1:
            raise ValueError("ii and jj must be 1-d index arrays of equal length")
        m, l = self.truth.shape
        if ii.size and not (
            0 <= ii.min() and ii.max() < m and 0 <= jj.min() and jj.max() < l
        ):
            raise ValueError(f"indices out of range for {m}x{l} game")
        return self.truth[ii, jj] + self.noise.sigma * self.rng.standard_normal(ii.size)

    def reset(self) -> None:
        """Rewind the observation stream to the first draw."""
        self.rng = np.random.default_rng(self.seed)


class EmpiricalEstimate:
    """Running per-pair sample means.

    mean(i, j) is the arithmetic mean of every observation recorded for the
    pair, zero while the pair is unvisited. steps counts total records.
    """

    def __init__(self, m: int, l: int):
        if m < 1 or l < 1:
            raise ValueError("estimate needs at least one row and one column")
        self.sums = np.zeros((m, l))
        self.counts = np.zeros((m, l), dtype=np.int64)
        self.steps = 0

    def record(self, i: int, j: int, r: float) -> None:
        self.sums[i, j] += r
        self.counts[i, j] += 1
        self.steps += 1

    def record_batch(self, ii, jj, rs) -> None:
        np.add.at(self.sums, (ii, jj), rs)
        np.add.at(self.counts, (ii, jj), 1)
        self.steps += len(rs)

    def mean(self) -> np.ndarray:
        return self.sums / np.maximum(self.counts, 1)

    def reset(self) -> None:
        self.sums[:] = 0.0
        self.counts[:] = 0
        self.steps = 0
