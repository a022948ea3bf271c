"""Bandit learners for zero-sum matrix games.

Three explore-then-commit style learners that aim for the pure equilibrium
pair, plus an adversarial two-player baseline:

* etc_zsg_run: uniform exploration of every pair, one commit.
* ae_run: round-based halving of a gap guess with pair elimination.
* nue_run: the same halving loop, but exploration effort per pair follows
  an estimated equilibrium play distribution.
* tsallis_inf_run: both players independently run a Tsallis-INF bandit.

All learners read observations from an EnvHandle in play order and return a
RunTrace of exactly config.T plays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bandit_env import EmpiricalEstimate, EnvHandle
from .matrix_game import eps_ne_satisfied, find_pure_ne, solve_minimax

__all__ = [
    "LearnerConfig",
    "RoundRecord",
    "RunTrace",
    "etc_exploration_k",
    "etc_zsg_run",
    "ae_last_round",
    "ae_schedule",
    "ae_run",
    "nue_last_round",
    "nue_schedule",
    "nue_run",
    "tsallis_inf_run",
]

Pair = Tuple[int, int]


@dataclass(frozen=True)
class LearnerConfig:
    """Run parameters shared by every learner.

    :param T: horizon, total number of plays.
    :param sigma: noise scale the learner assumes. The halving learners use
        it to size rounds, so they require it positive.
    :param k: exploration length per pair for the explore-commit learner.
    :param seed: stream for a learner's own randomization. Only the
        Tsallis-INF baseline draws from it, the other learners are
        deterministic given the observations.
    """

    T: int
    sigma: float
    k: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("horizon T must be at least 1")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError("sigma must be finite and nonnegative")
        if self.k is not None and self.k < 1:
            raise ValueError("exploration length k must be at least 1")


@dataclass
class RoundRecord:
    """What one elimination round did, kept for inspection and tests."""

    t: int
    delta_hat: float
    k_t: int
    eps_t: float
    active_before: Tuple[Pair, ...]
    plays: Dict[Pair, int]
    survivors: Tuple[Pair, ...]
    truncated: bool = False
    k_pair: Optional[Dict[Pair, int]] = None
    p_hat: Optional[Dict[Pair, float]] = None


@dataclass
class RunTrace:
    """Full record of one run: the play sequence, counts, and commit."""

    i: np.ndarray
    j: np.ndarray
    r: np.ndarray
    counts: np.ndarray
    committed: Optional[Pair] = None
    rounds: List[RoundRecord] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return self.i.size


class _TraceBuilder:
    def __init__(self, m: int, l: int, T: int):
        self.chunks_i: List[np.ndarray] = []
        self.chunks_j: List[np.ndarray] = []
        self.chunks_r: List[np.ndarray] = []
        self.counts = np.zeros((m, l), dtype=np.int64)
        self.remaining = T

    def play_batch(self, env: EnvHandle, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
        rr = env.sample_payoffs(ii, jj)
        self.chunks_i.append(ii)
        self.chunks_j.append(jj)
        self.chunks_r.append(rr)
        np.add.at(self.counts, (ii, jj), 1)
        self.remaining -= ii.size
        return rr

    def finish(self, committed: Optional[Pair], rounds: List[RoundRecord]) -> RunTrace:
        if self.remaining != 0:
            raise AssertionError(f"trace left {self.remaining} plays unused")
        return RunTrace(
            i=np.concatenate(self.chunks_i) if self.chunks_i else np.zeros(0, dtype=int),
            j=np.concatenate(self.chunks_j) if self.chunks_j else np.zeros(0, dtype=int),
            r=np.concatenate(self.chunks_r) if self.chunks_r else np.zeros(0),
            counts=self.counts,
            committed=committed,
            rounds=rounds,
        )


def _pair_arrays(pairs: Sequence[Pair], repeats) -> Tuple[np.ndarray, np.ndarray]:
    ii = np.fromiter((p[0] for p in pairs), dtype=int, count=len(pairs))
    jj = np.fromiter((p[1] for p in pairs), dtype=int, count=len(pairs))
    return np.repeat(ii, repeats), np.repeat(jj, repeats)


def _margin(mean: np.ndarray, pair: Pair, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Worst slack of the saddle inequalities for pair over the active sets.

    Zero means an exact saddle within the active submatrix, more negative
    means further from one. Adding a common tolerance shifts every margin
    equally, so rankings do not depend on eps.
    """
    i, j = pair
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    return float(min(mean[i, j] - mean[rows, j].max(), mean[i, cols].min() - mean[i, j]))


def _best_margin_pair(mean: np.ndarray, pairs: Sequence[Pair]) -> Pair:
    rows = sorted({i for i, _ in pairs})
    cols = sorted({j for _, j in pairs})
    best, best_margin = None, -math.inf
    for pair in sorted(pairs):
        mg = _margin(mean, pair, rows, cols)
        if mg > best_margin:
            best, best_margin = pair, mg
    return best


# --- explore then commit -------------------------------------------------


def etc_exploration_k(delta: float, sigma: float, T: int) -> int:
    """Exploration length per pair tuned to a known minimal gap.

    k = max(1, ceil(16 sigma^2 / delta^2 * ln(delta^2 T / (16 sigma^2)))),
    clamped to one whenever the log argument drops to or below one.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if T < 1:
        raise ValueError("T must be at least 1")
    log_arg = delta**2 * T / (16.0 * sigma**2)
    if log_arg <= 1.0:
        return 1
    return max(1, math.ceil(16.0 * sigma**2 / delta**2 * math.log(log_arg)))


def etc_zsg_run(env: EnvHandle, config: LearnerConfig) -> RunTrace:
    """Uniform exploration, then commit to the empirical saddle.

    Plays every pair exactly config.k times in row-major order, then commits
    for the rest of the horizon to a saddle of the empirical means, or to the
    maximin row and minimax column of the means when no saddle exists.
    """
    m, l = env.shape
    if config.k is None:
        raise ValueError("explore-commit needs an explicit exploration length k")
    k = config.k
    n_pairs = m * l
    if n_pairs * k > config.T:
        raise ValueError(f"exploration {n_pairs}*{k} exceeds horizon {config.T}")

    trace = _TraceBuilder(m, l, config.T)
    pairs = [(i, j) for i in range(m) for j in range(l)]
    ii, jj = _pair_arrays(pairs, k)
    rr = trace.play_batch(env, ii, jj)

    est = EmpiricalEstimate(m, l)
    est.record_batch(ii, jj, rr)
    mean = est.mean()

    ne, _ = find_pure_ne(mean)
    if ne is not None:
        committed = (ne.row, ne.col)
    else:
        committed = (int(mean.min(axis=1).argmax()), int(mean.max(axis=0).argmin()))

    tail = config.T - n_pairs * k
    if tail > 0:
        ci, cj = committed
        trace.play_batch(env, np.full(tail, ci, dtype=int), np.full(tail, cj, dtype=int))
    return trace.finish(committed, [])


# --- halving with pair elimination ---------------------------------------


def ae_last_round(T: int) -> int:
    """Index of the last halving round, floor(log2(T/e) / 2)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return math.floor(0.5 * math.log2(T / math.e))


def nue_last_round(T: int) -> int:
    """Index of the last weighted halving round, floor(log2(T/e) / 4)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return math.floor(0.25 * math.log2(T / math.e))


@dataclass(frozen=True)
class AeRound:
    delta_hat: float
    k_t: int
    eps_t: float


def _round_schedule(t: int, sigma: float, T: int) -> AeRound:
    delta_hat = 2.0 ** (-t + 2) * sigma
    log_arg = delta_hat**2 * T / (16.0 * sigma**2)
    # log_arg = T / 4^t >= e on every admissible round, so k_t is positive
    log_term = math.log(log_arg)
    k_t = math.ceil(16.0 * sigma**2 / delta_hat**2 * log_term)
    eps_t = math.sqrt(4.0 * sigma**2 / k_t * log_term)
    assert eps_t <= delta_hat / 2.0
    return AeRound(delta_hat=delta_hat, k_t=k_t, eps_t=eps_t)


def ae_schedule(t: int, sigma: float, T: int) -> AeRound:
    """Gap guess, exploration length, and tolerance for halving round t.

    delta_hat halves every round starting from 4 sigma, k_t is sized so the
    tolerance eps_t lands at or below delta_hat / 2.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    last = ae_last_round(T)
    if not (0 <= t <= last):
        raise ValueError(f"round {t} outside the schedule 0..{last} for T={T}")
    return _round_schedule(t, sigma, T)


def _eliminate(
    mean: np.ndarray, active: List[Pair], eps_t: float
) -> Tuple[List[Pair], List[Pair]]:
    """One simultaneous elimination pass. Returns (survivors, eliminated).

    Every pair is tested against the rows and columns that entered the round,
    and a full wipe-out is softened to keeping the best-margin pair.
    """
    rows = sorted({i for i, _ in active})
    cols = sorted({j for _, j in active})
    survivors = [p for p in active if eps_ne_satisfied(mean, p[0], p[1], eps_t, rows, cols)]
    if not survivors:
        survivors = [_best_margin_pair(mean, active)]
    eliminated = [p for p in active if p not in survivors]
    return survivors, eliminated


def _run_elimination_loop(env: EnvHandle, config: LearnerConfig, weighted: bool) -> RunTrace:
    m, l = env.shape
    if config.sigma <= 0:
        raise ValueError("halving learners need sigma > 0 to size their rounds")
    sigma, T = config.sigma, config.T
    last = (nue_last_round if weighted else ae_last_round)(T)

    trace = _TraceBuilder(m, l, T)
    est = EmpiricalEstimate(m, l)
    active: List[Pair] = [(i, j) for i in range(m) for j in range(l)]
    p_hat = np.full((m, l), 1.0 / (m * l))
    rounds: List[RoundRecord] = []

    for t in range(last + 1):
        if len(active) == 1 or trace.remaining == 0:
            break
        sched = _round_schedule(t, sigma, T)
        if weighted:
            k_pair = {
                p: nue_schedule(t, sigma, T, p_hat, p) for p in active
            }
            repeats = [k_pair[p] for p in active]
        else:
            k_pair = None
            repeats = sched.k_t

        ii, jj = _pair_arrays(active, repeats)
        truncated = ii.size > trace.remaining
        if truncated:
            ii, jj = ii[: trace.remaining], jj[: trace.remaining]
        rr = trace.play_batch(env, ii, jj)
        est.record_batch(ii, jj, rr)

        if truncated:
            plays: Dict[Pair, int] = {}
            for a, b in zip(ii.tolist(), jj.tolist()):
                plays[(a, b)] = plays.get((a, b), 0) + 1
        else:
            plays = {p: (k_pair[p] if weighted else sched.k_t) for p in active}

        if truncated or trace.remaining == 0:
            rounds.append(
                RoundRecord(
                    t, sched.delta_hat, sched.k_t, sched.eps_t,
                    tuple(active), plays, tuple(active), truncated=truncated,
                    k_pair=k_pair,
                )
            )
            break

        mean = est.mean()
        survivors, _ = _eliminate(mean, active, sched.eps_t)
        record = RoundRecord(
            t, sched.delta_hat, sched.k_t, sched.eps_t,
            tuple(active), plays, tuple(survivors), k_pair=k_pair,
        )
        active = survivors

        if weighted:
            p_hat = _equilibrium_weights(mean, active)
            record.p_hat = {p: float(p_hat[p]) for p in active}
        rounds.append(record)

    committed = None
    if trace.remaining > 0:
        committed = active[0] if len(active) == 1 else _best_margin_pair(est.mean(), active)
        ii = np.full(trace.remaining, committed[0], dtype=int)
        jj = np.full(trace.remaining, committed[1], dtype=int)
        trace.play_batch(env, ii, jj)
    return trace.finish(committed, rounds)


def _equilibrium_weights(mean: np.ndarray, active: List[Pair]) -> np.ndarray:
    """Play distribution for the next round from the estimated equilibrium.

    Solves the estimated subgame on the active rows and columns, takes the
    product distribution of the two strategies, and renormalizes it over the
    active pairs. Falls back to uniform when the product puts no mass there.
    """
    rows = sorted({i for i, _ in active})
    cols = sorted({j for _, j in active})
    prof = solve_minimax(mean[np.ix_(rows, cols)])
    joint = np.zeros_like(mean)
    joint[np.ix_(rows, cols)] = np.outer(prof.p, prof.q)
    out = np.zeros_like(mean)
    idx = tuple(np.array(x) for x in zip(*active))
    total = float(joint[idx].sum())
    if total <= 1e-12:
        out[idx] = 1.0 / len(active)
    else:
        out[idx] = joint[idx] / total
    return out


def ae_run(env: EnvHandle, config: LearnerConfig) -> RunTrace:
    """Halving rounds with uniform effort over the surviving pairs.

    Each round plays every active pair k_t times, then keeps the pairs that
    still pass the eps_t saddle test against the surviving rows and columns.
    A single survivor, the end of the schedule, or an exhausted horizon ends
    the loop, after which the best-margin survivor is played out.
    """
    return _run_elimination_loop(env, config, weighted=False)


def nue_schedule(t: int, sigma: float, T: int, p_hat: np.ndarray, pair: Pair) -> int:
    """Exploration length for one pair in weighted halving round t.

    The base k_t is topped up proportionally to the pair's estimated
    equilibrium play probability, so likely pairs get sampled harder while
    every pair keeps the k_t floor.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    last = nue_last_round(T)
    if not (0 <= t <= last):
        raise ValueError(f"round {t} outside the schedule 0..{last} for T={T}")
    w = float(np.asarray(p_hat)[pair])
    if not (0.0 <= w <= 1.0 + 1e-9):
        raise ValueError(f"p_hat[{pair}]={w} is not a probability")
    sched = _round_schedule(t, sigma, T)
    log_arg = sched.delta_hat**2 * T / (16.0 * sigma**2)
    extra = math.ceil(16.0 * sigma**2 * w / sched.delta_hat**2 * math.log(log_arg))
    return sched.k_t + extra


def nue_run(env: EnvHandle, config: LearnerConfig) -> RunTrace:
    """Halving rounds with effort allocated by the estimated equilibrium.

    Same loop as ae_run with a quarter as many rounds. Every active pair is
    played k_t plus an equilibrium-weighted top-up, the weights coming from
    the minimax solution of the estimated subgame after each round.
    """
    return _run_elimination_loop(env, config, weighted=True)


# --- adversarial baseline -------------------------------------------------


def _tsallis_distribution(losses: List[float], eta: float) -> List[float]:
    """Sampling weights w_i = 4 / (eta (L_i - x))^2 normalized by Newton.

    Solves sum(w) = 1 for the shift x below min(L). The map is convex and
    increasing in x, so after at most one overshoot Newton descends onto the
    root from above; the bisection guard keeps x strictly below the pole.
    """
    n = len(losses)
    if n == 1:
        return [1.0]
    lmin = min(losses)
    x = lmin - 2.0 * math.sqrt(n) / eta
    for _ in range(60):
        ws = [4.0 / (eta * (li - x)) ** 2 for li in losses]
        s = sum(ws)
        if abs(s - 1.0) <= 1e-10:
            break
        deriv = eta * sum(w**1.5 for w in ws)
        x_next = x - (s - 1.0) / deriv
        if x_next >= lmin:
            x_next = 0.5 * (x + lmin)
        x = x_next
    ws = [4.0 / (eta * (li - x)) ** 2 for li in losses]
    s = sum(ws)
    return [w / s for w in ws]


def _sample_index(probs: List[float], u: float) -> int:
    acc = 0.0
    for idx, p in enumerate(probs):
        acc += p
        if u < acc:
            return idx
    return len(probs) - 1


def tsallis_inf_run(env: EnvHandle, config: LearnerConfig) -> RunTrace:
    """Both players independently run Tsallis-INF with power 1/2.

    Payoffs are mapped to [0, 1] losses through the scale B = max|A| + 5
    sigma (clamping the rare draws beyond it), each player samples from its
    Tsallis distribution at learning rate 2 / sqrt(t), and updates its chosen
    action with the importance-weighted loss. Action sampling consumes the
    learner's own seed stream, observations consume the environment's.
    """
    m, l = env.shape
    T = config.T
    scale = float(np.abs(env.truth).max() + 5.0 * config.sigma)
    scale = max(scale, 1e-12)
    rng = np.random.default_rng(config.seed)

    loss_row = [0.0] * m
    loss_col = [0.0] * l
    ti = np.zeros(T, dtype=int)
    tj = np.zeros(T, dtype=int)
    tr = np.zeros(T)
    counts = np.zeros((m, l), dtype=np.int64)

    for step in range(1, T + 1):
        eta = 2.0 / math.sqrt(step)
        pi = _tsallis_distribution(loss_row, eta)
        pj = _tsallis_distribution(loss_col, eta)
        i = _sample_index(pi, rng.random())
        j = _sample_index(pj, rng.random())
        r = env.sample_payoff(i, j)
        # row player maximizes r, column player minimizes it
        lr = min(1.0, max(0.0, (scale - r) / (2.0 * scale)))
        lc = min(1.0, max(0.0, (r + scale) / (2.0 * scale)))
        loss_row[i] += lr / pi[i]
        loss_col[j] += lc / pj[j]
        idx = step - 1
        ti[idx] = i
        tj[idx] = j
        tr[idx] = r
        counts[i, j] += 1

    return RunTrace(i=ti, j=tj, r=tr, counts=counts, committed=None, rounds=[])
