"""Independent cross-checks for the main code paths.

Everything here recomputes its answer from first principles: exhaustive
enumeration instead of vectorized saddle detection, textbook algebra instead
of the LP, and Monte Carlo simulation instead of the analytic exploration
guarantees. Keeping these routes separate from the production ones is the
point, so this module deliberately avoids the learner implementations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .matrix_game import MixedProfile, _entries

__all__ = [
    "OracleReport",
    "brute_force_saddles",
    "closed_form_2x2_mixed",
    "mc_misidentification",
    "mc_keep_probability",
]

_CHUNK_BUDGET = 16_000_000  # max scalar draws held in memory at once


@dataclass
class OracleReport:
    """Outcome of one oracle probe.

    empirical is the oracle's independently measured value, reference the
    value or bound the main path claims. For Monte Carlo probes passed means
    empirical <= reference + 3 stderr, for exact probes it means agreement
    within tolerance.
    """

    quantity: str
    empirical: float
    reference: float
    passed: bool
    stderr: Optional[float] = None
    trials: Optional[int] = None
    detail: str = ""

    def to_json(self) -> str:
        dev = self.empirical - self.reference
        doc = {
            "quantity": self.quantity,
            "empirical": self.empirical,
            "reference": self.reference,
            "abs_deviation": dev,
            "rel_deviation": dev / abs(self.reference) if self.reference else None,
            "passed": self.passed,
        }
        if self.stderr is not None:
            doc["stderr"] = self.stderr
        if self.trials is not None:
            doc["trials"] = self.trials
        if self.detail:
            doc["detail"] = self.detail
        return json.dumps(doc)


def brute_force_saddles(matrix) -> List[Tuple[int, int]]:
    """Every saddle point, found by checking all pairs against all deviations."""
    a = _entries(matrix)
    m, l = a.shape
    out = []
    for i in range(m):
        for j in range(l):
            ok = True
            for i2 in range(m):
                if a[i2, j] > a[i, j]:
                    ok = False
                    break
            if ok:
                for j2 in range(l):
                    if a[i, j2] < a[i, j]:
                        ok = False
                        break
            if ok:
                out.append((i, j))
    return out


def closed_form_2x2_mixed(matrix) -> MixedProfile:
    """Interior equilibrium of a saddle-free 2x2 game by direct algebra.

    Rejects matrices that are not 2x2 or that possess a saddle point, where
    the interior formulas do not apply.
    """
    a = _entries(matrix)
    if a.shape != (2, 2):
        raise ValueError(f"closed form needs a 2x2 matrix, got {a.shape}")
    if brute_force_saddles(a):
        raise ValueError("matrix has a saddle point, interior formulas do not apply")
    (w, x), (y, z) = a
    denom = w - x - y + z
    if denom == 0.0:
        raise ValueError("degenerate matrix, denominator vanishes")
    p0 = (z - y) / denom
    q0 = (z - x) / denom
    value = (w * z - x * y) / denom
    return MixedProfile(
        p=np.array([p0, 1.0 - p0]), q=np.array([q0, 1.0 - q0]), value=float(value)
    )


def _lex_saddle(a: np.ndarray) -> Tuple[int, int]:
    saddles = brute_force_saddles(a)
    if not saddles:
        raise ValueError("matrix has no pure equilibrium")
    return saddles[0]


def _commit_pairs_from_means(means: np.ndarray) -> np.ndarray:
    """Commit decision per trial, replicated from the stated rule.

    means has shape (trials, m, l). Pick the lexicographically smallest
    saddle of each estimate, or the maximin row and minimax column when the
    estimate has no saddle.
    """
    trials, m, l = means.shape
    col_max = means.max(axis=1, keepdims=True)
    row_min = means.min(axis=2, keepdims=True)
    mask = (means >= col_max) & (means <= row_min)
    flat = mask.reshape(trials, m * l)
    has = flat.any(axis=1)
    first = flat.argmax(axis=1)
    rows = first // l
    cols = first % l
    mm_rows = means.min(axis=2).argmax(axis=1)
    mm_cols = means.max(axis=1).argmin(axis=1)
    rows = np.where(has, rows, mm_rows)
    cols = np.where(has, cols, mm_cols)
    return np.stack([rows, cols], axis=1)


def mc_misidentification(
    matrix, sigma: float, k: int, trials: int = 10_000, seed: int = 20240
) -> OracleReport:
    """Measure how often uniform exploration commits to the wrong pair.

    Simulates the explore phase (k noisy observations of every pair), applies
    the commit rule to the empirical means, and compares the wrong-commit
    frequency against the analytic ceiling sum of exp(-k delta^2 / 16 sigma^2)
    over suboptimal pairs.
    """
    a = _entries(matrix)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if k < 1:
        raise ValueError("k must be at least 1")
    if trials < 1_000:
        raise ValueError("need at least 1000 trials for a meaningful frequency")
    m, l = a.shape
    star = _lex_saddle(a)

    delta = (a.max(axis=0, keepdims=True) - a) + (a - a.min(axis=1, keepdims=True))
    bound = 0.0
    for i in range(m):
        for j in range(l):
            if (i, j) == star:
                continue
            if sigma == 0.0:
                bound += 0.0 if delta[i, j] > 0 else 1.0
            else:
                bound += math.exp(-k * delta[i, j] ** 2 / (16.0 * sigma**2))

    rng = np.random.default_rng(seed)
    wrong = 0
    chunk = max(1, min(trials, _CHUNK_BUDGET // (m * l * k)))
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        noise = rng.standard_normal((n, m, l, k))
        means = a[None, :, :, None] + sigma * noise
        committed = _commit_pairs_from_means(means.mean(axis=3))
        wrong += int(np.sum((committed[:, 0] != star[0]) | (committed[:, 1] != star[1])))
        done += n
    freq = wrong / trials
    stderr = math.sqrt(max(freq * (1.0 - freq), 1.0 / trials) / trials)
    return OracleReport(
        quantity="misidentification",
        empirical=freq,
        reference=float(bound),
        passed=freq <= bound + 3.0 * stderr,
        stderr=stderr,
        trials=trials,
        detail=f"k={k} sigma={sigma}",
    )


def _probe_schedule(sigma: float, T: int, t: int) -> Tuple[float, int, float]:
    # same arithmetic the halving learner uses, recomputed here on purpose
    delta_hat = 2.0 ** (-t + 2) * sigma
    log_arg = delta_hat**2 * T / (16.0 * sigma**2)
    if log_arg <= 1.0:
        raise ValueError(f"round {t} has no admissible exploration length for T={T}")
    k_t = math.ceil(16.0 * sigma**2 / delta_hat**2 * math.log(log_arg))
    eps_t = math.sqrt(4.0 * sigma**2 / k_t * math.log(log_arg))
    return delta_hat, k_t, eps_t


def mc_keep_probability(
    matrix,
    sigma: float,
    T: int,
    t: int,
    pair: Tuple[int, int],
    trials: int = 2_000,
    seed: int = 20241,
) -> OracleReport:
    """Measure how often a suboptimal pair survives one elimination round.

    Runs an isolated round at the halving schedule for round t: every pair is
    observed k_t times and the probed pair is kept when it still looks like an
    eps_t equilibrium. Valid once the probe gap is resolvable at this round,
    that is for t at or past the first round with delta_hat < delta/2. The
    analytic ceiling on the survival probability is 16 sigma^2 / (delta_hat^2 T).
    """
    a = _entries(matrix)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    m, l = a.shape
    i, j = pair
    if not (0 <= i < m and 0 <= j < l):
        raise ValueError(f"pair {pair} out of range for {m}x{l} matrix")
    delta_ij = float(
        (a[:, j].max() - a[i, j]) + (a[i, j] - a[i, :].min())
    )
    if delta_ij <= 0:
        raise ValueError(f"pair {pair} has zero gap, nothing to eliminate")
    t_pair = 0
    while 2.0 ** (-t_pair + 2) * sigma >= delta_ij / 2.0:
        t_pair += 1
        if t_pair > 128:
            raise ValueError("gap too small to resolve at any round")
    if t < t_pair:
        raise ValueError(f"round {t} precedes the first resolvable round {t_pair}")

    delta_hat, k_t, eps_t = _probe_schedule(sigma, T, t)
    ceiling = 16.0 * sigma**2 / (delta_hat**2 * T)

    rng = np.random.default_rng(seed)
    kept = 0
    chunk = max(1, min(trials, _CHUNK_BUDGET // (m * l * k_t)))
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        noise = rng.standard_normal((n, m, l, k_t))
        means = a[None, :, :] + sigma * noise.mean(axis=3)
        ok_rows = means[:, :, j].max(axis=1) - eps_t <= means[:, i, j]
        ok_cols = means[:, i, j] <= means[:, i, :].min(axis=1) + eps_t
        kept += int(np.sum(ok_rows & ok_cols))
        done += n
    freq = kept / trials
    stderr = math.sqrt(max(freq * (1.0 - freq), 1.0 / trials) / trials)
    return OracleReport(
        quantity="keep_probability",
        empirical=freq,
        reference=float(ceiling),
        passed=freq <= ceiling + 3.0 * stderr,
        stderr=stderr,
        trials=trials,
        detail=f"t={t} k_t={k_t} eps_t={eps_t:.6g} pair={pair}",
    )
