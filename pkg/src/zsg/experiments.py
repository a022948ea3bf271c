"""Experiment drivers, CSV emission, and the command line front end.

Two canned studies: a gap sweep of the explore-commit learner on a two-action
instance against its analytic ceiling, and a multi-learner comparison on
randomly generated square games. Every run's streams derive from the master
seed and the run index alone, so results do not depend on worker count or
scheduling, and repeated invocations produce byte-identical CSV files.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bandit_env import EnvHandle
from .learners import (
    LearnerConfig,
    ae_run,
    etc_exploration_k,
    etc_zsg_run,
    nue_run,
    tsallis_inf_run,
)
from .matrix_game import PayoffMatrix, find_pure_ne, solve_minimax
from .oracles import (
    brute_force_saddles,
    closed_form_2x2_mixed,
    mc_keep_probability,
    mc_misidentification,
    OracleReport,
)
from .regret_metrics import (
    BoundInputs,
    abs_regret_series,
    ae_lambda_floor,
    bound_ae_external,
    bound_ae_nash,
    bound_etc,
    bound_etc_min,
    bound_nue_external,
    bound_nue_nash,
    nue_lambda_floor,
)

__all__ = [
    "InstanceSpec",
    "ExperimentPlan",
    "Fig1Plan",
    "generate_instance",
    "run_fig1",
    "run_fig23",
    "write_csv",
    "cli_main",
    "main",
]

# registry order fixes each learner's stream slot, independent of selection
ALGORITHMS = ("etc", "ae", "nue", "tsallis")

THREADS_ENV = "ZSG_THREADS"


def child_seed(master: int, *key: int) -> int:
    """Derive an independent 64-bit stream seed from the master and a key."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for random game instances with centered Gaussian entries."""

    m: int
    l: int
    entry_sigma: float
    require_unique_pure_ne: bool = True
    max_attempts: int = 100_000

    def __post_init__(self):
        if self.m < 1 or self.l < 1:
            raise ValueError("instance needs at least one action per player")
        if self.entry_sigma <= 0:
            raise ValueError("entry_sigma must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


def generate_instance(spec: InstanceSpec, seed: int) -> PayoffMatrix:
    """Draw a matrix per the instance settings, rejecting until the equilibrium condition holds."""
    rng = np.random.default_rng(seed)
    for _ in range(spec.max_attempts):
        entries = rng.normal(0.0, spec.entry_sigma, size=(spec.m, spec.l))
        if not spec.require_unique_pure_ne:
            return PayoffMatrix(entries)
        ne, unique = find_pure_ne(entries)
        if ne is not None and unique:
            return PayoffMatrix(entries)
    raise RuntimeError(
        f"no {spec.m}x{spec.l} instance with a unique pure equilibrium "
        f"after {spec.max_attempts} attempts"
    )


def _resolve_threads(threads: Optional[int]) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be at least 1")
        return n
    return max(1, threads or 1)


def _map_blocks(fn, items: Sequence, threads: int) -> List:
    """Order-preserving map, optionally fanned out over worker processes."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (threads * 4))))


# --- gap sweep ------------------------------------------------------------


@dataclass(frozen=True)
class Fig1Plan:
    """Gap sweep of explore-commit on the instance [[0], [-delta]].

    Each grid point runs the learner with the gap-tuned exploration length
    and reports the mean saddle-relative regret next to the analytic ceiling.
    """

    deltas: Tuple[float, ...] = tuple(round(0.05 * x, 2) for x in range(0, 21))
    sigma: float = 0.5
    T: int = 1_000
    runs: int = 10_000
    seed: int = 20240501

    def __post_init__(self):
        if self.sigma <= 0 or self.T < 1 or self.runs < 1:
            raise ValueError("sigma, T, and runs must be positive")
        if any(d < 0 for d in self.deltas):
            raise ValueError("gaps must be nonnegative")


@dataclass(frozen=True)
class Fig1Row:
    delta: float
    mean_regret: float
    stderr: float
    bound: float
    k: int


_FIG1_BLOCK = 500


def _fig1_block(args) -> np.ndarray:
    delta, sigma, T, k, seed, gi, lo, hi = args
    matrix = np.array([[0.0], [-delta]])
    star = np.array([[0.0], [delta]])  # signed gaps to the saddle at (0, 0)
    out = np.empty(hi - lo)
    cfg = LearnerConfig(T=T, sigma=sigma, k=k)
    for r in range(lo, hi):
        env = EnvHandle(matrix, sigma, seed=child_seed(seed, gi, r))
        trace = etc_zsg_run(env, cfg)
        out[r - lo] = float((star * trace.counts).sum())
    return out


def run_fig1(plan: Fig1Plan, threads: int = 1) -> List[Fig1Row]:
    threads = _resolve_threads(threads)
    rows = []
    for gi, delta in enumerate(plan.deltas):
        if delta == 0.0:
            k, bound = 1, 0.0
        else:
            k = etc_exploration_k(delta, plan.sigma, plan.T)
            bound = bound_etc_min(delta, plan.sigma, plan.T)
        blocks = [
            (delta, plan.sigma, plan.T, k, plan.seed, gi, lo, min(lo + _FIG1_BLOCK, plan.runs))
            for lo in range(0, plan.runs, _FIG1_BLOCK)
        ]
        regrets = np.concatenate(_map_blocks(_fig1_block, blocks, threads))
        stderr = float(np.std(regrets, ddof=1) / math.sqrt(plan.runs)) if plan.runs > 1 else 0.0
        rows.append(Fig1Row(delta, float(regrets.mean()), stderr, bound, k))
    return rows


# --- learner comparison ----------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    """Multi-learner comparison on freshly drawn instances.

    Every run draws its own game (entry scale sampled from sigmas, which also
    sets the observation noise), runs every selected learner on it with
    derived streams, and records the cumulative distance to the game value at
    every stride-th step.
    """

    algos: Tuple[str, ...] = ("etc", "ae", "nue", "tsallis")
    sigmas: Tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    k_choices: Tuple[int, ...] = tuple(range(100, 2501, 25))
    m: int = 2
    l: int = 2
    T: int = 10_000
    runs: int = 100
    stride: int = 100
    seed: int = 20240502

    def __post_init__(self):
        unknown = set(self.algos) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if not self.algos or not self.sigmas:
            raise ValueError("need at least one algorithm and one sigma")
        if self.T < 1 or self.runs < 1 or not (1 <= self.stride <= self.T):
            raise ValueError("bad T, runs, or stride")
        if "etc" in self.algos:
            if not self.k_choices:
                raise ValueError("explore-commit needs a k list")
            if max(self.k_choices) * self.m * self.l > self.T:
                raise ValueError("largest k in the list does not fit the horizon")


_RUNNERS = {
    "etc": etc_zsg_run,
    "ae": ae_run,
    "nue": nue_run,
    "tsallis": tsallis_inf_run,
}


def _fig23_run(args) -> Dict[str, np.ndarray]:
    plan, r = args
    draw = np.random.default_rng(child_seed(plan.seed, r, 0))
    # consume both choices regardless of the selected subset to keep the
    # instance stream identical across subsets
    sigma = float(plan.sigmas[draw.integers(len(plan.sigmas))])
    k = int(plan.k_choices[draw.integers(len(plan.k_choices))]) if plan.k_choices else None
    spec = InstanceSpec(plan.m, plan.l, entry_sigma=sigma)
    matrix = generate_instance(spec, seed=child_seed(plan.seed, r, 1))
    ne, _ = find_pure_ne(matrix)
    value = ne.value if ne is not None else solve_minimax(matrix).value

    out: Dict[str, np.ndarray] = {}
    for algo in plan.algos:
        slot = ALGORITHMS.index(algo)
        env = EnvHandle(matrix, sigma, seed=child_seed(plan.seed, r, 10 + slot))
        cfg = LearnerConfig(
            T=plan.T,
            sigma=sigma,
            k=k if algo == "etc" else None,
            seed=child_seed(plan.seed, r, 20 + slot),
        )
        trace = _RUNNERS[algo](env, cfg)
        series = abs_regret_series(matrix, value, trace)
        out[algo] = series[plan.stride - 1 :: plan.stride]
    return out


def run_fig23(plan: ExperimentPlan, threads: int = 1) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Mean and standard error of cumulative regret per learner at each stride."""
    threads = _resolve_threads(threads)
    per_run = _map_blocks(_fig23_run, [(plan, r) for r in range(plan.runs)], threads)
    out = {}
    for algo in plan.algos:
        stacked = np.vstack([res[algo] for res in per_run])
        mean = stacked.mean(axis=0)
        stderr = (
            np.std(stacked, axis=0, ddof=1) / math.sqrt(plan.runs)
            if plan.runs > 1
            else np.zeros_like(mean)
        )
        out[algo] = (mean, stderr)
    return out


# --- CSV emission ----------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def fig1_csv_rows(rows: Sequence[Fig1Row]) -> List[List]:
    return [[r.delta, r.mean_regret, r.stderr, r.bound] for r in rows]


def fig23_csv_rows(
    plan: ExperimentPlan, result: Dict[str, Tuple[np.ndarray, np.ndarray]]
) -> List[List]:
    out = []
    ticks = range(plan.stride, plan.T + 1, plan.stride)
    for algo in plan.algos:
        mean, stderr = result[algo]
        for idx, t in enumerate(ticks):
            out.append([algo, t, mean[idx], stderr[idx]])
    return out


def trace_csv_rows(matrix, trace) -> List[List]:
    ne, _ = find_pure_ne(matrix)
    value = ne.value if ne is not None else solve_minimax(matrix).value
    cum = abs_regret_series(matrix, value, trace)
    return [
        [t + 1, int(trace.i[t]), int(trace.j[t]), float(trace.r[t]), float(cum[t])]
        for t in range(trace.steps)
    ]


# --- command line -----------------------------------------------------------


def _load_matrix(path: str) -> PayoffMatrix:
    with open(path) as fh:
        return PayoffMatrix.from_json(fh.read())


def _parse_floats(text: str) -> Tuple[float, ...]:
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(n))
    return tuple(float(x) for x in text.split(","))

def _parse_ints(text: str) -> Tuple[int, ...]:
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return tuple(range(start, stop + 1, step))
    return tuple(int(x) for x in text.split(","))


def _add_common(sub, **defaults):
    sub.add_argument("--seed", type=int, default=defaults.get("seed", 0))
    sub.add_argument("--T", type=int, default=defaults.get("T", 10_000))
    sub.add_argument("--sigma", type=float, default=defaults.get("sigma", 0.5))
    sub.add_argument("--out", type=str, default=defaults.get("out"))
    sub.add_argument("--threads", type=int, default=1)


def _cmd_fig1(args) -> int:
    plan = Fig1Plan(
        deltas=_parse_floats(args.deltas),
        sigma=args.sigma,
        T=args.T,
        runs=args.runs,
        seed=args.seed,
    )
    rows = run_fig1(plan, threads=args.threads)
    write_csv(args.out, ["delta", "mean_regret", "stderr", "bound"], fig1_csv_rows(rows))
    return 0


def _cmd_fig23(args) -> int:
    plan = ExperimentPlan(
        algos=tuple(args.algos.split(",")),
        sigmas=_parse_floats(args.sigmas),
        k_choices=_parse_ints(args.k_list),
        m=args.m,
        l=args.l,
        T=args.T,
        runs=args.runs,
        stride=args.stride,
        seed=args.seed,
    )
    result = run_fig23(plan, threads=args.threads)
    write_csv(
        args.out, ["algo", "t", "mean_cum_regret", "stderr"], fig23_csv_rows(plan, result)
    )
    return 0


def _cmd_run(args) -> int:
    matrix = _load_matrix(args.matrix)
    cfg = LearnerConfig(T=args.T, sigma=args.sigma, k=args.k, seed=child_seed(args.seed, 1))
    env = EnvHandle(matrix, args.sigma, seed=args.seed)
    trace = _RUNNERS[args.algo](env, cfg)
    write_csv(args.out, ["t", "i", "j", "r", "cum_abs_regret"], trace_csv_rows(matrix, trace))
    return 0


def _cmd_gen(args) -> int:
    spec = InstanceSpec(
        m=args.m,
        l=args.l,
        entry_sigma=args.entry_sigma,
        require_unique_pure_ne=not args.allow_any,
    )
    lines = [
        generate_instance(spec, seed=child_seed(args.seed, idx)).to_json()
        for idx in range(args.count)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bounds(args) -> int:
    lam = None if args.lam in (None, "auto") else float(args.lam)
    doc: Dict[str, object] = {"theorem": args.theorem, "T": args.T, "sigma": args.sigma}
    if args.theorem == "etc-min":
        if args.delta is None:
            raise ValueError("etc-min needs --delta")
        doc["delta"] = args.delta
        value = bound_etc_min(args.delta, args.sigma, args.T)
    else:
        matrix = _load_matrix(args.instance)
        if args.theorem == "etc":
            if args.k is None:
                raise ValueError("the explore-commit bound needs --k")
            doc["k"] = args.k
            value = bound_etc(matrix, args.sigma, args.k, args.T)
        else:
            inputs = BoundInputs(sigma=args.sigma, T=args.T, lam=lam)
            fn = {
                "ae-nash": bound_ae_nash,
                "ae-external": bound_ae_external,
                "nue-nash": bound_nue_nash,
                "nue-external": bound_nue_external,
            }[args.theorem]
            value = fn(matrix, inputs)
            floor = (
                ae_lambda_floor(args.sigma, args.T)
                if args.theorem.startswith("ae")
                else nue_lambda_floor(args.sigma, args.T)
            )
            doc["lambda"] = inputs.resolve_lambda(floor)
    doc["value"] = value
    text = json.dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_verify(args) -> int:
    matrix = _load_matrix(args.instance)
    a = matrix.values
    reports: List[OracleReport] = []

    saddles = brute_force_saddles(a)
    ne, unique = find_pure_ne(a)
    agree = (not saddles and ne is None) or (
        bool(saddles) and ne is not None and saddles[0] == (ne.row, ne.col)
        and unique == (len(saddles) == 1)
    )
    reports.append(
        OracleReport(
            quantity="pure_equilibrium",
            empirical=float(saddles[0][0] * a.shape[1] + saddles[0][1]) if saddles else float("nan"),
            reference=float(ne.row * a.shape[1] + ne.col) if ne else float("nan"),
            passed=agree,
            detail=f"saddles={saddles}",
        )
    )
    if a.shape == (2, 2) and not saddles:
        cf = closed_form_2x2_mixed(a)
        lp = solve_minimax(a)
        dev = max(
            float(np.abs(cf.p - lp.p).max()),
            float(np.abs(cf.q - lp.q).max()),
            abs(cf.value - lp.value),
        )
        reports.append(
            OracleReport(
                quantity="mixed_value",
                empirical=cf.value,
                reference=lp.value,
                passed=dev <= 1e-7,
                detail=f"max strategy deviation {dev:.3g}",
            )
        )
    if args.k is not None:
        reports.append(mc_misidentification(a, args.sigma, args.k, args.trials, seed=args.seed))
    if args.round is not None:
        i, j = (int(x) for x in args.pair.split(","))
        reports.append(
            mc_keep_probability(
                a, args.sigma, args.T, args.round, (i, j), trials=args.trials, seed=args.seed
            )
        )

    lines = "\n".join(rep.to_json() for rep in reports) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return 0 if all(rep.passed for rep in reports) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zsg",
        description="Simulate bandit learners for zero-sum matrix games",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p1 = subs.add_parser("fig1", help="gap sweep of explore-commit vs its ceiling")
    _add_common(p1, T=1_000, out="fig1.csv")
    p1.add_argument("--runs", type=int, default=10_000)
    p1.add_argument("--deltas", type=str, default="0:1.0:0.05")
    p1.set_defaults(func=_cmd_fig1)

    p2 = subs.add_parser("fig23", help="compare learners on random instances")
    _add_common(p2, out="fig23.csv")
    p2.add_argument("--runs", type=int, default=100)
    p2.add_argument("--algos", type=str, default="etc,ae,nue,tsallis")
    p2.add_argument("--sigmas", type=str, default="0.25,0.5,0.75,1.0")
    p2.add_argument("--k-list", dest="k_list", type=str, default="100:2500:25")
    p2.add_argument("--stride", type=int, default=100)
    p2.add_argument("--m", type=int, default=2)
    p2.add_argument("--l", type=int, default=2)
    p2.set_defaults(func=_cmd_fig23)

    p3 = subs.add_parser("run", help="one learner run, trace to CSV")
    _add_common(p3, out="trace.csv")
    p3.add_argument("--algo", choices=ALGORITHMS, required=True)
    p3.add_argument("--matrix", type=str, required=True)
    p3.add_argument("--k", type=int, default=None)
    p3.set_defaults(func=_cmd_run)

    p4 = subs.add_parser("gen", help="emit random instances as JSON lines")
    p4.add_argument("--m", type=int, default=2)
    p4.add_argument("--l", type=int, default=2)
    p4.add_argument("--entry-sigma", dest="entry_sigma", type=float, default=0.5)
    p4.add_argument("--count", type=int, default=1)
    p4.add_argument("--seed", type=int, default=0)
    p4.add_argument("--out", type=str, default=None)
    p4.add_argument("--allow-any", action="store_true",
                    help="skip the unique pure equilibrium filter")
    p4.set_defaults(func=_cmd_gen)

    p5 = subs.add_parser("bounds", help="evaluate an analytic regret ceiling")
    p5.add_argument("--theorem", required=True,
                    choices=["etc", "etc-min", "ae-nash", "ae-external",
                             "nue-nash", "nue-external"])
    p5.add_argument("--instance", type=str, default=None)
    p5.add_argument("--T", type=int, default=10_000)
    p5.add_argument("--sigma", type=float, default=0.5)
    p5.add_argument("--lambda", dest="lam", type=str, default="auto")
    p5.add_argument("--k", type=int, default=None)
    p5.add_argument("--delta", type=float, default=None)
    p5.add_argument("--out", type=str, default=None)
    p5.set_defaults(func=_cmd_bounds)

    p6 = subs.add_parser("verify", help="cross-check an instance against the oracles")
    _add_common(p6)
    p6.add_argument("--instance", type=str, required=True)
    p6.add_argument("--k", type=int, default=None)
    p6.add_argument("--trials", type=int, default=10_000)
    p6.add_argument("--round", type=int, default=None)
    p6.add_argument("--pair", type=str, default="0,0")
    p6.set_defaults(func=_cmd_verify)

    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver failures and other runtime trouble
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
