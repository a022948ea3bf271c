"""Turn a sweep CSV into a figure.

Two kinds are understood. A "fig1" table holds one gap sweep: mean regret
with its standard error next to the analytic ceiling, drawn over the gap.
A "fig23" table holds one cumulative-regret curve per learner, drawn over
time. Legend text comes straight from the file, column names for the gap
sweep and the algo values for the curves.
"""
import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("fig1", "fig23")

_SCHEMAS = {
    "fig1": ("delta", "mean_regret", "stderr", "bound"),
    "fig23": ("algo", "t", "mean_cum_regret", "stderr"),
}

# algo stays text, everything else must parse as a number
_TEXT_COLUMNS = frozenset({"algo"})


class SchemaError(ValueError):
    """The CSV does not match the declared figure kind."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    log_scale: bool = False
    band: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def load_table(path: str, kind: str) -> Dict[str, List]:
    """Read and validate the CSV for the given kind, columns as lists.

    Raises SchemaError naming the offending column on a missing header or
    an unparsable cell, and on an empty data section.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in _SCHEMAS[kind]:
            if col not in header:
                raise SchemaError(f"missing column: {col}")
        table: Dict[str, List] = {col: [] for col in _SCHEMAS[kind]}
        for row in reader:
            for col in _SCHEMAS[kind]:
                cell = row[col]
                if col in _TEXT_COLUMNS:
                    table[col].append(cell)
                    continue
                try:
                    table[col].append(float(cell))
                except (TypeError, ValueError):
                    raise SchemaError(
                        f"bad value in column {col}: {cell!r} (row {reader.line_num})"
                    ) from None
    if not table[_SCHEMAS[kind][0]]:
        raise SchemaError("empty data section")
    return table


def _draw_fig1(ax, table: Dict[str, List], band: bool) -> None:
    x = table["delta"]
    ax.plot(x, table["mean_regret"], marker="o", label="mean_regret")
    ax.plot(x, table["bound"], marker="s", linestyle="--", label="bound")
    if band:
        lo = [m - s for m, s in zip(table["mean_regret"], table["stderr"])]
        hi = [m + s for m, s in zip(table["mean_regret"], table["stderr"])]
        ax.fill_between(x, lo, hi, alpha=0.25, linewidth=0)
    ax.set_xlabel("delta")
    ax.set_ylabel("regret")


def _draw_fig23(ax, table: Dict[str, List], band: bool) -> None:
    order: List[str] = []
    for name in table["algo"]:
        if name not in order:
            order.append(name)
    for name in order:
        idx = [k for k, a in enumerate(table["algo"]) if a == name]
        x = [table["t"][k] for k in idx]
        y = [table["mean_cum_regret"][k] for k in idx]
        ax.plot(x, y, label=name)
        if band:
            s = [table["stderr"][k] for k in idx]
            ax.fill_between(
                x, [m - e for m, e in zip(y, s)], [m + e for m, e in zip(y, s)],
                alpha=0.25, linewidth=0,
            )
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret")


def render(spec: PlotSpec) -> "plt.Figure":
    """Build the figure described by `spec` and save it to `spec.out_path`.

    The table is validated before any file is written, so a schema error
    leaves no output behind.
    """
    table = load_table(spec.csv_path, spec.kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=120)
    try:
        if spec.kind == "fig1":
            _draw_fig1(ax, table, spec.band)
        else:
            _draw_fig23(ax, table, spec.band)
        if spec.log_scale:
            ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        fig.savefig(spec.out_path, metadata={"Software": "figplots"})
    except Exception:
        plt.close(fig)
        raise
    return fig


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figplots", description="Render a zsg sweep CSV to an image"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv_path")
    parser.add_argument("out_path")
    parser.add_argument("--log", action="store_true", help="log scale on the y axis")
    parser.add_argument("--band", action="store_true", help="shade mean +- stderr")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    spec = PlotSpec(
        csv_path=args.csv_path,
        kind=args.kind,
        out_path=args.out_path,
        log_scale=args.log,
        band=args.band,
    )
    try:
        fig = render(spec)
        plt.close(fig)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
