#!/usr/bin/env python3
"""Render the capacity figure from cdma-capacity CSV files.

Theory curve (solid line) from a `theory` CSV, overlaid with one series of
unfilled square markers and +-1 standard-deviation bars per simulation
summary CSV. Values are plotted exactly as parsed; nothing is resampled.
Output is deterministic: identical inputs give byte-identical files.

Usage:
    python plot_capacity.py --theory theory.csv --sim simulation.csv \
        --output capacity_figure.svg

The output format follows the file extension (.svg and .pdf are vector,
.png raster).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


class FigureInputError(ValueError):
    """A CSV input is missing, incomplete, or malformed."""


@dataclass(frozen=True)
class FigureSpec:
    theory_csv: str
    simulation_csvs: tuple[str, ...] = ()
    output: str = "capacity_figure.svg"
    x_min: float | None = None
    x_max: float | None = None
    y_min: float | None = None
    y_max: float | None = None
    log_x: bool = True


def _read_rows(path: str, required: list[str]) -> list[dict]:
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [column for column in required if column not in header]
            if missing:
                raise FigureInputError(
                    f"{path}: header is missing column(s) {', '.join(missing)}"
                )
            rows = list(reader)
    except OSError as exc:
        raise FigureInputError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        raise FigureInputError(f"{path}: no data rows")
    return rows


def _parse_float(path: str, row_number: int, row: dict, column: str) -> float:
    try:
        return float(row[column])
    except (TypeError, ValueError) as exc:
        raise FigureInputError(
            f"{path}: bad value {row.get(column)!r} for {column} on row {row_number}"
        ) from exc


def load_theory(path: str) -> tuple[list[float], list[float]]:
    betas: list[float] = []
    bits: list[float] = []
    for i, row in enumerate(_read_rows(path, ["beta", "capacity_bits"]), start=2):
        if row.get("status", "ok") != "ok":
            continue  # non-converged grid points carry no capacity value
        betas.append(_parse_float(path, i, row, "beta"))
        bits.append(_parse_float(path, i, row, "capacity_bits"))
    if not betas:
        raise FigureInputError(f"{path}: no converged theory rows")
    return betas, bits


def load_simulation(path: str) -> list[dict]:
    """Rows grouped into series by (K, tie policy), file order preserved."""
    required = [
        "K",
        "beta_effective",
        "tie_policy",
        "mean_capacity_bits",
        "std_capacity_bits",
    ]
    series: dict[tuple[str, str], dict] = {}
    for i, row in enumerate(_read_rows(path, required), start=2):
        key = (row["K"], row["tie_policy"])
        entry = series.setdefault(
            key, {"users": row["K"], "policy": row["tie_policy"], "beta": [], "mean": [], "std": []}
        )
        entry["beta"].append(_parse_float(path, i, row, "beta_effective"))
        entry["mean"].append(_parse_float(path, i, row, "mean_capacity_bits"))
        entry["std"].append(_parse_float(path, i, row, "std_capacity_bits"))
    return list(series.values())


def render(spec: FigureSpec):
    """Build and save the figure; returns the matplotlib Figure."""
    theory_beta, theory_bits = load_theory(spec.theory_csv)
    simulations = [series for path in spec.simulation_csvs for series in load_simulation(path)]

    plt.rcParams["svg.hashsalt"] = "cdma-capacity-figure"
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(theory_beta, theory_bits, "-", color="black", label="asymptotic capacity")
    for series in simulations:
        ax.errorbar(
            series["beta"],
            series["mean"],
            yerr=series["std"],
            fmt="s",
            markerfacecolor="none",
            capsize=3,
            label=f"simulation K={series['users']} ({series['policy']})",
        )
    if spec.log_x:
        ax.set_xscale("log")
    if spec.x_min is not None or spec.x_max is not None:
        ax.set_xlim(left=spec.x_min, right=spec.x_max)
    if spec.y_min is not None or spec.y_max is not None:
        ax.set_ylim(bottom=spec.y_min, top=spec.y_max)
    ax.set_xlabel(r"load $\beta = K/N$")
    ax.set_ylabel("capacity [bit/symbol/user]")
    ax.legend()
    fig.tight_layout()

    if spec.output.lower().endswith(".svg"):
        metadata = {"Date": None}
    elif spec.output.lower().endswith(".pdf"):
        metadata = {"CreationDate": None}
    else:
        metadata = None
    fig.savefig(spec.output, metadata=metadata)
    return fig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--theory", required=True, help="theory CSV path")
    parser.add_argument(
        "--sim",
        action="append",
        default=[],
        help="simulation summary CSV; repeat for several series",
    )
    parser.add_argument("-o", "--output", default="capacity_figure.svg")
    parser.add_argument("--x-min", type=float, default=None)
    parser.add_argument("--x-max", type=float, default=None)
    parser.add_argument("--y-min", type=float, default=None)
    parser.add_argument("--y-max", type=float, default=None)
    parser.add_argument(
        "--linear-x", action="store_true", help="linear load axis (default: log)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        theory_csv=args.theory,
        simulation_csvs=tuple(args.sim),
        output=args.output,
        x_min=args.x_min,
        x_max=args.x_max,
        y_min=args.y_min,
        y_max=args.y_max,
        log_x=not args.linear_x,
    )
    try:
        fig = render(spec)
    except FigureInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    plt.close(fig)
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
