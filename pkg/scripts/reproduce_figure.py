#!/usr/bin/env python3
"""Reproduce the capacity-figure artifacts end to end.

Runs the cdma-capacity CLI to produce the asymptotic curve, the K=25
exhaustive simulation (100 trials at loads 0.5, 1.0, 2.0), and the
theory-vs-simulation comparison table, then renders the figure with the
plotfig script if it is present. Everything lands in --outdir.

The full run enumerates 300 x 2^24 codeword states; expect a couple of
minutes on a few cores. Use --quick for a small smoke-scale pass.
"""

import argparse
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
PLOT_SCRIPT = REPO_ROOT / "plotfig" / "plot_capacity.py"


def run(cmd: list[str]) -> None:
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--seed", type=int, default=20250811)
    parser.add_argument("--workers", default="auto")
    parser.add_argument(
        "--quick", action="store_true", help="small users/trials smoke run"
    )
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    theory_csv = outdir / "theory.csv"
    sim_csv = outdir / "simulation.csv"
    trials_csv = outdir / "per_trial.csv"
    compare_csv = outdir / "compare.csv"
    figure = outdir / "capacity_figure.svg"

    users = "10" if args.quick else "25"
    trials = "10" if args.quick else "100"
    cli = [sys.executable, "-m", "cdma_capacity"]

    run(cli + ["theory", "-o", str(theory_csv)])
    run(
        cli
        + [
            "simulate",
            "--users",
            users,
            "--beta",
            "0.5",
            "--beta",
            "1.0",
            "--beta",
            "2.0",
            "--trials",
            trials,
            "--seed",
            str(args.seed),
            "--workers",
            args.workers,
            "--per-trial",
            str(trials_csv),
            "-o",
            str(sim_csv),
        ]
    )
    run(
        cli
        + [
            "compare",
            "--theory",
            str(theory_csv),
            "--simulation",
            str(sim_csv),
            "-o",
            str(compare_csv),
        ]
    )

    if PLOT_SCRIPT.exists():
        run(
            [
                sys.executable,
                str(PLOT_SCRIPT),
                "--theory",
                str(theory_csv),
                "--sim",
                str(sim_csv),
                "-o",
                str(figure),
            ]
        )
    else:
        print("plotfig/ not present; skipping figure render")

    print(f"artifacts in {outdir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
