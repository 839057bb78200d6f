"""Command-line front end: theory sweeps, simulations, and comparisons.

Every command writes schema-stable CSV (12 significant digits, C locale)
plus a JSON manifest sidecar recording the full parameter set, so any
output can be regenerated exactly (timestamps aside) by re-running the
recorded command.

Exit codes: 0 success, 1 usage or input error, 2 solver non-convergence,
3 exhaustive-enumeration resource guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

from . import __version__
from .errors import ConvergenceError, DomainError, ResourceLimitError
from .simulator import TiePolicy, run_simulation
from .theory import DEFAULT_GRID, GridSpec, SolverConfig, sweep

THEORY_HEADER = [
    "beta",
    "a_star",
    "t_star",
    "capacity_nats",
    "capacity_bits",
    "iterations",
    "residual",
    "status",
]
SUMMARY_HEADER = [
    "K",
    "N",
    "beta_requested",
    "beta_effective",
    "tie_policy",
    "trials",
    "mean_capacity_bits",
    "std_capacity_bits",
    "master_seed",
]
PER_TRIAL_HEADER = ["point_index", "trial", "seed", "count", "capacity_bits"]
COMPARE_HEADER = [
    "beta_effective",
    "c_infinity_bits",
    "mean_c_k_bits",
    "std_c_k_bits",
    "deviation_bits",
    "deviation_in_sigmas",
    "interpolated",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_RESOURCE = 3

WORKERS_ENV_VAR = "CDMA_CAPACITY_WORKERS"


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    solver non-convergence, so remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_rows_atomic(path: str, header: list[str], rows: list[list]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(path: str, command: str, parameters: dict) -> None:
    manifest = {
        "command": command,
        "parameters": parameters,
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp, path + ".manifest.json")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_workers(flag_value: str) -> int:
    if flag_value != "auto":
        workers = int(flag_value)
    elif os.environ.get(WORKERS_ENV_VAR):
        workers = int(os.environ[WORKERS_ENV_VAR])
    else:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise DomainError(f"worker count must be >= 1, got {workers}")
    return workers


def cmd_theory(args) -> int:
    if args.log_grid and args.linear_grid:
        print("error: --log-grid and --linear-grid are mutually exclusive", file=sys.stderr)
        return EXIT_USAGE
    grid = GridSpec(
        beta_min=args.beta_min,
        beta_max=args.beta_max,
        points=args.points,
        log=not args.linear_grid,
    )
    cfg = SolverConfig(
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        initial_a=args.initial_a,
        damping=args.damping,
    )
    curve = sweep(grid, cfg)

    failed = {f.index: f for f in curve.failures}
    solutions = iter(curve.solutions)
    rows = []
    for i, beta in enumerate(grid.values()):
        if i in failed:
            rows.append([float(beta), "", "", "", "", "", "", "failed"])
            continue
        s = next(solutions)
        rows.append(
            [
                s.beta,
                s.a_star,
                s.t_star,
                s.capacity_nats,
                s.capacity_bits,
                s.iterations,
                s.residual,
                "ok",
            ]
        )
    _write_rows_atomic(args.output, THEORY_HEADER, rows)
    _write_manifest(
        args.output,
        "theory",
        {
            "beta_min": args.beta_min,
            "beta_max": args.beta_max,
            "points": args.points,
            "log_grid": not args.linear_grid,
            "tolerance": args.tolerance,
            "max_iterations": args.max_iterations,
            "initial_a": args.initial_a,
            "damping": args.damping,
            "output": args.output,
        },
    )
    if failed:
        print(
            f"warning: {len(failed)} of {args.points} grid points did not converge",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_simulate(args) -> int:
    policy = TiePolicy(args.tie_policy)
    workers = _resolve_workers(args.workers)
    summaries = run_simulation(
        users=args.users,
        betas=args.beta,
        trials=args.trials,
        master_seed=args.seed,
        policy=policy,
        workers=workers,
    )
    rows = [
        [
            s.users,
            s.n_chips,
            s.beta_requested,
            s.beta_effective,
            s.tie_policy.value,
            s.trials,
            s.mean_capacity_bits,
            s.std_capacity_bits,
            s.master_seed,
        ]
        for s in summaries
    ]
    _write_rows_atomic(args.output, SUMMARY_HEADER, rows)
    parameters = {
        "users": args.users,
        "beta": args.beta,
        "trials": args.trials,
        "seed": args.seed,
        "tie_policy": args.tie_policy,
        "workers": args.workers,
        "output": args.output,
        "per_trial": args.per_trial,
    }
    _write_manifest(args.output, "simulate", parameters)

    if args.per_trial:
        trial_rows = [
            [i, r.trial_index, r.seed, r.valid_count, r.capacity_bits]
            for i, s in enumerate(summaries)
            for r in s.results
        ]
        _write_rows_atomic(args.per_trial, PER_TRIAL_HEADER, trial_rows)
        _write_manifest(args.per_trial, "simulate", parameters)
    return EXIT_OK


def _read_csv(path: str, required: list[str]) -> list[dict]:
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [c for c in required if c not in header]
            if missing:
                raise DomainError(f"{path}: missing column(s) {', '.join(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise DomainError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return rows


def cmd_compare(args) -> int:
    theory_rows = _read_csv(args.theory, ["beta", "capacity_bits"])
    sim_rows = _read_csv(args.simulation, ["beta_effective", "mean_capacity_bits", "std_capacity_bits"])

    curve = []
    for i, row in enumerate(theory_rows, start=2):
        if row.get("status", "ok") != "ok":
            continue
        try:
            curve.append((float(row["beta"]), float(row["capacity_bits"])))
        except ValueError as exc:
            raise DomainError(f"{args.theory}: bad numeric value on row {i}") from exc
    if not curve:
        raise DomainError(f"{args.theory}: no converged theory rows")
    curve.sort()
    betas = [b for b, _ in curve]
    bits = [c for _, c in curve]

    out_rows = []
    for i, row in enumerate(sim_rows, start=2):
        try:
            beta_eff = float(row["beta_effective"])
            mean_ck = float(row["mean_capacity_bits"])
            std_ck = float(row["std_capacity_bits"])
        except ValueError as exc:
            raise DomainError(f"{args.simulation}: bad numeric value on row {i}") from exc
        c_inf, interpolated = _theory_at(betas, bits, beta_eff)
        if c_inf is None:
            raise DomainError(
                f"{args.simulation}: row {i} beta_effective={beta_eff:g} lies outside "
                f"the theory grid [{betas[0]:g}, {betas[-1]:g}]"
            )
        deviation = mean_ck - c_inf
        if std_ck > 0.0:
            sigmas = abs(deviation) / std_ck
        else:
            sigmas = 0.0 if deviation == 0.0 else math.inf
        out_rows.append([beta_eff, c_inf, mean_ck, std_ck, deviation, sigmas, interpolated])

    _write_rows_atomic(args.output, COMPARE_HEADER, out_rows)
    _write_manifest(
        args.output,
        "compare",
        {"theory": args.theory, "simulation": args.simulation, "output": args.output},
    )
    return EXIT_OK


def _theory_at(betas: list[float], bits: list[float], beta_eff: float):
    """Theory capacity at beta_eff: exact grid hit, else log-beta interpolation.

    Returns (value, interpolated-flag), or (None, _) outside the grid.
    """
    for b, c in zip(betas, bits):
        if math.isclose(b, beta_eff, rel_tol=1e-9, abs_tol=0.0):
            return c, 0
    if beta_eff < betas[0] or beta_eff > betas[-1]:
        return None, 0
    for (b0, c0), (b1, c1) in zip(zip(betas, bits), zip(betas[1:], bits[1:])):
        if b0 <= beta_eff <= b1:
            frac = math.log(beta_eff / b0) / math.log(b1 / b0)
            return c0 + frac * (c1 - c0), 1
    return None, 0


def build_parser() -> _Parser:
    parser = _Parser(prog="cdma-capacity", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="solve the asymptotic capacity curve")
    p_theory.add_argument("--beta-min", type=float, default=DEFAULT_GRID.beta_min)
    p_theory.add_argument("--beta-max", type=float, default=DEFAULT_GRID.beta_max)
    p_theory.add_argument("--points", type=int, default=DEFAULT_GRID.points)
    p_theory.add_argument(
        "--log-grid", action="store_true", help="logarithmic grid (the default)"
    )
    p_theory.add_argument("--linear-grid", action="store_true")
    p_theory.add_argument("--tolerance", type=float, default=SolverConfig.tolerance)
    p_theory.add_argument(
        "--max-iterations", type=int, default=SolverConfig.max_iterations
    )
    p_theory.add_argument("--initial-a", type=float, default=SolverConfig.initial_a)
    p_theory.add_argument("--damping", type=float, default=SolverConfig.damping)
    p_theory.add_argument("-o", "--output", default="theory.csv")
    p_theory.set_defaults(func=cmd_theory)

    p_sim = sub.add_parser("simulate", help="exhaustive finite-size capacity counts")
    p_sim.add_argument("--users", type=int, required=True, help="number of users K")
    p_sim.add_argument(
        "--beta",
        type=float,
        action="append",
        required=True,
        help="requested load; repeat for several points",
    )
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0, help="master seed")
    p_sim.add_argument(
        "--tie-policy", choices=[p.value for p in TiePolicy], default="strict"
    )
    p_sim.add_argument(
        "--workers",
        default="auto",
        help=f"thread count, or 'auto' (env {WORKERS_ENV_VAR} overrides auto)",
    )
    p_sim.add_argument("--per-trial", default=None, help="also write per-trial CSV here")
    p_sim.add_argument("-o", "--output", default="simulation.csv")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="join simulation means against theory")
    p_cmp.add_argument("--theory", required=True, help="CSV from the theory command")
    p_cmp.add_argument(
        "--simulation", required=True, help="summary CSV from the simulate command"
    )
    p_cmp.add_argument("-o", "--output", default="compare.csv")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    raise SystemExit(main())
