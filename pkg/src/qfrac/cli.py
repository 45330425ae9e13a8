"""Command-line interface.

Subcommands: ``run``, ``compare``, ``count``, ``plan`` and ``sweep``.
Exit status is 0 on success, 1 on a runtime failure and 2 on bad usage or
a predicate that fails to parse.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
import time

from . import __version__
from .estimator import hoeffding_epsilon, plan_shots
from .experiment import (
    FAMILIES,
    SWEEP_DELTA,
    ExperimentConfig,
    TemplateError,
    compare_methods,
    quantum_sampler,
    resolve_n_jobs,
    sweep_width,
)
from .predicate import PredicateError, build_oracle_table, exact_fraction, parse_predicate
from .schema import SCHEMA_VERSION, validate_record

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(64)
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _unit(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in the open interval (0, 1)")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _width_list(text: str) -> list[int]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("the qubits list is empty")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid qubits list {text!r}") from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--predicate", required=True, help="condition on x, e.g. 'x*x mod 16 == 1'")
    p.add_argument("--qubits", required=True, type=int, help="register width k (1..24)")
    p.add_argument("--shots", type=_positive)
    p.add_argument("--epsilon", type=_unit)
    p.add_argument("--delta", type=_unit)
    p.add_argument("--seed", type=_seed, default=0, help="u64 seed or 'random' (default 0)")
    p.add_argument("--alpha", type=_unit, default=0.05)
    p.add_argument("--ci", choices=("wilson", "clopper-pearson"), default="wilson")
    p.add_argument("--mode", choices=("statevector", "analytic"), default="statevector")
    p.add_argument("--verify", action="store_true", help="attach the brute-force fraction")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfrac",
        description="Estimate the fraction of k-bit inputs satisfying a condition "
        "by measuring an oracle ancilla.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("run", help="run the quantum sampling experiment"))
    _add_run_flags(sub.add_parser("compare", help="quantum vs classical uniform sampling"))

    p = sub.add_parser("count", help="exact brute-force solution count")
    p.add_argument("--predicate", required=True)
    p.add_argument("--qubits", required=True, type=int)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")

    p = sub.add_parser("plan", help="shots needed for accuracy epsilon at confidence 1-delta")
    p.add_argument("--epsilon", required=True, type=_unit)
    p.add_argument("--delta", required=True, type=_unit)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")

    p = sub.add_parser("sweep", help="repeat a run across register widths")
    p.add_argument(
        "--fraction-family",
        required=True,
        help=f"family name ({', '.join(FAMILIES)}) or a predicate template using {{k}}",
    )
    p.add_argument("--qubits-list", required=True, type=_width_list, help="e.g. 4,8,12,16")
    p.add_argument("--shots", required=True, type=_positive)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--alpha", type=_unit, default=0.05)
    p.add_argument("--ci", choices=("wilson", "clopper-pearson"), default="wilson")
    p.add_argument("--mode", choices=("statevector", "analytic"), default="statevector")
    p.add_argument("--delta", type=_unit, default=SWEEP_DELTA, help="failure probability for the bound column")
    p.add_argument("--format", choices=("json", "csv", "text"), default="csv")
    return parser


# -- commands ------------------------------------------------------------------------


def _config(args) -> ExperimentConfig:
    if args.shots is not None and (args.epsilon is not None or args.delta is not None):
        raise UsageError("--shots conflicts with --epsilon/--delta")
    if args.shots is None and (args.epsilon is None or args.delta is None):
        raise UsageError("give --shots, or both --epsilon and --delta")
    return ExperimentConfig(
        predicate_text=args.predicate,
        width=args.qubits,
        shots=args.shots,
        epsilon=args.epsilon,
        delta=args.delta,
        seed=args.seed,
        ci_method=args.ci,
        alpha=args.alpha,
        verify=args.verify,
        mode=args.mode,
        n_jobs=resolve_n_jobs(),
    )


def _config_echo(config: ExperimentConfig) -> dict:
    return {
        "predicate": config.predicate_text,
        "k": config.width,
        "shots": config.plan.shots,
        "epsilon": config.epsilon,
        "delta": config.delta,
        "seed": config.seed,
        "alpha": config.alpha,
        "ci_method": config.ci_method,
        "mode": config.mode,
        "verify": config.verify,
    }


def cmd_run(args) -> dict:
    config = _config(args)
    sampler = quantum_sampler(config).fit(config.predicate_text)
    return {
        "config": _config_echo(config),
        "result": sampler.result_.to_dict(),
        "timing": dict(sampler.timings_),
    }


def cmd_compare(args) -> dict:
    config = _config(args)
    timings: dict = {}
    report = compare_methods(config, timings)
    return {"config": _config_echo(config), "result": report.to_dict(), "timing": timings}


def cmd_count(args) -> dict:
    t0 = time.perf_counter()
    table = build_oracle_table(parse_predicate(args.predicate, args.qubits))
    elapsed = time.perf_counter() - t0
    return {
        "config": {"predicate": args.predicate, "k": args.qubits},
        "result": {
            "solution_count": table.solution_count,
            "domain_size": table.size,
            "exact_f": str(exact_fraction(table)),
        },
        "timing": {"oracle": elapsed},
    }


def cmd_plan(args) -> dict:
    plan = plan_shots(args.epsilon, args.delta)
    bound = (
        f"P = ceil(ln(2/delta) / (2 epsilon^2)) = {plan.shots} shots give "
        f"Pr[|f_hat - f| > {plan.epsilon}] <= {plan.delta} for any f and any k"
    )
    return {
        "config": {"epsilon": args.epsilon, "delta": args.delta},
        "result": {"shots": plan.shots, "epsilon": plan.epsilon, "delta": plan.delta, "bound": bound},
        "timing": {},
    }


def cmd_sweep(args) -> dict:
    t0 = time.perf_counter()
    rows = sweep_width(
        args.fraction_family,
        args.qubits_list,
        args.shots,
        args.seed,
        mode=args.mode,
        alpha=args.alpha,
        ci_method=args.ci,
        delta=args.delta,
        n_jobs=resolve_n_jobs(),
    )
    return {
        "config": {
            "template": args.fraction_family,
            "qubits_list": args.qubits_list,
            "shots": args.shots,
            "seed": args.seed,
            "alpha": args.alpha,
            "ci_method": args.ci.replace("-", "_"),
            "mode": args.mode,
            "delta": args.delta,
            "hoeffding_bound_at_delta": hoeffding_epsilon(args.shots, args.delta),
        },
        "result": {"rows": [row.to_dict() for row in rows]},
        "timing": {"total": time.perf_counter() - t0},
    }


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "count": cmd_count,
    "plan": cmd_plan,
    "sweep": cmd_sweep,
}


# -- rendering ------------------------------------------------------------------------


def to_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True)


def _csv_rows(record: dict) -> list[dict]:
    command, config, result = record["command"], record["config"], record["result"]
    if command == "run":
        return [{**config, **result}]
    if command == "compare":
        rows = []
        for path in ("quantum", "classical"):
            rows.append({
                "path": path,
                **{k: v for k, v in config.items() if k != "seed"},
                **result[path],
                "abs_difference": result["abs_difference"],
                "ci_overlap": result["ci_overlap"],
            })
        return rows
    if command == "sweep":
        return result["rows"]
    return [{**config, **result}]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def to_csv(record: dict) -> str:
    rows = _csv_rows(record)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _fmt_estimate(label: str, r: dict) -> list[str]:
    pct = round(100 * (1 - r["alpha"]), 6)
    lines = [
        f"{label}f_hat = {r['f_hat']:.6g}  ({r['ones']}/{r['shots']} ones)",
        f"{label}{pct:g}% {r['ci_method']} interval: [{r['ci_low']:.6g}, {r['ci_high']:.6g}]",
    ]
    if r["exact_f"] is not None:
        lines.append(f"{label}exact f = {r['exact_f']}  |f_hat - f| = {r['abs_error']:.6g}")
    return lines


def to_text(record: dict) -> str:
    command, result = record["command"], record["result"]
    if command == "run":
        lines = _fmt_estimate("", result)
    elif command == "compare":
        lines = _fmt_estimate("quantum:   ", result["quantum"]) + _fmt_estimate(
            "classical: ", result["classical"]
        )
        lines.append(f"abs difference = {result['abs_difference']:.6g}")
        lines.append(f"intervals overlap: {'yes' if result['ci_overlap'] else 'no'}")
    elif command == "count":
        lines = [
            f"S = {result['solution_count']}",
            f"2^k = {result['domain_size']}",
            f"f = {result['exact_f']}",
        ]
    elif command == "plan":
        lines = [f"P = {result['shots']}", result["bound"]]
    else:
        lines = [f"{'k':>3} {'f_hat':>10} {'exact_f':>8} {'abs_error':>10} {'bound':>10} {'seconds':>9}"]
        for row in result["rows"]:
            lines.append(
                f"{row['k']:>3} {row['f_hat']:>10.6f} {row['exact_f']:>8} "
                f"{row['abs_error']:>10.6f} {row['hoeffding_bound']:>10.6f} {row['wall_clock_s']:>9.3f}"
            )
    return "\n".join(lines) + "\n"


RENDERERS = {"json": lambda r: to_json(r) + "\n", "csv": to_csv, "text": to_text}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        body = COMMANDS[args.command](args)
    except (UsageError, PredicateError, TemplateError, ValueError, TypeError) as exc:
        print(f"qfrac {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"qfrac {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    record = {"schema_version": SCHEMA_VERSION, "command": args.command, **body}
    try:
        validate_record(record)
    except Exception as exc:  # noqa: BLE001
        print(f"qfrac {args.command}: internal error, malformed record: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(RENDERERS[args.format](record))
    return EXIT_OK


def entry_point() -> None:
    sys.exit(main())
