"""Command-line front end for designing and evaluating screening schemes.

Subcommands cover the library surface: ``optimal-size`` and ``partition``
for fixed-size designs, ``nested`` for the optimal nested policy (with
JSON persistence), ``evaluate`` and ``simulate`` for the evaluation
engine, ``bound`` for the information bounds, ``minimax`` for bound-only
design, and ``table`` to regenerate the three reference tables.

Exit codes: 0 on success, 1 on runtime or file errors, 2 on usage errors.
All numeric output is printed with a fixed number of significant digits
(default 5, ``--precision``) so reports diff cleanly; serialized designs
keep full precision so they round-trip exactly.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .bounds import HUFFMAN_STATE_CAP, bound_report
from .core import FIXED_SIZE_PROCEDURES, Procedure
from .evaluate import evaluate_policy_mismatch, monte_carlo_expected_tests
from .nested import policy_from_json, policy_to_json, solve_nested
from .partition import optimal_partition_direct, optimal_partition_dp
from .robustness import DEFAULT_GRID_STEP, minimax_group_size, robustness_table
from .sizing import optimal_group_size

__all__ = ["build_parser", "entrypoint", "main"]

# The prevalence grid of the two reference design tables.
TABLE_P_GRID = (0.001, 0.005, 0.01, 0.03, 0.05, 0.07, 0.10, 0.13,
                0.15, 0.20, 0.25, 0.27, 0.30, 0.32, 0.35, 0.38)

# True-prevalence columns of the robustness table for its three standard
# upper bounds; other bounds fall back to U/100, U/10, U/2, U.
ROBUSTNESS_P_COLUMNS = {
    0.05: (0.001, 0.005, 0.01, 0.05),
    0.10: (0.001, 0.01, 0.05, 0.10),
    0.20: (0.001, 0.01, 0.1, 0.2),
}

DEFAULT_SEED = 0
SEED_ENV_VAR = "GT_DESIGNER_SEED"


def _fmt(value, precision: int) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


def _emit_record(pairs, fmt: str, precision: int, stream) -> None:
    """One logical record as key:value text, a one-row CSV, or a JSON object."""
    if fmt == "json":
        json.dump(dict(pairs), stream)
        stream.write("\n")
    elif fmt == "csv":
        writer = csv.writer(stream)
        writer.writerow([key for key, _ in pairs])
        writer.writerow([_fmt(value, precision) for _, value in pairs])
    else:
        for key, value in pairs:
            stream.write(f"{key}: {_fmt(value, precision)}\n")


def _emit_rows(headers, rows, fmt: str, precision: int, stream) -> None:
    """A table as aligned text, CSV, or a JSON array of objects."""
    if fmt == "json":
        json.dump([dict(zip(headers, row)) for row in rows], stream)
        stream.write("\n")
        return
    formatted = [[_fmt(value, precision) for value in row] for row in rows]
    if fmt == "csv":
        writer = csv.writer(stream)
        writer.writerow(headers)
        writer.writerows(formatted)
        return
    widths = [
        max(len(str(h)), *(len(r[i]) for r in formatted)) if formatted else len(str(h))
        for i, h in enumerate(headers)
    ]
    stream.write("  ".join(str(h).ljust(w) for h, w in zip(headers, widths)).rstrip())
    stream.write("\n")
    for row in formatted:
        stream.write("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        stream.write("\n")


def _groups_notation(partition) -> str:
    return ", ".join(f"{count}×{size}"
                     for count, size in partition.grouped_sizes())


def _sizes_notation(partition) -> str:
    return "{" + ", ".join(str(s) for s in partition.sizes) + "}"


def _parse_probability(parser: argparse.ArgumentParser, value: float,
                       name: str) -> float:
    if not (0.0 < value < 1.0):
        parser.error(f"{name} must lie strictly between 0 and 1, got {value}")
    return value


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(
                f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _any_procedure(parser, token: str) -> Procedure:
    try:
        return Procedure.parse(token)
    except ValueError as exc:
        parser.error(str(exc))


def _fixed_procedure(parser, token: str) -> Procedure:
    proc = _any_procedure(parser, token)
    if proc not in FIXED_SIZE_PROCEDURES:
        parser.error(f"procedure {token!r} has no fixed group size; "
                     "use the 'nested' command")
    return proc


def _add_format_options(sub) -> None:
    sub.add_argument("--format", choices=("text", "csv", "json"),
                     default="text", help="output format (default text)")
    sub.add_argument("--precision", type=int, default=5, metavar="DIGITS",
                     help="significant digits in text/CSV output (default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtdesign",
        description="Design and evaluate pooled screening schemes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_size = sub.add_parser(
        "optimal-size", help="optimal common group size for a procedure")
    p_size.add_argument("--procedure", required=True, metavar="{D,Dprime,S}")
    p_size.add_argument("--p", required=True, type=float,
                        help="prevalence in (0, 1)")
    _add_format_options(p_size)

    p_part = sub.add_parser(
        "partition", help="optimal division of a finite population")
    p_part.add_argument("--procedure", required=True, metavar="{D,Dprime,S}")
    p_part.add_argument("--N", required=True, type=int, help="population size")
    p_part.add_argument("--p", required=True, type=float)
    p_part.add_argument("--method", choices=("dp", "direct"), default="dp")
    _add_format_options(p_part)

    p_nested = sub.add_parser(
        "nested", help="solve the optimal nested screening policy")
    p_nested.add_argument("--N", required=True, type=int)
    p_nested.add_argument("--p", required=True, type=float)
    p_nested.add_argument("--policy-out", metavar="PATH",
                          help="write the solved policy as JSON")
    p_nested.add_argument("--verbose", action="store_true",
                          help="also print the split-size decision table")
    _add_format_options(p_nested)

    p_eval = sub.add_parser(
        "evaluate", help="expected tests of a saved policy at a true prevalence")
    p_eval.add_argument("--policy", required=True, metavar="PATH")
    p_eval.add_argument("--p-true", required=True, type=float)
    _add_format_options(p_eval)

    p_sim = sub.add_parser(
        "simulate", help="Monte Carlo estimate for an optimally designed scheme")
    p_sim.add_argument("--procedure", required=True, metavar="{D,Dprime,S,R1}")
    p_sim.add_argument("--N", required=True, type=int)
    p_sim.add_argument("--p", required=True, type=float)
    p_sim.add_argument("--replicates", required=True, type=int)
    p_sim.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default ${SEED_ENV_VAR} or {DEFAULT_SEED})")
    _add_format_options(p_sim)

    p_bound = sub.add_parser(
        "bound", help="information lower bounds on any scheme's expected tests")
    p_bound.add_argument("--N", required=True, type=int)
    p_bound.add_argument("--p", required=True, type=float)
    _add_format_options(p_bound)

    p_mm = sub.add_parser(
        "minimax", help="group size minimising worst-case regret under a bound")
    p_mm.add_argument("--procedure", required=True, metavar="{D,Dprime,S}")
    p_mm.add_argument("--U", required=True, type=float,
                      help="upper bound on the prevalence")
    p_mm.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    p_mm.add_argument("--sup", choices=("closed", "grid"), default="closed",
                      help="worst-regret estimator: grid maximum closed with "
                           "the prevalence-to-zero limit, or the bare grid "
                           "maximum (default closed)")
    _add_format_options(p_mm)

    p_table = sub.add_parser(
        "table", help="regenerate reference table 1, 2 or 3")
    p_table.add_argument("--which", required=True, type=int, choices=(1, 2, 3))
    p_table.add_argument("--U", type=float,
                         help="prevalence upper bound (required for table 3)")
    p_table.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    p_table.add_argument("--sup", choices=("closed", "grid"), default="closed",
                         help="worst-regret estimator for table 3 "
                              "(default closed)")
    p_table.add_argument("--N", type=int, default=100,
                         help="population size for tables 2 and 3 (default 100)")
    p_table.add_argument("--out", metavar="PATH",
                         help="write the table to a file instead of stdout")
    _add_format_options(p_table)

    return parser


def _cmd_optimal_size(args, parser, stream) -> int:
    proc = _fixed_procedure(parser, args.procedure)
    p = _parse_probability(parser, args.p, "--p")
    result = optimal_group_size(proc, p)
    pairs = [
        ("procedure", proc.value),
        ("p", p),
        ("k_star", result.k_star),
        ("cost_per_person", result.cost_per_person),
        ("cost_per_100", 100.0 * result.cost_per_person),
    ]
    if result.co_optimal is not None:
        pairs.append(("co_optimal", result.co_optimal))
    _emit_record(pairs, args.format, args.precision, stream)
    return 0


def _cmd_partition(args, parser, stream) -> int:
    proc = _fixed_procedure(parser, args.procedure)
    p = _parse_probability(parser, args.p, "--p")
    if args.N < 1:
        parser.error(f"--N must be >= 1, got {args.N}")
    if args.method == "dp":
        part = optimal_partition_dp(proc, args.N, p)
    else:
        part = optimal_partition_direct(proc, args.N, p).partition
    if args.format == "json":
        stream.write(json.dumps(part.to_dict()))
        stream.write("\n")
        return 0
    pairs = [
        ("procedure", proc.value),
        ("N", args.N),
        ("p", p),
        ("method", args.method),
        ("groups", _groups_notation(part)),
        ("sizes", _sizes_notation(part)),
        ("total_expected_tests", part.total_expected_tests),
    ]
    _emit_record(pairs, args.format, args.precision, stream)
    return 0


def _cmd_nested(args, parser, stream) -> int:
    p = _parse_probability(parser, args.p, "--p")
    if args.N < 1:
        parser.error(f"--N must be >= 1, got {args.N}")
    policy = solve_nested(args.N, p)
    if args.policy_out:
        with open(args.policy_out, "w", encoding="utf-8") as handle:
            handle.write(policy_to_json(policy))
            handle.write("\n")
    pairs = [
        ("N", args.N),
        ("p", p),
        ("expected_tests", policy.expected_tests),
    ]
    _emit_record(pairs, args.format, args.precision, stream)
    if args.verbose and args.N >= 2 and args.format == "text":
        ns = range(args.N, 1, -1)
        stream.write("n   : " + " ".join(str(n) for n in ns) + "\n")
        stream.write("x_H : " + " ".join(str(policy.x_h[n]) for n in ns) + "\n")
        stream.write("x_G : " + " ".join(str(policy.x_g[n]) for n in ns) + "\n")
    return 0


def _cmd_evaluate(args, parser, stream) -> int:
    p_true = _parse_probability(parser, args.p_true, "--p-true")
    with open(args.policy, "r", encoding="utf-8") as handle:
        policy = policy_from_json(handle.read())
    expected = evaluate_policy_mismatch(policy, p_true)
    _emit_record(
        [
            ("policy", args.policy),
            ("design_p", policy.design_p.p),
            ("N", policy.n),
            ("p_true", p_true),
            ("expected_tests", expected),
        ],
        args.format, args.precision, stream,
    )
    return 0


def _cmd_simulate(args, parser, stream) -> int:
    proc = _any_procedure(parser, args.procedure)
    p = _parse_probability(parser, args.p, "--p")
    if args.N < 1:
        parser.error(f"--N must be >= 1, got {args.N}")
    if args.replicates < 1:
        parser.error(f"--replicates must be >= 1, got {args.replicates}")
    seed = args.seed if args.seed is not None else _default_seed()
    if proc is Procedure.OPTIMAL_NESTED:
        design = solve_nested(args.N, p)
    else:
        design = optimal_partition_dp(proc, args.N, p)
    report = monte_carlo_expected_tests(proc, design, p, args.replicates, seed)
    _emit_record(
        [
            ("procedure", proc.value),
            ("N", args.N),
            ("p", p),
            ("replicates", args.replicates),
            ("seed", seed),
            ("mean_tests", report.expected_tests),
            ("std_error", report.std_error),
        ],
        args.format, args.precision, stream,
    )
    return 0


def _cmd_bound(args, parser, stream) -> int:
    p = _parse_probability(parser, args.p, "--p")
    if args.N < 1:
        parser.error(f"--N must be >= 1, got {args.N}")
    report = bound_report(args.N, p)
    pairs = [
        ("N", args.N),
        ("p", p),
        ("entropy_bound", report.entropy_bound),
    ]
    if report.huffman_bound is not None:
        pairs.append(("huffman_bound", report.huffman_bound))
    else:
        pairs.append(("huffman_bound_note",
                      f"omitted: N > {HUFFMAN_STATE_CAP} state cap"))
    _emit_record(pairs, args.format, args.precision, stream)
    return 0


def _cmd_minimax(args, parser, stream) -> int:
    proc = _fixed_procedure(parser, args.procedure)
    u = _parse_probability(parser, args.U, "--U")
    if not (0.0 < args.grid_step <= u / 10.0):
        parser.error(f"--grid-step must lie in (0, U/10], got {args.grid_step}")
    result = minimax_group_size(proc, u, args.grid_step,
                                zero_limit=args.sup == "closed")
    _emit_record(
        [
            ("procedure", proc.value),
            ("U", u),
            ("grid_step", args.grid_step),
            ("sup", args.sup),
            ("k_star_star", result.k_star_star),
            ("worst_regret", result.worst_regret),
            ("worst_regret_per_100", 100.0 * result.worst_regret),
        ],
        args.format, args.precision, stream,
    )
    return 0


def _table_1_rows():
    rows = []
    for p in TABLE_P_GRID:
        cells = [p]
        for proc in FIXED_SIZE_PROCEDURES:
            best = optimal_group_size(proc, p)
            cells.extend([best.k_star, 100.0 * best.cost_per_person])
        rows.append(cells)
    headers = ["p", "k_D", "100E_D", "k_Dprime", "100E_Dprime", "k_S", "100E_S"]
    return headers, rows


def _table_2_rows(n: int):
    from .bounds import entropy_bound

    rows = []
    for p in TABLE_P_GRID:
        cells = [p]
        for proc in FIXED_SIZE_PROCEDURES:
            part = optimal_partition_direct(proc, n, p).partition
            cells.extend([_groups_notation(part), part.total_expected_tests])
        cells.append(solve_nested(n, p).expected_tests)
        cells.append(entropy_bound(n, p))
        rows.append(cells)
    headers = ["p", "OP_D", "H_D", "OP_Dprime", "H_Dprime", "OP_S", "H_S",
               "E1", "H(p)"]
    return headers, rows


def _table_3_rows(u: float, n: int, grid_step: float, zero_limit: bool):
    key = round(u, 10)
    p_list = ROBUSTNESS_P_COLUMNS.get(
        key, (u / 100.0, u / 10.0, u / 2.0, u))
    table = robustness_table(u, p_list, n, grid_step, zero_limit=zero_limit)
    headers = ["p", "100E_D", "100E_Dprime", "100E_S", "H1", "H1star",
               "k_D", "k_Dprime", "k_S"]
    rows = [
        [row.p_true, row.dorfman, row.modified_dorfman, row.sterrett,
         row.nested_at_bound, row.nested_at_half_bound,
         table.minimax_sizes["D"], table.minimax_sizes["Dprime"],
         table.minimax_sizes["S"]]
        for row in table.rows
    ]
    return headers, rows


def _cmd_table(args, parser, stream) -> int:
    if args.which == 3:
        if args.U is None:
            parser.error("table 3 requires --U")
        u = _parse_probability(parser, args.U, "--U")
        headers, rows = _table_3_rows(u, args.N, args.grid_step,
                                      args.sup == "closed")
    elif args.which == 2:
        headers, rows = _table_2_rows(args.N)
    else:
        headers, rows = _table_1_rows()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            _emit_rows(headers, rows, args.format, args.precision, handle)
    else:
        _emit_rows(headers, rows, args.format, args.precision, stream)
    return 0


_COMMANDS = {
    "optimal-size": _cmd_optimal_size,
    "partition": _cmd_partition,
    "nested": _cmd_nested,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "bound": _cmd_bound,
    "minimax": _cmd_minimax,
    "table": _cmd_table,
}


def main(argv=None, stream=None) -> int:
    """Run the CLI; returns the process exit code.

    Usage errors exit with code 2 via argparse; runtime errors (unreadable
    or unwritable files, malformed policies) print a diagnostic and return 1.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    out = stream if stream is not None else sys.stdout
    try:
        return _COMMANDS[args.command](args, parser, out)
    except (OSError, ValueError) as exc:
        print(f"gtdesign: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
