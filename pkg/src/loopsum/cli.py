"""Command-line driver.

Exit status is 0 when every loop is summarized (or every assertion
holds), 1 on a summarization failure, a violated or undecided assertion,
or an oracle mismatch, and 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .cfg import build_cfg, canonicalize
from .frontend import ParseError, parse_file
from .graph import build_spath_graph, contract
from .oracle import DEFAULT_FUEL, Status, interpret, sample_inputs
from .pipeline import Options, summarize_program
from .program import ProgramAst
from .solver.smtlib import DEFAULT_SMT_CMD
from .spath import DEFAULT_MAX_PATHS, LoweringError, PathExplosionError, dump_spaths, enumerate_spaths, prune_invalid
from .summarize import DEFAULT_MAX_CASES
from .summarize.oscillation import DEFAULT_MAX_VALUES
from .verify import HOLDS, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_REPORTED_MISMATCHES = 10


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="program in the while-language (.wl)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled inputs")
    common.add_argument("--inputs", type=_positive, default=1000, help="number of sampled inputs")
    common.add_argument("--max-interval-values", type=_positive, default=DEFAULT_MAX_VALUES)
    common.add_argument("--max-cases", type=_positive, default=DEFAULT_MAX_CASES)
    common.add_argument("--max-paths", type=_positive, default=DEFAULT_MAX_PATHS)
    common.add_argument("--smt-cmd", default=DEFAULT_SMT_CMD, help="SMT-LIB2 solver command")
    common.add_argument("--solver-timeout-ms", type=_positive, default=5000)
    common.add_argument("--backend", choices=("auto", "builtin", "smt"), default="auto")
    common.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="interpreter step budget")
    common.add_argument("--json-out", metavar="PATH", help="also write the report here")
    common.add_argument("--log-smt", metavar="PATH", help="append SMT-LIB2 queries to this file")

    p = argparse.ArgumentParser(prog="loopsum", description="Piecewise summaries of integer loops.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [
        ("summarize", "summarize every loop"),
        ("verify", "check assertions"),
        ("oracle-diff", "compare summaries with the interpreter on sampled inputs"),
        ("dump-cfg", "print the control-flow graph as DOT"),
        ("dump-spaths", "print SPath conditions and operations"),
        ("dump-csg", "print the contracted SPath graph of each loop as DOT"),
    ]:
        sub.add_parser(name, parents=[common], help=text, description=text)
    return p


def _options(args, log) -> Options:
    return Options(max_interval_values=args.max_interval_values, max_cases=args.max_cases,
                   max_paths=args.max_paths, smt_cmd=args.smt_cmd,
                   solver_timeout_ms=args.solver_timeout_ms, fuel=args.fuel,
                   backend=args.backend, log_smt=log)


def _dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# -- subcommands ------------------------------------------------------------------------


def cmd_summarize(ast: ProgramAst, args, options: Options) -> tuple[int, dict]:
    ps = summarize_program(ast, options)
    report = {"file": args.file, **ps.to_json()}
    return (EXIT_OK if ps.success else EXIT_FAIL), report


def cmd_verify(ast: ProgramAst, args, options: Options) -> tuple[int, dict]:
    verdicts = verify(ast, options)
    for v in verdicts:
        print(v.line_text(), file=sys.stderr)
    code = EXIT_OK if all(v.status == HOLDS for v in verdicts) else EXIT_FAIL
    return code, {"file": args.file, "assertions": [v.to_json() for v in verdicts]}


def cmd_oracle_diff(ast: ProgramAst, args, options: Options) -> tuple[int, dict]:
    ps = summarize_program(ast, options)
    report: dict = {"file": args.file, "seed": args.seed, "inputs": args.inputs,
                    "status": ps.status}
    if not ps.success:
        report["failures"] = ps.failures()
        return EXIT_FAIL, report
    counts = {"compared": 0, "matched": 0, "mismatched": 0, "both_diverge": 0,
              "oracle_out_of_fuel": 0, "oracle_error": 0}
    mismatches = []
    for inp in sample_inputs(ast, args.inputs, args.seed):
        ref = interpret(ast, inp, fuel=args.fuel)
        got = ps.run(inp, fuel=args.fuel)
        if ref.status == Status.FUEL_EXHAUSTED:
            key = "both_diverge" if got.status == Status.FUEL_EXHAUSTED else "oracle_out_of_fuel"
            counts[key] += 1
            continue
        if ref.status != Status.DONE:
            counts["oracle_error"] += 1
            continue
        counts["compared"] += 1
        if got.status == Status.DONE and got.values == ref.values:
            counts["matched"] += 1
            continue
        counts["mismatched"] += 1
        if len(mismatches) < MAX_REPORTED_MISMATCHES:
            mismatches.append({"input": inp, "oracle": ref.to_json(), "summary": got.to_json()})
    report.update(counts)
    report["match_rate"] = round(counts["matched"] / counts["compared"], 6) if counts["compared"] else None
    report["mismatches"] = mismatches
    return (EXIT_OK if counts["mismatched"] == 0 else EXIT_FAIL), report


def _loops(ast: ProgramAst, options: Options):
    from .cfg import canonical_program
    from .pipeline import flatten

    solver = options.make_solver()
    flat, _, _ = flatten(canonical_program(ast), options, solver)
    variables = canonical_program(ast).variables()
    return solver, [enumerate_spaths(loop, variables, options.max_paths)
                    for loop in canonicalize(build_cfg(flat))]


def cmd_dump(ast: ProgramAst, args, options: Options) -> tuple[int, Optional[str]]:
    if args.command == "dump-cfg":
        return EXIT_OK, build_cfg(ast).to_dot()
    solver, loops = _loops(ast, options)
    out = []
    for paths in loops:
        valid = prune_invalid(paths, solver)
        if args.command == "dump-spaths":
            out.append(dump_spaths(paths))
        else:
            out.append(f"// loop {paths.loop_id}\n" + contract(build_spath_graph(valid, solver)).to_dot())
    return EXIT_OK, "".join(out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        ast = parse_file(args.file)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"loopsum: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log = open(args.log_smt, "a", encoding="utf-8") if args.log_smt else None
    try:
        options = _options(args, log)
        if args.command.startswith("dump-"):
            try:
                code, text = cmd_dump(ast, args, options)
            except (LoweringError, PathExplosionError) as exc:
                print(f"loopsum: {exc}", file=sys.stderr)
                return EXIT_FAIL
            sys.stdout.write(text or "")
            if args.json_out:
                with open(args.json_out, "w", encoding="utf-8") as fh:
                    fh.write(text or "")
            return code
        handler = {"summarize": cmd_summarize, "verify": cmd_verify,
                   "oracle-diff": cmd_oracle_diff}[args.command]
        code, report = handler(ast, args, options)
    finally:
        if log is not None:
            log.close()
    text = _dumps(report)
    sys.stdout.write(text)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
