"""End-to-end summarization of a whole program.

Source text is parsed, ``break`` statements are turned into flag
variables, nested loops are replaced inside-out by their summaries, and
each remaining top-level loop is summarized over all program variables.
The resulting :class:`ProgramSummary` can run the program with every
summarized loop executed in one step.
"""

from __future__ import annotations

import time

from dataclasses import dataclass, field
from typing import Mapping, Optional, TextIO

from .cfg import build_cfg, canonical_program, canonicalize
from .oracle import DEFAULT_FUEL, ConcreteState, Halt, Interpreter, Status
from .program import ProgramAst, While
from .solver import Solver
from .solver.smtlib import DEFAULT_SMT_CMD
from .spath import DEFAULT_MAX_PATHS, LoweringError, PathExplosionError, enumerate_spaths, loop_paths_from_stmt
from .summarize import (
    DEFAULT_MAX_CASES,
    NOT_SUMMARIZABLE,
    LoopSummary,
    Summary,
    SummaryFailure,
    eliminate_nested,
    evaluate_summary,
    summarize_paths,
)
from .summarize.oscillation import DEFAULT_MAX_VALUES

INNER_ID_BASE = 1000  # loop ids of eliminated inner loops start here


@dataclass
class Options:
    max_interval_values: int = DEFAULT_MAX_VALUES
    max_cases: int = DEFAULT_MAX_CASES
    max_paths: int = DEFAULT_MAX_PATHS
    smt_cmd: str = DEFAULT_SMT_CMD
    solver_timeout_ms: int = 5000
    fuel: int = DEFAULT_FUEL
    backend: str = "auto"
    log_smt: Optional[TextIO] = None

    def validate(self) -> None:
        for name in ("max_interval_values", "max_cases", "max_paths", "solver_timeout_ms", "fuel"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name.replace('_', '-')} must be positive")

    def make_solver(self) -> Solver:
        return Solver(self.smt_cmd, self.solver_timeout_ms, self.backend, self.log_smt)


@dataclass
class LoopResult:
    stmt: While
    summary: Summary
    detail: Optional[LoopSummary] = None
    seconds: float = 0.0


@dataclass
class ProgramSummary:
    ast: ProgramAst  # as parsed
    program: ProgramAst  # break-free and non-nested
    loops: list[LoopResult] = field(default_factory=list)
    inner: list[Summary] = field(default_factory=list)
    failure: Optional[SummaryFailure] = None  # raised while eliminating nested loops

    @property
    def success(self) -> bool:
        return self.failure is None and all(r.summary.success for r in self.loops)

    @property
    def status(self) -> str:
        return "SUCCESS" if self.success else "FAILURE"

    def failures(self) -> list[str]:
        out = [] if self.failure is None else [self.failure.reason]
        out.extend(r.summary.failure.reason for r in self.loops if not r.summary.success)
        return out

    def run(self, inputs: Mapping[str, int], fuel: int = DEFAULT_FUEL) -> ConcreteState:
        """Execute the program with each summarized loop applied in one step.

        The result is restricted to the variables of the parsed program.
        """
        by_id = {id(r.stmt): r.summary for r in self.loops if r.summary.success}

        def hook(stmt: While, env: dict[str, int]):
            summary = by_id.get(id(stmt))
            if summary is None:
                return None
            res = evaluate_summary(summary, env)
            if res.status == "OK":
                return res.values
            if res.status == "DIVERGES":
                raise Halt(Status.FUEL_EXHAUSTED, (stmt.line, 0), "loop does not terminate")
            raise Halt(Status.NO_CASE, (stmt.line, 0), "no summary case matches")

        out = Interpreter(self.program, fuel=fuel, loop_hook=hook).run(inputs)
        keep = set(self.ast.variables())
        out.values = {k: v for k, v in out.values.items() if k in keep}
        return out

    def to_json(self) -> dict:
        out: dict = {"status": self.status, "loops": [r.summary.to_json() for r in self.loops]}
        if self.inner:
            out["inner_loops"] = [s.to_json() for s in self.inner]
        if self.failure is not None:
            out["failure"] = {"reason": self.failure.reason, "message": self.failure.message}
        return out


def _failed(loop_id: int, variables: list[str], reason: str, message: str) -> Summary:
    s = Summary(loop_id, list(variables))
    s.failure = SummaryFailure(reason, message)
    return s


def flatten(prog: ProgramAst, options: Options, solver: Solver
            ) -> tuple[ProgramAst, list[Summary], set[int]]:
    """Replace nested loops of a break-free program by their summaries.

    Returns the flat program, the inner-loop summaries and the ids of the
    top-level loops that received spliced code.  Raises
    :class:`SummaryFailure` when an inner loop cannot be summarized.
    """
    variables = prog.variables()

    def summarize_stmt(stmt: While, index: int) -> Summary:
        try:
            paths = loop_paths_from_stmt(stmt, variables, INNER_ID_BASE + index, options.max_paths)
        except (LoweringError, PathExplosionError) as exc:
            return _failed(INNER_ID_BASE + index, variables, NOT_SUMMARIZABLE, str(exc))
        return summarize_paths(paths, solver, max_cases=options.max_cases,
                               max_values=options.max_interval_values).summary

    return eliminate_nested(prog, summarize_stmt)


def summarize_program(ast: ProgramAst, options: Optional[Options] = None,
                      solver: Optional[Solver] = None) -> ProgramSummary:
    options = options or Options()
    options.validate()
    solver = solver or options.make_solver()
    prog = canonical_program(ast)
    variables = prog.variables()
    result = ProgramSummary(ast, prog)
    try:
        flat, result.inner, rebuilt = flatten(prog, options, solver)
    except SummaryFailure as exc:
        result.failure = exc
        return result
    result.program = flat
    for loop in canonicalize(build_cfg(flat)):
        start = time.perf_counter()
        try:
            paths = enumerate_spaths(loop, variables, options.max_paths)
        except (LoweringError, PathExplosionError) as exc:
            summary = _failed(loop.id, variables, NOT_SUMMARIZABLE, str(exc))
            result.loops.append(LoopResult(loop.stmt, summary, None, time.perf_counter() - start))
            continue
        detail = summarize_paths(paths, solver, max_cases=options.max_cases,
                                 max_values=options.max_interval_values,
                                 from_nested=id(loop.stmt) in rebuilt)
        result.loops.append(LoopResult(loop.stmt, detail.summary, detail, time.perf_counter() - start))
    return result
