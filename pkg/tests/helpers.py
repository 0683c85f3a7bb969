"""Shared fixtures for the test suite: corpus access, cached summaries, brute force."""

from __future__ import annotations

import itertools
from functools import lru_cache
from pathlib import Path

from loopsum import corpus
from loopsum.frontend import parse, parse_file
from loopsum.oracle import ScriptedNondet, Status, interpret
from loopsum.pipeline import Options, ProgramSummary, summarize_program
from loopsum.program import Nondet, ProgramAst, While, walk
from loopsum.solver import Solver

VERIFY_CASES = Path(__file__).resolve().parent / "verify_cases"
MAX_NONDET_LOOP_COUNT = 60  # iterations tried per while(nondet()) loop when brute-forcing


@lru_cache(maxsize=None)
def solver() -> Solver:
    return Options().make_solver()


@lru_cache(maxsize=None)
def corpus_ast(name: str) -> ProgramAst:
    return parse_file(str(corpus.path(name)))


@lru_cache(maxsize=None)
def corpus_summary(name: str) -> ProgramSummary:
    return summarize_program(corpus_ast(name), solver=solver())


def corpus_names() -> list[str]:
    return [p.stem for p in corpus.files()]


def program(src: str) -> ProgramAst:
    return parse(src)


def nondet_loop_lines(ast: ProgramAst) -> list[int]:
    return [s.line for s in walk(ast.body) if isinstance(s, While) and isinstance(s.cond, Nondet)]


def state_count(ast: ProgramAst) -> int:
    n = 1
    for d in ast.inputs:
        n *= d.hi - d.lo + 1
    return n * (MAX_NONDET_LOOP_COUNT + 1) ** len(nondet_loop_lines(ast))


def violated_by_brute_force(ast: ProgramAst, fuel: int = 100_000) -> set[tuple[int, int]]:
    """Locations of assertions some bounded run fails (the first failure of each run)."""
    loops = nondet_loop_lines(ast)
    names = ast.input_names
    doms = [range(d.lo, d.hi + 1) for d in ast.inputs]
    out = set()
    for vals in itertools.product(*doms):
        for counts in itertools.product(*[range(MAX_NONDET_LOOP_COUNT + 1)] * len(loops)):
            src = ScriptedNondet([], dict(zip(loops, counts)))
            st = interpret(ast, dict(zip(names, vals)), fuel=fuel, nondet=src)
            if st.status == Status.ASSERT_FAILED:
                out.add(st.location)
    return out
