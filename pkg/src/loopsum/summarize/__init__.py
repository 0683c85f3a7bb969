"""Loop summarization: per-SCC phases composed over the contracted SPath graph."""

from __future__ import annotations

from typing import Optional

from ..graph import Csg, SPathGraph, build_spath_graph, contract
from ..spath import LoopPaths, prune_invalid
from .compose import Composer
from .cycles import CycleTable
from .model import (
    CASE_EXPLOSION,
    CLOSED_FORM_UNAVAILABLE,
    COMPOSED,
    COUPLED_RECURRENCE,
    DEFAULT_MAX_CASES,
    HIGH_ORDER_PERIODIC,
    HIGH_ORDER_PREPHASE,
    INDUCTIVENESS_TRAP_NESTED,
    INFINITE_OSCILLATION,
    NOT_SUMMARIZABLE,
    ONE_ORDER,
    SOLVER_UNKNOWN,
    ZERO_ORDER,
    CaseResult,
    Summary,
    SummaryCase,
    SummaryFailure,
    evaluate_summary,
)
from .nested import eliminate_nested, splice
from .oscillation import DEFAULT_MAX_VALUES, Oscillation, analyze, region_of

__all__ = [
    "CASE_EXPLOSION",
    "CLOSED_FORM_UNAVAILABLE",
    "COMPOSED",
    "COUPLED_RECURRENCE",
    "HIGH_ORDER_PERIODIC",
    "HIGH_ORDER_PREPHASE",
    "INDUCTIVENESS_TRAP_NESTED",
    "INFINITE_OSCILLATION",
    "NOT_SUMMARIZABLE",
    "ONE_ORDER",
    "SOLVER_UNKNOWN",
    "ZERO_ORDER",
    "CaseResult",
    "CycleTable",
    "LoopSummary",
    "Oscillation",
    "Summary",
    "SummaryCase",
    "SummaryFailure",
    "analyze",
    "eliminate_nested",
    "evaluate_summary",
    "region_of",
    "splice",
    "summarize_paths",
]


class LoopSummary:
    """A summary together with the intermediate structures it was built from."""

    def __init__(self, summary: Summary, paths: LoopPaths, valid: LoopPaths,
                 graph: Optional[SPathGraph], csg: Optional[Csg], composer: Optional[Composer]):
        self.summary = summary
        self.paths = paths
        self.valid = valid
        self.graph = graph
        self.csg = csg
        self.composer = composer

    @property
    def oscillations(self) -> dict[int, tuple[Oscillation, CycleTable]]:
        if self.composer is None:
            return {}
        return {k: (v.osc, v.table) for k, v in self.composer.high.items()}


def summarize_paths(paths: LoopPaths, solver, *, max_cases: int = DEFAULT_MAX_CASES,
                    max_values: int = DEFAULT_MAX_VALUES, from_nested: bool = False) -> LoopSummary:
    """Summarize one non-nested loop given its SPaths."""
    summary = Summary(paths.loop_id, list(paths.variables))
    valid = prune_invalid(paths, solver)
    graph = build_spath_graph(valid, solver)
    csg = contract(graph)
    summary.details["csg"] = csg.describe()
    pairs = len(valid.spaths) * (len(valid.spaths) + 2)
    if pairs and len(graph.flagged) == pairs:
        summary.failure = SummaryFailure(SOLVER_UNKNOWN, "the solver decided none of the jump queries")
        return LoopSummary(summary, paths, valid, graph, csg, None)
    composer = Composer(valid, csg, solver, max_cases=max_cases, max_values=max_values,
                        from_nested=from_nested)
    try:
        summary.cases = composer.run()
    except SummaryFailure as exc:
        summary.failure = exc
        summary.cases = []
    osc = {}
    for scc_id, info in sorted(composer.high.items()):
        d = info.osc.describe()
        d.update(info.table.describe())
        osc[str(scc_id)] = d
    if osc:
        summary.details["oscillation"] = osc
    return LoopSummary(summary, paths, valid, graph, csg, composer)
