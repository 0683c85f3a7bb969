"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the eight lines
alone, or through pytest, where the lines are repeated in the terminal
summary.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from helpers import (  # noqa: E402
    VERIFY_CASES,
    corpus_ast,
    corpus_names,
    corpus_summary,
    solver,
    state_count,
    violated_by_brute_force,
)
from loopsum.cfg import build_cfg, canonical_program, canonicalize  # noqa: E402
from loopsum.frontend import parse_file  # noqa: E402
from loopsum.graph import ONE_ORDER, ZERO_ORDER  # noqa: E402
from loopsum.oracle import Status, interpret, sample_inputs  # noqa: E402
from loopsum.pipeline import Options, summarize_program  # noqa: E402
from loopsum.solver import UNSAT  # noqa: E402
from loopsum.solver.iterations import ClosedFormError, closed_form, min_iterations  # noqa: E402
from loopsum.spath import enumerate_spaths  # noqa: E402
from loopsum.summarize import (  # noqa: E402
    COUPLED_RECURRENCE,
    HIGH_ORDER_PERIODIC,
    INDUCTIVENESS_TRAP_NESTED,
    summarize_paths,
)
from loopsum.summarize.model import FAILURE_REASONS, LetStep  # noqa: E402
from loopsum.symexpr import (  # noqa: E402
    Mod,
    bevaluate,
    bsubstitute,
    conj,
    const,
    ge,
    gt,
    lt,
    negate,
    pre,
    sym,
)
from loopsum.verify import HOLDS, UNKNOWN, VIOLATED, verify  # noqa: E402

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, what: str, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {what}" + (f" | {detail}" if detail else "")
    RESULTS[n] = line
    print(line)
    assert ok, line


def loop_paths(ast):
    prog = canonical_program(ast)
    return enumerate_spaths(canonicalize(build_cfg(prog))[0], prog.variables())


# -- 1. fig3 pipeline ------------------------------------------------------------------

FIG3_EDGES = {("start", "A"), ("start", "C"), ("A", "A"), ("A", "C"), ("A", "end"), ("C", "end")}
FIG3_CSG = {frozenset({"A"}): ONE_ORDER, frozenset({"C"}): ZERO_ORDER}


def test_criterion_1_fig3_golden():
    start = time.perf_counter()
    paths = loop_paths(corpus_ast("fig3"))
    detail = summarize_paths(paths, solver())
    seconds = time.perf_counter() - start
    b = next(sp for sp in paths.spaths if sp.name == "B")
    x0 = sym(pre("x"))
    b_ok = b.cond == conj(ge(x0, 0), lt(x0 + 7, 5)) and b.name not in [s.name for s in detail.valid.spaths]
    edges = detail.graph.named_edges()
    names = {sp.index: sp.name for sp in paths.spaths}
    csg = {frozenset(names[m] for m in s.members): s.order for s in detail.csg.sccs}
    parts = [f"branch B cond/pruned {'ok' if b_ok else 'WRONG'}",
             f"edges {'ok' if edges == FIG3_EDGES else sorted(edges)}",
             f"csg {'ok' if csg == FIG3_CSG else {'/'.join(sorted(k)): v for k, v in csg.items()}}",
             f"{seconds:.2f}s"]
    ok = b_ok and edges == FIG3_EDGES and csg == FIG3_CSG and seconds < 1.0
    record(1, ok, "fig3 SPaths, SPath graph and CSG", "; ".join(parts))


# -- 2. oscillatory intervals ---------------------------------------------------------


def _oscillation(name: str):
    loop = corpus_summary(name).loops[0]
    (osc, table), = loop.detail.oscillations.values()
    return osc, table


def test_criterion_2_oscillatory_intervals():
    a, _ = _oscillation("fig5a")
    c, _ = _oscillation("fig1c")
    a_ok = a.o.text() == "[0,10)" and a.rounds == 2
    c_ok = c.o.text() == "[48,61)"
    record(2, a_ok and c_ok, "oscillatory intervals",
           f"fig5a O={a.o.text()} rounds={a.rounds} (want [0,10), 2); "
           f"fig1c O={c.o.text()} (want [48,61))")


# -- 3. periodic closed forms -----------------------------------------------------------


def _fig5a_step(x: int) -> int:
    return x + 2 if x < 5 else x - 5


def _fig1c_step(x: int) -> int:
    if x >= 50:
        return x - 2
    return x + 1 if x < 0 else x + 11


def _periodic_control(name: str, control: str):
    """The emitted control-variable expression of the directly entered periodic case."""
    for case in corpus_summary(name).loops[0].summary.cases:
        post = case.post[control]
        if case.phases == [HIGH_ORDER_PERIODIC] and any(isinstance(a, Mod) for a in post.all_atoms()):
            count = next(s.name for s in case.steps if isinstance(s, LetStep))
            return post, count
    return None, None


def _grid_mismatches(name, starts, formula, step) -> tuple[int, int, int]:
    """(vs stated formula, vs concrete walk, total) mismatch counts over starts x [0,100]."""
    expr, count = _periodic_control(name, "x")
    total = len(starts) * 101
    if expr is None:
        return total, total, total
    bad_formula = bad_walk = 0
    for x in starts:
        walk = x
        for n in range(101):
            got = expr.evaluate_int({pre("x"): x, pre("i"): 0, count: n})
            bad_formula += got != formula(x, n)
            bad_walk += got != walk
            walk = step(walk)
    return bad_formula, bad_walk, total


def test_criterion_3_periodic_closed_forms():
    a = _grid_mismatches("fig5a", range(0, 7), lambda x, n: (x + 2 * n) % 7, _fig5a_step)
    c = _grid_mismatches("fig1c", range(48, 61), lambda x, n: (x + 2 * n) % 13 + 48, _fig1c_step)
    ok = a[0] == 0 and a[1] == 0 and c[0] == 0 and c[1] == 0
    record(3, ok, "periodic closed forms on the grid",
           f"fig5a vs (x+2N) mod 7: {a[0]}/{a[2]} differ, vs execution: {a[1]}; "
           f"fig1c vs (x0+2n) mod 13 + 48: {c[0]}/{c[2]} differ, vs execution: {c[1]}")


# -- 4. differential accuracy -------------------------------------------------------------

REQUIRED = {"fig1a", "fig1b", "fig1c", "fig1d", "fig3", "fig5a", "custom_4"}
TYPED = {"t27": INDUCTIVENESS_TRAP_NESTED, "t30": COUPLED_RECURRENCE}
SAMPLES, SEED = 1000, 2024


def test_criterion_4_differential_accuracy():
    start = time.perf_counter()
    names = corpus_names()
    problems, succeeded, compared = [], 0, 0
    for name in names:
        ast = corpus_ast(name)
        ps = summarize_program(ast, solver=solver())
        if name in TYPED:
            if TYPED[name] not in ps.failures():
                problems.append(f"{name}: want {TYPED[name]}, got {ps.failures() or 'SUCCESS'}")
            continue
        if not ps.success:
            continue
        succeeded += 1
        for inp in sample_inputs(ast, SAMPLES, SEED):
            ref = interpret(ast, inp)
            got = ps.run(inp)
            if ref.status == Status.FUEL_EXHAUSTED and got.status == Status.DONE:
                problems.append(f"{name}: {inp} terminates in the summary only")
                break
            if ref.status != Status.DONE:
                continue
            compared += 1
            if got.status != Status.DONE or got.values != ref.values:
                problems.append(f"{name}: {inp}")
                break
    seconds = time.perf_counter() - start
    missing = REQUIRED - set(names)
    ok = not problems and not missing and len(names) >= 20 and seconds < 300
    record(4, ok, "summaries agree with the interpreter",
           f"{len(names)} cases, {succeeded} summarized, {compared} inputs compared, "
           f"missing={sorted(missing)}, problems={problems[:3]}, {seconds:.1f}s")


# -- 5. minimal iteration counts ----------------------------------------------------------

COUNT_SAMPLES = 100
SCALES = (3, 200, 1200)  # each variable is drawn from [-s, s] for a random s
ORACLE_CAP = 10_000


def _concrete_count(stay, op, variables, state) -> int | None:
    for k in range(ORACLE_CAP):
        if not bevaluate(stay, {pre(v): state[v] for v in variables}):
            return k
        env = {pre(v): state[v] for v in variables}
        state = {v: op[v].evaluate_int(env) for v in variables}
    return None


def _check_one_order(paths, sp, rng) -> tuple[int, list[str]]:
    variables = paths.variables
    stay = conj(paths.guard, sp.cond)
    cf = closed_form(sp.op, variables, "k")
    checked, errors, attempts = 0, [], 0
    while checked < COUNT_SAMPLES and attempts < 200 * COUNT_SAMPLES:
        attempts += 1
        state = {v: rng.randint(-s, s) for v in variables for s in [rng.choice(SCALES)]}
        want = _concrete_count(stay, sp.op, variables, state)
        if not want:
            continue
        pins = {pre(v): const(state[v]) for v in variables}
        forms = {v: cf[v].substitute(pins) for v in variables}

        def holds_at(k, forms=forms):
            return bsubstitute(stay, {pre(v): forms[v].substitute({"k": k}) for v in variables})

        res = min_iterations(holds_at, solver())
        n = sym("n")
        tighter = solver().check([gt(n, 0), holds_at(n - 1), negate(holds_at(n)), lt(n, res.value or 0)])
        if res.value != want or tighter.status != UNSAT:
            errors.append(f"{sp.name}@{state}: got {res.status} {res.value}, want {want}")
        checked += 1
    return checked, errors


def test_criterion_5_minimal_iteration_counts():
    rng = random.Random(SEED)
    sccs, samples, errors, skipped = 0, 0, [], []
    for name in corpus_names():
        for loop in corpus_summary(name).loops:
            if loop.detail is None:
                continue
            for scc in loop.detail.csg.sccs:
                if scc.order != ONE_ORDER:
                    continue
                sp = loop.detail.graph.spath(scc.members[0])
                try:
                    checked, errs = _check_one_order(loop.detail.valid, sp, rng)
                except ClosedFormError as exc:
                    skipped.append(f"{name}.{sp.name}: {exc.reason}")
                    continue
                sccs += 1
                samples += checked
                errors += [f"{name}: {e}" for e in errs]
    ok = sccs > 0 and not errors and samples == sccs * COUNT_SAMPLES
    record(5, ok, "least iteration counts of one-order SCCs",
           f"{sccs} SCCs, {samples} inputs, errors={errors[:3]}, no closed form: {skipped}")


# -- 6. pigeonhole ------------------------------------------------------------------------


def test_criterion_6_pigeonhole():
    runs, starts, violations = 0, 0, []
    for name in corpus_names():
        for loop in corpus_summary(name).loops:
            if loop.detail is None:
                continue
            for osc, table in loop.detail.oscillations.values():
                runs += 1
                size = osc.o.count()
                for v in osc.o:
                    starts += 1
                    seen, x, steps = set(), v, 0
                    while x in osc.o and x not in seen:
                        seen.add(x)
                        x = osc.member_at(x).step(x, osc.xs)
                        steps += 1
                    walked = steps if x in osc.o else None
                    got = table.repeat_steps(v)
                    if got != walked or (got is not None and got > size):
                        violations.append(f"{name}: start {v} repeat={got} walk={walked} |O|={size}")
    ok = runs > 0 and not violations
    record(6, ok, "cycles found within |O| steps",
           f"{runs} oscillation analyses, {starts} start values, violations={violations[:3]}")


# -- 7. verification ----------------------------------------------------------------------

STATE_LIMIT = 10_000


def test_criterion_7_verification():
    files = sorted(VERIFY_CASES.glob("*.wl"))
    counts = {HOLDS: 0, VIOLATED: 0, UNKNOWN: 0}
    wrong, bad_unknown, too_big = [], [], []
    for f in files:
        ast = parse_file(str(f))
        if state_count(ast) > STATE_LIMIT:
            too_big.append(f.stem)
            continue
        truth = violated_by_brute_force(ast)
        for v in verify(ast):
            counts[v.status] += 1
            expected = VIOLATED if (v.line, v.column) in truth else HOLDS
            if v.status == UNKNOWN:
                if v.reason not in FAILURE_REASONS:
                    bad_unknown.append(f"{f.stem}:{v.line} {v.reason}")
            elif v.status != expected:
                wrong.append(f"{f.stem}:{v.line} {v.status}, want {expected}")
    ok = len(files) >= 15 and not wrong and not bad_unknown and not too_big
    record(7, ok, "assertion verdicts against brute force",
           f"{len(files)} cases, verdicts={counts}, wrong={wrong}, "
           f"unknown without summarization failure={bad_unknown}, over {STATE_LIMIT} states={too_big}")


# -- 8. performance -----------------------------------------------------------------------


def test_criterion_8_performance():
    options = Options(max_interval_values=100_000)
    slow, worst = [], ("", 0.0)
    for name in corpus_names():
        start = time.perf_counter()
        summarize_program(corpus_ast(name), options, solver())
        seconds = time.perf_counter() - start
        worst = max(worst, (name, seconds), key=lambda t: t[1])
        if seconds >= 5.0:
            slow.append(f"{name} {seconds:.1f}s")
    record(8, not slow, "every corpus case summarizes in under 5 s",
           f"slowest {worst[0]} {worst[1]:.2f}s, over budget={slow}")


if __name__ == "__main__":
    failed = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
