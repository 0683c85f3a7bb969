import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsum.solver import SAT, UNKNOWN, UNSAT, ConstraintSet, Solver
from loopsum.solver.iterations import (
    COUPLED_RECURRENCE,
    ClosedFormError,
    closed_form,
    first_failure,
    min_iterations,
)
from loopsum.symexpr import (
    bevaluate,
    bsubstitute,
    conj,
    const,
    disj,
    eq,
    floordiv,
    ge,
    le,
    lit,
    lt,
    mod,
    ne,
    power,
    pre,
    sym,
)

X, Y = sym("x"), sym("y")
BOX = range(-12, 13)

builtin = Solver(backend="builtin")
smt = Solver(backend="smt")


@st.composite
def terms(draw):
    e = const(draw(st.integers(-10, 10)))
    for v in (X, Y):
        e = e + v.scale(draw(st.integers(-3, 3)))
    kind = draw(st.sampled_from(["plain", "plain", "div", "mod"]))
    if kind == "div":
        e = floordiv(e, draw(st.integers(2, 5))) + X
    elif kind == "mod":
        e = mod(e, draw(st.integers(2, 5))) - Y
    return e


@st.composite
def literal(draw):
    return lit(draw(terms()), draw(st.sampled_from(["<=", "==", "!="])))


@st.composite
def systems(draw):
    items = draw(st.lists(literal(), min_size=1, max_size=4))
    if draw(st.booleans()):
        items.append(disj(draw(literal()), draw(literal())))
    bounds = [ge(X, BOX.start), le(X, BOX.stop - 1), ge(Y, BOX.start), le(Y, BOX.stop - 1)]
    return items + bounds


def _brute(cs):
    return any(bevaluate(conj(*cs), {"x": x, "y": y}) for x, y in itertools.product(BOX, BOX))


@settings(max_examples=300, deadline=None)
@given(systems())
def test_builtin_matches_enumeration(cs):
    res = builtin.check(cs)
    assert res.status != UNKNOWN
    assert (res.status == SAT) == _brute(cs)
    if res.status == SAT:
        assert ConstraintSet(cs).holds(res.model)


@settings(max_examples=60, deadline=None)
@given(systems())
def test_smt_backend_agrees_with_builtin(cs):
    a, b = builtin.check(cs), smt.check(cs)
    assert b.status != UNKNOWN
    assert a.status == b.status
    if b.status == SAT:
        assert ConstraintSet(cs).holds(b.model)


def test_smt_log_receives_script():
    log = io.StringIO()
    s = Solver(backend="smt", log=log)
    assert s.check([ge(X, 3), le(X, 2)]).status == UNSAT
    text = log.getvalue()
    assert "(check-sat)" in text and "declare-const" in text


def test_missing_smt_binary_is_unknown():
    s = Solver(smt_cmd="/nonexistent/solver", backend="smt")
    assert s.check([ge(X, 3)]).status == UNKNOWN


def test_memo_cache():
    s = Solver()
    s.check([ge(X, 1), le(X, 5)])
    s.check([ge(X, 1), le(X, 5)])
    assert s.stats["cache_hits"] == 1


def test_exponent_split():
    n = sym("n")
    s = Solver()
    grows = [ge(n, 0), ge(power(2, n), 1000)]
    res = s.check(grows)
    assert res.status == SAT and 2 ** res.model["n"] >= 1000
    assert s.check([ge(n, 0), le(n, 8), ge(power(2, n), 1000)]).status == UNSAT
    # no upper bound and no model among the tried values: undecided
    assert s.check([ge(n, 0), lt(power(2, n), 0)]).status == UNKNOWN


# -- least iteration counts -------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.integers(-50, 50), st.integers(1, 7), st.integers(-60, 60), st.integers(1, 4))
def test_min_iterations_is_least(x0, step, bound, offset):
    # x_k = x0 + step*k, loop while x_k < bound and x_k != bound + offset
    def holds_at(k):
        xk = const(x0) + k.scale(step)
        return conj(lt(xk, bound), ne(xk, bound + offset))

    res = min_iterations(holds_at, Solver())
    k = 0
    while x0 + step * k < bound and x0 + step * k != bound + offset:
        k += 1
    assert res.value == k if k else res.status == "ZERO"


@settings(max_examples=100, deadline=None)
@given(st.integers(-50, 50), st.integers(-5, 5), st.integers(-60, 60))
def test_symbolic_first_failure_matches_iteration(x0, step, bound):
    k = "k"
    cond = lt(sym(pre("x")) + sym(k).scale(step), bound)
    cases = first_failure(cond, k)
    env = {pre("x"): x0}
    if step <= 0:
        if x0 < bound:
            assert cases is not None
            assert all(not bevaluate(c.guard, env) for c in cases)
        return
    chosen = [c for c in cases if bevaluate(c.guard, env)]
    assert len(chosen) == 1
    want = 0
    while x0 + step * want < bound:
        want += 1
    assert chosen[0].count.evaluate_int(env) == want


# -- closed forms -------------------------------------------------------------------------

VARS = ["a", "b", "c", "d"]


def _op(ka, kb, r):
    A, B, C, D = (sym(pre(v)) for v in VARS)
    return {"a": A + ka, "b": B + A.scale(kb), "c": C.scale(r) + 1, "d": A + B}


@settings(max_examples=60, deadline=None)
@given(st.integers(-5, 5), st.integers(-3, 3), st.integers(-3, 3),
       st.lists(st.integers(-20, 20), min_size=4, max_size=4), st.integers(1, 12))
def test_closed_form_matches_unrolling(ka, kb, r, start, n):
    op = _op(ka, kb, r)
    cf = closed_form(op, VARS, "N")
    state = dict(zip(VARS, start))
    for _ in range(n):
        env = {pre(v): state[v] for v in VARS}
        state = {v: op[v].evaluate_int(env) for v in VARS}
    env = {pre(v): x for v, x in zip(VARS, start)}
    env["N"] = n
    assert {v: cf[v].evaluate_int(env) for v in VARS} == state


def test_coupled_update_rejected():
    A, B = sym(pre("a")), sym(pre("b"))
    with pytest.raises(ClosedFormError) as info:
        closed_form({"a": B + 1, "b": A + 1}, ["a", "b"], "N")
    assert info.value.reason == COUPLED_RECURRENCE


def test_substitution_respects_floor():
    b = eq(floordiv(X, 2), -2)
    assert {x for x in BOX if bevaluate(b, {"x": x})} == {-4, -3}
    assert bevaluate(bsubstitute(b, {"x": const(-3)}), {})
