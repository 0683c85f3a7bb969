"""Exact integer feasibility for small linear systems.

Rows are ``sum(coeffs[v] * v) <= bound`` over integer variables.  The LP
relaxation is solved with a dense two-phase simplex over ``Fraction``
(Bland's rule, so no cycling); integrality comes from depth-first
branch-and-bound.  Every variable lives in a finite box so the search
terminates; a node budget turns pathological instances into UNKNOWN.
"""

from __future__ import annotations

from fractions import Fraction
from math import ceil, floor, gcd
from typing import Optional

Row = tuple[dict[str, int], int]

DEFAULT_BOX = 10**12


class Unknown(Exception):
    """Raised when the node budget is exhausted."""


def _simplex_feasible(rows: list[tuple[list[Fraction], Fraction]], n: int) -> Optional[list[Fraction]]:
    """Find ``y >= 0`` with ``A y <= b`` or return ``None``.

    Phase one of the simplex method on the standard-form system with
    slack and artificial variables.
    """
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * n
    # columns: y (n) | slack (m) | artificial (m)
    width = n + 2 * m
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    for i, (a, b) in enumerate(rows):
        row = [Fraction(0)] * (width + 1)
        sign = 1 if b >= 0 else -1
        for j in range(n):
            row[j] = a[j] * sign
        row[n + i] = Fraction(sign)
        row[width] = b * sign
        if sign > 0:
            basis.append(n + i)
        else:
            row[n + m + i] = Fraction(1)
            basis.append(n + m + i)
        tab.append(row)
    # objective: minimise the sum of artificials that are basic
    obj = [Fraction(0)] * (width + 1)
    for i, bcol in enumerate(basis):
        if bcol >= n + m:
            for j in range(width + 1):
                obj[j] -= tab[i][j]
            obj[bcol] += 1
    allowed = n + m  # artificials never re-enter
    while True:
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best: Optional[Fraction] = None
        for i in range(m):
            c = tab[i][enter]
            if c > 0:
                ratio = tab[i][width] / c
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded direction cannot lower phase-one objective below 0
            break
        _pivot(tab, obj, leave, enter, width)
        basis[leave] = enter
    if obj[width] < 0:
        return None
    y = [Fraction(0)] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            y[bcol] = tab[i][width]
    return y


def _pivot(tab, obj, r: int, c: int, width: int) -> None:
    pr = tab[r]
    pv = pr[c]
    if pv != 1:
        for j in range(width + 1):
            if pr[j]:
                pr[j] /= pv
    for i, row in enumerate(tab):
        if i != r and row[c]:
            f = row[c]
            for j in range(width + 1):
                if pr[j]:
                    row[j] -= f * pr[j]
    f = obj[c]
    if f:
        for j in range(width + 1):
            if pr[j]:
                obj[j] -= f * pr[j]


def _tighten(rows: list[Row]) -> Optional[list[Row]]:
    """Divide each row by the gcd of its coefficients (rounding the bound down)."""
    out = []
    for coeffs, b in rows:
        coeffs = {v: c for v, c in coeffs.items() if c}
        if not coeffs:
            if b < 0:
                return None
            continue
        g = 0
        for c in coeffs.values():
            g = gcd(g, c)
        if g > 1:
            coeffs = {v: c // g for v, c in coeffs.items()}
            b = b // g
        out.append((coeffs, b))
    return out


def _propagate(rows: list[Row], lo: dict[str, int], hi: dict[str, int], rounds: int = 8) -> bool:
    """Interval bound propagation; returns False on a proven conflict."""
    for _ in range(rounds):
        changed = False
        for coeffs, b in rows:
            # min of sum over other vars
            for v, c in coeffs.items():
                rest = 0
                for w, d in coeffs.items():
                    if w != v:
                        rest += d * (lo[w] if d > 0 else hi[w])
                # c * v <= b - rest
                lim = b - rest
                if c > 0:
                    nb = lim // c
                    if nb < hi[v]:
                        hi[v] = nb
                        changed = True
                else:
                    nb = -((lim) // (-c))
                    if nb > lo[v]:
                        lo[v] = nb
                        changed = True
                if lo[v] > hi[v]:
                    return False
        if not changed:
            break
    return True


def solve_int(rows: list[Row], variables: list[str], lo: dict[str, int], hi: dict[str, int],
              node_budget: int = 4000) -> Optional[dict[str, int]]:
    """Integer point satisfying ``rows`` within ``[lo, hi]`` boxes, or ``None``.

    Raises :class:`Unknown` if the branch-and-bound budget runs out.
    """
    rows2 = _tighten(rows)
    if rows2 is None:
        return None
    budget = [node_budget]
    return _branch(rows2, list(variables), dict(lo), dict(hi), budget)


def _branch(rows: list[Row], variables: list[str], lo: dict[str, int], hi: dict[str, int],
            budget: list[int]) -> Optional[dict[str, int]]:
    n = len(variables)
    idx = {v: j for j, v in enumerate(variables)}
    stack = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        budget[0] -= 1
        if budget[0] < 0:
            raise Unknown("branch-and-bound budget exhausted")
        if not _propagate(rows, lo, hi):
            continue
        free = [v for v in variables if lo[v] < hi[v]]
        if not free:
            point = {v: lo[v] for v in variables}
            if all(_row_ok(r, point) for r in rows):
                return point
            continue
        lp_rows = []
        for coeffs, b in rows:
            a = [Fraction(0)] * n
            shift = 0
            for v, c in coeffs.items():
                a[idx[v]] = Fraction(c)
                shift += c * lo[v]
            lp_rows.append((a, Fraction(b - shift)))
        for v in variables:
            a = [Fraction(0)] * n
            a[idx[v]] = Fraction(1)
            lp_rows.append((a, Fraction(hi[v] - lo[v])))
        y = _simplex_feasible(lp_rows, n)
        if y is None:
            continue
        x = {v: lo[v] + y[idx[v]] for v in variables}
        frac = next((v for v in variables if x[v].denominator != 1), None)
        if frac is None:
            point = {v: int(x[v]) for v in variables}
            if all(_row_ok(r, point) for r in rows):
                return point
            continue  # pragma: no cover - simplex solution always satisfies rows
        val = x[frac]
        up_lo = dict(lo)
        up_lo[frac] = ceil(val)
        down_hi = dict(hi)
        down_hi[frac] = floor(val)
        # explore the rounded-down branch first
        stack.append((up_lo, dict(hi)))
        stack.append((dict(lo), down_hi))
    return None


def _row_ok(row: Row, point: dict[str, int]) -> bool:
    coeffs, b = row
    return sum(c * point[v] for v, c in coeffs.items()) <= b
