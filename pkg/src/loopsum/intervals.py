"""Finite unions of integer intervals.

Bounds are inclusive; ``None`` stands for an infinite bound.  Every
``IntervalSet`` is kept normalized: intervals are sorted, disjoint and
non-adjacent, so structural equality is set equality.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

Bound = Optional[int]


def _floordiv(a: int, b: int) -> int:
    return a // b


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


class IntervalSet:
    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple[Bound, Bound]] = ()):
        self.intervals: tuple[tuple[Bound, Bound], ...] = _normalize(intervals)

    # -- constructors -------------------------------------------------
    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    @classmethod
    def universe(cls) -> "IntervalSet":
        return cls([(None, None)])

    @classmethod
    def closed(cls, lo: Bound, hi: Bound) -> "IntervalSet":
        return cls([(lo, hi)])

    @classmethod
    def half_open(cls, lo: int, hi: int) -> "IntervalSet":
        """``[lo, hi)``, the notation used for oscillatory intervals."""
        return cls([(lo, hi - 1)])

    @classmethod
    def point(cls, v: int) -> "IntervalSet":
        return cls([(v, v)])

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "IntervalSet":
        return cls((v, v) for v in values)

    # -- queries --------------------------------------------------------
    def is_empty(self) -> bool:
        return not self.intervals

    def is_finite(self) -> bool:
        return all(lo is not None and hi is not None for lo, hi in self.intervals)

    def count(self) -> Optional[int]:
        """Number of integers in the set, ``None`` when infinite."""
        if not self.is_finite():
            return None
        return sum(hi - lo + 1 for lo, hi in self.intervals)

    def __contains__(self, v: int) -> bool:
        for lo, hi in self.intervals:
            if (lo is None or lo <= v) and (hi is None or v <= hi):
                return True
        return False

    def __iter__(self) -> Iterator[int]:
        if not self.is_finite():
            raise ValueError("cannot enumerate an infinite interval set")
        for lo, hi in self.intervals:
            yield from range(lo, hi + 1)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def min(self) -> Bound:
        return self.intervals[0][0] if self.intervals else None

    def max(self) -> Bound:
        return self.intervals[-1][1] if self.intervals else None

    # -- set algebra ------------------------------------------------------
    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    __or__ = union

    def complement(self) -> "IntervalSet":
        out: list[tuple[Bound, Bound]] = []
        next_lo: Bound = None
        for lo, hi in self.intervals:
            if lo is not None:
                out.append((next_lo, lo - 1))
            if hi is None:
                return IntervalSet(out)
            next_lo = hi + 1
        out.append((next_lo, None))
        return IntervalSet(out)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a_lo, a_hi in self.intervals:
            for b_lo, b_hi in other.intervals:
                lo = _max_lo(a_lo, b_lo)
                hi = _min_hi(a_hi, b_hi)
                if lo is None or hi is None or lo <= hi:
                    out.append((lo, hi))
        return IntervalSet(out)

    __and__ = intersection

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersection(other.complement())

    __sub__ = difference

    def issubset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    def components(self) -> list["IntervalSet"]:
        return [IntervalSet([iv]) for iv in self.intervals]

    # -- affine maps ------------------------------------------------------
    def image_affine(self, a: int, c: int, enumerate_cap: int = 4096) -> "IntervalSet":
        """Image under ``x -> a*x + c``.

        Exact for ``|a| <= 1`` and for small finite sets; otherwise the
        per-interval hull, which over-approximates the strided image.
        """
        if a == 0:
            return IntervalSet.point(c) if self.intervals else IntervalSet()
        n = self.count()
        if abs(a) > 1 and n is not None and n <= enumerate_cap:
            return IntervalSet.from_values(a * v + c for v in self)
        out = []
        for lo, hi in self.intervals:
            lo2 = None if lo is None else a * lo + c
            hi2 = None if hi is None else a * hi + c
            if a < 0:
                lo2, hi2 = hi2, lo2
            out.append((lo2, hi2))
        return IntervalSet(out)

    def preimage_affine(self, a: int, c: int) -> "IntervalSet":
        """Exact set ``{x : a*x + c in self}``."""
        if a == 0:
            return IntervalSet.universe() if c in self else IntervalSet()
        out = []
        for lo, hi in self.intervals:
            if a > 0:
                x_lo = None if lo is None else _ceildiv(lo - c, a)
                x_hi = None if hi is None else _floordiv(hi - c, a)
            else:
                x_lo = None if hi is None else _ceildiv(hi - c, a)
                x_hi = None if lo is None else _floordiv(lo - c, a)
            if x_lo is None or x_hi is None or x_lo <= x_hi:
                out.append((x_lo, x_hi))
        return IntervalSet(out)

    # -- printing ---------------------------------------------------------
    def text(self) -> str:
        if not self.intervals:
            return "{}"
        parts = []
        for lo, hi in self.intervals:
            left = "(-inf" if lo is None else f"[{lo}"
            right = "+inf)" if hi is None else f"{hi + 1})"
            parts.append(f"{left},{right}")
        return " U ".join(parts)

    def to_json(self) -> list[list[Bound]]:
        return [[lo, hi] for lo, hi in self.intervals]

    def __repr__(self) -> str:
        return f"IntervalSet({self.text()})"


def _max_lo(a: Bound, b: Bound) -> Bound:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _min_hi(a: Bound, b: Bound) -> Bound:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _normalize(intervals: Iterable[tuple[Bound, Bound]]) -> tuple[tuple[Bound, Bound], ...]:
    ivs = [(lo, hi) for lo, hi in intervals if lo is None or hi is None or lo <= hi]
    ivs.sort(key=lambda iv: (iv[0] is not None, iv[0] if iv[0] is not None else 0))
    out: list[list[Bound]] = []
    for lo, hi in ivs:
        if out:
            p_hi = out[-1][1]
            if p_hi is None or lo is None or lo <= p_hi + 1:
                if p_hi is not None and (hi is None or hi > p_hi):
                    out[-1][1] = hi
                continue
        out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)
