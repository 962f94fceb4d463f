"""Certifying subset selectors for the 7- and 6-variable window lemmas.

A point t = (t_1 <= ... <= t_k), t_1 >= 1/17.41, sum t_i = 1, must admit an
index set I with 0.611797 <= sum_{i in I} t_i <= 0.787393. The selectors
follow the case analysis of the proofs branch by branch and return the set
the proof picks, together with a dotted ``case_path``.

Points are held exactly as integer numerators over a common denominator
``den`` with ``sum(nums) == den``. Every guard is an integer comparison
``S * q  <op>  p * den`` against a rational constant p/q, so no comparison
depends on binary rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Iterator, Sequence

import numpy as np

from p5verify.errors import InvalidPointError, ProofGapError
from p5verify.params import SIFT_EXPONENT, WINDOW_HI, WINDOW_LO, Number, to_fraction

FLOOR = 1 / SIFT_EXPONENT  # 100/1741
LO = WINDOW_LO
HI = WINDOW_HI

#: Guard used in the 6-variable proof's case-2 subcases. The proof prints
#: 0.212667 there and 0.212607 (= 1 - 0.787393) elsewhere.
GUARD_DEFAULT = Fraction(212607, 10**6)
GUARD_PRINTED = Fraction(212667, 10**6)


def _d(s: str) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class Window:
    lo: Fraction = LO
    hi: Fraction = HI
    floor: Fraction = FLOOR

    def contains(self, value: Number) -> bool:
        v = to_fraction(value)
        return self.lo <= v <= self.hi


WINDOW = Window()


@dataclass(frozen=True)
class OrderedSimplexPoint:
    """t_i = nums[i] / den, non-decreasing, summing exactly to 1."""

    nums: tuple[int, ...]
    den: int

    def __post_init__(self) -> None:
        _validate(self.nums, self.den)

    @classmethod
    def from_values(cls, values: Sequence[Number], tol: float = 1e-12) -> "OrderedSimplexPoint":
        """Build a point from floats, strings, Fractions or Decimals.

        Exact inputs (anything but float) must sum to exactly 1. If any input
        is a float, the sum may miss 1 by at most ``tol``: entries within
        ``tol`` below the floor are snapped onto it, and the residual is spread
        evenly over the trailing run of largest coordinates (those within
        ``tol`` of the last), which keeps the order intact.
        """
        if len(values) < 2:
            raise InvalidPointError("need at least two coordinates")
        fr = [to_fraction(v) if not isinstance(v, float) else Fraction(v) for v in values]
        has_float = any(isinstance(v, float) for v in values)
        total = sum(fr)
        if has_float:
            if abs(total - 1) > Fraction(tol):
                raise InvalidPointError(f"coordinates sum to {float(total)!r}, not 1")
            fr = [FLOOR if FLOOR - Fraction(tol) <= f < FLOOR else f for f in fr]
            run = 1
            while run < len(fr) and abs(fr[-1 - run] - fr[-1]) <= Fraction(tol):
                run += 1
            share = (1 - sum(fr)) / run
            fr[-run:] = [f + share for f in fr[-run:]]
        elif total != 1:
            raise InvalidPointError(f"coordinates sum to {total}, not 1")
        den = lcm(*(f.denominator for f in fr))
        return cls(tuple(int(f * den) for f in fr), den)

    @property
    def k(self) -> int:
        return len(self.nums)

    @property
    def t(self) -> tuple[float, ...]:
        return tuple(n / self.den for n in self.nums)

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.den) for n in self.nums)

    def subset_sum(self, indices: Iterable[int]) -> Fraction:
        return Fraction(sum(self.nums[i - 1] for i in indices), self.den)


def _validate(nums: Sequence[int], den: int) -> None:
    if den <= 0:
        raise InvalidPointError("denominator must be positive")
    if sum(nums) != den:
        raise InvalidPointError("coordinates do not sum to 1")
    if any(b < a for a, b in zip(nums, nums[1:])):
        raise InvalidPointError(f"coordinates not non-decreasing: {[n / den for n in nums]}")
    if nums[0] * FLOOR.denominator < FLOOR.numerator * den:
        raise InvalidPointError(f"t_1 = {nums[0] / den!r} below the floor 1/17.41")


@dataclass(frozen=True)
class SubsetSelection:
    indices: frozenset[int]
    subset_sum: Fraction
    case_path: str

    @property
    def case(self) -> str:
        """Top-level case number ("1", "2" or "3")."""
        return self.case_path.split(".")[0]

    def as_dict(self) -> dict:
        return {
            "indices": sorted(self.indices),
            "subset_sum": float(self.subset_sum),
            "case_path": self.case_path,
        }


# --- comparison helpers ---------------------------------------------------
# S is an integer numerator over den, c a rational constant.


def _ge(S: int, c: Fraction, den: int) -> bool:
    return S * c.denominator >= c.numerator * den


def _gt(S: int, c: Fraction, den: int) -> bool:
    return S * c.denominator > c.numerator * den


def _le(S: int, c: Fraction, den: int) -> bool:
    return S * c.denominator <= c.numerator * den


def _lt(S: int, c: Fraction, den: int) -> bool:
    return S * c.denominator < c.numerator * den


_B2_5 = _d("0.770252")
_B3_0 = _d("0.388203")
_B2_7703 = _d("0.7703")
_B2_764407 = _d("0.764407")
_B2_223594 = _d("0.223594")
_B2_260605 = _d("0.260605")
_B3_7784 = _d("0.7784")
_B3_6148 = _d("0.6148")


def _finish(nums: Sequence[int], den: int, idx: tuple[int, ...], path: str) -> SubsetSelection:
    s = sum(nums[i - 1] for i in idx)
    if not (_ge(s, LO, den) and _le(s, HI, den)):
        raise ProofGapError(f"branch {path} picked {idx} with sum {s / den!r} outside the window")
    return SubsetSelection(frozenset(idx), Fraction(s, den), path)


def _select7(n: Sequence[int], den: int) -> SubsetSelection:
    t1, t2, t3, t4, t5, t6, t7 = n
    s4567 = t4 + t5 + t6 + t7
    if _ge(s4567, LO, den) and _le(s4567, HI, den):
        return _finish(n, den, (4, 5, 6, 7), "1")
    if _gt(s4567, HI, den):
        s567 = t5 + t6 + t7
        if _ge(s567, LO, den) and _lt(s567, _B2_5, den):
            return _finish(n, den, (5, 6, 7), "2.a")
        if _lt(s567, LO, den):
            return _finish(n, den, (1, 5, 6, 7), "2.b")
        raise ProofGapError("case 2: t5+t6+t7 >= 0.770252")
    return _finish(n, den, (1, 2, 3, 4, 5), "3")


def _select6(n: Sequence[int], den: int, guard: Fraction) -> SubsetSelection:
    t1, t2, t3, t4, t5, t6 = n
    s456 = t4 + t5 + t6
    if _ge(s456, LO, den) and _le(s456, HI, den):
        return _finish(n, den, (4, 5, 6), "1")
    if _gt(s456, HI, den):
        s56 = t5 + t6
        if _ge(s56, LO, den) and _lt(s56, _B2_7703, den):
            return _finish(n, den, (5, 6), "2.a")
        s12345 = den - t6
        if _ge(s12345, LO, den) and _lt(s12345, _B2_764407, den):
            return _finish(n, den, (1, 2, 3, 4, 5), "2.b")
        for i in range(1, 6):
            ti = n[i - 1]
            if _ge(ti, guard, den) and _le(ti, _B3_0, den):
                return _finish(n, den, tuple(j for j in range(1, 7) if j != i), "2.c")
        big = sum(1 for ti in n[:5] if _gt(ti, _B3_0, den))
        if big >= 2:
            raise ProofGapError("case 2.1 reached: two of t1..t5 exceed 0.388203")
        if big == 1:
            s1234 = t1 + t2 + t3 + t4
            if _ge(s1234, guard, den) and _lt(s1234, _B2_223594, den):
                return _finish(n, den, (5, 6), "2.2")
            raise ProofGapError("case 2.2 contradiction reached: t1+t2+t3+t4 < guard")
        s123 = t1 + t2 + t3
        if _ge(s123, guard, den) and _lt(s123, _B2_260605, den):
            return _finish(n, den, (4, 5, 6), "2.3.a")
        return _finish(n, den, (2, 3, 5, 6), "2.3.b")
    s1456 = t1 + s456
    if _ge(s1456, LO, den) and _lt(s1456, _B3_7784, den):
        return _finish(n, den, (1, 4, 5, 6), "3.a")
    s12456 = s1456 + t2
    if _gt(s12456, _B3_6148, den) and _le(s12456, HI, den):
        return _finish(n, den, (1, 2, 4, 5, 6), "3.b")
    return _finish(n, den, (2, 4, 5, 6), "3.c")


def _as_point(point: OrderedSimplexPoint | Sequence[Number], k: int) -> OrderedSimplexPoint:
    if not isinstance(point, OrderedSimplexPoint):
        point = OrderedSimplexPoint.from_values(point)
    if point.k != k:
        raise InvalidPointError(f"expected {k} coordinates, got {point.k}")
    return point


def select_subset_7(point: OrderedSimplexPoint | Sequence[Number]) -> SubsetSelection:
    p = _as_point(point, 7)
    return _select7(p.nums, p.den)


def select_subset_6(
    point: OrderedSimplexPoint | Sequence[Number], guard: Fraction = GUARD_DEFAULT
) -> SubsetSelection:
    p = _as_point(point, 6)
    return _select6(p.nums, p.den, guard)


def select_subset(point: OrderedSimplexPoint, guard: Fraction = GUARD_DEFAULT) -> SubsetSelection:
    if point.k == 7:
        return _select7(point.nums, point.den)
    if point.k == 6:
        return _select6(point.nums, point.den, guard)
    raise InvalidPointError(f"no selector for k={point.k}")


# --- proof chains -----------------------------------------------------------


@dataclass
class Assertion:
    label: str
    truth: bool
    kind: str  # "point" (depends on t) or "constant" (pure arithmetic)

    def __iter__(self):
        yield self.label
        yield self.truth


@dataclass
class _Chain:
    den: int
    items: list[Assertion] = field(default_factory=list)

    def pt(self, label: str, truth: bool) -> None:
        self.items.append(Assertion(label, bool(truth), "point"))

    def const(self, label: str, truth: bool) -> None:
        self.items.append(Assertion(label, bool(truth), "constant"))


def _chain7(n: Sequence[int], den: int, path: str) -> list[Assertion]:
    t1, t2, t3, t4, t5, t6, t7 = n
    c = _Chain(den)
    F = FLOOR
    s4567 = t4 + t5 + t6 + t7
    if path == "1":
        c.pt("0.611797 <= t4+t5+t6+t7 <= 0.787393", _ge(s4567, LO, den) and _le(s4567, HI, den))
    elif path.startswith("2"):
        s123, s567 = t1 + t2 + t3, t5 + t6 + t7
        c.pt("t4+t5+t6+t7 > 0.787393", _gt(s4567, HI, den))
        c.pt("t1+t2+t3 < 0.212607", _lt(s123, _d("0.212607"), den))
        c.const("1 - 0.787393 = 0.212607", 1 - HI == _d("0.212607"))
        c.pt("3/17.41 <= 3*t1", _ge(3 * t1, 3 * F, den))
        c.pt("3*t1 <= t1+t2+t3", 3 * t1 <= s123)
        c.pt("t4+t5+t6+t7 <= 1 - 3/17.41", _le(s4567, 1 - 3 * F, den))
        c.const("1 - 3/17.41 < 0.82769", 1 - 3 * F < _d("0.82769"))
        c.pt("1/17.41 <= t4", _ge(t4, F, den))
        c.pt("4*t4 <= t4+t5+t6+t7", 4 * t4 <= s4567)
        c.pt("(t4+t5+t6+t7)/4 < 0.2069225", _lt(s4567, 4 * _d("0.2069225"), den))
        c.const("0.82769/4 = 0.2069225", _d("0.82769") / 4 == _d("0.2069225"))
        c.const("0.787393 - 0.2069225 = 0.5804705", HI - _d("0.2069225") == _d("0.5804705"))
        c.pt("0.5804705 < t5+t6+t7", _gt(s567, _d("0.5804705"), den))
        c.pt("t5+t6+t7 <= 0.82769 - 1/17.41", _le(s567, _d("0.82769") - F, den))
        c.const("0.82769 - 1/17.41 < 0.770252", _d("0.82769") - F < _B2_5)
        if path == "2.a":
            c.pt("0.611797 <= t5+t6+t7 < 0.770252", _ge(s567, LO, den) and _lt(s567, _B2_5, den))
        else:
            s1567 = t1 + s567
            c.pt("t5+t6+t7 < 0.611797", _lt(s567, LO, den))
            c.const("0.05743 < 1/17.41", _d("0.05743") < F)
            c.pt("1/17.41 <= t1", _ge(t1, F, den))
            c.pt("7*t1 <= 1", 7 * t1 <= den)
            c.const("1/7 < 0.143", Fraction(1, 7) < _d("0.143"))
            c.const("0.05743 + 0.5804705 = 0.6379005", _d("0.05743") + _d("0.5804705") == _d("0.6379005"))
            c.pt("0.6379005 < t1+t5+t6+t7", _gt(s1567, _d("0.6379005"), den))
            c.const("0.611797 + 0.143 = 0.754797", LO + _d("0.143") == _d("0.754797"))
            c.pt("t1+t5+t6+t7 < 0.754797", _lt(s1567, _d("0.754797"), den))
    else:
        s123 = t1 + t2 + t3
        s1_6 = den - t7
        s12345 = s123 + t4 + t5
        c.pt("t4+t5+t6+t7 < 0.611797", _lt(s4567, LO, den))
        c.pt("4/17.41 < t4+t5+t6+t7", _gt(s4567, 4 * F, den))
        c.const("1 - 0.611797 = 0.388203", 1 - LO == _B3_0)
        c.pt("0.388203 < t1+t2+t3", _gt(s123, _B3_0, den))
        c.const("0.1294 < 0.388203/3", _d("0.1294") < _B3_0 / 3)
        c.pt("0.388203/3 < (t1+t2+t3)/3", _gt(s123, _B3_0, den))
        c.pt("(t1+t2+t3)/3 <= t3", s123 <= 3 * t3)
        c.pt("t3 <= t4 <= t5", t3 <= t4 <= t5)
        c.pt("t1+t2+t3 <= (t1+...+t6)/2", 2 * s123 <= s1_6)
        c.pt("(t1+...+t6)/2 <= 3/7", 7 * s1_6 <= 6 * den)
        c.const("3/7 < 0.4286", Fraction(3, 7) < _d("0.4286"))
        c.pt("t4+t5 <= (t4+t5+t6+t7)/2", 2 * (t4 + t5) <= s4567)
        c.const("0.611797/2 < 0.3059", LO / 2 < _d("0.3059"))
        c.const("0.647 < 0.388203 + 2*0.1294", _d("0.647") < _B3_0 + 2 * _d("0.1294"))
        c.pt("0.388203 + 2*0.1294 < t1+...+t5", _gt(s12345, _B3_0 + 2 * _d("0.1294"), den))
        c.const("0.4286 + 0.3059 = 0.7345", _d("0.4286") + _d("0.3059") == _d("0.7345"))
        c.pt("t1+...+t5 < 0.7345", _lt(s12345, _d("0.7345"), den))
    return c.items


def _chain6(n: Sequence[int], den: int, path: str, guard: Fraction) -> list[Assertion]:
    t1, t2, t3, t4, t5, t6 = n
    c = _Chain(den)
    F = FLOOR
    s456 = t4 + t5 + t6
    gs = f"{float(guard):.6f}"
    if path == "1":
        c.pt("0.611797 <= t4+t5+t6 <= 0.787393", _ge(s456, LO, den) and _le(s456, HI, den))
    elif path.startswith("2"):
        s123 = t1 + t2 + t3
        s56 = t5 + t6
        c.pt("t4+t5+t6 > 0.787393", _gt(s456, HI, den))
        c.pt("3/17.41 <= t1+t2+t3", _ge(s123, 3 * F, den))
        c.pt("t1+t2+t3 < 0.212607", _lt(s123, _d("0.212607"), den))
        c.pt("t4+t5+t6 <= 1 - 3/17.41", _le(s456, 1 - 3 * F, den))
        c.const("1 - 3/17.41 < 0.8277", 1 - 3 * F < _d("0.8277"))
        c.pt("t5+t6 <= 1 - 4/17.41", _le(s56, 1 - 4 * F, den))
        c.const("1 - 4/17.41 < 0.7703", 1 - 4 * F < _B2_7703)
        if path == "2.a":
            c.pt("0.611797 <= t5+t6 < 0.7703", _ge(s56, LO, den) and _lt(s56, _B2_7703, den))
        else:
            s45 = t4 + t5
            s12345 = den - t6
            c.pt("t5+t6 < 0.611797", _lt(s56, LO, den))
            c.const("0.787393 - 0.611797 = 0.175596", HI - LO == _d("0.175596"))
            c.pt("0.175596 < t4", _gt(t4, _d("0.175596"), den))
            c.pt("t4 <= t5", t4 <= t5)
            c.pt("t4+t5 <= (2/3)(t4+t5+t6)", 3 * s45 <= 2 * s456)
            c.const("(2/3)*0.8277 = 0.5518", Fraction(2, 3) * _d("0.8277") == _d("0.5518"))
            c.pt("t4+t5 < 0.5518", _lt(s45, _d("0.5518"), den))
            c.const("2*0.175596 = 0.351192", 2 * _d("0.175596") == _d("0.351192"))
            c.pt("0.351192 < t4+t5", _gt(s45, _d("0.351192"), den))
            c.const("0.1723 < 3/17.41", _d("0.1723") < 3 * F)
            c.const("0.1723 + 0.351192 = 0.523492", _d("0.1723") + _d("0.351192") == _d("0.523492"))
            c.const("0.212607 + 0.5518 = 0.764407", _d("0.212607") + _d("0.5518") == _B2_764407)
            c.pt("0.523492 < t1+...+t5", _gt(s12345, _d("0.523492"), den))
            c.pt("t1+...+t5 < 0.764407", _lt(s12345, _B2_764407, den))
            if path == "2.b":
                c.pt("0.611797 <= t1+...+t5", _ge(s12345, LO, den))
            else:
                c.pt("t1+...+t5 < 0.611797", _lt(s12345, LO, den))
                c.const("1 - 0.523492 = 0.476508", 1 - _d("0.523492") == _d("0.476508"))
                c.pt("0.388203 < t6 < 0.476508", _gt(t6, _B3_0, den) and _lt(t6, _d("0.476508"), den))
                if path == "2.c":
                    hits = [i for i in range(1, 6) if _ge(n[i - 1], guard, den) and _le(n[i - 1], _B3_0, den)]
                    c.pt(f"exists i<=5 with {gs} <= t_i <= 0.388203", bool(hits))
                else:
                    c.pt(
                        f"no i<=5 with {gs} <= t_i <= 0.388203",
                        not any(_ge(n[i], guard, den) and _le(n[i], _B3_0, den) for i in range(5)),
                    )
                    c.const("1.16 < 3*0.388203", _d("1.16") < 3 * _B3_0)
                    c.pt("at most one of t1..t5 exceeds 0.388203", sum(_gt(x, _B3_0, den) for x in n[:5]) <= 1)
                    if path == "2.2":
                        s1234 = s123 + t4
                        c.pt(f"t1..t4 < {gs} < 0.388203 < t5", _lt(t4, guard, den) and _gt(t5, _B3_0, den))
                        c.const("1 - 2*0.388203 = 0.223594", 1 - 2 * _B3_0 == _B2_223594)
                        c.pt("t1+t2+t3+t4 < 0.223594", _lt(s1234, _B2_223594, den))
                        c.pt(f"{gs} <= t1+t2+t3+t4", _ge(s1234, guard, den))
                    elif path.startswith("2.3"):
                        c.pt(f"t1 <= ... <= t5 < {gs}", _lt(t5, guard, den))
                        c.const(
                            "1 - 0.351192 - 0.388203 = 0.260605",
                            1 - _d("0.351192") - _B3_0 == _B2_260605,
                        )
                        c.pt("t1+t2+t3 < 0.260605", _lt(s123, _B2_260605, den))
                        if path == "2.3.a":
                            c.pt(f"{gs} <= t1+t2+t3 < 0.260605", _ge(s123, guard, den))
                        else:
                            s14 = t1 + t4
                            c.pt(f"3/17.41 <= t1+t2+t3 < {gs}", _lt(s123, guard, den))
                            c.const(f"{gs}/3 < 0.0709", guard / 3 < _d("0.0709"))
                            c.pt("3*t1 <= t1+t2+t3", 3 * t1 <= s123)
                            c.pt("t1 < 0.0709", _lt(t1, _d("0.0709"), den))
                            c.pt("0.175596 < t4 < 0.212607", _gt(t4, _d("0.175596"), den) and _lt(t4, _d("0.212607"), den))
                            c.const("0.233 < 1/17.41 + 0.175596", _d("0.233") < F + _d("0.175596"))
                            c.const("0.0709 + 0.212607 < 0.3", _d("0.0709") + _d("0.212607") < _d("0.3"))
                            c.pt("0.233 < t1+t4 < 0.3", _gt(s14, _d("0.233"), den) and _lt(s14, _d("0.3"), den))
    else:
        s1456 = t1 + s456
        s12 = t1 + t2
        s12456 = s1456 + t2
        c.pt("t4+t5+t6 < 0.611797", _lt(s456, LO, den))
        c.pt("0.5 <= t4+t5+t6", 2 * s456 >= den)
        c.pt("6*t1 <= 1", 6 * t1 <= den)
        c.const("0.5574 < 1/17.41 + 0.5", _d("0.5574") < F + _d("0.5"))
        c.pt("1/17.41 + 0.5 <= t1+t4+t5+t6", _ge(s1456, F + _d("0.5"), den))
        c.pt("t1+t4+t5+t6 < 1/6 + 0.611797", _lt(s1456, Fraction(1, 6) + LO, den))
        c.const("1/6 + 0.611797 < 0.7784", Fraction(1, 6) + LO < _B3_7784)
        c.pt("t1+t4+t5+t6 < 0.7784", _lt(s1456, _B3_7784, den))
        if path == "3.a":
            c.pt("0.611797 <= t1+t4+t5+t6", _ge(s1456, LO, den))
        else:
            c.pt("t1+t4+t5+t6 < 0.611797", _lt(s1456, LO, den))
            c.pt("2/17.41 <= t1+t2", _ge(s12, 2 * F, den))
            c.pt("3*(t1+t2) <= 1", 3 * s12 <= den)
            c.const("0.6148 < 2/17.41 + 0.5", _B3_6148 < 2 * F + _d("0.5"))
            c.pt("2/17.41 + 0.5 <= t1+t2+t4+t5+t6", _ge(s12456, 2 * F + _d("0.5"), den))
            c.const("1/3 + 0.611797 < 0.94514", Fraction(1, 3) + LO < _d("0.94514"))
            c.pt("t1+t2+t4+t5+t6 < 0.94514", _lt(s12456, _d("0.94514"), den))
            if path == "3.b":
                c.pt("0.6148 < t1+t2+t4+t5+t6 <= 0.787393", _gt(s12456, _B3_6148, den) and _le(s12456, HI, den))
            else:
                s13 = t1 + t3
                c.pt("t1+t2+t4+t5+t6 > 0.787393", _gt(s12456, HI, den))
                c.pt("1/17.41 <= t3 < 0.212607", _ge(t3, F, den) and _lt(t3, _d("0.212607"), den))
                c.pt("0.175596 < t2", _gt(t2, _d("0.175596"), den))
                c.const("5*0.175596 = 0.87798", 5 * _d("0.175596") == _d("0.87798"))
                c.pt("5*t2 <= t2+t3+t4+t5+t6", 5 * t2 <= den - t1)
                c.pt("0.87798 < t2+t3+t4+t5+t6", _gt(den - t1, _d("0.87798"), den))
                c.const("1 - 0.87798 = 0.12202", 1 - _d("0.87798") == _d("0.12202"))
                c.pt("t1 < 0.12202", _lt(t1, _d("0.12202"), den))
                c.pt("t2 <= t3", t2 <= t3)
                c.const("0.22 < 1/17.41 + 0.175596", _d("0.22") < F + _d("0.175596"))
                c.const("0.12202 + 0.212607 < 0.34", _d("0.12202") + _d("0.212607") < _d("0.34"))
                c.pt("0.22 < t1+t3 < 0.34", _gt(s13, _d("0.22"), den) and _lt(s13, _d("0.34"), den))
    return c.items


def verify_proof_chain(
    point: OrderedSimplexPoint | Sequence[Number],
    guard: Fraction = GUARD_DEFAULT,
    selection: SubsetSelection | None = None,
) -> list[Assertion]:
    """Re-evaluate every inequality of the branch the selector takes.

    The result is a list of :class:`Assertion` (unpackable as
    ``(label, truth)``). ``kind == "constant"`` marks links that are pure
    arithmetic on printed constants. A false entry is reported, never raised.
    The last entry is always the window check on the chosen subset.
    """
    if not isinstance(point, OrderedSimplexPoint):
        point = OrderedSimplexPoint.from_values(point)
    if selection is None:
        selection = select_subset(point, guard)
    if point.k == 7:
        items = _chain7(point.nums, point.den, selection.case_path)
    else:
        items = _chain6(point.nums, point.den, selection.case_path, guard)
    items.append(
        Assertion(
            f"0.611797 <= sum(I={sorted(selection.indices)}) <= 0.787393",
            LO <= selection.subset_sum <= HI,
            "point",
        )
    )
    return items


def audit_constants(guard: Fraction = GUARD_DEFAULT) -> list[Assertion]:
    """All constant-only links of both proofs, independent of any point."""
    probes7 = {
        "1": (1, 1, 1, 1, 1, 1, 1),
        "2.a": (1, 1, 1, 1, 1, 1, 1),
        "2.b": (1, 1, 1, 1, 1, 1, 1),
        "3": (1, 1, 1, 1, 1, 1, 1),
    }
    seen: dict[str, Assertion] = {}
    for path, n in probes7.items():
        for a in _chain7(n, 7, path):
            if a.kind == "constant":
                seen.setdefault(a.label, a)
    for path in ("1", "2.a", "2.b", "2.c", "2.2", "2.3.a", "2.3.b", "3.a", "3.b", "3.c"):
        for a in _chain6((1, 1, 1, 1, 1, 1), 6, path, guard):
            if a.kind == "constant":
                seen.setdefault(a.label, a)
    return list(seen.values())


# --- brute-force oracle -------------------------------------------------------


def window_subsets(point: OrderedSimplexPoint) -> list[frozenset[int]]:
    """Every proper nonempty index set whose sum lies in the window."""
    k = point.k
    out = []
    for r in range(1, k):
        for combo in itertools.combinations(range(1, k + 1), r):
            s = sum(point.nums[i - 1] for i in combo)
            if _ge(s, LO, point.den) and _le(s, HI, point.den):
                out.append(frozenset(combo))
    return out


@lru_cache(maxsize=None)
def subset_matrix(k: int) -> np.ndarray:
    """0/1 rows for all 2**k - 2 proper nonempty subsets."""
    rows = [[(m >> j) & 1 for j in range(k)] for m in range(1, 2**k - 1)]
    return np.array(rows, dtype=np.int64)


def window_depth(nums: np.ndarray, den: int) -> np.ndarray:
    """Per point, max over subsets of min(s - lo, hi - s), in units of t.

    Negative exactly when no subset sum lies in the window (a counterexample).
    Integer-exact decision; the returned magnitude is a float.
    """
    sums = nums @ subset_matrix(nums.shape[1]).T  # exact int64
    lo_c = -((-LO.numerator * den) // LO.denominator)  # ceil(LO * den)
    hi_c = (HI.numerator * den) // HI.denominator  # floor(HI * den)
    depth = np.minimum(sums - lo_c, hi_c - sums).max(axis=1)
    return depth.astype(np.float64) / den


# --- point generation ---------------------------------------------------------


def simplex_vertices(k: int) -> list[tuple[Fraction, ...]]:
    """The k vertices of {F <= t_1 <= ... <= t_k, sum = 1}.

    Vertex 0 is the all-equal point; vertex j >= 1 has t_1..t_j at the floor
    and the rest equal.
    """
    verts = [tuple(Fraction(1, k) for _ in range(k))]
    for j in range(1, k):
        rest = (1 - j * FLOOR) / (k - j)
        verts.append(tuple([FLOOR] * j + [rest] * (k - j)))
    return verts


RANDOM_DEN = 10**12


def random_points(k: int, count: int, rng: np.random.Generator, den: int = RANDOM_DEN) -> np.ndarray:
    """Random valid lattice points (rows of numerators over ``den``).

    Points are convex combinations of the simplex vertices. Half the batch
    uses Dirichlet(1) weights (uniform on the region), half Dirichlet(0.3)
    weights, which pile up near faces, edges and vertices.
    """
    V = np.array([[float(x) for x in v] for v in simplex_vertices(k)])
    half = count // 2
    W = np.vstack([rng.dirichlet(np.ones(k), size=half), rng.dirichlet(np.full(k, 0.3), size=count - half)])
    P = W @ V
    nums = np.floor(P * den).astype(np.int64)
    floor_units = -((-FLOOR.numerator * den) // FLOOR.denominator)
    nums = np.maximum(nums, floor_units)
    nums = np.maximum.accumulate(nums, axis=1)
    nums[:, -1] = den - nums[:, :-1].sum(axis=1)
    ok = np.all(np.diff(nums, axis=1) >= 0, axis=1) & (nums[:, 0] >= floor_units)
    return nums[ok]


def nondecreasing_parts(slots: int, total: int, low: int) -> Iterator[tuple[int, ...]]:
    """Non-decreasing tuples of ``slots`` integers >= ``low`` summing to ``total``."""
    if slots == 1:
        if total >= low:
            yield (total,)
        return
    for a in range(low, total // slots + 1):
        for rest in nondecreasing_parts(slots - 1, total - a, a):
            yield (a,) + rest


def grid_floor_units(m: int) -> int:
    """Smallest n with n/m >= 1/17.41."""
    return -((-FLOOR.numerator * m) // FLOOR.denominator)


def grid_points(k: int, m: int) -> Iterator[tuple[int, ...]]:
    """All valid points with coordinates in (1/m)Z, as numerators over m."""
    return nondecreasing_parts(k, m, grid_floor_units(m))


def grid_denominator(step: Number) -> int:
    s = to_fraction(step)
    if s <= 0 or s.numerator != 1:
        raise ValueError(f"grid step must be 1/m for a positive integer m, got {step}")
    return s.denominator
