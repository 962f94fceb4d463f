from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p5verify.errors import InvalidPointError, ProofGapError
from p5verify.lemmas import (
    FLOOR,
    GUARD_DEFAULT,
    GUARD_PRINTED,
    HI,
    LO,
    WINDOW,
    OrderedSimplexPoint,
    _finish,
    audit_constants,
    grid_denominator,
    grid_points,
    random_points,
    select_subset,
    select_subset_6,
    select_subset_7,
    verify_proof_chain,
    window_depth,
    window_subsets,
)


def pt(*vals):
    return OrderedSimplexPoint.from_values(vals)


def perturbed(k):
    e = Fraction(1, 10**6)
    mid = Fraction(k - 1, 2)
    return [Fraction(1, k) + (i - mid) * e for i in range(k)]


def test_window_constants():
    assert WINDOW.lo == LO < WINDOW.hi == HI
    assert 7 * FLOOR < 1
    assert WINDOW.contains("0.7") and not WINDOW.contains("0.8")


def test_case1_k7():
    s = select_subset_7(pt("0.0575", "0.09", "0.11", "0.13", "0.15", "0.21", "0.2525"))
    assert s.indices == {4, 5, 6, 7}
    assert s.subset_sum == Fraction("0.7425")
    assert s.case == "1"


def test_case3_k7():
    p = OrderedSimplexPoint.from_values(perturbed(7))
    s = select_subset_7(p)
    assert s.indices == {1, 2, 3, 4, 5}
    assert s.case == "3"
    assert abs(float(s.subset_sum) - 5 / 7) < 1e-5
    chain = dict(verify_proof_chain(p))
    assert chain["t4+t5+t6+t7 < 0.611797"] is True
    assert all(chain.values())


def test_case2_k7():
    s = select_subset_7(pt("0.0575", "0.0580", "0.0585", "0.18", "0.20", "0.215", "0.231"))
    assert s.indices == {5, 6, 7}
    assert s.subset_sum == Fraction("0.646")
    assert s.case == "2"


def test_case3_k6():
    p = OrderedSimplexPoint.from_values(perturbed(6))
    s = select_subset_6(p)
    assert s.indices == {1, 4, 5, 6}
    assert s.case == "3"
    assert abs(float(s.subset_sum) - 2 / 3) < 1e-5


def test_k6_heavy_last_coordinate():
    # t6 = 0.60: t4+t5+t6 = 0.79 is above the window, so case 2 applies
    s = select_subset_6(pt("0.06", "0.07", "0.08", "0.09", "0.10", "0.60"))
    assert s.case_path == "2.a"
    assert s.indices == {5, 6}
    assert s.subset_sum == Fraction("0.7")


def test_k6_floor_point_against_brute_force():
    rest = [FLOOR, Fraction("0.0675"), Fraction("0.0775"), Fraction("0.18"), Fraction("0.25")]
    p = OrderedSimplexPoint.from_values(rest + [1 - sum(rest)])
    s = select_subset_6(p)
    assert s.indices in window_subsets(p)
    assert LO <= s.subset_sum <= HI


def test_boundary_tie_fires_case1():
    a, b = Fraction("0.129401"), Fraction("0.15294925")
    p = OrderedSimplexPoint.from_values([a, a, a, b, b, b, b])
    assert p.subset_sum([4, 5, 6, 7]) == LO
    s = select_subset_7(p)
    assert s.case == "1" and s.indices == {4, 5, 6, 7}
    assert all(ok for _, ok in verify_proof_chain(p))


@pytest.mark.parametrize(
    "vals",
    [
        ("0.05", "0.15", "0.15", "0.15", "0.15", "0.15", "0.2"),  # below floor
        ("0.1", "0.09", "0.11", "0.13", "0.15", "0.21", "0.21"),  # unsorted
        ("0.06", "0.09", "0.11", "0.13", "0.15", "0.21", "0.2525"),  # sum != 1
    ],
)
def test_invalid_points(vals):
    with pytest.raises(InvalidPointError):
        select_subset_7(pt(*vals))


def test_wrong_dimension():
    with pytest.raises(InvalidPointError):
        select_subset_7(pt("0.1", "0.1", "0.2", "0.2", "0.2", "0.2"))


def test_float_input_snaps_to_floor():
    t1 = float(FLOOR) - 1e-13
    p = OrderedSimplexPoint.from_values([t1] + [(1 - t1) / 6] * 6)
    assert p.fractions()[0] == FLOOR
    assert sum(p.fractions()) == 1
    with pytest.raises(InvalidPointError):
        OrderedSimplexPoint.from_values([float(FLOOR) - 1e-9] + [(1 - float(FLOOR) + 1e-9) / 6] * 6)


def test_unreachable_branch_raises():
    with pytest.raises(ProofGapError):
        _finish((1, 1, 1, 1, 1, 1), 6, (1,), "x")


def test_guard_constant_finding():
    # Between 0.212607 and 0.212667 the two guards route this point differently.
    p = pt("0.058", "0.06", "0.06673", "0.21262", "0.21265", "0.39")
    s = select_subset_6(p, GUARD_DEFAULT)
    assert s.case_path == "2.c"
    assert all(ok for _, ok in verify_proof_chain(p, GUARD_DEFAULT))
    s2 = select_subset_6(p, GUARD_PRINTED)
    assert s2.case_path == "2.3.b"
    assert LO <= s2.subset_sum <= HI  # the selection still lands in the window
    false = [label for label, ok in verify_proof_chain(p, GUARD_PRINTED) if not ok]
    assert false == ["0.175596 < t4 < 0.212607"]


def test_constant_audit():
    bad = [a.label for a in audit_constants() if not a.truth]
    assert bad == ["1/6 + 0.611797 < 0.7784"]
    assert Fraction(1, 6) + LO > Fraction("0.7784")


def test_all_0_2_has_no_window_subset():
    p = pt("0.2", "0.2", "0.2", "0.2", "0.2")
    assert window_subsets(p) == []
    assert window_depth(np.array([p.nums]), p.den)[0] < 0


def test_depth_agrees_with_enumeration():
    rng = np.random.default_rng(5)
    for k in (5, 6, 7):
        rows = random_points(k, 300, rng, den=10**6)
        depth = window_depth(rows, 10**6)
        for r, d in zip(rows, depth):
            p = OrderedSimplexPoint(tuple(int(x) for x in r), 10**6)
            assert (d >= 0) == bool(window_subsets(p))


def test_random_points_valid():
    rows = random_points(7, 1000, np.random.default_rng(0))
    assert rows.shape[1] == 7
    for r in rows[:50]:
        OrderedSimplexPoint(tuple(int(x) for x in r), 10**12)


def test_grid_points_small():
    m = grid_denominator("0.05")
    assert m == 20
    pts = list(grid_points(6, m))
    assert pts and all(sum(p) == m and list(p) == sorted(p) for p in pts)
    for p in pts:
        s = select_subset(OrderedSimplexPoint(p, m))
        assert LO <= s.subset_sum <= HI


def test_grid_denominator_rejects():
    with pytest.raises(ValueError):
        grid_denominator("0.3")


@st.composite
def simplex_points(draw, k):
    m = 10**6
    lo = -(-m * 100 // 1741)
    cuts = sorted(draw(st.lists(st.integers(0, m - k * lo), min_size=k - 1, max_size=k - 1)))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [m - k * lo])]
    parts = sorted(lo + x for x in parts)
    return OrderedSimplexPoint(tuple(parts), m)


@settings(max_examples=300, deadline=None)
@given(st.one_of(simplex_points(6), simplex_points(7)))
def test_selection_property(p):
    s = select_subset(p)
    assert LO <= s.subset_sum <= HI
    assert p.subset_sum(s.indices) == s.subset_sum
    assert s.indices in window_subsets(p)
    assert all(a.truth for a in verify_proof_chain(p, selection=s) if a.kind == "point")
