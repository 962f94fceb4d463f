from decimal import Decimal
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from p5verify.errors import DomainError
from p5verify.params import (
    WINDOW_HI,
    WINDOW_LO,
    check_windows,
    derive_params,
    derive_params_float,
    to_fraction,
    window_roots,
    window_threshold,
    window_values,
)

mpmath.mp.dps = 40


def test_gamma_one():
    p = derive_params(1)
    assert p.exact.xi == Fraction(41, 270)
    assert p.exact.u == Fraction(270, 41)
    assert p.exact.lam == Fraction(41, 99)
    assert p.xi == pytest.approx(0.1518519, abs=1e-7)
    assert p.u == pytest.approx(6.5853659, abs=1e-7)
    assert p.lam == pytest.approx(0.4141414, abs=1e-7)


def test_gamma_09985_against_mpmath():
    p = derive_params("0.9985")
    xi = (140 * mpmath.mpf("0.9985") - 99) / 270
    assert p.exact.xi == Fraction("40.79") / 270
    assert abs(p.xi - float(xi)) < 1e-15
    assert abs(p.u - float(1 / xi)) < 1e-13


@pytest.mark.parametrize("gamma", ["0.5", "99/140", "0", "1.01", -1])
def test_domain_errors(gamma):
    with pytest.raises(DomainError):
        derive_params(gamma)


def test_lambda_denominator_domain():
    # gamma = 0.9 gives u = 10 > 9
    with pytest.raises(DomainError, match="lambda"):
        derive_params("0.9")
    with pytest.raises(DomainError):
        derive_params("0.999", "-1e-9")


def test_range_invariants():
    for g in ("0.998501", "0.999", "0.99999"):
        p = derive_params(g)
        assert 0.15107 < p.xi < 0.15186
        assert 6.585 < p.u < 6.620
        assert p.lam > 0


def test_to_fraction_reads_decimals():
    assert to_fraction(0.9985) == Fraction(9985, 10000)
    assert to_fraction("0.9985") == Fraction(1997, 2000)
    assert to_fraction(Decimal("0.1")) == Fraction(1, 10)
    with pytest.raises(DomainError):
        to_fraction("abc")
    with pytest.raises(TypeError):
        to_fraction(True)


def test_windows_gamma_one():
    r = check_windows(1)
    assert r.lower_exact == Fraction(164, 270)
    assert r.upper_value == pytest.approx(0.7879630, abs=1e-7)
    assert r.ok and r.float_agrees


def test_windows_09985_tight():
    r = check_windows(derive_params("0.9985"))
    assert r.lower_value == pytest.approx(0.6117963, abs=1e-7)
    assert r.upper_value == pytest.approx(0.7873935, abs=1e-7)
    assert r.lower_ok and r.upper_ok
    assert r.lower_margin == Fraction(19, 27000000)  # ~7.04e-7
    assert r.upper_margin == Fraction(7, 13500000)  # ~5.19e-7


def test_windows_0998_fails():
    r = check_windows("0.998")
    assert r.lower_value == pytest.approx(0.6132593, abs=1e-7)
    assert not r.lower_ok and not r.ok


def test_threshold_matches_symbolic_solve():
    g = sympy.symbols("g")
    xi = (140 * g - 99) / sympy.Integer(270)
    lo = sympy.solve(5 - 5 * g + 4 * xi - sympy.Rational(611797, 10**6), g)[0]
    hi = sympy.solve((g + xi + 2) / 4 - sympy.Rational(787393, 10**6), g)[0]
    r1, r2 = window_roots()
    assert (r1, r2) == (Fraction(str(lo)), Fraction(str(hi)))
    t = window_threshold()
    assert t == max(r1, r2) == Fraction(78881481, 79000000)
    assert abs(t - Fraction(9985, 10000)) < Fraction(1, 10**4)


def test_threshold_sanity():
    t = window_threshold()
    assert check_windows(t + Fraction(1, 10**6)).ok
    assert not check_windows(t - Fraction(1, 10**6)).ok


def test_claim_grid_1e5():
    start = Fraction(9985, 10000)
    for i in range(1, 150):
        assert check_windows(start + Fraction(i, 10**5)).ok


@given(st.fractions(min_value=Fraction(3, 4), max_value=1), st.fractions(min_value=Fraction(3, 4), max_value=1))
def test_window_monotonicity(a, b):
    lo_a, up_a = window_values(a)
    lo_b, up_b = window_values(b)
    if a < b:
        assert lo_a > lo_b and up_a < up_b


@settings(max_examples=200)
@given(st.floats(min_value=0.95, max_value=1.0), st.floats(min_value=0, max_value=1e-3))
def test_exact_and_float_agree(gamma, eps):
    p = derive_params(gamma, eps)
    xi, u, lam = derive_params_float(gamma, eps)
    assert abs(p.xi - xi) < 1e-12
    assert abs(p.u - u) < 1e-12
    assert abs(p.lam - lam) < 1e-12


def test_report_dict():
    d = check_windows("0.9985").as_dict()
    assert d["lower_ok"] and d["upper_ok"]
    assert d["lower_exact"] == "33037/54000"
    assert WINDOW_LO < WINDOW_HI
