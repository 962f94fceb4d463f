import csv
import io
import json
from fractions import Fraction

import mpmath
import pytest

from p5verify.bound import (
    CSV_COLUMNS,
    TARGET_MARGIN,
    evaluate_bracket,
    gamma_grid,
    margin_csv,
    margin_json,
    margin_table,
    scan_threshold,
)
from p5verify.errors import DomainError

GRID = gamma_grid("0.9986", "0.9999", "0.0001")


def _mp_bracket(gamma):
    """Independent high-precision bracket with the printed constants."""
    mpmath.mp.dps = 30
    g = mpmath.mpf(gamma)
    xi = (140 * g - 99) / 270
    u = 1 / xi
    lam = 1 / (9 - u)
    main = mpmath.log(17.41 * xi - 1) / xi
    pen = mpmath.quad(lambda t: (t - u) / (t * (t * xi - 1)), [u, 17.41])
    w = lam * g / xi * (mpmath.mpf("0.00259") + mpmath.mpf("0.02571") + mpmath.mpf("0.16688"))
    return main - lam * pen - w


@pytest.mark.parametrize("gamma", ["0.9985", "0.999", "1"])
def test_bracket_against_mpmath(gamma):
    assert evaluate_bracket(gamma).bracket == pytest.approx(float(_mp_bracket(gamma)), abs=1e-11)


def test_paper_claim_0999():
    r = evaluate_bracket("0.999")
    assert r.bracket > TARGET_MARGIN
    assert r.positive and r.exceeds_paper_margin and r.windows_ok


def test_reconstruction_invariant():
    for g in GRID:
        r = evaluate_bracket(g)
        assert abs(r.reconstructed() - r.bracket) <= 1e-12
        assert r.positive == (r.bracket > 0)


def test_claim_grid():
    assert len(GRID) == 14
    for g in GRID:
        assert evaluate_bracket(g).bracket > 0.004


def test_computed_constants_are_conservative():
    for g in GRID:
        paper = evaluate_bracket(g)
        comp = evaluate_bracket(g, use_paper_constants=False)
        assert comp.bracket >= paper.bracket
        assert comp.constants == "computed"


def test_epsilon_sensitivity():
    for g in GRID:
        assert abs(evaluate_bracket(g, "1e-6").bracket - evaluate_bracket(g).bracket) <= 1e-3


def test_out_of_range_gamma_domain():
    # gamma = 0.9 has u = 10, so lambda = 1/(9 - u) is negative: rejected
    with pytest.raises(DomainError):
        evaluate_bracket("0.9")
    with pytest.raises(DomainError):
        evaluate_bracket("0.5")


def test_bracket_below_range_reported():
    r = evaluate_bracket("0.99")
    assert not r.positive and not r.windows_ok


def test_margin_table():
    entries = margin_table(["0.998501", "0.999", "0.9999"])
    assert [e.report.exceeds_paper_margin for e in entries] == [True, True, True]
    assert margin_table([]) == []
    (bad,) = margin_table(["0.7"])
    assert bad.report is None and "xi" in bad.error


def test_margin_table_threads_and_order():
    gs = ["0.9999", "0.7", "0.999"]
    a = margin_table(gs)
    b = margin_table(gs, threads=3)
    assert [e.as_dict() for e in a] == [e.as_dict() for e in b]
    assert [e.gamma for e in a] == gs


def test_margin_minimum_at_left_end():
    vals = [evaluate_bracket(g).bracket for g in gamma_grid("0.9985", "1", "0.00005")]
    assert min(vals) == vals[0]
    assert vals[0] == pytest.approx(0.0042316, abs=1e-6)


def test_scan_threshold_recovers_09985():
    r = scan_threshold("0.99", "1", "1e-4")
    assert r.gamma == Fraction(9985, 10000)
    assert r.binding == "windows"
    assert r.lower_margin == Fraction(19, 27000000)
    assert r.upper_margin == Fraction(7, 13500000)
    assert r.bracket_root < float(r.window_root)
    assert set(r.previous_failures) == {"windows", "bracket"}


def test_scan_threshold_other_ranges():
    assert scan_threshold("0.9986", "0.9999", "1e-4").gamma == Fraction(9986, 10000)
    assert scan_threshold("0.5", "0.6", "1e-2") is None


def test_gamma_grid():
    g = gamma_grid("0.1", "0.3", "0.1")
    assert g == [Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)]
    with pytest.raises(ValueError):
        gamma_grid("1", "0", "0.1")


def test_emission():
    entries = margin_table(["0.999", "0.7"])
    rows = list(csv.DictReader(io.StringIO(margin_csv(entries))))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert len(rows) == 1
    assert float(rows[0]["margin_vs_0.004"]) == pytest.approx(float(rows[0]["bracket"]) - 0.004)
    lines = [json.loads(x) for x in margin_json(entries).splitlines()]
    assert lines[0]["schema_version"] == 1 and "error" in lines[1]
