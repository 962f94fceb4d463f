import io
import json
from fractions import Fraction

from p5verify.search import (
    extreme_candidates,
    run_search,
    search_counterexample,
    sweep_selectors,
    write_jsonl,
)


def test_k7_random_small():
    assert search_counterexample(7, "random", 20000, seed=1) is None


def test_k6_coarse_grid():
    res = run_search(6, "grid", None, step="0.01")
    assert res.counterexample is None
    assert res.points_tested > 0 and res.nearest_miss > 0


def test_k5_extreme_point_finds_all_0_2():
    res = run_search(5, "extreme-point", None)
    pt, dist = res.closest_counterexample([0.2] * 5)
    assert pt is not None and dist == 0
    assert pt.fractions() == (Fraction(1, 5),) * 5
    assert res.nearest_miss < 0


def test_extreme_candidates_are_valid():
    for vals in extreme_candidates(6):
        assert sum(vals) == 1
        assert list(vals) == sorted(vals)


def test_random_search_thread_independent():
    a = run_search(6, "random", 150000, seed=7, threads=1)
    b = run_search(6, "random", 150000, seed=7, threads=3)
    assert a.records == b.records
    assert len(a.records) == 3  # batches of 65536


def test_jsonl_records():
    res = run_search(7, "random", 1000, seed=3)
    buf = io.StringIO()
    write_jsonl(res.records, buf)
    rec = json.loads(buf.getvalue().splitlines()[0])
    assert rec["schema_version"] == 1
    assert {"points_tested", "nearest_miss", "seed"} <= rec.keys()
    assert rec["points_tested"] == 1000


def test_sweep_random_and_threads():
    a = sweep_selectors(7, "random", 3000, seed=2)
    b = sweep_selectors(7, "random", 3000, seed=2, threads=2)
    assert a.as_dict() == b.as_dict()
    assert a.selections_ok and a.false_point_assertions == 0
    assert a.points == 3000


def test_sweep_grid_k6():
    rep = sweep_selectors(6, "grid", step="0.02")
    assert rep.selections_ok
    assert rep.false_point_assertions == 0
    assert rep.points == sum(rep.cases.values())
