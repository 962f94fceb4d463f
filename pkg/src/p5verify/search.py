"""Falsification harness and bulk sweeps for the window lemmas.

``run_search`` looks for points where no proper subset sum lands in the
window, using a brute-force oracle over all 2**k - 2 subsets (independent of
the case-analysis selectors). ``sweep_selectors`` runs the selectors and proof
chains over the same point streams.

Work is split into fixed batches; batch b of a random search always draws
from ``SeedSequence(seed).spawn(...)[b]``, so results do not depend on the
worker count.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from p5verify.errors import ProofGapError
from p5verify.lemmas import (
    GUARD_DEFAULT,
    HI,
    LO,
    RANDOM_DEN,
    OrderedSimplexPoint,
    grid_denominator,
    grid_floor_units,
    grid_points,
    nondecreasing_parts,
    random_points,
    select_subset,
    simplex_vertices,
    verify_proof_chain,
    window_depth,
)
from p5verify.params import Number

SCHEMA_VERSION = 1
STRATEGIES = ("grid", "random", "extreme-point")
BATCH_SIZE = 1 << 16
#: Counterexamples kept per search (the first ones in batch order).
KEEP = 10_000


@dataclass
class SearchResult:
    k: int
    strategy: str
    seed: int
    points_tested: int
    counterexample: OrderedSimplexPoint | None
    nearest_miss: float
    records: list[dict] = field(default_factory=list)
    counterexamples: list[OrderedSimplexPoint] = field(default_factory=list)

    def closest_counterexample(self, target: Sequence[float]) -> tuple[OrderedSimplexPoint | None, float]:
        """Kept counterexample nearest to ``target`` in the max-norm."""
        best, dist = None, float("inf")
        for pt in self.counterexamples:
            d = max(abs(a - b) for a, b in zip(pt.t, target))
            if d < dist:
                best, dist = pt, d
        return best, dist

    def summary(self) -> dict:
        cx = self.counterexample
        return {
            "schema_version": SCHEMA_VERSION,
            "record": "lemma_search",
            "k": self.k,
            "strategy": self.strategy,
            "seed": self.seed,
            "points_tested": self.points_tested,
            "nearest_miss": self.nearest_miss,
            "counterexample": None if cx is None else [str(f) for f in cx.fractions()],
        }


def _random_batch(k: int, count: int, seq: np.random.SeedSequence) -> np.ndarray:
    return random_points(k, count, np.random.default_rng(seq))


def _grid_batches(k: int, m: int, budget: int | None) -> Iterator[np.ndarray]:
    it = grid_points(k, m)
    if budget is not None:
        it = itertools.islice(it, budget)
    while True:
        chunk = list(itertools.islice(it, BATCH_SIZE))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def _exact_depth(point: OrderedSimplexPoint) -> Fraction:
    fr = point.fractions()
    best = None
    for r in range(1, point.k):
        for combo in itertools.combinations(fr, r):
            s = sum(combo)
            d = min(s - LO, HI - s)
            if best is None or d > best:
                best = d
    return best


def extreme_candidates(k: int) -> Iterator[tuple[Fraction, ...]]:
    """Vertices, edge midpoints, and edge points where a subset sum meets a
    window end (plus tiny shifts to either side along the edge)."""
    verts = simplex_vertices(k)
    yield from verts
    subsets = [c for r in range(1, k) for c in itertools.combinations(range(k), r)]
    shift = Fraction(1, 10**9)
    for a, b in itertools.combinations(range(k), 2):
        va, vb = verts[a], verts[b]
        yield tuple((x + y) / 2 for x, y in zip(va, vb))
        for S in subsets:
            sa = sum(va[i] for i in S)
            sb = sum(vb[i] for i in S)
            if sa == sb:
                continue
            for c in (LO, HI):
                lam = (c - sa) / (sb - sa)
                for l in (lam - shift, lam, lam + shift):
                    if 0 <= l <= 1:
                        yield tuple(x + l * (y - x) for x, y in zip(va, vb))


def _batch_record(k, strategy, batch, seed, nums, den) -> tuple[dict, np.ndarray]:
    depth = window_depth(nums, den)
    hit = np.flatnonzero(depth < 0)
    rec = {
        "schema_version": SCHEMA_VERSION,
        "record": "lemma_search_batch",
        "k": k,
        "strategy": strategy,
        "batch": batch,
        "seed": seed,
        "points_tested": int(nums.shape[0]),
        "counterexamples": int(hit.size),
        "nearest_miss": float(depth.min()) if depth.size else None,
    }
    return rec, nums[hit[:KEEP]]


def run_search(
    k: int,
    strategy: str,
    budget: int | None,
    seed: int = 0,
    *,
    step: Number = "0.005",
    threads: int = 1,
    on_record: Callable[[dict], None] | None = None,
) -> SearchResult:
    """Search for a valid k-point with no subset sum in the window.

    ``budget`` caps the number of points (``None`` means the whole grid or
    all extreme candidates; random search requires a budget). The first
    counterexample in batch order is returned. ``nearest_miss`` is the
    smallest per-point window depth seen; it is negative iff a
    counterexample exists.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if budget is not None and budget <= 0:
        raise ValueError("budget must be positive")
    records: list[dict] = []
    kept: list[OrderedSimplexPoint] = []
    tested = 0
    nearest = float("inf")

    def emit(rec: dict) -> None:
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    if strategy == "extreme-point":
        cands = extreme_candidates(k)
        if budget is not None:
            cands = itertools.islice(cands, budget)
        batch_depths = []
        for vals in cands:
            pt = OrderedSimplexPoint.from_values(vals)
            d = _exact_depth(pt)
            tested += 1
            batch_depths.append(d)
            if d < 0 and len(kept) < KEEP:
                kept.append(pt)
        nearest = float(min(batch_depths)) if batch_depths else nearest
        emit(
            {
                "schema_version": SCHEMA_VERSION,
                "record": "lemma_search_batch",
                "k": k,
                "strategy": strategy,
                "batch": 0,
                "seed": seed,
                "points_tested": tested,
                "counterexamples": sum(1 for d in batch_depths if d < 0),
                "nearest_miss": nearest if batch_depths else None,
            }
        )
        return _result(k, strategy, seed, tested, nearest, records, kept)

    if strategy == "random":
        if budget is None:
            raise ValueError("random search needs a budget")
        sizes = [BATCH_SIZE] * (budget // BATCH_SIZE)
        if budget % BATCH_SIZE:
            sizes.append(budget % BATCH_SIZE)
        seqs = np.random.SeedSequence(seed).spawn(len(sizes))

        def work(b: int) -> tuple[dict, np.ndarray]:
            nums = _random_batch(k, sizes[b], seqs[b])
            return _batch_record(k, strategy, b, seed, nums, RANDOM_DEN)

        items = range(len(sizes))
        den = RANDOM_DEN
    else:
        den = grid_denominator(step)
        batches = list(_grid_batches(k, den, budget))

        def work(b: int) -> tuple[dict, np.ndarray]:
            return _batch_record(k, strategy, b, seed, batches[b], den)

        items = range(len(batches))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for rec, rows in pool.map(work, items):
            emit(rec)
            tested += rec["points_tested"]
            if rec["nearest_miss"] is not None:
                nearest = min(nearest, rec["nearest_miss"])
            for row in rows[: KEEP - len(kept)]:
                kept.append(OrderedSimplexPoint(tuple(int(x) for x in row), den))
    return _result(k, strategy, seed, tested, nearest, records, kept)


def _result(k, strategy, seed, tested, nearest, records, kept) -> SearchResult:
    return SearchResult(
        k, strategy, seed, tested, kept[0] if kept else None, nearest, records, kept
    )


def search_counterexample(
    k: int, strategy: str, budget: int | None, seed: int = 0, **kwargs
) -> OrderedSimplexPoint | None:
    return run_search(k, strategy, budget, seed, **kwargs).counterexample


# --- selector sweeps ------------------------------------------------------------


@dataclass
class SweepReport:
    k: int
    strategy: str
    points: int = 0
    cases: Counter = field(default_factory=Counter)
    false_assertions: Counter = field(default_factory=Counter)
    false_point_assertions: int = 0
    false_constant_assertions: int = 0
    failures: list[str] = field(default_factory=list)

    def merge(self, other: "SweepReport") -> None:
        self.points += other.points
        self.cases.update(other.cases)
        self.false_assertions.update(other.false_assertions)
        self.false_point_assertions += other.false_point_assertions
        self.false_constant_assertions += other.false_constant_assertions
        self.failures.extend(other.failures)

    @property
    def selections_ok(self) -> bool:
        return not self.failures

    @property
    def chains_ok(self) -> bool:
        return not self.false_assertions

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "record": "lemma_sweep",
            "k": self.k,
            "strategy": self.strategy,
            "points": self.points,
            "cases": dict(sorted(self.cases.items())),
            "selection_failures": len(self.failures),
            "false_point_assertions": self.false_point_assertions,
            "false_constant_assertions": self.false_constant_assertions,
            "false_assertions": dict(sorted(self.false_assertions.items())),
        }


def _sweep_rows(k: int, strategy: str, rows: Sequence[Sequence[int]], den: int, guard: Fraction, chains: bool) -> SweepReport:
    rep = SweepReport(k, strategy)
    for r in rows:
        pt = OrderedSimplexPoint(tuple(r), den)
        try:
            sel = select_subset(pt, guard)
        except ProofGapError as exc:
            rep.failures.append(f"{pt.t}: {exc}")
            rep.points += 1
            continue
        rep.points += 1
        rep.cases[sel.case_path] += 1
        if chains:
            for a in verify_proof_chain(pt, guard, selection=sel):
                if not a.truth:
                    rep.false_assertions[a.label] += 1
                    if a.kind == "constant":
                        rep.false_constant_assertions += 1
                    else:
                        rep.false_point_assertions += 1
    return rep


def _random_task(args) -> SweepReport:
    k, count, seq, guard, chains = args
    rows = _random_batch(k, count, seq).tolist()
    return _sweep_rows(k, "random", rows, RANDOM_DEN, guard, chains)


def _grid_task(args) -> SweepReport:
    k, m, first, guard, chains = args
    rows = [(first,) + rest for rest in nondecreasing_parts(k - 1, m - first, first)]
    return _sweep_rows(k, "grid", rows, m, guard, chains)


def sweep_selectors(
    k: int,
    strategy: str,
    budget: int | None = None,
    seed: int = 0,
    *,
    step: Number = "0.005",
    guard: Fraction = GUARD_DEFAULT,
    chains: bool = True,
    threads: int = 1,
) -> SweepReport:
    """Run the selector (and proof chain) on every point of a stream.

    ``random`` draws ``budget`` points; ``grid`` covers the full lattice with
    spacing ``step`` (``budget`` is ignored). Workers are processes; the
    merged report is independent of ``threads``.
    """
    if strategy == "random":
        if not budget:
            raise ValueError("random sweep needs a budget")
        sizes = [BATCH_SIZE] * (budget // BATCH_SIZE)
        if budget % BATCH_SIZE:
            sizes.append(budget % BATCH_SIZE)
        seqs = np.random.SeedSequence(seed).spawn(len(sizes))
        tasks = [(k, n, s, guard, chains) for n, s in zip(sizes, seqs)]
        fn = _random_task
    elif strategy == "grid":
        m = grid_denominator(step)
        tasks = [(k, m, f, guard, chains) for f in range(grid_floor_units(m), m // k + 1)]
        fn = _grid_task
    else:
        raise ValueError(f"sweeps support 'random' and 'grid', not {strategy!r}")
    total = SweepReport(k, strategy)
    if threads <= 1:
        for t in tasks:
            total.merge(fn(t))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for rep in pool.map(fn, tasks):
                total.merge(rep)
    return total


def write_jsonl(records: Sequence[dict], stream) -> None:
    for rec in records:
        stream.write(json.dumps(rec, sort_keys=True) + "\n")
