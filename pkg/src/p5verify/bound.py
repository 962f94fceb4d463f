"""Final bracket assembly, positivity margins and the threshold scan.

The bracket is

    log(17.41 xi - 1)/xi - lambda * P(xi, eps) - (lambda gamma / xi) (c5 + c6 + c7)

where P is the main-term integral from :mod:`p5verify.integrals` and c_k are
the k-fold nested integrals, either the printed bounds or freshly computed.
The positive prefactor and the (1 + o(1)) factors are not modelled.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from scipy.optimize import brentq

from p5verify.errors import DomainError
from p5verify.integrals import PAPER_BOUNDS, computed_constant, main_term_integral
from p5verify.params import Number, check_windows, derive_params, to_fraction, window_threshold

#: Margin the bracket is claimed to exceed on the stated range.
TARGET_MARGIN = 0.004

CSV_COLUMNS = (
    "gamma", "xi", "u", "lambda", "main_term", "penalty",
    "w5", "w6", "w7", "bracket", "margin_vs_0.004",
)

ASSUMPTIONS = (
    "positive prefactor 2*C(omega)*pi(x^gamma)/(17.41^2 log x) omitted",
    "(1+o(1)) factors and the O(x^(1-1e-10)) error term not modelled",
)


@dataclass(frozen=True)
class BoundReport:
    gamma: float
    epsilon: float
    xi: float
    u: float
    lam: float
    main_term: float
    penalty_integral: float
    w5: float
    w6: float
    w7: float
    bracket: float
    windows_ok: bool
    constants: str  # "paper" | "computed"

    @property
    def w_terms(self) -> tuple[float, float, float]:
        return (self.w5, self.w6, self.w7)

    @property
    def positive(self) -> bool:
        return self.bracket > 0

    @property
    def exceeds_paper_margin(self) -> bool:
        return self.bracket > TARGET_MARGIN

    def reconstructed(self) -> float:
        return self.main_term - self.penalty_integral - self.w5 - self.w6 - self.w7

    def row(self) -> dict:
        return {
            "gamma": self.gamma,
            "xi": self.xi,
            "u": self.u,
            "lambda": self.lam,
            "main_term": self.main_term,
            "penalty": self.penalty_integral,
            "w5": self.w5,
            "w6": self.w6,
            "w7": self.w7,
            "bracket": self.bracket,
            "margin_vs_0.004": self.bracket - TARGET_MARGIN,
        }

    def as_dict(self) -> dict:
        d = self.row()
        d.update(
            epsilon=self.epsilon,
            positive=self.positive,
            exceeds_paper_margin=self.exceeds_paper_margin,
            windows_ok=self.windows_ok,
            constants=self.constants,
        )
        return d


def integral_constants(use_paper_constants: bool = True) -> dict[int, float]:
    if use_paper_constants:
        return dict(PAPER_BOUNDS)
    return {k: computed_constant(k) for k in (5, 6, 7)}


def evaluate_bracket(gamma: Number, epsilon: Number = 0, use_paper_constants: bool = True) -> BoundReport:
    """Assemble the bracket at (gamma, epsilon).

    Window checks are recorded in ``windows_ok`` but not enforced. Domain
    errors from :func:`derive_params` propagate.
    """
    p = derive_params(gamma, epsilon)
    c = integral_constants(use_paper_constants)
    main = math.log(17.41 * p.xi - 1.0) / p.xi
    penalty = p.lam * main_term_integral(p).value
    scale = p.lam * p.gamma / p.xi
    w5, w6, w7 = (scale * c[k] for k in (5, 6, 7))
    bracket = main - penalty - w5 - w6 - w7
    return BoundReport(
        gamma=p.gamma,
        epsilon=p.epsilon,
        xi=p.xi,
        u=p.u,
        lam=p.lam,
        main_term=main,
        penalty_integral=penalty,
        w5=w5,
        w6=w6,
        w7=w7,
        bracket=bracket,
        windows_ok=check_windows(p).ok,
        constants="paper" if use_paper_constants else "computed",
    )


@dataclass(frozen=True)
class MarginEntry:
    """One margin-table row: a report, or the error that prevented one."""

    gamma: str
    report: Optional[BoundReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None

    def as_dict(self) -> dict:
        if self.report is None:
            return {"gamma": self.gamma, "error": self.error}
        return self.report.as_dict()


def margin_table(
    gammas: Sequence[Number],
    epsilon: Number = 0,
    use_paper_constants: bool = True,
    threads: int = 1,
) -> list[MarginEntry]:
    """One entry per gamma, in input order; bad gammas give error entries."""

    def one(g: Number) -> MarginEntry:
        label = str(g)
        try:
            return MarginEntry(label, evaluate_bracket(g, epsilon, use_paper_constants))
        except (DomainError, TypeError) as exc:
            return MarginEntry(label, error=f"{type(exc).__name__}: {exc}")

    if not use_paper_constants:
        integral_constants(False)  # fill the cache before fanning out
    if threads > 1 and len(gammas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, gammas))
    return [one(g) for g in gammas]


def gamma_grid(lo: Number, hi: Number, step: Number) -> list[Fraction]:
    """Exact grid lo, lo + step, ... up to and including hi."""
    a, b, h = to_fraction(lo), to_fraction(hi), to_fraction(step)
    if h <= 0:
        raise ValueError("step must be positive")
    if a >= b:
        raise ValueError("need lo < hi")
    n = int((b - a) / h)
    return [a + i * h for i in range(n + 1)]


def _bracket_or_none(g: Number, epsilon: Number) -> Optional[float]:
    try:
        return evaluate_bracket(g, epsilon).bracket
    except DomainError:
        return None


def bracket_root(lo: float, hi: float, epsilon: Number = 0) -> Optional[float]:
    """Zero of the paper-constant bracket in [lo, hi], or None if no sign change."""
    lo = max(lo, 129 / 140 + 1e-9)  # lambda needs xi > 1/9
    flo, fhi = _bracket_or_none(lo, epsilon), _bracket_or_none(hi, epsilon)
    if flo is None or fhi is None or flo > 0 or fhi <= 0:
        return None
    return brentq(lambda g: evaluate_bracket(g, epsilon).bracket, lo, hi, xtol=1e-14, rtol=1e-14)


@dataclass(frozen=True)
class ThresholdResult:
    gamma: Fraction
    binding: str  # "windows" | "bracket"
    bracket: float
    lower_margin: Fraction
    upper_margin: Fraction
    window_root: Fraction
    bracket_root: Optional[float]
    previous_failures: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "binding": self.binding,
            "bracket": self.bracket,
            "lower_margin": float(self.lower_margin),
            "upper_margin": float(self.upper_margin),
            "window_root": float(self.window_root),
            "bracket_root": self.bracket_root,
            "previous_failures": list(self.previous_failures),
        }


def _qualifies(g: Fraction, epsilon: Number) -> tuple[bool, bool]:
    windows = check_windows(g).ok
    b = _bracket_or_none(g, epsilon)
    return windows, b is not None and b > 0


def scan_threshold(gamma_lo: Number, gamma_hi: Number, step: Number, epsilon: Number = 0) -> Optional[ThresholdResult]:
    """Smallest grid gamma where both windows pass and the bracket is positive.

    The binding constraint is the one whose continuous root is larger: the
    exact window root, or the bracket zero found by Brent's method.
    """
    grid = gamma_grid(gamma_lo, gamma_hi, step)
    for i, g in enumerate(grid):
        w_ok, b_ok = _qualifies(g, epsilon)
        if not (w_ok and b_ok):
            continue
        prev: tuple[str, ...] = ()
        if i > 0:
            pw, pb = _qualifies(grid[i - 1], epsilon)
            prev = tuple(name for name, ok in (("windows", pw), ("bracket", pb)) if not ok)
        w_root = window_threshold()
        b_root = bracket_root(float(grid[0]), float(g), epsilon)
        binding = "bracket" if b_root is not None and b_root > w_root else "windows"
        report = check_windows(g)
        return ThresholdResult(
            gamma=g,
            binding=binding,
            bracket=evaluate_bracket(g, epsilon).bracket,
            lower_margin=report.lower_margin,
            upper_margin=report.upper_margin,
            window_root=w_root,
            bracket_root=b_root,
            previous_failures=prev,
        )
    return None


def margin_csv(entries: Iterable[MarginEntry]) -> str:
    """CSV text for the successful entries (error entries are skipped)."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for e in entries:
        if e.report is not None:
            writer.writerow({k: repr(v) for k, v in e.report.row().items()})
    return buf.getvalue()


def margin_json(entries: Iterable[MarginEntry]) -> str:
    """Newline-delimited JSON, one record per entry."""
    lines = []
    for e in entries:
        rec = {"schema_version": 1, "record": "bound"}
        rec.update(e.as_dict())
        lines.append(json.dumps(rec, sort_keys=True))
    return "".join(line + "\n" for line in lines)
