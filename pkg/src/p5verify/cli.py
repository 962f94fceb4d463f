"""Command-line entry point: ``p5verify <subcommand> [flags]``.

Structured results go to stdout (or --output) as newline-delimited JSON or
CSV; diagnostics go to stderr. Exit codes: 0 all checks pass, 1 some
verification failed, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Callable, Optional, Sequence

from p5verify import bound, census, integrals, lemmas, params, search
from p5verify.errors import DomainError, ResourceLimitError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

#: Claimed range for the bracket margin, open on the left.
CLAIM_LO, CLAIM_HI = Fraction(9985, 10000), Fraction(1)
DEFAULT_GRID = "0.9986:0.9999:0.0001"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 2 through run() instead of SystemExit
        raise UsageError(message)


def parse_grid(text: str) -> list[Fraction]:
    """``a,b,c`` or ``lo:hi:step`` (inclusive) as exact rationals."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad grid {text!r}; want lo:hi:step")
        try:
            return bound.gamma_grid(*parts)
        except (ValueError, DomainError) as exc:
            raise UsageError(str(exc)) from exc
    return [params.to_fraction(s) for s in text.split(",") if s.strip()]


def _in_claim(g: Fraction) -> bool:
    return CLAIM_LO < g <= CLAIM_HI


def _rec(kind: str, **fields) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "record": kind}
    out.update(fields)
    return out


# --- output -------------------------------------------------------------------


def _csv_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render(records: Sequence[dict], fmt: str, columns: Optional[Sequence[str]] = None) -> str:
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if columns is None:
        columns = []
        for r in records:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_csv_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- subcommands --------------------------------------------------------------


def cmd_params(args) -> int:
    p = params.derive_params(args.gamma, args.epsilon)
    rec = _rec("params", gamma_exact=str(p.exact.gamma), **p.as_dict())
    _write(args, render([rec], args.format))
    return EXIT_OK


def _gammas(args) -> list[Fraction]:
    if args.grid is not None:
        grid = parse_grid(args.grid)
        if not grid:
            raise UsageError("empty gamma grid")
        return grid
    return [params.to_fraction(args.gamma)]


def cmd_windows(args) -> int:
    recs, ok = [], True
    for g in _gammas(args):
        rep = params.check_windows(g)
        ok &= rep.ok
        recs.append(_rec("windows", gamma_exact=str(g), ok=rep.ok, **rep.as_dict()))
    _write(args, render(recs, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lemma(args) -> int:
    budget = args.budget
    if budget is None and args.strategy == "random":
        budget = 100000
    res = search.run_search(args.k, args.strategy, budget, args.seed, step=args.step, threads=args.threads)
    summary = res.summary()
    summary["verdict"] = "no counterexample" if res.counterexample is None else "counterexample found"
    recs = [summary]
    ok = res.counterexample is None
    if args.sweep and args.k in (6, 7) and args.strategy in ("random", "grid"):
        sw = search.sweep_selectors(
            args.k, args.strategy, budget, args.seed, step=args.step, threads=args.threads
        )
        recs.append(sw.as_dict())
        ok &= sw.selections_ok and sw.false_point_assertions == 0
    _diag(summary["verdict"])
    _write(args, render(recs, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _integral_records(ks: Sequence[int], threads: int, seed: int) -> tuple[list[dict], bool]:
    recs, ok = [], True
    for k in ks:
        chk = integrals.cross_check(k, threads, seed)
        good = chk.agree and chk.accuracy_ok and 0 < chk.quadrature.value <= integrals.PAPER_BOUNDS[k]
        ok &= good
        for r in integrals.integral_record(chk):
            r["agree"] = chk.agree
            r["accuracy_ok"] = chk.accuracy_ok
            r["ok"] = good
            recs.append(r)
    return recs, ok


def cmd_integrals(args) -> int:
    ks = [args.k] if args.k else [7, 6, 5]
    recs, ok = _integral_records(ks, args.threads, args.seed)
    _write(args, render(recs, args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _bound_check(entries, claim_only: bool = True) -> tuple[bool, list[str]]:
    """Entries failing the margin; with ``claim_only`` only gammas in the claimed range count."""
    failing = []
    for e in entries:
        if e.report is None:
            failing.append(f"{e.gamma}: {e.error}")
        elif (not claim_only or _in_claim(params.to_fraction(e.gamma))) and not (
            e.report.exceeds_paper_margin and e.report.windows_ok
        ):
            failing.append(e.gamma)
    return not failing, failing


def cmd_bound(args) -> int:
    gammas = _gammas(args)
    if len(gammas) == 1:
        bound.evaluate_bracket(gammas[0], args.epsilon)  # let domain errors surface
    entries = bound.margin_table(gammas, args.epsilon, args.constants == "paper", threads=args.threads)
    ok, failing = _bound_check(entries)
    if args.format == "csv":
        text = bound.margin_csv(entries)
    else:
        text = render([_rec("bound", **e.as_dict()) for e in entries], "json")
    for f in failing:
        _diag(f"bound check failed: {f}")
    _write(args, text)
    if any(e.report is None for e in entries):
        return EXIT_USAGE
    return EXIT_OK if ok else EXIT_FAIL


def cmd_threshold(args) -> int:
    res = bound.scan_threshold(args.lo, args.hi, args.step, args.epsilon)
    if res is None:
        _diag("no grid point qualifies")
        _write(args, render([_rec("threshold", gamma=None)], args.format))
        return EXIT_FAIL
    _write(args, render([_rec("threshold", **res.as_dict())], args.format))
    return EXIT_OK


def cmd_census(args) -> int:
    c = census.census(
        args.x, args.gamma, distinct=not args.multiset, threads=args.threads, checkpoint=args.checkpoint
    )
    if args.format == "csv":
        _write(args, c.csv_text())
    else:
        _write(args, render([_rec("census", **c.summary())], "json"))
    return EXIT_OK


def report_all(gammas: Sequence[Fraction], x: int, *, seed: int = 0, budget: int = 20000, threads: int = 1) -> dict:
    """Run every check once and collect a pass/fail per claim."""
    claims: dict[str, dict] = {}

    win = [params.check_windows(g) for g in gammas]
    bad = [str(g) for g, r in zip(gammas, win) if not r.ok]
    claims["windows"] = {"pass": not bad, "failing": bad}

    irecs, iok = _integral_records([7, 6, 5], threads, seed)
    claims["integrals"] = {"pass": iok, "records": irecs}

    paper = bound.margin_table(gammas, 0, True, threads=threads)
    comp = bound.margin_table(gammas, 0, False, threads=threads)
    bok, bfail = _bound_check(paper, claim_only=False)
    conservative = all(
        p.report is None or c.report.bracket >= p.report.bracket for p, c in zip(paper, comp)
    )
    claims["bound"] = {
        "pass": bok and conservative,
        "failing": bfail,
        "computed_ge_paper": conservative,
        "min_bracket": min((e.report.bracket for e in paper if e.report), default=None),
        "table": [e.as_dict() for e in paper],
    }

    th = bound.scan_threshold("0.99", "1", "0.0001")
    th_ok = th is not None and abs(th.gamma - Fraction(9985, 10000)) <= Fraction(1, 10**4) and th.binding == "windows"
    claims["threshold"] = {"pass": th_ok, "result": th.as_dict() if th else None}

    lemma = {}
    lok = True
    for k in (7, 6):
        res = search.run_search(k, "random", budget, seed, threads=threads)
        sw = search.sweep_selectors(k, "random", budget, seed, threads=threads)
        good = res.counterexample is None and sw.selections_ok and sw.false_point_assertions == 0
        lok &= good
        lemma[str(k)] = {"pass": good, "search": res.summary(), "sweep": sw.as_dict()}
    five = search.run_search(5, "extreme-point", None, seed)
    near, dist = five.closest_counterexample([0.2] * 5)
    lemma["5"] = {
        "pass": near is not None and dist < 0.02,
        "counterexample_near_all_0.2": None if near is None else [str(f) for f in near.fractions()],
        "distance": dist if near is not None else None,
    }
    lok &= lemma["5"]["pass"]
    claims["lemma"] = {"pass": lok, **lemma}

    cz = census.census(x, "0.999", threads=threads)
    claims["census"] = {"pass": cz.ratio > 1, "observation_only": True, "summary": cz.summary()}

    findings = [
        {"constant_link": a.label, "holds": a.truth}
        for a in lemmas.audit_constants()
        if not a.truth
    ]
    return _rec(
        "report",
        grid=[str(g) for g in gammas],
        x=x,
        seed=seed,
        budget=budget,
        assumptions=list(bound.ASSUMPTIONS),
        claims=claims,
        constant_findings=findings,
        all_pass=all(c["pass"] for c in claims.values()),
    )


def cmd_report_all(args) -> int:
    gammas = parse_grid(args.grid if args.grid is not None else DEFAULT_GRID)
    if not gammas:
        raise UsageError("empty gamma grid")
    rep = report_all(gammas, args.x, seed=args.seed, budget=args.budget, threads=args.threads)
    for name, c in rep["claims"].items():
        _diag(f"{name}: {'pass' if c['pass'] else 'FAIL'}" + (f" {c['failing']}" if c.get("failing") else ""))
    _write(args, json.dumps(rep, sort_keys=True) + "\n")
    return EXIT_OK if rep["all_pass"] else EXIT_FAIL


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="p5verify", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help="write results here instead of stdout")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    def gamma_flags(p, default="0.999", grid=False) -> None:
        p.add_argument("--gamma", default=default, help="decimal string, read exactly")
        p.add_argument("--epsilon", default="0")
        if grid:
            p.add_argument("--grid", help="comma list or lo:hi:step")

    commands: dict[str, Callable] = {}

    p = sub.add_parser("params", help="derived xi, u, lambda")
    common(p)
    gamma_flags(p)
    commands["params"] = cmd_params

    p = sub.add_parser("windows", help="the two window inequalities")
    common(p)
    gamma_flags(p, grid=True)
    commands["windows"] = cmd_windows

    p = sub.add_parser("lemma", help="counterexample search and selector sweeps")
    common(p)
    p.add_argument("--k", type=int, choices=(5, 6, 7), default=7)
    p.add_argument("--strategy", choices=search.STRATEGIES, default="random")
    p.add_argument("--budget", type=int, help="points to test (random default 100000; grid and extreme-point default all)")
    p.add_argument("--step", default="0.005")
    p.add_argument("--sweep", action="store_true", help="also run the selectors and proof chains")
    commands["lemma"] = cmd_lemma

    p = sub.add_parser("integrals", help="nested simplex integrals")
    common(p)
    p.add_argument("--k", type=int, choices=(5, 6, 7))
    commands["integrals"] = cmd_integrals

    p = sub.add_parser("bound", help="bracket and margin table")
    common(p)
    gamma_flags(p, grid=True)
    p.add_argument("--constants", choices=("paper", "computed"), default="paper")
    commands["bound"] = cmd_bound

    p = sub.add_parser("threshold", help="scan for the smallest admissible gamma")
    common(p)
    p.add_argument("--lo", default="0.99")
    p.add_argument("--hi", default="1")
    p.add_argument("--step", default="0.0001")
    p.add_argument("--epsilon", default="0")
    commands["threshold"] = cmd_threshold

    p = sub.add_parser("census", help="Omega census of floor(p^(1/gamma))")
    common(p)
    p.add_argument("--gamma", default="0.999")
    p.add_argument("--x", type=int, default=10**6)
    p.add_argument("--checkpoint")
    p.add_argument("--multiset", action="store_true", help="count q with multiplicity")
    commands["census"] = cmd_census

    p = sub.add_parser("report-all", help="run everything, one JSON report")
    common(p)
    p.add_argument("--grid", help=f"gamma grid (default {DEFAULT_GRID})")
    p.add_argument("--x", type=int, default=10**6)
    p.add_argument("--budget", type=int, default=20000)
    commands["report-all"] = cmd_report_all

    ap.set_defaults(_commands=commands)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args._commands[args.command](args)
    except UsageError as exc:
        _diag(f"usage error: {exc}")
        return EXIT_USAGE
    except (DomainError, ResourceLimitError, ValueError) as exc:
        _diag(f"error: {type(exc).__name__}: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
