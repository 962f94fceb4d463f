"""Main-term integral and the nested simplex integrals.

The nested region for k variables is

    1/17.41 <= t_1 <= 1/(k+1),
    t_{j-1} <= t_j <= (1 - t_1 - ... - t_{j-1}) / (k + 2 - j),   j = 2..k,

and the integrand is 1 / (t_1 ... t_k (1 - t_1 - ... - t_k)). Two methods
evaluate it independently of each other: a tensor Gauss-Legendre rule nested
one variable at a time (order raised until successive values agree), and
randomized quasi-Monte Carlo on the unit cube with the same sequential
bound map t_j = lo_j + x_j (hi_j - lo_j).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.stats import qmc

from p5verify.errors import DomainError
from p5verify.params import SIFT_EXPONENT, Number, SieveParams, to_fraction

T1_LO = 1 / float(SIFT_EXPONENT)
UPPER = float(SIFT_EXPONENT)  # 17.41

#: Printed upper bounds for the k = 7, 6, 5 integrals.
PAPER_BOUNDS = {7: 0.00259, 6: 0.02571, 5: 0.16688}

#: Required accuracy: absolute for k = 7, relative for k = 5, 6.
ACCURACY = {7: ("abs", 1e-6), 6: ("rel", 1e-5), 5: ("rel", 1e-5)}


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int
    method: str  # "quadrature" | "qmc" | "closed-form"

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "evaluations": self.evaluations,
            "method": self.method,
        }


def t1_upper(k: int) -> float:
    return 1.0 / (k + 1)


def _check_k(k: int) -> None:
    if k not in (5, 6, 7):
        raise ValueError(f"k must be 5, 6 or 7, got {k}")


def nested_integrand(t: Sequence[float]) -> float:
    """1 / (t_1 ... t_k (1 - sum t))."""
    t = [float(x) for x in t]
    if any(x <= 0 for x in t):
        raise DomainError("all coordinates must be positive")
    rest = 1.0 - math.fsum(t)
    if rest <= 0:
        raise DomainError("coordinates must sum to less than 1")
    return 1.0 / (math.prod(t) * rest)


def region_membership(k: int, t: Sequence[Number]) -> bool:
    """Whether ``t`` lies in the nested region for ``k`` variables.

    Exact when ``t`` holds ints, strings or Fractions.
    """
    if len(t) != k:
        return False
    exact = not any(isinstance(x, float) for x in t)
    vals = [to_fraction(x) for x in t] if exact else [float(x) for x in t]
    lo1 = 1 / SIFT_EXPONENT if exact else T1_LO
    hi1 = Fraction(1, k + 1) if exact else t1_upper(k)
    if not lo1 <= vals[0] <= hi1:
        return False
    s = vals[0]
    for j in range(2, k + 1):
        tj = vals[j - 1]
        if not vals[j - 2] <= tj <= (1 - s) / (k + 2 - j):
            return False
        s += tj
    return True


@lru_cache(maxsize=None)
def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _inner(k: int, t1: float, n: int) -> float:
    """Integral over t_2..t_k at fixed t_1; the caller supplies the t_1 weight and 1/t_1."""
    x, w = _gauss01(n)
    S = np.array(t1)
    prev = np.array(t1)
    W = np.array(1.0)
    for j in range(2, k + 1):
        lo = prev[..., None]
        hi = ((1.0 - S) / (k + 2 - j))[..., None]
        width = np.maximum(hi - lo, 0.0)  # empty slices contribute 0
        tj = lo + width * x
        W = W[..., None] * (w * width) / tj
        S = S[..., None] + tj
        prev = tj
    return float(np.sum(W / (1.0 - S)))


def gauss_nested(k: int, order: int, panels: int = 2, threads: int = 1) -> tuple[float, int]:
    """Tensor Gauss-Legendre of the given order per variable.

    The t_1 interval is split into ``panels`` equal panels. Each (panel, node)
    pair is an independent task; task results are combined with math.fsum
    in task order, so the value does not depend on ``threads``.
    """
    _check_k(k)
    x, w = _gauss01(order)
    edges = np.linspace(T1_LO, t1_upper(k), panels + 1)
    tasks = []
    for a, b in zip(edges[:-1], edges[1:]):
        for xi, wi in zip(x, w):
            t1 = a + (b - a) * xi
            tasks.append((t1, wi * (b - a) / t1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            inner = list(pool.map(lambda tw: _inner(k, tw[0], order), tasks))
    else:
        inner = [_inner(k, t1, order) for t1, _ in tasks]
    value = math.fsum(wt * v for (_, wt), v in zip(tasks, inner))
    return value, len(tasks) * order ** (k - 1)


def refinement_sequence(k: int, orders: Sequence[int], panels: int = 2, threads: int = 1) -> list[float]:
    return [gauss_nested(k, n, panels, threads)[0] for n in orders]


def nested_integral(
    k: int,
    *,
    rel_tol: float = 1e-9,
    start_order: int = 4,
    max_order: int = 16,
    panels: int = 2,
    threads: int = 1,
) -> IntegralResult:
    """k-fold nested integral by order-raising Gauss-Legendre.

    The order grows by 2 until two successive values differ by at most
    ``rel_tol`` relative; the reported error is that last difference.
    """
    _check_k(k)
    prev, evals = gauss_nested(k, start_order, panels, threads)
    n = start_order
    while True:
        n += 2
        cur, e = gauss_nested(k, n, panels, threads)
        evals += e
        diff = abs(cur - prev)
        if diff <= rel_tol * abs(cur) or n >= max_order:
            return IntegralResult(cur, diff, evals, "quadrature")
        prev = cur


def _qmc_replicate(k: int, points: np.ndarray) -> float:
    lo = np.full(points.shape[0], T1_LO)
    hi = np.full(points.shape[0], t1_upper(k))
    S = np.zeros(points.shape[0])
    W = np.ones(points.shape[0])
    for j in range(1, k + 1):
        if j > 1:
            hi = (1.0 - S) / (k + 2 - j)
        width = np.maximum(hi - lo, 0.0)
        tj = lo + width * points[:, j - 1]
        W *= width / tj
        S += tj
        lo = tj
    return float(np.mean(W / (1.0 - S)))


def nested_integral_qmc(k: int, *, log2_points: int = 16, replicates: int = 16, seed: int = 0) -> IntegralResult:
    """Randomized QMC with independently scrambled Sobol replicates.

    The error estimate is three standard errors of the replicate mean.
    """
    _check_k(k)
    seqs = np.random.SeedSequence(seed).spawn(replicates)
    vals = []
    for s in seqs:
        sob = qmc.Sobol(d=k, scramble=True, seed=np.random.default_rng(s))
        vals.append(_qmc_replicate(k, sob.random_base2(log2_points)))
    v = np.array(vals)
    err = 3.0 * float(v.std(ddof=1)) / math.sqrt(replicates)
    return IntegralResult(float(v.mean()), err, replicates << log2_points, "qmc")


@dataclass(frozen=True)
class CrossCheck:
    k: int
    quadrature: IntegralResult
    qmc: IntegralResult

    @property
    def agree(self) -> bool:
        return abs(self.quadrature.value - self.qmc.value) <= self.quadrature.error_estimate + self.qmc.error_estimate

    @property
    def accuracy_ok(self) -> bool:
        mode, tol = ACCURACY[self.k]
        limit = tol if mode == "abs" else tol * abs(self.quadrature.value)
        return self.quadrature.error_estimate < limit


@lru_cache(maxsize=None)
def cross_check(k: int, threads: int = 1, seed: int = 0) -> CrossCheck:
    return CrossCheck(k, nested_integral(k, threads=threads), nested_integral_qmc(k, seed=seed))


@lru_cache(maxsize=None)
def computed_constant(k: int) -> float:
    """Quadrature value of the k-fold integral (cached)."""
    return nested_integral(k).value


def integral_record(check: CrossCheck) -> list[dict]:
    """JSON records {k, method, value, error_estimate, evaluations, paper_bound, margin}."""
    out = []
    bound = PAPER_BOUNDS[check.k]
    for res in (check.quadrature, check.qmc):
        rec = {"schema_version": 1, "record": "integral", "k": check.k}
        rec.update(res.as_dict())
        rec["paper_bound"] = bound
        rec["margin"] = bound - res.value
        out.append(rec)
    return out


# --- main term ---------------------------------------------------------------


def penalty_closed_form(xi: Number, epsilon: Number = 0) -> float:
    """Integral of (t - u)/(t (t xi - 1)) over [u, 17.41], u = 1/xi + epsilon.

    Partial fractions give the antiderivative u log t + ((1 - u xi)/xi) log(t xi - 1),
    and (1 - u xi)/xi = -epsilon, so the value is

        u log(17.41/u) - epsilon log((17.41 xi - 1) / (epsilon xi)),

    with the second term dropped at epsilon = 0.
    """
    xi_q, eps = to_fraction(xi), to_fraction(epsilon)
    if xi_q <= 0 or eps < 0:
        raise DomainError("need xi > 0 and epsilon >= 0")
    u = 1 / xi_q + eps
    if u > SIFT_EXPONENT:
        raise DomainError(f"u = {float(u)} exceeds 17.41")
    if u == SIFT_EXPONENT:
        return 0.0
    uf, xf, ef = float(u), float(xi_q), float(eps)
    value = uf * math.log(UPPER / uf)
    if eps:
        value -= ef * math.log((UPPER * xf - 1.0) / (ef * xf))
    return value


def penalty_quadrature(xi: float, epsilon: float = 0.0) -> IntegralResult:
    """Adaptive Gauss-Kronrod (QUADPACK) on the integrand.

    t xi - 1 is written as xi (t - u + epsilon) to avoid cancellation near
    t = u. For epsilon > 0 the integrand climbs from 0 over a width of order
    epsilon, so breakpoints at u + epsilon * 10**j keep QUADPACK from
    stepping over the climb.
    """
    xi, epsilon = float(xi), float(epsilon)
    u = 1.0 / xi + epsilon
    if u > UPPER:
        raise DomainError(f"u = {u} exceeds 17.41")
    if u == UPPER:
        return IntegralResult(0.0, 0.0, 0, "quadrature")
    calls = 0

    def f(t: float) -> float:
        nonlocal calls
        calls += 1
        return (t - u) / (t * xi * (t - u + epsilon))

    pts = [u + epsilon * 10**j for j in range(9) if epsilon and u + epsilon * 10**j < UPPER] or None
    value, err = integrate.quad(f, u, UPPER, epsabs=1e-14, epsrel=1e-13, limit=500, points=pts)
    return IntegralResult(value, err, calls, "quadrature")


def main_term_integral(params: SieveParams, method: str = "closed-form") -> IntegralResult:
    """The main-term integral without the lambda factor."""
    e = params.exact
    if e.u > SIFT_EXPONENT:
        raise DomainError(f"u = {params.u} exceeds 17.41")
    if method == "closed-form":
        v = penalty_closed_form(e.xi, e.epsilon)
        return IntegralResult(v, 8 * math.ulp(abs(v) or 1.0), 1, "closed-form")
    if method == "quadrature":
        return penalty_quadrature(params.xi, params.epsilon)
    raise ValueError(f"unknown method {method!r}")
