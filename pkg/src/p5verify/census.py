"""Desk-scale census of Omega([p^(1/gamma)]) and the sieve weight W_a.

Floors are certified: an MPFR enclosure of p^(1/gamma) is computed with
directed rounding, escalating precision until it pins down the floor; if it
never does, the exact integer test q^a <= p^b < (q+1)^a (gamma = a/b) decides.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import gmpy2
import numpy as np
import sympy
from gmpy2 import mpz

from p5verify.errors import DomainError, PrecisionExhaustedError, ResourceLimitError
from p5verify.params import SIFT_EXPONENT, Number, SieveParams, to_fraction

CHECKPOINT_VERSION = 1
SIEVE_LIMIT_ENV = "P5VERIFY_SIEVE_LIMIT"
DEFAULT_SIEVE_LIMIT = 10**8
PRECISIONS = (64, 128, 256, 512, 1024, 2048, 4096)
#: Largest a * bit_length(q) for which the exact integer fallback is attempted.
EXACT_BITS_LIMIT = 1 << 26
SEGMENT = 1 << 18


def sieve_limit() -> int:
    raw = os.environ.get(SIEVE_LIMIT_ENV)
    return int(float(raw)) if raw else DEFAULT_SIEVE_LIMIT


def _gamma(gamma: Number) -> Fraction:
    g = to_fraction(gamma)
    if not 0 < g <= 1:
        raise DomainError(f"gamma={g} outside (0, 1]")
    return g


# --- certified floors ---------------------------------------------------------


def _gamma_ratio(gamma: Number) -> tuple[int, int]:
    g = _gamma(gamma)
    return g.numerator, g.denominator


def _enclosure(p: int, num: int, den: int, prec: int) -> tuple:
    """MPFR lower and upper bounds for p**(num/den), p >= 2."""
    out = []
    for rnd in (gmpy2.RoundDown, gmpy2.RoundUp):
        with gmpy2.context(precision=prec, round=rnd):
            out.append(gmpy2.exp(gmpy2.log(mpz(p)) * num / den))
    return out[0], out[1]


def _floor(v) -> int:
    """Exact floor of an mpfr (independent of the active context)."""
    n, d = v.as_integer_ratio()
    return int(n // d)


def _exact_le(q: int, p: int, a: int, b: int) -> bool:
    """q^(a/b) <= p, i.e. q^a <= p^b."""
    return mpz(q) ** a <= mpz(p) ** b


def floor_root(p: int, gamma: Number) -> int:
    """q = floor(p^(1/gamma)), certified.

    ``gamma`` is read exactly (strings and floats via their decimal repr).
    Raises :class:`PrecisionExhaustedError` if neither the enclosures nor the
    exact integer test can decide.
    """
    a, b = _gamma_ratio(gamma)
    if p < 1:
        raise DomainError("p must be positive")
    if p == 1 or a == b:
        return p
    for prec in PRECISIONS:
        lo, hi = _enclosure(p, b, a, prec)
        qlo, qhi = _floor(lo), _floor(hi)
        if qlo == qhi:
            return qlo
    # The enclosure straddles an integer m = qhi; decide m^a <= p^b exactly.
    if a * qhi.bit_length() > EXACT_BITS_LIMIT:
        raise PrecisionExhaustedError(f"cannot certify floor of {p}^(1/{gamma})")
    return qhi if _exact_le(qhi, p, a, b) else qhi - 1


def certify_floor(p: int, gamma: Number, q: int) -> bool:
    """Check q^gamma <= p < (q+1)^gamma.

    Each comparison is first attempted with directed-rounding enclosures of
    q^gamma at increasing precision, then settled by exact integers.
    """
    a, b = _gamma_ratio(gamma)

    def le(m: int) -> bool:  # m^gamma <= p
        if m <= 1:
            return m <= p
        for prec in PRECISIONS[:3]:
            lo, hi = _enclosure(m, a, b, prec)
            if hi <= p:
                return True
            if lo > p:
                return False
        return _exact_le(m, p, a, b)

    return q >= 1 and le(q) and not le(q + 1)


# --- factor counting ----------------------------------------------------------


def omega_trial(n: int) -> int:
    """Omega(n) by plain trial division."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = 0
    while n % 2 == 0:
        n //= 2
        count += 1
    d = 3
    while d * d <= n:
        while n % d == 0:
            n //= d
            count += 1
        d += 2
    return count + (n > 1)


def omega(n: int) -> int:
    """Number of prime factors of n counted with multiplicity; Omega(1) = 0.

    Trial division up to 10**6, then sympy for whatever cofactor remains.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    count = 0
    while n % 2 == 0:
        n //= 2
        count += 1
    d = 3
    while d <= 10**6 and d * d <= n:
        while n % d == 0:
            n //= d
            count += 1
        d += 2
    if n == 1:
        return count
    if d * d > n or sympy.isprime(n):
        return count + 1
    return count + sum(sympy.factorint(n).values())


def spf_table(n: int) -> np.ndarray:
    """Smallest prime factor of every integer 0..n (spf[0] = spf[1] = 0)."""
    if n > sieve_limit():
        raise ResourceLimitError(f"table size {n} exceeds {SIEVE_LIMIT_ENV}={sieve_limit()}")
    spf = np.zeros(n + 1, dtype=np.int32 if n < 2**31 else np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = spf == 0
    rest[:2] = False
    spf[rest] = np.nonzero(rest)[0]
    return spf


def omega_from_spf(values: np.ndarray, spf: np.ndarray) -> np.ndarray:
    """Vectorized Omega by repeatedly dividing out the smallest prime factor."""
    v = np.asarray(values, dtype=np.int64).copy()
    if v.size and v.min() < 1:
        raise ValueError("values must be >= 1")
    count = np.zeros(v.shape, dtype=np.int64)
    live = v > 1
    while live.any():
        v[live] //= spf[v[live]]
        count[live] += 1
        live = v > 1
    return count


def omega_table(n: int) -> np.ndarray:
    """Omega(0..n) by adding 1 at every multiple of every prime power.

    Independent of :func:`spf_table`; used to cross-check it.
    """
    out = np.zeros(n + 1, dtype=np.int8)
    for p in primes_below(n + 1):
        pk = int(p)
        while pk <= n:
            out[pk::pk] += 1
            pk *= int(p)
    return out


# --- primes -------------------------------------------------------------------


def _small_primes(n: int) -> np.ndarray:
    """Primes < n by a plain sieve."""
    if n < 3:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n - 1) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.nonzero(is_p)[0].astype(np.int64)


def primes_in(lo: int, hi: int, base: Optional[np.ndarray] = None) -> np.ndarray:
    """Primes in [lo, hi) by a segmented sieve; ``base`` must cover sqrt(hi)."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    if base is None:
        base = _small_primes(math.isqrt(hi - 1) + 1)
    seg = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        seg[start - lo :: p] = False
    return np.nonzero(seg)[0].astype(np.int64) + lo


def primes_below(n: int) -> np.ndarray:
    return _small_primes(n)


def segments(lo: int, hi: int, size: int = SEGMENT) -> Iterator[tuple[int, int]]:
    for a in range(lo, hi, size):
        yield a, min(a + size, hi)


# --- census -------------------------------------------------------------------


@dataclass
class OmegaCensus:
    x: int
    gamma: Fraction
    counts: dict[int, int]
    primes_used: int
    distinct_q: int
    distinct: bool = True
    last_prime: int = 0
    last_q: int = 0

    @property
    def baseline(self) -> float:
        """x^gamma / (log x)^2, natural log."""
        return math.exp(float(self.gamma) * math.log(self.x)) / math.log(self.x) ** 2

    @property
    def count_le5(self) -> int:
        return sum(c for w, c in self.counts.items() if w <= 5)

    @property
    def ratio(self) -> float:
        return self.count_le5 / self.baseline

    def summary(self) -> dict:
        return {
            "x": self.x,
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "primes_used": self.primes_used,
            "distinct_q": self.distinct_q,
            "distinct": self.distinct,
            "count_omega_le_5": self.count_le5,
            "baseline": self.baseline,
            "ratio": self.ratio,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "x", "omega", "count"])
        for k, v in sorted(self.counts.items()):
            w.writerow([repr(float(self.gamma)), self.x, k, v])
        return buf.getvalue()


def prime_bound(x: int, gamma: Number) -> int:
    """Exclusive bound B with p < (x+1)^gamma  <=>  p < B for integers p."""
    a, b = _gamma_ratio(gamma)
    r = floor_root_pow(x + 1, a, b)
    # p < (x+1)^gamma for integer p means p <= r, unless r equals it exactly
    exact = mpz(r) ** b == mpz(x + 1) ** a
    return r if exact else r + 1


def floor_root_pow(n: int, a: int, b: int) -> int:
    """floor(n^(a/b)) exactly, for a <= b."""
    r = int(gmpy2.iroot(mpz(n) ** a, b)[0])
    return r


def _segment_counts(lo: int, hi: int, x: int, gamma: Fraction, base: np.ndarray, spf: np.ndarray) -> tuple:
    ps = primes_in(lo, hi, base)
    qs = [floor_root(int(p), gamma) for p in ps]
    keep = [i for i, q in enumerate(qs) if q <= x]
    qarr = np.array([qs[i] for i in keep], dtype=np.int64)
    om = omega_from_spf(qarr, spf) if qarr.size else np.zeros(0, dtype=np.int64)
    counts = Counter(int(w) for w in om)
    last_p = int(ps[keep[-1]]) if keep else 0
    return counts, len(keep), qarr, last_p


def _load_checkpoint(path: str, x: int, gamma: Fraction) -> Optional[dict]:
    if not path or not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    if data.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')!r}")
    if data["x"] != x or data["gamma"] != str(gamma):
        raise ValueError("checkpoint was written for a different (x, gamma)")
    return data


def _save_checkpoint(path: str, c: OmegaCensus, next_lo: int) -> None:
    data = {
        "version": CHECKPOINT_VERSION,
        "x": c.x,
        "gamma": str(c.gamma),
        "last_prime": c.last_prime,
        "last_q": c.last_q,
        "next_lo": next_lo,
        "primes_used": c.primes_used,
        "distinct_q": c.distinct_q,
        "counts": {str(k): v for k, v in sorted(c.counts.items())},
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh, sort_keys=True)
    os.replace(tmp, path)


def census(
    x: int,
    gamma: Number,
    *,
    distinct: bool = True,
    threads: int = 1,
    checkpoint: Optional[str] = None,
    segment: int = SEGMENT,
    stop_after: Optional[int] = None,
) -> OmegaCensus:
    """Tabulate Omega(q) for q = floor(p^(1/gamma)) <= x over primes p.

    Segments of the prime range are independent; with ``threads`` > 1 they
    run in a thread pool and are merged in segment order. With
    ``checkpoint`` the state is written after every batch of segments and a
    matching checkpoint is resumed. ``stop_after`` limits the number of
    segments processed in this call (for resumable runs).
    """
    g = _gamma(gamma)
    if x < 2:
        raise DomainError("x must be at least 2")
    if x > sieve_limit():
        raise ResourceLimitError(f"x={x} exceeds {SIEVE_LIMIT_ENV}={sieve_limit()}")
    bound = prime_bound(x, g)
    spf = spf_table(x)
    base = _small_primes(math.isqrt(bound) + 2)

    result = OmegaCensus(x=x, gamma=g, counts={}, primes_used=0, distinct_q=0, distinct=distinct)
    start = 2
    state = _load_checkpoint(checkpoint, x, g) if checkpoint else None
    if state:
        result.counts = {int(k): v for k, v in state["counts"].items()}
        result.primes_used = state["primes_used"]
        result.distinct_q = state["distinct_q"]
        result.last_prime, result.last_q = state["last_prime"], state["last_q"]
        start = state["next_lo"]

    segs = list(segments(start, bound, segment))
    if stop_after is not None:
        segs = segs[:stop_after]
    batch = max(threads, 1) * 4
    counts = Counter(result.counts)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for i in range(0, len(segs), batch):
            chunk = segs[i : i + batch]
            if pool:
                parts = list(pool.map(lambda s: _segment_counts(s[0], s[1], x, g, base, spf), chunk))
            else:
                parts = [_segment_counts(s[0], s[1], x, g, base, spf) for s in chunk]
            for cnt, used, qarr, last_p in parts:
                if qarr.size:
                    # floors of increasing primes are strictly increasing for gamma <= 1
                    fresh = int(np.count_nonzero(np.diff(qarr))) + int(qarr[0] != result.last_q)
                    if distinct and fresh != qarr.size:
                        raise AssertionError("repeated floor value")
                    counts.update(cnt)
                    result.primes_used += used
                    result.distinct_q += fresh
                    result.last_prime, result.last_q = last_p, int(qarr[-1])
            result.counts = dict(sorted(counts.items()))
            if checkpoint:
                _save_checkpoint(checkpoint, result, chunk[-1][1])
    finally:
        if pool:
            pool.shutdown()
    return result


def census_bruteforce(x: int, gamma: Number) -> dict[int, int]:
    """Oracle: trial-division primality and Omega, naive upward floor search."""
    a, b = _gamma_ratio(gamma)
    counts: Counter = Counter()
    seen = set()
    p = 2
    while True:
        if omega_trial(p) == 1:
            pb = p**b
            q = p  # p^(1/gamma) >= p
            while (q + 1) ** a <= pb:
                q += 1
            if q > x:
                break
            if q not in seen:
                seen.add(q)
                counts[omega_trial(q)] += 1
        p += 1
    return dict(sorted(counts.items()))


# --- sieve weight -------------------------------------------------------------


@dataclass(frozen=True)
class WeightRecord:
    a: int
    x: int
    omega_contributions: list = field(default_factory=list)  # [(p, 1 - u log p / log x)]
    weight: float = 1.0

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "x": self.x,
            "contributions": [[p, c] for p, c in self.omega_contributions],
            "weight": self.weight,
        }


def _pow_lt(p: int, e: Fraction, x: int) -> bool:
    """p^e < x exactly, e > 0 rational."""
    return mpz(p) ** e.numerator < mpz(x) ** e.denominator


def in_weight_range(p: int, x: int, u: Fraction) -> bool:
    """x^(1/17.41) <= p < x^(1/u), decided exactly."""
    return not _pow_lt(p, SIFT_EXPONENT, x) and _pow_lt(p, u, x)


def sieve_weight(a: int, x: int, params: SieveParams) -> WeightRecord:
    """1 - lambda * sum over primes p | a in range of (1 - u log p / log x)."""
    if not 1 <= a <= x:
        raise DomainError("need 1 <= a <= x")
    u = params.exact.u
    lx = math.log(x)
    contribs = []
    for p in sorted(sympy.primefactors(a)):
        if in_weight_range(p, x, u):
            contribs.append((int(p), 1.0 - params.u * math.log(p) / lx))
    total = math.fsum(c for _, c in contribs)
    return WeightRecord(a=a, x=x, omega_contributions=contribs, weight=1.0 - params.lam * total)
