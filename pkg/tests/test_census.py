import csv
import io
import json
import math
import random

import mpmath
import numpy as np
import pytest
import sympy

from p5verify import census as cz
from p5verify.errors import DomainError, ResourceLimitError
from p5verify.params import derive_params


def _mp_floor(p, gamma, dps=60):
    mpmath.mp.dps = dps
    return int(mpmath.floor(mpmath.mpf(p) ** (1 / mpmath.mpf(gamma))))


def test_floor_root_examples():
    assert cz.floor_root(2, "0.999") == 2
    assert cz.floor_root(2, "0.5") == 4
    assert cz.certify_floor(2, "0.5", 4)
    q = cz.floor_root(10**9 + 7, "0.9985")
    assert q == _mp_floor(10**9 + 7, "0.9985")
    assert cz.certify_floor(10**9 + 7, "0.9985", q)
    assert not cz.certify_floor(10**9 + 7, "0.9985", q + 1)


def test_floor_root_exact_powers():
    for p in (2, 3, 5, 7, 101):
        assert cz.floor_root(p, "0.5") == p * p
        assert cz.floor_root(p, "1/3") == p**3
        assert cz.floor_root(p, 1) == p


def test_floor_root_rejects():
    with pytest.raises(DomainError):
        cz.floor_root(5, "1.5")
    with pytest.raises(DomainError):
        cz.floor_root(0, "0.5")


def test_floor_root_random_against_mpmath():
    rng = random.Random(11)
    for _ in range(300):
        p = int(sympy.randprime(2, 2**63))
        g = rng.choice(["0.9", "0.95", "0.999", "0.9985", "0.99999"])
        q = cz.floor_root(p, g)
        assert q == _mp_floor(p, g, dps=80)


def test_floor_root_against_isqrt():
    # gamma = 2/3: floor(n^(3/2)) = isqrt(n^3); squares make the root an exact integer
    for m in (10**6, 10**9 + 1, 3037000499):
        for n in (m * m - 1, m * m, m * m + 1, m):
            assert cz.floor_root(n, "2/3") == math.isqrt(n**3)


def test_omega_examples():
    assert cz.omega(12) == 3
    assert cz.omega(1) == 0
    assert cz.omega(2**60) == 60
    assert cz.omega((2**61 - 1) * (2**31 - 1) ** 2) == 3
    with pytest.raises(ValueError):
        cz.omega(0)


def test_omega_against_sympy():
    rng = random.Random(3)
    for _ in range(500):
        n = rng.randrange(1, 10**12)
        assert cz.omega(n) == cz.omega_trial(n) == sum(sympy.factorint(n).values())


def test_spf_omega_matches_table_to_1e7():
    n = 10**7
    spf = cz.spf_table(n)
    vals = np.arange(1, n + 1, dtype=np.int64)
    a = cz.omega_from_spf(vals, spf)
    b = cz.omega_table(n)[1:]
    assert np.array_equal(a, b.astype(np.int64))
    rng = np.random.default_rng(0)
    for v in rng.integers(1, n, 2000):
        assert a[v - 1] == cz.omega_trial(int(v))


def test_primes_in_against_sympy():
    assert list(cz.primes_in(10**6, 10**6 + 2000)) == list(sympy.primerange(10**6, 10**6 + 2000))
    assert list(cz.primes_below(50)) == list(sympy.primerange(2, 50))
    assert cz.primes_in(10, 10).size == 0


def test_census_squares():
    c = cz.census(10, "0.5")
    assert c.counts == {2: 2}
    assert c.primes_used == 2


def test_census_x100_against_bruteforce():
    c = cz.census(100, "0.999")
    assert c.counts == cz.census_bruteforce(100, "0.999") == {1: 25}
    assert sum(c.counts.values()) == c.primes_used == c.distinct_q


def test_census_monotone():
    prev = {}
    for x in (1000, 5000, 20000):
        cur = cz.census(x, "0.995").counts
        assert all(cur.get(k, 0) >= v for k, v in prev.items())
        prev = cur


def test_census_threads_and_multiset():
    a = cz.census(50000, "0.99", segment=4096)
    b = cz.census(50000, "0.99", segment=4096, threads=4)
    m = cz.census(50000, "0.99", segment=4096, distinct=False)
    assert a.summary() == b.summary()
    assert a.counts == m.counts  # floors never repeat for gamma < 1


def test_census_checkpoint_resume(tmp_path):
    path = str(tmp_path / "ck.json")
    full = cz.census(30000, "0.999", segment=1024)
    cz.census(30000, "0.999", segment=1024, checkpoint=path, stop_after=5)
    state = json.load(open(path))
    assert state["version"] == cz.CHECKPOINT_VERSION and state["last_prime"] > 0
    resumed = cz.census(30000, "0.999", segment=1024, checkpoint=path)
    assert resumed.summary() == full.summary()
    with pytest.raises(ValueError):
        cz.census(40000, "0.999", checkpoint=path)


def test_census_resource_limit(monkeypatch):
    monkeypatch.setenv(cz.SIEVE_LIMIT_ENV, "1000")
    with pytest.raises(ResourceLimitError):
        cz.census(5000, "0.999")


def test_census_output():
    c = cz.census(1000, "0.999")
    rows = list(csv.DictReader(io.StringIO(c.csv_text())))
    assert list(rows[0]) == ["gamma", "x", "omega", "count"]
    assert rows[0]["gamma"] == "0.999"
    s = c.summary()
    assert s["baseline"] == pytest.approx(1000**0.999 / math.log(1000) ** 2)
    assert s["ratio"] == pytest.approx(c.count_le5 / s["baseline"])


def test_weight_empty_and_boundary():
    p = derive_params("0.999")
    assert cz.sieve_weight(1, 10**6, p).weight == 1
    assert cz.sieve_weight(2**10, 10**12, p).weight == 1  # 2 < x^(1/17.41)
    # u = 7 exactly with gamma = 1, epsilon = 7 - 270/41; p = 11 equals x^(1/u)
    q = derive_params(1, "17/41")
    assert q.exact.u == 7
    rec = cz.sieve_weight(11, 11**7, q)
    assert rec.omega_contributions == [] and rec.weight == 1
    rec = cz.sieve_weight(7, 11**7, q)
    assert len(rec.omega_contributions) == 1 and rec.weight < 1


def test_weight_two_primes_against_mpmath():
    x = 10**12
    p = derive_params("0.999")
    p1, p2 = 7, 61  # both in [x^(1/17.41), x^(1/u)) = [4.89, 65.5)
    rec = cz.sieve_weight(p1 * p2, x, p)
    assert [q for q, _ in rec.omega_contributions] == [p1, p2]
    mpmath.mp.dps = 40
    u = mpmath.mpf(1) / ((140 * mpmath.mpf("0.999") - 99) / 270)
    lam = 1 / (9 - u)
    c = sum(1 - u * mpmath.log(q) / mpmath.log(x) for q in (p1, p2))
    assert abs(rec.weight - float(1 - lam * c)) < 1e-12
    for _, v in rec.omega_contributions:
        assert 0 < v <= 1 - p.u / 17.41


def test_weight_negative_for_nine_small_primes():
    x = 2**174  # x^(1/17.41) is about 1020
    primes = [1021, 1031, 1033, 1039, 1049, 1051, 1061, 1063, 1069]
    a = math.prod(primes)
    assert a <= x
    rec = cz.sieve_weight(a, x, derive_params("0.999"))
    assert len(rec.omega_contributions) == 9
    assert rec.weight < 0


def test_weight_domain():
    with pytest.raises(DomainError):
        cz.sieve_weight(0, 10, derive_params(1))
