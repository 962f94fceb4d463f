"""Sieve parameters (gamma, epsilon, xi, u, lambda) and the window checks.

Everything here is computed twice: once exactly with ``fractions.Fraction``
and once in double precision. The exact values are authoritative; the window
margins at gamma = 0.9985 are below 1e-6, so a float comparison is not trusted
on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Union

from p5verify.errors import DomainError

Number = Union[int, float, str, Fraction, Decimal]

#: Lower and upper ends of the subset-sum window.
WINDOW_LO = Fraction(611797, 10**6)
WINDOW_HI = Fraction(787393, 10**6)

#: Sieving exponent: primes below x**(1/17.41) are sifted out.
SIFT_EXPONENT = Fraction(1741, 100)


def to_fraction(value: Number) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings and Decimals are read as exact decimals. Floats are read through
    their shortest round-trip repr, so ``0.9985`` means 9985/10000 and not the
    nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a rational") from exc
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


@dataclass(frozen=True)
class ExactParams:
    gamma: Fraction
    epsilon: Fraction
    xi: Fraction
    u: Fraction
    lam: Fraction


@dataclass(frozen=True)
class SieveParams:
    """Float view of the parameter tuple; ``exact`` holds the rationals."""

    gamma: float
    epsilon: float
    xi: float
    u: float
    lam: float
    exact: ExactParams

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "epsilon": self.epsilon, "xi": self.xi, "u": self.u, "lambda": self.lam}


def xi_of(gamma: Number) -> Fraction:
    return (140 * to_fraction(gamma) - 99) / 270


def derive_params(gamma: Number, epsilon: Number = 0) -> SieveParams:
    """Build :class:`SieveParams` from gamma and epsilon.

    Raises :class:`DomainError` when gamma is outside (0, 1], epsilon is
    negative, xi <= 0 (gamma <= 99/140) or 9 - u - epsilon <= 0.
    """
    g = to_fraction(gamma)
    eps = to_fraction(epsilon)
    if not 0 < g <= 1:
        raise DomainError(f"gamma={g} outside (0, 1]")
    if eps < 0:
        raise DomainError(f"epsilon={eps} is negative")
    xi = (140 * g - 99) / 270
    if xi <= 0:
        raise DomainError(f"xi={xi} <= 0 (gamma must exceed 99/140)")
    u = 1 / xi + eps
    denom = 9 - u - eps
    if denom <= 0:
        raise DomainError(f"9 - u - epsilon = {denom} <= 0, lambda undefined")
    lam = 1 / denom
    exact = ExactParams(gamma=g, epsilon=eps, xi=xi, u=u, lam=lam)
    return SieveParams(
        gamma=float(g), epsilon=float(eps), xi=float(xi), u=float(u), lam=float(lam), exact=exact
    )


def derive_params_float(gamma: float, epsilon: float = 0.0) -> tuple[float, float, float]:
    """Plain double-precision (xi, u, lambda); used to cross-check the exact path."""
    xi = (140.0 * gamma - 99.0) / 270.0
    u = 1.0 / xi + epsilon
    return xi, u, 1.0 / (9.0 - u - epsilon)


@dataclass(frozen=True)
class WindowCheckReport:
    gamma: float
    lower_value: float
    upper_value: float
    lower_ok: bool
    upper_ok: bool
    lower_exact: Fraction
    upper_exact: Fraction
    float_agrees: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    @property
    def lower_margin(self) -> Fraction:
        """WINDOW_LO - lower_value; positive when the lower check passes."""
        return WINDOW_LO - self.lower_exact

    @property
    def upper_margin(self) -> Fraction:
        """upper_value - WINDOW_HI; positive when the upper check passes."""
        return self.upper_exact - WINDOW_HI

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "lower_value": self.lower_value,
            "upper_value": self.upper_value,
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "lower_margin": float(self.lower_margin),
            "upper_margin": float(self.upper_margin),
            "lower_exact": str(self.lower_exact),
            "upper_exact": str(self.upper_exact),
            "float_agrees": self.float_agrees,
        }


def window_values(gamma: Number) -> tuple[Fraction, Fraction]:
    """Exact (5 - 5g + 4xi, (g + xi + 2)/4)."""
    g = to_fraction(gamma)
    xi = xi_of(g)
    return 5 - 5 * g + 4 * xi, (g + xi + 2) / 4


def check_windows(params: SieveParams | Number) -> WindowCheckReport:
    """Evaluate both window inequalities; accepts params or a bare gamma."""
    g = params.exact.gamma if isinstance(params, SieveParams) else to_fraction(params)
    lower, upper = window_values(g)
    lower_ok = lower < WINDOW_LO
    upper_ok = upper > WINDOW_HI

    gf = float(g)
    xif = (140.0 * gf - 99.0) / 270.0
    lower_f = 5.0 - 5.0 * gf + 4.0 * xif
    upper_f = 0.25 * (gf + xif + 2.0)
    float_agrees = (lower_f < 0.611797) == lower_ok and (upper_f > 0.787393) == upper_ok
    return WindowCheckReport(
        gamma=gf,
        lower_value=float(lower),
        upper_value=float(upper),
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        lower_exact=lower,
        upper_exact=upper,
        float_agrees=float_agrees,
    )


def window_roots() -> tuple[Fraction, Fraction]:
    """Gammas where each window value hits its bound, solved exactly.

    lower: 954 - 790 g = 270 * WINDOW_LO
    upper: 410 g - 441 = 1080 * WINDOW_HI
    """
    return (954 - 270 * WINDOW_LO) / 790, (1080 * WINDOW_HI - 441) / 410


def window_threshold() -> Fraction:
    """Infimum of gamma for which both window checks pass."""
    return max(window_roots())
