"""Asymptotic parameter formulas evaluated with explicit constants.

Every hidden Theta/Omega/O multiplier lives in :class:`Constants` (all 1 by
default). Outputs are formula evaluations, not claims about real codes.
Logarithms are base 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Union

import mpmath
from sympy import integer_nthroot, isprime

BANNER = "asymptotic formula evaluation; hidden constants from config (default 1)"

Number = Union[Fraction, mpmath.mpf]

# Decimal digits for non-exact logarithms; enough to round n_j ~ 10^250 exactly.
DPS = 300


@dataclass(frozen=True)
class Constants:
    """Multipliers for every asymptotic expression.

    prime: the odd prime power p; length: block lengths n_j;
    distance / testability / queries: LTC distance, testability and query
    complexity; rate_loss, radius, total_queries: the O(.) terms of the
    final rate, radius and query bounds.
    """

    prime: Fraction = Fraction(1)
    length: Fraction = Fraction(1)
    distance: Fraction = Fraction(1)
    testability: Fraction = Fraction(1)
    queries: Fraction = Fraction(1)
    rate_loss: Fraction = Fraction(1)
    radius: Fraction = Fraction(1)
    total_queries: Fraction = Fraction(1)

    @classmethod
    def from_mapping(cls, data: dict) -> Constants:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        values = {k: Fraction(str(v)) for k, v in data.items()}
        if any(v <= 0 for v in values.values()):
            raise ValueError("constants must be positive")
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path | None) -> Constants:
        if path is None:
            return cls()
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))

    def as_dict(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)) for f in fields(self)}


# -- number helpers ---------------------------------------------------------

def is_odd_prime_power(m: int) -> bool:
    if m < 3 or m % 2 == 0:
        return False
    if isprime(m):
        return True
    for e in range(2, m.bit_length() + 1):
        root, exact = integer_nthroot(m, e)
        if root < 3:
            break
        if exact and isprime(root):
            return True
    return False


def smallest_odd_prime_power_at_least(x) -> int:
    m = max(3, math.ceil(x))
    if m % 2 == 0:
        m += 1
    while not is_odd_prime_power(m):
        m += 2
    return m


def log2_exact(x: int | Fraction) -> Number:
    """log2 as an exact Fraction for powers of two, else a 60-digit mpf."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    num, den = x.numerator, x.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        return Fraction(num.bit_length() - den.bit_length())
    with mpmath.workdps(DPS):
        return mpmath.log(mpmath.mpf(num) / den, 2)


def _ceil(x: Number) -> int:
    if isinstance(x, Fraction):
        return math.ceil(x)
    with mpmath.workdps(DPS):
        return int(mpmath.ceil(x))


def _round(x: Number) -> int:
    if isinstance(x, Fraction):
        return round(x)
    with mpmath.workdps(DPS):
        return int(mpmath.nint(x))


def _lift(a: Fraction, like: Number) -> Number:
    """a as an mpf when ``like`` is one, so mixed arithmetic works."""
    if isinstance(like, Fraction):
        return a
    return mpmath.mpf(a.numerator) / a.denominator


def _mul(c: Fraction, x: Number) -> Number:
    if isinstance(x, Fraction):
        return c * x
    return mpmath.mpf(c.numerator) / c.denominator * x


# -- fixed-epsilon LTC family -----------------------------------------------

def ltc_block_length(q, p: int, j: int) -> Fraction:
    """n_j = (q/8) (p^(3j) - p^j)."""
    if j < 1:
        raise ValueError("levels start at j = 1")
    return Fraction(q) / 8 * (p ** (3 * j) - p**j)


def length_ratio(p: int, j: int) -> Fraction:
    """n_(j+1) / n_j = p (p^(2j+2) - 1) / (p^(2j) - 1); equals p(p^2 + 1) only at j = 1."""
    return Fraction(p ** (3 * (j + 1)) - p ** (j + 1), p ** (3 * j) - p**j)


@dataclass(frozen=True)
class LTCFamilyParams:
    epsilon: Fraction
    p: int
    delta: Fraction
    kappa: Fraction
    q: Fraction

    def block_length(self, j: int) -> Fraction:
        return ltc_block_length(self.q, self.p, j)


def dellm_params(epsilon, constants: Constants = Constants()) -> LTCFamilyParams:
    """Rate 1 - eps family: p ~ (1/eps)^10, delta ~ eps^3, kappa ~ eps^15, q ~ (1/eps)^20."""
    eps = Fraction(epsilon)
    if not 0 < eps <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {eps}")
    inv = 1 / eps
    return LTCFamilyParams(
        epsilon=eps,
        p=smallest_odd_prime_power_at_least(constants.prime * inv**10),
        delta=constants.distance * eps**3,
        kappa=constants.testability * eps**15,
        q=constants.queries * inv**20,
    )


# -- log N family -----------------------------------------------------------

@dataclass(frozen=True)
class FamilyDescriptor:
    N: int
    log_n: Number
    p: int
    lengths: tuple[int, ...]
    epsilon_ltc: Number
    delta_ltc: Number
    kappa_ltc: Number
    q_ltc: Number
    ratios: tuple[Fraction, ...]
    constants: Constants = field(default_factory=Constants)

    @property
    def m(self) -> int:
        return len(self.lengths)


def family_params(N: int, constants: Constants = Constants()) -> FamilyDescriptor:
    """LTC family for target length N with rate 1 - 1/(100 log N).

    p is the smallest odd prime power >= c (log N)^10, n_j is
    c (p^(3j) - p^j) (log N)^20 rounded, and m is the largest j with n_j <= N.
    """
    if N < 4:
        raise ValueError("N too small")
    with mpmath.workdps(DPS):
        return _family_params(N, constants)


def _family_params(N: int, constants: Constants) -> FamilyDescriptor:
    L = log2_exact(N)
    p = smallest_odd_prime_power_at_least(_mul(constants.prime, L**10))
    lengths = []
    j = 1
    while True:
        nj = _round(_mul(constants.length, (p ** (3 * j) - p**j) * L**20))
        if nj > N:
            break
        lengths.append(nj)
        j += 1
    if not lengths:
        raise ValueError(f"N={N} too small: the first block length exceeds N")
    if _mul(constants.prime, L**10) >= 1:
        # a prime lies in [x, 2x] for x >= 1, so p <= 4 c L^10 after rounding up
        assert lengths[0] <= _mul(64 * constants.prime**3 * constants.length, L**50) + 1
    return FamilyDescriptor(
        N=N,
        log_n=L,
        p=p,
        lengths=tuple(lengths),
        epsilon_ltc=1 / (100 * L),
        delta_ltc=_mul(constants.distance, 1 / L**3),
        kappa_ltc=_mul(constants.testability, 1 / L**15),
        q_ltc=_mul(constants.queries, L**20),
        ratios=tuple(length_ratio(p, j) for j in range(1, len(lengths))),
        constants=constants,
    )


# -- headline bounds --------------------------------------------------------

def headline_bounds(
    N: int,
    constants: Constants = Constants(),
    q=1,
    kappa=1,
    rate=None,
    epsilon=None,
) -> dict[str, Number]:
    """Rate, radius and query expressions of the final constructions at length N."""
    with mpmath.workdps(DPS):
        return _headline_bounds(N, constants, q, kappa, rate, epsilon)


def _headline_bounds(N, constants, q, kappa, rate, epsilon) -> dict[str, Number]:
    L = log2_exact(N)
    LL = log2_exact(L) if isinstance(L, Fraction) else mpmath.log(L, 2)
    if isinstance(L, Fraction) and not isinstance(LL, Fraction):
        L = mpmath.mpf(L.numerator) / L.denominator
    c = constants
    chain_q = L**69 / LL
    out: dict[str, Number] = {
        "chain_queries": _mul(c.total_queries, chain_q),
        "chain_rate": 1 - _mul(c.rate_loss, 1 / LL),
        "chain_radius": _mul(c.radius, 1 / L**3),
        "boosted_queries": _mul(c.total_queries, _mul(Fraction(q) / Fraction(kappa), L**33) + chain_q),
        "boosted_rate_loss": _mul(c.rate_loss, 1 / LL),
    }
    if rate is not None:
        loss = out["boosted_rate_loss"]
        out["boosted_rate"] = _lift(Fraction(rate), loss) - loss
    if epsilon is not None:
        eps = Fraction(epsilon)
        out["explicit_radius"] = c.radius * eps**3
        out["explicit_queries"] = _mul(c.total_queries, _mul((1 / eps) ** 35, L**33) + chain_q)
        loss = out["boosted_rate_loss"]
        out["explicit_rate"] = _lift(1 - eps, loss) - loss
    return out


# -- Gilbert-Varshamov trade-off --------------------------------------------

def binary_entropy(x: float) -> float:
    if not 0 <= x <= 1:
        raise ValueError("entropy argument must lie in [0, 1]")
    if x in (0, 1):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


class GVPoint(NamedTuple):
    epsilon: float
    feasible: bool


def gv_epsilon(rate, delta) -> GVPoint:
    """eps = 1 - R - H(delta); a negative value marks an infeasible pair."""
    R, d = float(rate), float(delta)
    if not (0 <= R <= 1 and 0 <= d <= 1):
        raise ValueError("rate and delta must lie in [0, 1]")
    eps = 1 - R - binary_entropy(d)
    return GVPoint(eps, eps >= 0)
