"""Nesting a small code inside every block of a large one, and the local
corrector that lifts a corrector for the small code to the nested code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import mpmath

from .codes import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    LinearCode,
    detect_tensor_layout,
    from_parity_check,
    min_distance,
    read_pchk,
)
from .gf2 import BitMatrix, BitWord
from .local import (
    BOTTOM,
    Corrector,
    Plan,
    ProductSpace,
    Tester,
    exact_output_distribution,
    exact_reject_probability,
    full_read_corrector,
    full_read_tester,
    parity_sample_tester,
    tensor_tester,
)

# Above this many repetitions the (1 - x)^t <= 1/3 certificate switches from
# exact big-rational powers to directed-rounding interval arithmetic.
EXACT_CERTIFICATE_LIMIT = 20_000


@dataclass(frozen=True)
class NestedLayout:
    """Blocks of [N] that must hold codewords of the inner code.

    Aligned blocks tile the first floor(N/n)*n positions; when n does not
    divide N a tail block covers the last n positions and overlaps the last
    aligned block.
    """

    N: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= self.N:
            raise ValueError(f"inner length {self.n} must lie in [1, {self.N}]")

    @property
    def aligned_blocks(self) -> tuple[range, ...]:
        return tuple(range(k * self.n + 1, (k + 1) * self.n + 1) for k in range(self.N // self.n))

    @property
    def tail_block(self) -> range | None:
        if self.N % self.n == 0:
            return None
        return range(self.N - self.n + 1, self.N + 1)

    @property
    def blocks(self) -> tuple[range, ...]:
        tail = self.tail_block
        return self.aligned_blocks + ((tail,) if tail is not None else ())


def _embed(row: int, n: int, N: int, start: int) -> int:
    return row << (N - (start + n - 1))


def nest(c1: LinearCode, c2: LinearCode) -> LinearCode:
    """Codewords of c1 whose every layout block is a codeword of c2.

    H is c1's checks followed by a copy of c2's checks per aligned block and
    one more for the tail block.
    """
    layout = NestedLayout(c1.n, c2.n)
    rows = list(c1.H.packed)
    for block in layout.blocks:
        rows.extend(_embed(h, c2.n, c1.n, block.start) for h in c2.H.packed)
    return from_parity_check(BitMatrix(c1.n, tuple(rows)), name=f"nest({c1.name},{c2.name})")


def rate_lower_bound(eps1: Fraction, eps2: Fraction, N: int, n: int) -> Fraction:
    """1 - eps1 - (n/N) * ceil(N/n) * eps2: one constraint set per layout block."""
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    eps1, eps2 = Fraction(eps1), Fraction(eps2)
    return 1 - eps1 - Fraction(n, N) * math.ceil(Fraction(N, n)) * eps2


def series_rate_lower_bound(eps: Fraction, lengths: Sequence[int]) -> Fraction:
    """Rate bound of an m-level fold whose levels all have rate deficit eps.

    With a_j = (n_(j-1)/n_j) ceil(n_j/n_(j-1)) the deficit unrolls to
    eps (1 + a_m + a_m a_(m-1) + ... + a_m ... a_2).
    """
    eps = Fraction(eps)
    if not lengths:
        raise ValueError("need at least one level")
    deficit = eps
    for prev, cur in zip(lengths, lengths[1:]):
        deficit = eps + Fraction(prev, cur) * math.ceil(Fraction(cur, prev)) * deficit
    return 1 - deficit


def block_interval(i: int, N: int, n: int) -> tuple[range, int]:
    """The constrained block I containing i, and i's offset i* inside it.

    Selection is by block index: the aligned block ceil(i/n) when it exists,
    the tail block otherwise.
    """
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if not 1 <= i <= N:
        raise IndexError(f"index {i} out of range [1, {N}]")
    b = -(-i // n)
    if b <= N // n:
        I = range((b - 1) * n + 1, b * n + 1)
    else:
        I = range(N - n + 1, N + 1)
    return I, i + 1 - I.start


def _as_mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def repetitions(N: int, n: int, delta: Fraction, kappa: Fraction) -> int:
    """Tester repetitions t = ceil(2 ln 3 * N / (delta * kappa * n)).

    Then (1 - kappa*delta*n/(2N))^t <= exp(-ln 3) = 1/3; the bound is checked
    per instance by certify_repetitions before returning.
    """
    delta, kappa = Fraction(delta), Fraction(kappa)
    if not (0 < delta <= 1 and 0 < kappa <= 1):
        raise ValueError(f"delta and kappa must lie in (0, 1], got {delta}, {kappa}")
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    ratio = Fraction(N) / (delta * kappa * n)
    with mpmath.workdps(60):
        t = int(mpmath.ceil(2 * mpmath.log(3) * _as_mpf(ratio)))
    if not certify_repetitions(N, n, delta, kappa, t):
        raise ArithmeticError(f"repetition certificate failed for t={t}")
    return t


def certify_repetitions(N: int, n: int, delta: Fraction, kappa: Fraction, t: int) -> bool:
    """Whether (1 - kappa*delta*n/(2N))^t <= 1/3, decided rigorously."""
    base = 1 - Fraction(kappa) * Fraction(delta) * n / (2 * N)
    if t <= EXACT_CERTIFICATE_LIMIT:
        return 3 * base.numerator**t <= base.denominator**t
    iv = mpmath.iv
    with mpmath.workdps(60):
        b = iv.mpf(base.numerator) / base.denominator
        upper = iv.exp(t * iv.log(b)).b
        return upper <= iv.mpf(1) / 3


@dataclass(frozen=True, eq=False)
class NestedCode:
    """The nested code plus the certified ingredients its corrector needs."""

    code: LinearCode
    layout: NestedLayout
    outer: LinearCode
    outer_tester: Tester
    inner_corrector: Corrector
    delta_ltc: Fraction
    kappa: Fraction

    @property
    def inner(self) -> LinearCode:
        return self.inner_corrector.code

    @property
    def radius(self) -> Fraction:
        return self.delta_ltc / 2


def make_nested(
    outer_tester: Tester,
    inner_corrector: Corrector,
    delta_ltc: Fraction,
    kappa: Fraction,
    budget: int = DEFAULT_BUDGET,
    check_kappa_budget: int = 1 << 16,
) -> NestedCode:
    """Nest the corrector's code inside the tester's code and validate inputs.

    delta_ltc must not exceed the outer code's true distance and kappa must
    not exceed the tester's true testability; both are checked exactly when
    the instance is small enough, and otherwise taken as certified inputs.
    """
    outer = outer_tester.code
    inner = inner_corrector.code
    delta_ltc, kappa = Fraction(delta_ltc), Fraction(kappa)
    if inner.n > outer.n:
        raise ValueError(f"inner length {inner.n} exceeds outer length {outer.n}")
    if not 0 < delta_ltc <= 1:
        raise ValueError(f"delta_ltc must lie in (0, 1], got {delta_ltc}")
    if not 0 < kappa <= 1:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    if inner_corrector.radius <= 0:
        raise ValueError("inner corrector must have a positive radius")
    try:
        true_delta = min_distance(outer, budget)
    except BudgetExceededError:
        true_delta = None
    if true_delta is not None and delta_ltc > true_delta:
        raise ValueError(f"delta_ltc={delta_ltc} exceeds the exact distance {true_delta} of {outer.name}")
    if (1 << outer.n) * outer_tester.space.size <= check_kappa_budget:
        from .analysis import measure_testability

        measured = measure_testability(outer, outer_tester, budget=budget).kappa
        if kappa > measured:
            raise ValueError(f"kappa={kappa} exceeds the measured testability {measured}")
    return NestedCode(
        code=nest(outer, inner),
        layout=NestedLayout(outer.n, inner.n),
        outer=outer,
        outer_tester=outer_tester,
        inner_corrector=inner_corrector,
        delta_ltc=delta_ltc,
        kappa=kappa,
    )


@dataclass(frozen=True, eq=False)
class NestedCorrector(Corrector):
    nested: NestedCode | None = None
    t: int = 0


def nested_corrector(nc: NestedCode, t: int | None = None, budget: int = DEFAULT_BUDGET) -> NestedCorrector:
    """Zoom into the block holding i, run the inner corrector there, and run
    the outer tester t times on the whole word; any rejection gives BOTTOM.

    Both halves always run, so the query count does not depend on the input.
    ``t`` overrides the certified repetition count (for reduced instances and
    negative controls).
    """
    inner, tester = nc.inner_corrector, nc.outer_tester
    N, n = nc.layout.N, nc.layout.n
    if t is None:
        t = repetitions(N, n, inner.radius, nc.kappa)
    if t < 0:
        raise ValueError("repetition count must be nonnegative")

    def planner(i, outcome):
        inner_outcome, tester_outcomes = outcome
        I, istar = block_interval(i, N, n)
        inner_plan = inner.plan(istar, inner_outcome)
        tester_plans = [tester.plan(o) for o in tester_outcomes]
        offset = I.start - 1
        positions = tuple(offset + p for p in inner_plan.positions)
        for tp in tester_plans:
            positions += tp.positions

        def decide(vals):
            head = len(inner_plan.positions)
            result = inner_plan.decide(vals[:head])
            cursor = head
            verdicts = []
            for tp in tester_plans:
                verdicts.append(tp.decide(vals[cursor: cursor + len(tp.positions)]))
                cursor += len(tp.positions)
            return result if all(verdicts) else BOTTOM

        return Plan(positions, decide)

    @lru_cache(maxsize=1 << 14)
    def reject(w: BitWord) -> Fraction:
        return exact_reject_probability(tester, w, budget)

    def distribution(w: BitWord, i: int) -> dict:
        I, istar = block_interval(i, N, n)
        inner_dist = exact_output_distribution(inner, w.restrict(I), istar, budget)
        all_accept = (1 - reject(w)) ** t
        out = {sym: all_accept * p for sym, p in inner_dist.items() if sym is not BOTTOM}
        out[BOTTOM] = 1 - all_accept + all_accept * inner_dist.get(BOTTOM, Fraction(0))
        return {sym: p for sym, p in out.items() if p}

    return NestedCorrector(
        code=nc.code,
        radius=nc.radius,
        q=inner.q + t * tester.q,
        space=ProductSpace((inner.space, ProductSpace((tester.space,) * t))),
        planner=planner,
        name=f"nested({tester.name},{inner.name},t={t})",
        distribution=distribution,
        nested=nc,
        t=t,
    )


# -- iterated construction --------------------------------------------------

@dataclass(frozen=True, eq=False)
class Level:
    """One LTC of the family with its certified distance and testability."""

    code: LinearCode
    tester: Tester
    delta_ltc: Fraction
    kappa: Fraction


@dataclass(frozen=True, eq=False)
class NestingChain:
    levels: tuple[Level, ...]
    codes: tuple[LinearCode, ...]
    nested: tuple[NestedCode, ...]
    correctors: tuple[Corrector, ...]
    radii: tuple[Fraction, ...]
    reps: tuple[int, ...]
    rate_bounds: tuple[Fraction, ...]

    @property
    def code(self) -> LinearCode:
        return self.codes[-1]

    @property
    def corrector(self) -> Corrector:
        return self.correctors[-1]

    @property
    def radius(self) -> Fraction:
        return self.radii[-1]

    @property
    def rate_bound(self) -> Fraction:
        return self.rate_bounds[-1]

    @property
    def query_bound(self) -> int:
        """n_1 + sum over levels j >= 2 of t_j * q_j."""
        total = self.levels[0].code.n
        for level, t in zip(self.levels[1:], self.reps):
            total += t * level.tester.q
        return total


def base_chain(level: Level, budget: int = DEFAULT_BUDGET) -> NestingChain:
    corrector = full_read_corrector(level.code, budget)
    return NestingChain(
        levels=(level,),
        codes=(level.code,),
        nested=(),
        correctors=(corrector,),
        radii=(corrector.radius,),
        reps=(),
        rate_bounds=(1 - level.code.epsilon,),
    )


def boost(level: Level, inner: NestingChain, t: int | None = None, budget: int = DEFAULT_BUDGET) -> NestingChain:
    """One more nesting step: the chain's code goes inside level.code."""
    if inner.code.n > level.code.n:
        raise ValueError(f"inner length {inner.code.n} exceeds outer length {level.code.n}")
    nc = make_nested(level.tester, inner.corrector, level.delta_ltc, level.kappa, budget)
    corrector = nested_corrector(nc, t=t, budget=budget)
    bound = rate_lower_bound(level.code.epsilon, 1 - inner.rate_bound, level.code.n, inner.code.n)
    return NestingChain(
        levels=inner.levels + (level,),
        codes=inner.codes + (nc.code,),
        nested=inner.nested + (nc,),
        correctors=inner.correctors + (corrector,),
        radii=inner.radii + (nc.radius,),
        reps=inner.reps + (corrector.t,),
        rate_bounds=inner.rate_bounds + (bound,),
    )


def iterate_nesting(levels: Sequence[Level], budget: int = DEFAULT_BUDGET) -> NestingChain:
    """Fold LTC_m nest (... (LTC_2 nest LTC_1)) with LTC_1 corrected by full reading."""
    if not levels:
        raise ValueError("need at least one level")
    lengths = [lv.code.n for lv in levels]
    if any(a > b for a, b in zip(lengths, lengths[1:])):
        raise ValueError(f"block lengths must be nondecreasing, got {lengths}")
    chain = base_chain(levels[0], budget)
    for level in levels[1:]:
        chain = boost(level, chain, budget=budget)
    return chain


# -- chain descriptor files -------------------------------------------------

TESTER_KINDS = {"full", "parity", "tensor"}


def make_tester(code: LinearCode, kind: str) -> Tester:
    if kind == "full":
        return full_read_tester(code)
    if kind == "parity":
        return parity_sample_tester(code)
    if kind == "tensor":
        layout = detect_tensor_layout(code)
        if layout is None:
            raise ValueError(f"{code.name} lacks a tensor layout")
        return tensor_tester(layout)
    raise ValueError(f"unknown tester kind {kind!r}")


def parse_chain(text: str, base_dir: str | Path = ".") -> list[Level]:
    """Parse `LEVEL j code=<path> tester=<kind> delta=<p/q> kappa=<p/q>` lines."""
    levels = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] != "LEVEL" or len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 'LEVEL j code=... tester=... delta=... kappa=...'")
        if int(parts[1]) != len(levels) + 1:
            raise ValueError(f"line {lineno}: levels must be numbered 1, 2, ... in order")
        fields = dict(p.split("=", 1) for p in parts[2:])
        if set(fields) != {"code", "tester", "delta", "kappa"}:
            raise ValueError(f"line {lineno}: bad fields {sorted(fields)}")
        path = Path(fields["code"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        code = read_pchk(path)
        tester = make_tester(code, fields["tester"])
        if tester.code is not code:
            code = tester.code
        levels.append(Level(code, tester, Fraction(fields["delta"]), Fraction(fields["kappa"])))
    if not levels:
        raise ValueError("empty chain descriptor")
    return levels


def format_chain(entries: Sequence[tuple[str, str, Fraction, Fraction]]) -> str:
    lines = [
        f"LEVEL {j} code={path} tester={kind} delta={Fraction(d)} kappa={Fraction(k)}"
        for j, (path, kind, d, k) in enumerate(entries, start=1)
    ]
    return "\n".join(lines) + "\n"
