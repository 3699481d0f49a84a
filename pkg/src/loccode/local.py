"""Randomized local testers and correctors with enumerable randomness.

A procedure is a *plan*: given its randomness outcome (and, for a corrector,
the target index) it names the positions it will read and a function of the
read values. The plan never sees the input word, so every procedure built
here is nonadaptive by construction.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .codes import DEFAULT_BUDGET, LinearCode, SystematicCode, check_budget, grid_lines, min_distance
from .gf2 import BitWord

SUCCESS_THRESHOLD = Fraction(2, 3)


class _Bottom:
    """The reject / "I detected corruption" output symbol."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


def symbol_str(x) -> str:
    return "bot" if x is BOTTOM else str(x)


# -- randomness -------------------------------------------------------------

@dataclass(frozen=True)
class RandomnessSpace:
    """A finite probability space over hashable outcomes."""

    outcomes: tuple
    probabilities: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.outcomes) != len(self.probabilities) or not self.outcomes:
            raise ValueError("need one probability per outcome and at least one outcome")
        if any(p < 0 for p in self.probabilities) or sum(self.probabilities) != 1:
            raise ValueError("probabilities must be nonnegative and sum to exactly 1")

    @classmethod
    def uniform(cls, outcomes: Sequence) -> RandomnessSpace:
        outcomes = tuple(outcomes)
        p = Fraction(1, len(outcomes))
        return cls(outcomes, (p,) * len(outcomes))

    @classmethod
    def point(cls, outcome: Any = None) -> RandomnessSpace:
        return cls((outcome,), (Fraction(1),))

    @property
    def size(self) -> int:
        return len(self.outcomes)

    def items(self) -> Iterator[tuple[Any, Fraction]]:
        return zip(self.outcomes, self.probabilities)

    def sample(self, rng: np.random.Generator):
        if len(set(self.probabilities)) == 1:
            return self.outcomes[int(rng.integers(len(self.outcomes)))]
        u = Fraction(int(rng.integers(1 << 53)), 1 << 53)
        acc = Fraction(0)
        for o, p in self.items():
            acc += p
            if u < acc:
                return o
        return self.outcomes[-1]


@dataclass(frozen=True)
class ProductSpace:
    """Independent draws from each factor; outcomes are tuples."""

    factors: tuple

    @property
    def size(self) -> int:
        return math.prod(f.size for f in self.factors)

    def items(self) -> Iterator[tuple[tuple, Fraction]]:
        for combo in itertools.product(*(tuple(f.items()) for f in self.factors)):
            yield tuple(o for o, _ in combo), math.prod((p for _, p in combo), start=Fraction(1))

    def sample(self, rng: np.random.Generator) -> tuple:
        return tuple(f.sample(rng) for f in self.factors)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """An independent stream for (master seed, task keys)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


# -- procedures -------------------------------------------------------------

class Plan(NamedTuple):
    positions: tuple[int, ...]
    decide: Callable[[tuple[int, ...]], Any]


@dataclass(frozen=True)
class QueryLog:
    positions: frozenset[int]
    count: int

    @classmethod
    def of(cls, positions: Sequence[int]) -> QueryLog:
        return cls(frozenset(positions), len(positions))


def read(w: BitWord, positions: Sequence[int]) -> tuple[int, ...]:
    return tuple(w[p] for p in positions)


@dataclass(frozen=True, eq=False)
class Tester:
    """Outputs True (accept) or False (reject)."""

    code: LinearCode
    q: int
    space: RandomnessSpace | ProductSpace
    planner: Callable[[Any], Plan]
    name: str = "tester"

    def plan(self, outcome) -> Plan:
        return self.planner(outcome)

    def run(self, w: BitWord, outcome) -> tuple[bool, QueryLog]:
        positions, decide = self.plan(outcome)
        return bool(decide(read(w, positions))), QueryLog.of(positions)

    def accepts(self, w: BitWord, outcome) -> bool:
        return self.run(w, outcome)[0]


@dataclass(frozen=True, eq=False)
class Corrector:
    """Outputs a bit or BOTTOM for a target index.

    ``positions`` maps target index i to the codeword position whose symbol
    is the right answer; None means the identity on [n] (a corrector), while
    a decoder derived from a systematic code uses the message positions.
    ``distribution`` optionally gives the exact output distribution without
    enumerating ``space`` (used when the space is a large product).
    """

    code: LinearCode
    radius: Fraction
    q: int
    space: RandomnessSpace | ProductSpace
    planner: Callable[[int, Any], Plan]
    name: str = "corrector"
    positions: tuple[int, ...] | None = None
    distribution: Callable[[BitWord, int], dict] | None = None

    @property
    def index_range(self) -> int:
        return self.code.n if self.positions is None else len(self.positions)

    def target_position(self, i: int) -> int:
        if not 1 <= i <= self.index_range:
            raise IndexError(f"index {i} out of range [1, {self.index_range}]")
        return i if self.positions is None else self.positions[i - 1]

    def plan(self, i: int, outcome) -> Plan:
        if not 1 <= i <= self.index_range:
            raise IndexError(f"index {i} out of range [1, {self.index_range}]")
        return self.planner(i, outcome)

    def run(self, w: BitWord, i: int, outcome) -> tuple[Any, QueryLog]:
        positions, decide = self.plan(i, outcome)
        return decide(read(w, positions)), QueryLog.of(positions)


# -- built-in testers -------------------------------------------------------

def full_read_tester(c: LinearCode) -> Tester:
    positions = tuple(range(1, c.n + 1))

    def planner(_):
        return Plan(positions, lambda vals: c.contains(BitWord.from_bits(vals)))

    return Tester(code=c, q=c.n, space=RandomnessSpace.point(), planner=planner, name="full")


def _parity_plan(row: BitWord) -> Plan:
    support = row.support()
    return Plan(support, lambda vals: sum(vals) % 2 == 0)


def parity_sample_tester(c: LinearCode, rows: Sequence[BitWord] | None = None) -> Tester:
    """Checks one uniformly chosen parity-check row.

    ``rows`` defaults to every row of c.H (duplicates and redundant rows
    included); passing a subset builds deliberately weakened testers.
    """
    rows = tuple(c.H) if rows is None else tuple(rows)
    if not rows:
        raise ValueError(f"{c.name} has no parity-check rows to sample")
    if any(len(r) != c.n for r in rows):
        raise ValueError("row length differs from block length")
    q = max(r.weight for r in rows)
    return Tester(
        code=c,
        q=q,
        space=RandomnessSpace.uniform(range(len(rows))),
        planner=lambda o: _parity_plan(rows[o]),
        name="parity",
    )


def tensor_tester(c: LinearCode) -> Tester:
    """Reads one uniformly chosen grid line and checks it against its factor code."""
    if c.tensor_factors is None:
        raise ValueError(f"{c.name} lacks a tensor layout")
    a, b = c.tensor_factors
    lines = grid_lines(c)

    def planner(o):
        kind, positions = lines[o]
        factor = b if kind == "row" else a
        return Plan(positions, lambda vals: factor.contains(BitWord.from_bits(vals)))

    return Tester(
        code=c,
        q=max(a.n, b.n),
        space=RandomnessSpace.uniform(range(len(lines))),
        planner=planner,
        name="tensor",
    )


# -- built-in correctors ----------------------------------------------------

def full_read_corrector(c: LinearCode, budget: int = DEFAULT_BUDGET) -> Corrector:
    """Reads everything; returns w_i on codewords and BOTTOM otherwise.

    The declared radius is (d-1)/n: at distance exactly d another codeword
    may be the input, and the output w_i would then be wrong for sure.
    """
    d = min_distance(c, budget)
    positions = tuple(range(1, c.n + 1))

    def planner(i, _):
        def decide(vals):
            return vals[i - 1] if c.contains(BitWord.from_bits(vals)) else BOTTOM

        return Plan(positions, decide)

    return Corrector(
        code=c,
        radius=d - Fraction(1, c.n),
        q=c.n,
        space=RandomnessSpace.point(),
        planner=planner,
        name="full",
    )


def bottom_corrector(c: LinearCode) -> Corrector:
    """Always outputs BOTTOM; fails completeness on purpose (negative control)."""
    return Corrector(
        code=c,
        radius=Fraction(0),
        q=0,
        space=RandomnessSpace.point(),
        planner=lambda i, _: Plan((), lambda vals: BOTTOM),
        name="bottom",
    )


def rldc_decoder_from_systematic(s: SystematicCode, m: Corrector) -> Corrector:
    """Decodes message symbol i by correcting codeword position perm(i)."""
    if m.code is not s.code:
        raise ValueError("corrector belongs to a different code")
    msg = s.message_positions()
    dist = None
    if m.distribution is not None:
        dist = lambda w, i: m.distribution(w, msg[i - 1])  # noqa: E731
    return Corrector(
        code=m.code,
        radius=m.radius,
        q=m.q,
        space=m.space,
        planner=lambda i, o: m.plan(msg[i - 1], o),
        name=f"decoder({m.name})",
        positions=msg,
        distribution=dist,
    )


# -- exact analysis of single procedures ------------------------------------

def exact_reject_probability(t: Tester, w: BitWord, budget: int = DEFAULT_BUDGET) -> Fraction:
    check_budget(t.space.size, budget, "tester randomness")
    return sum((p for o, p in t.space.items() if not t.accepts(w, o)), start=Fraction(0))


def enumerate_output_distribution(m: Corrector, w: BitWord, i: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Distribution of M^w(i) by running every outcome of the randomness space."""
    check_budget(m.space.size, budget, "corrector randomness")
    dist: dict = defaultdict(Fraction)
    for o, p in m.space.items():
        dist[m.run(w, i, o)[0]] += p
    return dict(dist)


def exact_output_distribution(m: Corrector, w: BitWord, i: int, budget: int = DEFAULT_BUDGET) -> dict:
    if not 1 <= i <= m.index_range:
        raise IndexError(f"index {i} out of range [1, {m.index_range}]")
    if m.distribution is not None:
        return m.distribution(w, i)
    return enumerate_output_distribution(m, w, i, budget)


def run_with_queries(procedure: Tester | Corrector, w: BitWord, seed: int, i: int | None = None):
    """Execute one sampled run; returns (output, QueryLog)."""
    rng = np.random.default_rng(seed)
    outcome = procedure.space.sample(rng)
    if isinstance(procedure, Tester):
        return procedure.run(w, outcome)
    if i is None:
        raise ValueError("a corrector run needs a target index")
    return procedure.run(w, i, outcome)
