"""Exact and Monte Carlo verification of tester and corrector contracts."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from scipy import stats

from .codes import DEFAULT_BUDGET, LinearCode, check_budget, nearest_codeword
from .gf2 import BitWord, row_reduce, syndrome_int
from .local import (
    BOTTOM,
    SUCCESS_THRESHOLD,
    Corrector,
    Tester,
    derive_rng,
    enumerate_output_distribution,
    exact_output_distribution,
    exact_reject_probability,
    symbol_str,
)
from .nesting import NestedCorrector, NestedLayout, block_interval

CSV_FIELDS = (
    "kind",
    "code",
    "n",
    "k",
    "radius_num",
    "radius_den",
    "sweep_size",
    "min_success_num",
    "min_success_den",
    "max_queries",
    "exhaustive",
    "seed",
)

CORRUPTION_KINDS = ("exhaustive", "uniform", "burst", "block")


class NonUniqueDecodingError(ValueError):
    """The word has more than one nearest codeword, so 'the' target is ambiguous."""


def parallel_map(fn: Callable, tasks: Sequence, threads: int = 1) -> list:
    """Order-preserving map; results never depend on the thread count."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


# -- reports ----------------------------------------------------------------

@dataclass
class VerificationReport:
    kind: str
    code: str
    n: int
    k: int
    radius: Fraction
    sweep_size: int
    min_success: Fraction
    max_queries: int
    exhaustive: bool
    seed: int
    passed: bool
    counterexample: str | None = None
    ci: tuple[float, float] | None = None
    samples: int | None = None

    def row(self) -> dict:
        return {
            "kind": self.kind,
            "code": self.code,
            "n": self.n,
            "k": self.k,
            "radius_num": self.radius.numerator,
            "radius_den": self.radius.denominator,
            "sweep_size": self.sweep_size,
            "min_success_num": self.min_success.numerator,
            "min_success_den": self.min_success.denominator,
            "max_queries": self.max_queries,
            "exhaustive": int(self.exhaustive),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.row(), separators=(",", ":"))


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()


def parse_reports_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


# -- corruption models ------------------------------------------------------

@dataclass(frozen=True)
class CorruptionModel:
    """How corrupted words are produced from codewords.

    ``weight`` is the number of flipped positions (an upper bound for the
    exhaustive kind, which enumerates every pattern up to that weight).
    ``block`` concentrates all flips inside one layout block.
    """

    kind: str
    weight: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in CORRUPTION_KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")


def error_patterns(N: int, max_weight: int) -> Iterable[int]:
    """Every packed error mask of weight <= max_weight, by weight then position."""
    for w in range(min(max_weight, N) + 1):
        for combo in itertools.combinations(range(N), w):
            yield sum(1 << (N - 1 - j) for j in combo)


def sample_error(model: CorruptionModel, rng, N: int, layout: NestedLayout | None = None) -> int:
    w = min(model.weight, N)
    if model.kind in ("uniform", "exhaustive"):
        positions = rng.choice(N, size=w, replace=False) + 1
    elif model.kind == "burst":
        start = int(rng.integers(1, N - w + 2))
        positions = range(start, start + w)
    else:
        if layout is None:
            raise ValueError("block-targeted corruption needs a nested layout")
        blocks = layout.blocks
        block = blocks[int(rng.integers(len(blocks)))]
        w = min(w, len(block))
        positions = rng.choice(len(block), size=w, replace=False) + block.start
    return sum(1 << (N - int(p)) for p in positions)


def random_codeword(code: LinearCode, rng) -> BitWord:
    v = 0
    for g in code.G.packed:
        if rng.integers(2):
            v ^= g
    return BitWord(code.n, v)


def _layout_of(m: Corrector) -> NestedLayout | None:
    return m.nested.layout if isinstance(m, NestedCorrector) else None


# -- exact success probabilities --------------------------------------------

def nested_success_probability(
    m: NestedCorrector,
    w: BitWord,
    i: int,
    c: BitWord | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    """Pr[M^w(i) in {c_i, BOTTOM}] = 1 - (1 - r)^t (1 - s).

    r is the tester's exact rejection probability on w and s is the
    probability that the inner corrector, run on the block holding i, outputs
    c's symbol or BOTTOM. The t tester runs and the inner run use independent
    coordinates of the product randomness, which makes the product exact.
    When c is omitted it is the nearest codeword, which must be unique.
    """
    nc = m.nested
    if c is None:
        near = nearest_codeword(nc.code, w, budget)
        if not near.unique:
            raise NonUniqueDecodingError(f"{w} has several nearest codewords")
        c = near.codeword
    r = exact_reject_probability(nc.outer_tester, w, budget)
    I, istar = block_interval(i, nc.layout.N, nc.layout.n)
    inner = exact_output_distribution(nc.inner_corrector, w.restrict(I), istar, budget)
    s = inner.get(c[i], Fraction(0)) + inner.get(BOTTOM, Fraction(0))
    return 1 - (1 - r) ** m.t * (1 - s)


def success_probability(m: Corrector, w: BitWord, i: int, c: BitWord, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Pr[M^w(i) in {right symbol, BOTTOM}] where the right symbol comes from c."""
    if isinstance(m, NestedCorrector):
        return nested_success_probability(m, w, i, c, budget)
    dist = exact_output_distribution(m, w, i, budget)
    return dist.get(c[m.target_position(i)], Fraction(0)) + dist.get(BOTTOM, Fraction(0))


def enumerated_success_probability(
    m: Corrector, w: BitWord, i: int, c: BitWord, budget: int = DEFAULT_BUDGET
) -> Fraction:
    """The same probability by running every outcome of the full product space."""
    dist = enumerate_output_distribution(m, w, i, budget)
    return dist.get(c[m.target_position(i)], Fraction(0)) + dist.get(BOTTOM, Fraction(0))


def evaluation_cost(m: Corrector) -> int:
    """Outcomes touched by one exact distribution computation."""
    if isinstance(m, NestedCorrector):
        return evaluation_cost(m.nested.inner_corrector) + m.nested.outer_tester.space.size
    return m.space.size


# -- completeness -----------------------------------------------------------

def verify_completeness(
    m: Corrector,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    threads: int = 1,
    samples: int = 10_000,
) -> VerificationReport:
    """Every codeword, every index: the exact output distribution must be a
    point mass on the right symbol, i.e. every randomness outcome returns it.

    Beyond the budget, falls back to sampled runs and flags the report as
    non-exhaustive.
    """
    code = m.code
    n = m.index_range
    if (1 << code.k) * n * evaluation_cost(m) > budget:
        return _completeness_mc(m, seed, samples)

    words = sorted(code.codewords())

    def check(c: BitWord):
        worst, bad = Fraction(1), None
        for i in range(1, n + 1):
            dist = exact_output_distribution(m, c, i, budget)
            p = dist.get(c[m.target_position(i)], Fraction(0))
            worst = min(worst, p)
            if p != 1 and bad is None:
                bad = (c, i)
        return worst, bad

    results = parallel_map(check, words, threads)
    worst = min(r[0] for r in results)
    bad = next((r[1] for r in results if r[1] is not None), None)
    counterexample = None
    if bad is not None:
        c, i = bad
        counterexample = f"codeword={c} index={i} expected={c[m.target_position(i)]} " + _failing_outcome(m, c, i, budget)
    return VerificationReport(
        kind="completeness",
        code=code.name,
        n=code.n,
        k=code.k,
        radius=Fraction(0),
        sweep_size=len(words) * n,
        min_success=worst,
        max_queries=m.q,
        exhaustive=True,
        seed=seed,
        passed=bad is None,
        counterexample=counterexample,
    )


def _failing_outcome(m: Corrector, c: BitWord, i: int, budget: int) -> str:
    expected = c[m.target_position(i)]
    if m.space.size <= budget:
        for o, _ in m.space.items():
            out = m.run(c, i, o)[0]
            if out is BOTTOM or out != expected:
                return f"outcome={o!r} output={symbol_str(out)}"
    dist = exact_output_distribution(m, c, i, budget)
    shown = {symbol_str(k): str(v) for k, v in dist.items()}
    return f"distribution={shown}"


def _completeness_mc(m: Corrector, seed: int, samples: int) -> VerificationReport:
    code = m.code
    rng = derive_rng(seed, 0)
    fails, bad, max_q = 0, None, 0
    for _ in range(samples):
        c = random_codeword(code, rng)
        i = int(rng.integers(1, m.index_range + 1))
        o = m.space.sample(rng)
        out, log = m.run(c, i, o)
        max_q = max(max_q, log.count)
        expected = c[m.target_position(i)]
        if out is BOTTOM or out != expected:
            fails += 1
            if bad is None:
                bad = f"codeword={c} index={i} outcome={o!r} output={symbol_str(out)}"
    return VerificationReport(
        kind="completeness",
        code=code.name,
        n=code.n,
        k=code.k,
        radius=Fraction(0),
        sweep_size=samples,
        min_success=Fraction(samples - fails, samples),
        max_queries=max_q,
        exhaustive=False,
        seed=seed,
        passed=fails == 0,
        counterexample=bad,
        ci=clopper_pearson(samples - fails, samples),
        samples=samples,
    )


# -- soundness --------------------------------------------------------------

def soundness_sweep(
    m: Corrector,
    model: CorruptionModel,
    radius: Fraction | None = None,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    trials: int = 200,
) -> VerificationReport:
    """Minimum exact success probability over corrupted words and indices.

    The exhaustive kind visits every codeword and every error pattern of
    weight <= floor(radius * N) (``model.weight`` is ignored); the other kinds
    draw ``trials`` corrupted words with model.weight flips each. Every index
    of every visited word is checked. Passes iff the minimum is >= 2/3.
    """
    code = m.code
    N = code.n
    radius = m.radius if radius is None else Fraction(radius)
    seed = model.seed
    layout = _layout_of(m)

    if model.kind == "exhaustive":
        max_w = math.floor(radius * N)
        patterns = list(error_patterns(N, max_w))
        size = (1 << code.k) * len(patterns)
        check_budget(size * m.index_range * evaluation_cost(m), budget, "exhaustive soundness sweep")
        words = sorted(code.codewords())
        tasks = [(t, c, patterns) for t, c in enumerate(words)]
    else:
        size = trials
        tasks = []
        for t in range(trials):
            rng = derive_rng(seed, t)
            c = random_codeword(code, rng)
            tasks.append((t, c, [sample_error(model, rng, N, layout)]))

    def sweep(task):
        t, c, errs = task
        worst, witness, max_q = Fraction(2), None, 0
        for e_idx, e in enumerate(errs):
            w = BitWord(N, c.value ^ e)
            for i in range(1, m.index_range + 1):
                p = success_probability(m, w, i, c, budget)
                if p < worst:
                    worst, witness = p, (c, w, i)
                o = m.space.sample(derive_rng(seed, t, e_idx, i))
                max_q = max(max_q, len(m.plan(i, o).positions))
        return worst, witness, max_q

    results = parallel_map(sweep, tasks, threads)
    worst, witness, max_q = Fraction(2), None, 0
    for r_worst, r_witness, r_q in results:
        if r_worst < worst:
            worst, witness = r_worst, r_witness
        max_q = max(max_q, r_q)
    passed = worst >= SUCCESS_THRESHOLD
    counterexample = None
    if not passed:
        c, w, i = witness
        counterexample = f"codeword={c} word={w} index={i} success={worst}"
    return VerificationReport(
        kind=f"soundness-{model.kind}",
        code=code.name,
        n=N,
        k=code.k,
        radius=radius,
        sweep_size=size,
        min_success=worst,
        max_queries=max_q,
        exhaustive=model.kind == "exhaustive",
        seed=seed,
        passed=passed,
        counterexample=counterexample,
    )


def clopper_pearson(successes: int, samples: int, level: float = 0.99) -> tuple[float, float]:
    """Exact binomial confidence interval for a success probability."""
    alpha = 1 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, samples - successes + 1))
    hi = 1.0 if successes == samples else float(stats.beta.ppf(1 - alpha / 2, successes + 1, samples - successes))
    return lo, hi


def estimate_success(m: Corrector, w: BitWord, i: int, c: BitWord, samples: int, rng) -> int:
    """Number of sampled runs whose output is the right symbol or BOTTOM."""
    expected = c[m.target_position(i)]
    hits = 0
    for _ in range(samples):
        out = m.run(w, i, m.space.sample(rng))[0]
        hits += out is BOTTOM or out == expected
    return hits


def mc_soundness(
    m: Corrector,
    model: CorruptionModel,
    radius: Fraction | None = None,
    pairs: int = 8,
    samples: int = 10_000,
    threads: int = 1,
) -> VerificationReport:
    """Monte Carlo soundness: sampled (w, i) pairs, each run ``samples`` times.

    Reports the pair with the lowest estimate and its 99% Clopper-Pearson
    interval; passes iff that interval's upper end reaches 2/3.
    """
    code = m.code
    N = code.n
    radius = m.radius if radius is None else Fraction(radius)
    seed = model.seed
    layout = _layout_of(m)
    weight = math.floor(radius * N) if model.kind == "exhaustive" else model.weight
    sampler = CorruptionModel("uniform" if model.kind == "exhaustive" else model.kind, weight, seed)

    def one(p):
        rng = derive_rng(seed, p)
        c = random_codeword(code, rng)
        w = BitWord(N, c.value ^ sample_error(sampler, rng, N, layout))
        i = int(rng.integers(1, m.index_range + 1))
        return estimate_success(m, w, i, c, samples, rng), (c, w, i)

    results = parallel_map(one, list(range(pairs)), threads)
    hits, (c, w, i) = min(results, key=lambda r: r[0])
    ci = clopper_pearson(hits, samples)
    passed = ci[1] >= float(SUCCESS_THRESHOLD)
    return VerificationReport(
        kind=f"soundness-mc-{model.kind}",
        code=code.name,
        n=N,
        k=code.k,
        radius=radius,
        sweep_size=pairs,
        min_success=Fraction(hits, samples),
        max_queries=m.q,
        exhaustive=False,
        seed=seed,
        passed=passed,
        counterexample=None if passed else f"codeword={c} word={w} index={i} estimate={hits}/{samples}",
        ci=ci,
        samples=samples,
    )


# -- testability ------------------------------------------------------------

@dataclass(frozen=True)
class Testability:
    """Smallest reject-probability / distance ratio over non-codewords.

    ``kappa`` is unclamped (it may exceed 1); ``clamped`` is min(1, kappa).
    In exact mode ``witness`` attains the minimum; in Monte Carlo mode the
    value is the minimum over the sample, an upper bound on the true one.
    """

    kappa: Fraction
    witness: BitWord
    witness_distance: Fraction
    witness_reject: Fraction
    exhaustive: bool
    words: int

    @property
    def clamped(self) -> Fraction:
        return min(Fraction(1), self.kappa)


def coset_distances(code: LinearCode, budget: int = DEFAULT_BUDGET) -> dict[int, int]:
    """Minimum weight in each coset, keyed by the packed syndrome against a
    basis of the parity checks."""
    n = code.n
    check_budget(1 << n, budget, "coset enumeration")
    basis = row_reduce(code.H).rref
    best: dict[int, int] = {}
    for v in range(1 << n):
        s = syndrome_int(basis, v)
        wt = v.bit_count()
        if wt < best.get(s, n + 1):
            best[s] = wt
    return best


def measure_testability(
    code: LinearCode,
    tester: Tester,
    mode: str = "exact",
    samples: int = 1000,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> Testability:
    n = code.n
    if code.k == n:
        raise ValueError(f"{code.name} is the whole space; testability is undefined")
    best = None

    def consider(v: int, dist: Fraction):
        nonlocal best
        w = BitWord(n, v)
        r = exact_reject_probability(tester, w, budget)
        ratio = r / dist
        if best is None or ratio < best[0]:
            best = (ratio, w, dist, r)

    if mode == "exact":
        check_budget((1 << n) * tester.space.size, budget, "exact testability")
        table = coset_distances(code, budget)
        basis = row_reduce(code.H).rref
        for v in range(1 << n):
            s = syndrome_int(basis, v)
            if s:
                consider(v, Fraction(table[s], n))
        words = 1 << n
    elif mode == "mc":
        rng = derive_rng(seed, 0)
        words = 0
        for _ in range(samples):
            v = int.from_bytes(rng.bytes((n + 7) // 8), "big") >> (8 * ((n + 7) // 8) - n)
            w = BitWord(n, v)
            if code.contains(w):
                continue
            words += 1
            consider(v, nearest_codeword(code, w, budget).distance)
        if best is None:
            raise ValueError("no non-codeword was sampled")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ratio, w, dist, r = best
    return Testability(kappa=ratio, witness=w, witness_distance=dist, witness_reject=r, exhaustive=mode == "exact", words=words)


def report_testability(code: LinearCode, tester: Tester, result: Testability, threshold: Fraction, seed: int = 0) -> VerificationReport:
    passed = result.kappa >= threshold
    return VerificationReport(
        kind="testability",
        code=code.name,
        n=code.n,
        k=code.k,
        radius=Fraction(0),
        sweep_size=result.words,
        min_success=result.kappa,
        max_queries=tester.q,
        exhaustive=result.exhaustive,
        seed=seed,
        passed=passed,
        counterexample=None if passed else (
            f"word={result.witness} reject={result.witness_reject} distance={result.witness_distance}"
        ),
    )


# -- simulation -------------------------------------------------------------

SIMULATION_FIELDS = ("trial", "weight", "index", "corrected", "bottom", "wrong", "queries")


def simulate(m: Corrector, model: CorruptionModel, trials: int, threads: int = 1) -> list[dict]:
    """One corrupted codeword, one index and one corrector run per trial."""
    code = m.code
    N = code.n
    layout = _layout_of(m)
    sampler = model if model.kind != "exhaustive" else CorruptionModel("uniform", model.weight, model.seed)

    def trial(t):
        rng = derive_rng(model.seed, t)
        c = random_codeword(code, rng)
        e = sample_error(sampler, rng, N, layout)
        w = BitWord(N, c.value ^ e)
        i = int(rng.integers(1, m.index_range + 1))
        out, log = m.run(w, i, m.space.sample(rng))
        expected = c[m.target_position(i)]
        bottom = out is BOTTOM
        corrected = not bottom and out == expected
        return {
            "trial": t,
            "weight": e.bit_count(),
            "index": i,
            "corrected": int(corrected),
            "bottom": int(bottom),
            "wrong": int(not bottom and not corrected),
            "queries": log.count,
        }

    return parallel_map(trial, list(range(trials)), threads)


def simulation_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SIMULATION_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
