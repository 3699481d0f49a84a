"""Binary linear codes with exact, enumeration-backed metadata."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .gf2 import BitMatrix, BitWord, kernel_basis, rank, row_reduce, span, syndrome_int

DEFAULT_BUDGET = 1 << 24


class BudgetExceededError(RuntimeError):
    """An exhaustive computation would exceed the enumeration budget."""


def check_budget(size: int, budget: int, what: str) -> None:
    if size > budget:
        raise BudgetExceededError(f"{what}: {size} cases exceed the enumeration budget {budget}")


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A binary linear code given by a parity-check matrix H and generator G.

    H keeps every row it was built from, including redundant ones; the
    dimension comes from rank(H). Tensor codes remember their factors so that
    row/column testers can be built on them.
    """

    H: BitMatrix
    G: BitMatrix
    name: str = "code"
    tensor_factors: tuple[LinearCode, LinearCode] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.H.cols != self.G.cols:
            raise ValueError("G and H disagree on block length")
        if rank(self.G) != self.G.rows:
            raise ValueError("generator rows are not independent")
        if self.G.rows != self.n - rank(self.H):
            raise ValueError("dim ker(H) differs from the generator rank")
        for g in self.G.packed:
            if syndrome_int(self.H, g):
                raise ValueError("a generator row violates a parity check")

    @property
    def n(self) -> int:
        return self.H.cols

    @property
    def k(self) -> int:
        return self.G.rows

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def epsilon(self) -> Fraction:
        """Rate deficit: the code has rate 1 - epsilon."""
        return 1 - self.rate

    def contains(self, w: BitWord) -> bool:
        if len(w) != self.n:
            raise ValueError(f"length mismatch: code has n={self.n}, word has {len(w)}")
        return syndrome_int(self.H, w.value) == 0

    def codewords(self) -> Iterator[BitWord]:
        """All 2^k codewords in Gray-code order (not sorted)."""
        for v in span(self.G):
            yield BitWord(self.n, v)

    def __repr__(self) -> str:
        return f"LinearCode({self.name!r}, n={self.n}, k={self.k})"


@dataclass(frozen=True)
class SystematicCode:
    """A code with a generator in reduced echelon form.

    perm[i-1] is the codeword position holding message symbol i; the first k
    entries are the pivot columns, the rest list the remaining positions.
    """

    code: LinearCode
    perm: tuple[int, ...]
    generator: BitMatrix

    def message_positions(self) -> tuple[int, ...]:
        return self.perm[: self.code.k]


def from_parity_check(H: BitMatrix, name: str = "code") -> LinearCode:
    return LinearCode(H=H, G=kernel_basis(H), name=name)


def from_generator(G: BitMatrix, name: str = "code") -> LinearCode:
    basis = row_reduce(G).rref
    return LinearCode(H=kernel_basis(basis), G=basis, name=name)


def contains(c: LinearCode, w: BitWord) -> bool:
    return c.contains(w)


def systematize(c: LinearCode) -> SystematicCode:
    rref, _, pivots = row_reduce(c.G)
    rest = tuple(j for j in range(1, c.n + 1) if j not in set(pivots))
    return SystematicCode(code=c, perm=tuple(pivots) + rest, generator=rref)


def encode(s: SystematicCode, m: BitWord) -> BitWord:
    """The unique codeword whose message positions read m."""
    k = s.code.k
    if len(m) != k:
        raise ValueError(f"message length {len(m)} != k={k}")
    v = 0
    for i, row in enumerate(s.generator.packed, start=1):
        if m[i]:
            v ^= row
    return BitWord(s.code.n, v)


def decode_message(s: SystematicCode, c: BitWord) -> BitWord:
    return c.restrict(s.message_positions())


def relative_distance(x: BitWord, y: BitWord) -> Fraction:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return Fraction((x.value ^ y.value).bit_count(), len(x))


def weight_distribution(c: LinearCode, budget: int = DEFAULT_BUDGET) -> list[int]:
    """A[j] = number of codewords of weight j.

    Enumerates the code when 2^k fits the budget, otherwise enumerates the
    dual (row space of H) and applies the MacWilliams transform.
    """
    n, k = c.n, c.k
    r = n - k
    if k <= r or (1 << k) <= budget:
        check_budget(1 << k, budget, "codeword enumeration")
        A = [0] * (n + 1)
        for v in span(c.G):
            A[v.bit_count()] += 1
        return A
    check_budget(1 << r, budget, "dual enumeration")
    dual = kernel_basis(BitMatrix(n, c.G.packed))
    B = [0] * (n + 1)
    for v in span(dual):
        B[v.bit_count()] += 1
    A = []
    for j in range(n + 1):
        total = 0
        for i, b in enumerate(B):
            if b:
                total += b * sum((-1) ** s * math.comb(i, s) * math.comb(n - i, j - s) for s in range(j + 1))
        A.append(total >> r)
    return A


def minimum_weight(c: LinearCode, budget: int = DEFAULT_BUDGET) -> int:
    """Smallest weight of a nonzero codeword (cached)."""
    if "d" in c._cache:
        return c._cache["d"]
    if c.k == 0:
        raise ValueError(f"{c.name} has no nonzero codeword; distance is undefined")
    if min(1 << c.k, 1 << (c.n - c.k)) > budget:
        raise BudgetExceededError(f"{c.name}: too large for exact distance (n={c.n}, k={c.k})")
    A = weight_distribution(c, budget)
    d = next(j for j in range(1, c.n + 1) if A[j])
    c._cache["d"] = d
    return d


def min_distance(c: LinearCode, budget: int = DEFAULT_BUDGET) -> Fraction:
    return Fraction(minimum_weight(c, budget), c.n)


class Nearest(NamedTuple):
    codeword: BitWord
    distance: Fraction
    unique: bool


def nearest_codeword(c: LinearCode, w: BitWord, budget: int = DEFAULT_BUDGET) -> Nearest:
    """Closest codeword; ties go to the lexicographically smallest one."""
    if len(w) != c.n:
        raise ValueError(f"length mismatch: code has n={c.n}, word has {len(w)}")
    check_budget(1 << c.k, budget, "nearest-codeword search")
    best, best_d, count = None, c.n + 1, 0
    x = w.value
    for v in span(c.G):
        d = (v ^ x).bit_count()
        if d < best_d:
            best, best_d, count = v, d, 1
        elif d == best_d:
            count += 1
            if v < best:
                best = v
    return Nearest(BitWord(c.n, best), Fraction(best_d, c.n), count == 1)


def parity_code(n: int) -> LinearCode:
    if n < 2:
        raise ValueError("parity code needs n >= 2")
    return from_parity_check(BitMatrix(n, ((1 << n) - 1,)), name=f"parity{n}")


def hamming_code(r: int) -> LinearCode:
    """[2^r - 1, 2^r - 1 - r] Hamming code; column j of H is j written in binary."""
    if r < 2:
        raise ValueError("Hamming code needs r >= 2")
    n = (1 << r) - 1
    rows = []
    for b in range(r - 1, -1, -1):
        rows.append(BitWord.from_bits((j >> b) & 1 for j in range(1, n + 1)).value)
    return from_parity_check(BitMatrix(n, tuple(rows)), name=f"hamming{r}")


def random_ldpc(n: int, rows: int, row_weight: int, seed: int = 0) -> LinearCode:
    """Random parity checks of fixed row weight, deterministic per seed."""
    if n < 2 or rows < 0 or not 1 <= row_weight <= n:
        raise ValueError(f"invalid LDPC parameters n={n} rows={rows} row_weight={row_weight}")
    rng = np.random.default_rng(seed)
    packed = []
    for _ in range(rows):
        cols = rng.choice(n, size=row_weight, replace=False)
        packed.append(sum(1 << (n - 1 - int(j)) for j in cols))
    return from_parity_check(BitMatrix(n, tuple(packed)), name=f"ldpc{n}x{rows}w{row_weight}s{seed}")


def tensor_product(a: LinearCode, b: LinearCode) -> LinearCode:
    """Codewords are n_a x n_b grids, flattened row-major, whose rows lie in b
    and whose columns lie in a.

    H lists the row checks (grid row by grid row) and then the column checks
    (grid column by grid column).
    """
    na, nb = a.n, b.n
    n = na * nb
    checks = []
    for r in range(na):
        shift = (na - 1 - r) * nb
        checks.extend(h << shift for h in b.H.packed)
    for s in range(1, nb + 1):
        for h in a.H.packed:
            v = 0
            for r in range(1, na + 1):
                if (h >> (na - r)) & 1:
                    v |= 1 << (n - ((r - 1) * nb + s))
            checks.append(v)
    gens = []
    for ga in a.G.packed:
        for gb in b.G.packed:
            v = 0
            for r in range(1, na + 1):
                if (ga >> (na - r)) & 1:
                    v |= gb << ((na - r) * nb)
            gens.append(v)
    code = LinearCode(
        H=BitMatrix(n, tuple(checks)),
        G=BitMatrix(n, tuple(gens)),
        name=f"{a.name}x{b.name}",
        tensor_factors=(a, b),
    )
    return code


def grid_lines(c: LinearCode) -> list[tuple[str, tuple[int, ...]]]:
    """Row lines then column lines of a tensor code, as 1-indexed position tuples."""
    if c.tensor_factors is None:
        raise ValueError(f"{c.name} has no tensor layout")
    a, b = c.tensor_factors
    na, nb = a.n, b.n
    lines = [("row", tuple(r * nb + s for s in range(1, nb + 1))) for r in range(na)]
    lines += [("col", tuple(r * nb + s for r in range(na))) for s in range(1, nb + 1)]
    return lines


def detect_tensor_layout(c: LinearCode) -> LinearCode | None:
    """Recognise a parity-check matrix written by tensor_product.

    Returns an equal code carrying its factors, or None when H does not have
    exactly the row-checks-then-column-checks shape for any grid size.
    """
    if c.tensor_factors is not None:
        return c
    n, H = c.n, c.H.packed
    for na in range(2, n // 2 + 1):
        if n % na:
            continue
        nb = n // na
        low = n - nb
        hb_count = 0
        while hb_count < len(H) and H[hb_count] and not H[hb_count] & ((1 << low) - 1):
            hb_count += 1
        rest = len(H) - na * hb_count
        if rest < 0 or rest % nb:
            continue
        hb = tuple(h >> low for h in H[:hb_count])
        first_col = H[na * hb_count: na * hb_count + rest // nb]
        ha = tuple(
            BitWord.from_bits((v >> (n - (r * nb + 1))) & 1 for r in range(na)).value for v in first_col
        )
        fa = from_parity_check(BitMatrix(na, ha), name=f"f{na}")
        fb = from_parity_check(BitMatrix(nb, hb), name=f"f{nb}")
        t = tensor_product(fa, fb)
        if t.H.packed == H:
            return LinearCode(H=c.H, G=t.G, name=c.name, tensor_factors=(fa, fb))
    return None


# -- code file format -------------------------------------------------------

def format_pchk(c: LinearCode) -> str:
    lines = [f"PCHK n={c.n} rows={c.H.rows}"] + c.H.to_strings()
    return "\n".join(lines) + "\n"


def parse_pchk(text: str, name: str = "code") -> LinearCode:
    lines = text.split("\n")
    if not lines or lines[-1] != "":
        raise ValueError("pchk text must end with a newline")
    lines = lines[:-1]
    parts = lines[0].split(" ") if lines else []
    if len(parts) != 3 or parts[0] != "PCHK" or not parts[1].startswith("n=") or not parts[2].startswith("rows="):
        raise ValueError(f"bad pchk header: {lines[0] if lines else ''!r}")
    n, r = int(parts[1][2:]), int(parts[2][5:])
    body = lines[1:]
    if len(body) != r:
        raise ValueError(f"header declares {r} rows, found {len(body)}")
    for row in body:
        if len(row) != n or set(row) - {"0", "1"}:
            raise ValueError(f"bad pchk row {row!r}")
    return from_parity_check(BitMatrix.from_strings(body, cols=n), name=name)


def write_pchk(c: LinearCode, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_pchk(c))


def read_pchk(path: str | Path) -> LinearCode:
    path = Path(path)
    return parse_pchk(path.read_text(encoding="utf-8"), name=path.stem)
