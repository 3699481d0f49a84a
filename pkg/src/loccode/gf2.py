"""Dense GF(2) words and matrices backed by Python int bitsets.

Positions are 1-indexed. Position 1 is the most significant bit of the packed
integer, so comparing packed values of equal-length words is the same as
comparing their bit strings lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class BitWord:
    """A binary word of fixed length."""

    length: int
    value: int = 0

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("a word has at least one symbol")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, s: str) -> BitWord:
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitWord:
        bits = list(bits)
        value = 0
        for b in bits:
            value = (value << 1) | (int(b) & 1)
        return cls(len(bits), value)

    @classmethod
    def zeros(cls, n: int) -> BitWord:
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, i: int) -> BitWord:
        """The word with a single 1 at position i."""
        if not 1 <= i <= n:
            raise IndexError(f"position {i} out of range [1, {n}]")
        return cls(n, 1 << (n - i))

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexError(f"position {i} out of range [1, {self.length}]")
        return (self.value >> (self.length - i)) & 1

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    def __xor__(self, other: BitWord) -> BitWord:
        _check_same_length(self, other)
        return BitWord(self.length, self.value ^ other.value)

    __add__ = __xor__

    def bits(self) -> tuple[int, ...]:
        return tuple(int(ch) for ch in str(self))

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def support(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.length + 1) if self[i])

    def restrict(self, positions: Sequence[int] | range) -> BitWord:
        """The subword w|_I, in the order the positions are given."""
        if isinstance(positions, range) and positions.step == 1 and len(positions):
            lo, hi = positions.start, positions.stop - 1
            if lo < 1 or hi > self.length:
                raise IndexError("interval out of range")
            width = hi - lo + 1
            return BitWord(width, (self.value >> (self.length - hi)) & ((1 << width) - 1))
        return BitWord.from_bits(self[i] for i in positions)

    def flip(self, positions: Iterable[int]) -> BitWord:
        mask = 0
        for i in positions:
            if not 1 <= i <= self.length:
                raise IndexError(f"position {i} out of range [1, {self.length}]")
            mask ^= 1 << (self.length - i)
        return BitWord(self.length, self.value ^ mask)


def _check_same_length(x: BitWord, y: BitWord) -> None:
    if x.length != y.length:
        raise ValueError(f"length mismatch: {x.length} vs {y.length}")


@dataclass(frozen=True)
class BitMatrix:
    """A GF(2) matrix stored as a tuple of packed rows.

    A matrix with zero rows is legal and stands for "no constraints".
    """

    cols: int
    packed: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.cols < 1:
            raise ValueError("a matrix has at least one column")
        limit = 1 << self.cols
        for r in self.packed:
            if not 0 <= r < limit:
                raise ValueError(f"row does not fit in {self.cols} columns")

    @classmethod
    def from_strings(cls, rows: Sequence[str], cols: int | None = None) -> BitMatrix:
        if cols is None:
            if not rows:
                raise ValueError("column count is required for an empty matrix")
            cols = len(rows[0])
        words = [BitWord.from_str(r) for r in rows]
        if any(len(w) != cols for w in words):
            raise ValueError("ragged rows")
        return cls(cols, tuple(w.value for w in words))

    @classmethod
    def from_rows(cls, rows: Sequence[BitWord], cols: int | None = None) -> BitMatrix:
        if cols is None:
            if not rows:
                raise ValueError("column count is required for an empty matrix")
            cols = len(rows[0])
        if any(len(w) != cols for w in rows):
            raise ValueError("ragged rows")
        return cls(cols, tuple(w.value for w in rows))

    @classmethod
    def from_array(cls, a) -> BitMatrix:
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(a.shape[1], tuple(BitWord.from_bits(row).value for row in a))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, tuple(1 << (n - 1 - r) for r in range(n)))

    @classmethod
    def empty(cls, n: int) -> BitMatrix:
        return cls(n, ())

    @property
    def rows(self) -> int:
        return len(self.packed)

    def row(self, r: int) -> BitWord:
        """Row r, 1-indexed."""
        if not 1 <= r <= self.rows:
            raise IndexError(f"row {r} out of range [1, {self.rows}]")
        return BitWord(self.cols, self.packed[r - 1])

    def __iter__(self) -> Iterator[BitWord]:
        return (BitWord(self.cols, r) for r in self.packed)

    def __len__(self) -> int:
        return self.rows

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r, w in enumerate(self):
            out[r] = w.bits()
        return out

    def to_strings(self) -> list[str]:
        return [str(w) for w in self]

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.cols != self.cols:
            raise ValueError("column mismatch")
        return BitMatrix(self.cols, self.packed + other.packed)

    def transpose(self) -> BitMatrix:
        if self.rows == 0:
            raise ValueError("cannot transpose a matrix with no rows")
        out = []
        for c in range(self.cols):
            shift = self.cols - 1 - c
            v = 0
            for r in self.packed:
                v = (v << 1) | ((r >> shift) & 1)
            out.append(v)
        return BitMatrix(self.rows, tuple(out))

    def __str__(self) -> str:
        return "\n".join(self.to_strings())


class RowReduction(NamedTuple):
    rref: BitMatrix
    rank: int
    pivots: tuple[int, ...]


def _reduce(rows: list[int], cols: int) -> tuple[list[int], list[int]]:
    """In-place Gauss-Jordan elimination on packed rows; returns (rows, 1-indexed pivots)."""
    pivots = []
    r = 0
    for c in range(1, cols + 1):
        mask = 1 << (cols - c)
        p = next((j for j in range(r, len(rows)) if rows[j] & mask), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        for j in range(len(rows)):
            if j != r and rows[j] & mask:
                rows[j] ^= pr
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def row_reduce(M: BitMatrix) -> RowReduction:
    """Reduced row echelon form; zero rows are dropped from the result."""
    rows, pivots = _reduce(list(M.packed), M.cols)
    rank = len(pivots)
    return RowReduction(BitMatrix(M.cols, tuple(rows[:rank])), rank, tuple(pivots))


def rank(M: BitMatrix) -> int:
    return len(_reduce(list(M.packed), M.cols)[1])


def kernel_basis(M: BitMatrix) -> BitMatrix:
    """Basis of {x : M x = 0}, one basis vector per free column, in column order."""
    n = M.cols
    rref, _, pivots = row_reduce(M)
    pivot_set = set(pivots)
    basis = []
    for f in range(1, n + 1):
        if f in pivot_set:
            continue
        fmask = 1 << (n - f)
        v = fmask
        for row, p in zip(rref.packed, pivots):
            if row & fmask:
                v |= 1 << (n - p)
        basis.append(v)
    return BitMatrix(n, tuple(basis))


def mat_vec(M: BitMatrix, x: BitWord) -> BitWord | None:
    """M x over GF(2). Returns None when M has no rows (the empty syndrome)."""
    if len(x) != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, word has {len(x)}")
    if M.rows == 0:
        return None
    return BitWord.from_bits((r & x.value).bit_count() & 1 for r in M.packed)


def syndrome_int(M: BitMatrix, value: int) -> int:
    """Packed syndrome of a packed word; 0 iff every row check is satisfied."""
    s = 0
    for r in M.packed:
        s = (s << 1) | ((r & value).bit_count() & 1)
    return s


def span(M: BitMatrix) -> Iterator[int]:
    """All 2^rows packed combinations of the rows, in Gray-code order starting at 0."""
    rows = M.packed
    v = 0
    yield v
    for step in range(1, 1 << len(rows)):
        v ^= rows[(step & -step).bit_length() - 1]
        yield v
