"""Shared small codes and brute-force oracles that do not use the library's
linear algebra."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from loccode.codes import parity_code, tensor_product
from loccode.local import full_read_tester, tensor_tester
from loccode.nesting import Level, iterate_nesting


def p3():
    return parity_code(3)


def t33():
    return tensor_product(parity_code(3), parity_code(3))


def fixture_levels():
    """parity3 corrected by full reading, nested inside the 3x3 tensor code."""
    a, t = p3(), t33()
    return [
        Level(a, full_read_tester(a), Fraction(2, 3), Fraction(1)),
        Level(t, tensor_tester(t), Fraction(4, 9), Fraction(1)),
    ]


def fixture_chain():
    return iterate_nesting(fixture_levels())


def all_words(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)


def brute_members(H_rows: np.ndarray, n: int) -> np.ndarray:
    """Every word x in {0,1}^n with H x = 0, by exhaustive search."""
    words = all_words(n)
    if len(H_rows) == 0:
        return words
    ok = ((words @ np.asarray(H_rows).T) % 2).sum(axis=1) == 0
    return words[ok]


def h_array(code) -> np.ndarray:
    return code.H.to_array().astype(np.int64) if code.H.rows else np.zeros((0, code.n), dtype=np.int64)


def brute_dimension(code) -> int:
    count = len(brute_members(h_array(code), code.n))
    assert count & (count - 1) == 0
    return count.bit_length() - 1


def brute_min_weight(code) -> int:
    members = brute_members(h_array(code), code.n)
    return int(min(m.sum() for m in members if m.any()))


def bits_to_int(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v
