from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import all_words, bits_to_int, brute_dimension, brute_min_weight, t33
from loccode.codes import (
    BudgetExceededError,
    decode_message,
    detect_tensor_layout,
    encode,
    format_pchk,
    from_generator,
    from_parity_check,
    grid_lines,
    hamming_code,
    min_distance,
    minimum_weight,
    nearest_codeword,
    parity_code,
    parse_pchk,
    random_ldpc,
    read_pchk,
    systematize,
    tensor_product,
    weight_distribution,
    write_pchk,
)
from loccode.gf2 import BitMatrix, BitWord


def test_parity_and_hamming_parameters():
    p = parity_code(5)
    assert (p.n, p.k, min_distance(p)) == (5, 4, Fraction(2, 5))
    h = hamming_code(3)
    assert (h.n, h.k, minimum_weight(h)) == (7, 4, 3)
    h4 = hamming_code(4)
    assert (h4.n, h4.k, minimum_weight(h4)) == (15, 11, 3)


def test_constructor_arguments_are_validated():
    for bad in (lambda: parity_code(1), lambda: hamming_code(1), lambda: random_ldpc(5, 2, 6)):
        with pytest.raises(ValueError):
            bad()


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 11), st.integers(0, 6), st.integers(1, 4), st.integers(0, 10_000))
def test_dimension_and_distance_match_brute_force(n, rows, weight, seed):
    c = random_ldpc(n, rows, min(weight, n), seed)
    assert c.k == brute_dimension(c)
    if c.k:
        assert minimum_weight(c) == brute_min_weight(c)


def test_macwilliams_route_matches_direct_enumeration():
    # k = 11 > r = 4 with a small budget forces the dual route
    h = hamming_code(4)
    direct = weight_distribution(h)
    via_dual = weight_distribution(h, budget=1 << 6)
    assert direct == via_dual
    assert sum(direct) == 1 << 11
    # known weight enumerator coefficients of the [15, 11] Hamming code
    assert direct[:5] == [1, 0, 0, 35, 105]


def test_distance_budget_is_enforced():
    c = random_ldpc(40, 20, 3, seed=1)
    with pytest.raises(BudgetExceededError):
        minimum_weight(c, budget=1 << 10)
    with pytest.raises(ValueError):
        minimum_weight(from_parity_check(BitMatrix.identity(4)))


def test_generator_and_parity_descriptions_agree():
    h = hamming_code(3)
    again = from_generator(h.G)
    assert all(again.contains(w) == h.contains(w) for w in (BitWord(7, v) for v in range(128)))


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 10), st.integers(1, 5), st.integers(0, 1000), st.data())
def test_systematic_encoding_roundtrip(n, rows, seed, data):
    c = random_ldpc(n, rows, 2, seed)
    s = systematize(c)
    assert sorted(s.perm) == list(range(1, n + 1))
    m = BitWord(c.k, data.draw(st.integers(0, (1 << c.k) - 1))) if c.k else None
    if m is None:
        return
    cw = encode(s, m)
    assert c.contains(cw)
    assert decode_message(s, cw) == m


def test_nearest_codeword_reports_ties():
    p = parity_code(3)
    near = nearest_codeword(p, BitWord.from_str("100"))
    assert near.distance == Fraction(1, 3)
    assert not near.unique  # 000, 101 and 110 are all at distance 1
    assert near.codeword == BitWord.from_str("000")
    h = hamming_code(3)
    cw = next(w for w in h.codewords() if w.weight == 3)
    near = nearest_codeword(h, cw.flip([2]))
    assert near.unique and near.codeword == cw


def test_tensor_product_dimensions_and_membership():
    t = t33()
    assert (t.n, t.k) == (9, 4)
    assert min_distance(t) == Fraction(4, 9)
    for bits in all_words(9):
        grid = bits.reshape(3, 3)
        expected = not (grid.sum(axis=1) % 2).any() and not (grid.sum(axis=0) % 2).any()
        assert t.contains(BitWord(9, bits_to_int(bits))) == expected


def test_tensor_of_unequal_factors():
    a, b = parity_code(2), hamming_code(3)
    t = tensor_product(a, b)
    assert (t.n, t.k) == (14, a.k * b.k)
    assert minimum_weight(t) == 2 * 3
    lines = grid_lines(t)
    assert len(lines) == 2 + 7
    assert lines[0] == ("row", tuple(range(1, 8)))
    assert lines[2] == ("col", (1, 8))


def test_detect_tensor_layout_recovers_factors():
    t = t33()
    loaded = parse_pchk(format_pchk(t), name="grid")
    assert loaded.tensor_factors is None
    found = detect_tensor_layout(loaded)
    assert found is not None
    assert tuple(f.n for f in found.tensor_factors) == (3, 3)
    assert found.name == "grid"
    assert detect_tensor_layout(hamming_code(3)) is None
    assert detect_tensor_layout(parity_code(9)) is None


def test_pchk_roundtrip(tmp_path):
    c = random_ldpc(12, 5, 3, seed=7)
    path = tmp_path / "ldpc.pchk"
    write_pchk(c, path)
    text = path.read_bytes().decode()
    assert text.startswith("PCHK n=12 rows=5\n") and text.endswith("\n") and "\r" not in text
    back = read_pchk(path)
    assert back.name == "ldpc"
    assert back.H == c.H


@pytest.mark.parametrize(
    "text",
    ["PCHK n=3 rows=1\n11\n", "PCHK n=3 rows=2\n111\n", "PCHK n=3 rows=1\n111", "HEAD n=3 rows=1\n111\n", "PCHK n=3 rows=1\n1x1\n"],
)
def test_pchk_parse_errors(text):
    with pytest.raises(ValueError):
        parse_pchk(text)


def test_random_ldpc_is_deterministic_per_seed():
    a = random_ldpc(20, 8, 4, seed=3)
    b = random_ldpc(20, 8, 4, seed=3)
    assert a.H == b.H
    assert all(row.weight == 4 for row in a.H)
    assert np.array_equal(a.H.to_array(), b.H.to_array())
