from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from fixtures import p3, t33
from loccode.codes import hamming_code, parity_code, systematize
from loccode.gf2 import BitWord
from loccode.local import (
    BOTTOM,
    ProductSpace,
    RandomnessSpace,
    bottom_corrector,
    derive_rng,
    enumerate_output_distribution,
    exact_output_distribution,
    exact_reject_probability,
    full_read_corrector,
    full_read_tester,
    parity_sample_tester,
    rldc_decoder_from_systematic,
    run_with_queries,
    symbol_str,
    tensor_tester,
)


def test_randomness_space_validation():
    with pytest.raises(ValueError):
        RandomnessSpace((1, 2), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        RandomnessSpace((), ())
    space = RandomnessSpace.uniform("abc")
    assert space.size == 3
    assert sum(p for _, p in space.items()) == 1


def test_product_space_enumerates_joint_distribution():
    a = RandomnessSpace.uniform((0, 1))
    b = RandomnessSpace((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    prod = ProductSpace((a, ProductSpace((b, b))))
    items = list(prod.items())
    assert prod.size == len(items) == 18
    assert sum(p for _, p in items) == 1
    assert dict(items)[(1, (0, 2))] == Fraction(1, 2) * Fraction(1, 2) * Fraction(1, 4)


def test_nonuniform_sampling_follows_probabilities():
    space = RandomnessSpace(("x", "y"), (Fraction(9, 10), Fraction(1, 10)))
    rng = derive_rng(5, 1)
    draws = [space.sample(rng) for _ in range(4000)]
    assert 0.07 < draws.count("y") / len(draws) < 0.13


def test_derived_streams_are_reproducible_and_distinct():
    a = derive_rng(11, 2, 3).integers(1 << 30, size=4)
    b = derive_rng(11, 2, 3).integers(1 << 30, size=4)
    c = derive_rng(11, 3, 2).integers(1 << 30, size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_bottom_symbol():
    assert repr(BOTTOM) == "⊥"
    assert symbol_str(BOTTOM) == "bot" and symbol_str(1) == "1"
    assert BOTTOM is type(BOTTOM)()


def test_full_read_tester_accepts_exactly_codewords():
    h = hamming_code(3)
    t = full_read_tester(h)
    for v in range(128):
        w = BitWord(7, v)
        assert exact_reject_probability(t, w) == (0 if h.contains(w) else 1)


def test_parity_sample_reject_probability_is_violated_row_fraction():
    h = hamming_code(3)
    t = parity_sample_tester(h)
    assert t.q == 4
    for v in range(128):
        w = BitWord(7, v)
        violated = sum((r.value & v).bit_count() % 2 for r in h.H)
        assert exact_reject_probability(t, w) == Fraction(violated, 3)


def test_parity_sample_rejects_bad_rows():
    with pytest.raises(ValueError):
        parity_sample_tester(parity_code(3), rows=())
    with pytest.raises(ValueError):
        parity_sample_tester(parity_code(3), rows=(BitWord(4, 1),))


def test_tensor_tester_reads_one_line():
    t = t33()
    tester = tensor_tester(t)
    assert tester.q == 3 and tester.space.size == 6
    w = BitWord.from_str("100000000")  # violates row 1 and column 1
    assert exact_reject_probability(tester, w) == Fraction(2, 6)
    for o in range(6):
        ok, log = tester.run(w, o)
        assert log.count == 3
    with pytest.raises(ValueError):
        tensor_tester(parity_code(9))


def test_full_read_corrector_radius_and_behaviour():
    h = hamming_code(3)
    m = full_read_corrector(h)
    assert m.radius == Fraction(2, 7)
    cw = next(w for w in h.codewords() if w.weight == 4)
    for i in range(1, 8):
        assert exact_output_distribution(m, cw, i) == {cw[i]: 1}
        assert exact_output_distribution(m, cw.flip([1]), i) == {BOTTOM: 1}
    with pytest.raises(IndexError):
        m.plan(8, None)


def test_bottom_corrector_always_bottoms():
    m = bottom_corrector(p3())
    assert m.q == 0
    assert enumerate_output_distribution(m, BitWord(3, 0), 2) == {BOTTOM: 1}


def test_decoder_targets_message_positions():
    h = hamming_code(3)
    s = systematize(h)
    dec = rldc_decoder_from_systematic(s, full_read_corrector(h))
    assert dec.index_range == h.k
    msg = s.message_positions()
    cw = next(w for w in h.codewords() if w.weight == 3)
    for i in range(1, h.k + 1):
        assert dec.target_position(i) == msg[i - 1]
        assert exact_output_distribution(dec, cw, i) == {cw[msg[i - 1]]: 1}
    with pytest.raises(ValueError):
        rldc_decoder_from_systematic(s, full_read_corrector(hamming_code(3)))


def test_run_with_queries_is_seeded():
    t = parity_sample_tester(t33())
    w = BitWord.from_str("110000000")
    assert run_with_queries(t, w, seed=4) == run_with_queries(t, w, seed=4)
    m = full_read_corrector(p3())
    out, log = run_with_queries(m, BitWord.from_str("101"), seed=0, i=3)
    assert out == 1 and log.count == 3 and log.positions == frozenset({1, 2, 3})
    with pytest.raises(ValueError):
        run_with_queries(m, BitWord.from_str("101"), seed=0)
