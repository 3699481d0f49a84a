from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import fixture_chain, fixture_levels, p3, t33
from loccode.analysis import (
    CSV_FIELDS,
    CorruptionModel,
    NonUniqueDecodingError,
    clopper_pearson,
    coset_distances,
    enumerated_success_probability,
    error_patterns,
    mc_soundness,
    measure_testability,
    nested_success_probability,
    parallel_map,
    parse_reports_csv,
    reports_to_csv,
    sample_error,
    simulate,
    simulation_to_csv,
    soundness_sweep,
    report_testability,
    verify_completeness,
)
from loccode.codes import BudgetExceededError, from_parity_check, hamming_code, nearest_codeword, parity_code
from loccode.gf2 import BitMatrix, BitWord, row_reduce, syndrome_int
from loccode.local import bottom_corrector, derive_rng, exact_reject_probability, full_read_corrector, full_read_tester, parity_sample_tester
from loccode.nesting import NestedLayout, base_chain, boost


def chain_with_t(t):
    levels = fixture_levels()
    return boost(levels[1], base_chain(levels[0]), t=t)


def test_success_is_one_on_codewords():
    m = fixture_chain().corrector
    for c in m.code.codewords():
        for i in range(1, 10):
            assert nested_success_probability(m, c, i) == 1


def test_success_is_one_when_tester_always_rejects():
    m = chain_with_t(3).corrector
    w = BitWord.from_str("100010001")  # every row and column has odd parity
    assert exact_reject_probability(m.nested.outer_tester, w) == 1
    for i in range(1, 10):
        assert nested_success_probability(m, w, i, c=BitWord(9, 0)) == 1


def test_closed_form_five_ninths_instance():
    # two flips in row 1 keep the row even, so the inner full-read corrector
    # trusts the block (s = 0) while two of six lines reject (r = 1/3)
    m = chain_with_t(2).corrector
    c = BitWord(9, 0)
    w = c.flip([1, 2])
    assert exact_reject_probability(m.nested.outer_tester, w) == Fraction(1, 3)
    assert nested_success_probability(m, w, 1, c=c) == Fraction(5, 9)
    assert enumerated_success_probability(m, w, 1, c) == Fraction(5, 9)


def test_ambiguous_nearest_codeword_is_reported():
    m = fixture_chain().corrector
    w = BitWord(9, 0).flip([1, 2])  # distance 2 from 0 and from 110110000
    assert not nearest_codeword(m.code, w).unique
    with pytest.raises(NonUniqueDecodingError):
        nested_success_probability(m, w, 1)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 511), st.integers(1, 9), st.integers(0, 2), st.integers(0, 15))
def test_closed_form_matches_product_enumeration(v, i, t, cw_index):
    m = chain_with_t(t).corrector
    c = sorted(m.code.codewords())[cw_index]
    w = BitWord(9, v)
    assert nested_success_probability(m, w, i, c=c) == enumerated_success_probability(m, w, i, c)


def test_completeness_reports():
    h = hamming_code(3)
    good = verify_completeness(full_read_corrector(h))
    assert good.passed and good.exhaustive and good.sweep_size == 16 * 7
    bad = verify_completeness(bottom_corrector(h))
    assert not bad.passed
    assert "output=bot" in bad.counterexample
    nested = verify_completeness(fixture_chain().corrector)
    assert nested.passed and nested.min_success == 1


def test_completeness_falls_back_to_sampling_beyond_budget():
    report = verify_completeness(fixture_chain().corrector, budget=100, samples=300)
    assert report.passed and not report.exhaustive
    assert report.samples == 300 and report.ci is not None


def test_soundness_sweep_radius_zero_only_sees_codewords():
    m = fixture_chain().corrector
    r = soundness_sweep(m, CorruptionModel("exhaustive", 0), radius=Fraction(0))
    assert r.passed and r.min_success == 1 and r.sweep_size == 16


def test_soundness_sweep_fixture_passes_at_radius():
    m = fixture_chain().corrector
    r = soundness_sweep(m, CorruptionModel("exhaustive", 0))
    assert r.radius == Fraction(2, 9)
    assert r.sweep_size == 16 * (1 + 9 + 36)
    assert r.passed and r.min_success >= Fraction(2, 3)
    assert r.max_queries == 63


def test_soundness_sweep_catches_unprotected_corrector():
    m = chain_with_t(0).corrector
    r = soundness_sweep(m, CorruptionModel("block", 2, seed=1), trials=20)
    assert not r.passed and r.min_success == 0
    assert "index=" in r.counterexample


def test_soundness_sweep_budget():
    with pytest.raises(BudgetExceededError):
        soundness_sweep(fixture_chain().corrector, CorruptionModel("exhaustive", 0), budget=1000)


def test_corruption_models_respect_weight_and_shape():
    rng = derive_rng(3)
    layout = NestedLayout(9, 3)
    for _ in range(200):
        e = BitWord(9, sample_error(CorruptionModel("burst", 3), rng, 9))
        s = e.support()
        assert len(s) == 3 and s[-1] - s[0] == 2
        e = BitWord(9, sample_error(CorruptionModel("block", 2), rng, 9, layout))
        assert len(e.support()) == 2
        assert any(set(e.support()) <= set(b) for b in layout.blocks)
        e = BitWord(9, sample_error(CorruptionModel("uniform", 4), rng, 9))
        assert e.weight == 4
    with pytest.raises(ValueError):
        sample_error(CorruptionModel("block", 1), rng, 9)
    with pytest.raises(ValueError):
        CorruptionModel("gaussian", 1)


def test_error_patterns_count():
    assert len(list(error_patterns(9, 2))) == 1 + 9 + 36
    assert len(set(error_patterns(6, 6))) == 64


def test_clopper_pearson_known_values():
    lo, hi = clopper_pearson(0, 10)
    assert lo == 0 and hi == pytest.approx(1 - 0.005 ** (1 / 10), rel=1e-9)
    lo, hi = clopper_pearson(10, 10)
    assert hi == 1 and lo == pytest.approx(0.005 ** (1 / 10), rel=1e-9)
    lo, hi = clopper_pearson(50, 100)
    assert lo < 0.5 < hi and hi - 0.5 == pytest.approx(0.5 - lo, rel=1e-9)


def test_mc_soundness_pass_and_fail():
    good = mc_soundness(fixture_chain().corrector, CorruptionModel("uniform", 2, seed=2), pairs=4, samples=400)
    assert good.passed and good.ci is not None and good.samples == 400
    bad = mc_soundness(chain_with_t(0).corrector, CorruptionModel("block", 2, seed=0), pairs=6, samples=200)
    assert not bad.passed and bad.counterexample


def test_testability_full_read_and_parity():
    h = hamming_code(3)
    full = measure_testability(h, full_read_tester(h))
    assert full.clamped == 1 and full.kappa == Fraction(7, 1)  # reject 1, worst distance 1/7
    p = measure_testability(parity_code(3), parity_sample_tester(parity_code(3)))
    assert p.kappa == 3 and p.witness_distance == Fraction(1, 3)


def test_testability_bound_holds_with_equality_at_witness():
    t = t33()
    tester = parity_sample_tester(t)
    result = measure_testability(t, tester)
    dist = coset_distances(t)
    basis = row_reduce(t.H).rref
    for v in range(512):
        w = BitWord(9, v)
        d = Fraction(dist[syndrome_int(basis, v)], 9)
        assert exact_reject_probability(tester, w) >= result.kappa * d
    assert result.witness_reject == result.kappa * result.witness_distance


def test_testability_monte_carlo_is_an_upper_bound():
    t = t33()
    tester = parity_sample_tester(t)
    exact = measure_testability(t, tester)
    mc = measure_testability(t, tester, mode="mc", samples=300, seed=1)
    assert mc.kappa >= exact.kappa and not mc.exhaustive and mc.words <= 300
    with pytest.raises(ValueError):
        measure_testability(t, tester, mode="guess")
    whole = from_parity_check(BitMatrix.empty(4))
    with pytest.raises(ValueError, match="whole space"):
        measure_testability(whole, full_read_tester(whole))


def test_report_testability_threshold():
    h = hamming_code(3)
    weak = parity_sample_tester(h, rows=tuple(h.H)[:2])
    result = measure_testability(h, weak)
    assert result.kappa == 0
    report = report_testability(h, weak, result, Fraction(1, 10))
    assert not report.passed and "word=" in report.counterexample


def test_csv_schema_and_json():
    r = verify_completeness(full_read_corrector(p3()), seed=5)
    text = reports_to_csv([r])
    header = text.splitlines()[0]
    assert header == "kind,code,n,k,radius_num,radius_den,sweep_size,min_success_num,min_success_den,max_queries,exhaustive,seed"
    assert tuple(header.split(",")) == CSV_FIELDS
    row = parse_reports_csv(text)[0]
    assert row["seed"] == "5" and row["exhaustive"] == "1"
    assert json.loads(r.to_json())["min_success_num"] == 1


def test_simulation_rows_and_determinism():
    m = fixture_chain().corrector
    clean = simulate(m, CorruptionModel("uniform", 0, seed=1), trials=40)
    assert all(r["corrected"] == 1 and r["queries"] == 63 for r in clean)
    model = CorruptionModel("block", 2, seed=9)
    texts = {simulation_to_csv(simulate(m, model, 60, threads=k)) for k in (1, 3, 8)}
    assert len(texts) == 1
    rows = simulate(m, model, 60)
    assert all(r["corrected"] + r["bottom"] + r["wrong"] == 1 for r in rows)
    assert sum(r["corrected"] + r["bottom"] for r in rows) >= 2 / 3 * len(rows)


def test_parallel_map_preserves_order():
    assert parallel_map(lambda x: x * x, list(range(50)), threads=7) == [x * x for x in range(50)]


def test_reports_identical_across_threads():
    m = fixture_chain().corrector
    outs = set()
    for k in (1, 4):
        reps = [verify_completeness(m, threads=k), soundness_sweep(m, CorruptionModel("exhaustive", 0), threads=k)]
        outs.add(reports_to_csv(reps))
    assert len(outs) == 1


def test_random_model_sweep_is_seeded():
    m = fixture_chain().corrector
    a = soundness_sweep(m, CorruptionModel("uniform", 2, seed=4), trials=15)
    b = soundness_sweep(m, CorruptionModel("uniform", 2, seed=4), trials=15, threads=4)
    assert a.row() == b.row()
    assert np.isfinite(float(a.min_success))
