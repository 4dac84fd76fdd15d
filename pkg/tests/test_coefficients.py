import numpy as np
import pytest

from jacobi_sumrules import (CoefficientFamily, JacobiCoefficients,
                             differences, r_sequence, strip, truncate_to_free)
from conftest import random_jacobi

FREE = JacobiCoefficients.free()


def test_canonicalization_trims_exact_free_entries():
    j = JacobiCoefficients([1.2, 1.0, 1.0], [0.5, 0.0, 0.0, 0.0])
    assert len(j.a) == 1 and len(j.b) == 1
    assert j.support == 1
    assert j == JacobiCoefficients([1.2], [0.5])


def test_canonicalization_keeps_near_free_entries():
    j = JacobiCoefficients([1.0 + 1e-15], [0.0])
    assert j.support == 1


def test_tail_queries_return_free_values():
    j = JacobiCoefficients([1.3], [0.7])
    assert j.a_entry(1) == 1.3 and j.b_entry(1) == 0.7
    assert j.a_entry(5) == 1.0 and j.b_entry(5) == 0.0
    assert np.array_equal(j.b_padded(3), [0.7, 0.0, 0.0])


def test_positive_offdiagonal_enforced():
    with pytest.raises(ValueError):
        JacobiCoefficients([0.0], [0.0])
    with pytest.raises(ValueError):
        JacobiCoefficients([-0.5], [0.0])


def test_strip_free_is_shift_invariant():
    assert strip(FREE, 5) == FREE


def test_strip_past_support_gives_free():
    j = JacobiCoefficients(np.ones(3), [0.1, 0.2, 0.3])
    assert strip(j, 3) == FREE
    assert strip(j, 7) == FREE


def test_strip_shifts_indices():
    j = JacobiCoefficients(np.ones(3), [1.0, 2.0, 3.0])
    assert strip(j, 1) == JacobiCoefficients(np.ones(2), [2.0, 3.0])
    assert strip(j, 0) == j


def test_strip_composes(rng):
    for _ in range(50):
        j = random_jacobi(rng, n_max=10)
        m, n = rng.integers(0, 6, 2)
        assert strip(strip(j, int(m)), int(n)) == strip(j, int(m + n))


def test_truncate_to_free_on_free():
    assert truncate_to_free(FREE, 4) == FREE


def test_truncate_keeps_prefix():
    j = JacobiCoefficients(np.ones(3), [1.0, 2.0, 3.0])
    assert truncate_to_free(j, 2) == JacobiCoefficients(np.ones(1), [1.0, 2.0])


def test_strip_of_truncation_is_free(rng):
    for _ in range(50):
        j = random_jacobi(rng, n_max=12)
        n = int(rng.integers(1, 8))
        assert strip(truncate_to_free(j, n), n) == FREE


def test_differences_free_empty():
    da, db = differences(FREE)
    assert len(da) == 0 and len(db) == 0


def test_differences_rank_one():
    da, db = differences(JacobiCoefficients([1.0], [0.5]))
    assert np.allclose(db, [-0.5]) and np.allclose(da, [0.0])


def test_differences_uses_tail():
    _, db = differences(JacobiCoefficients(np.ones(2), [1.0, 3.0]))
    assert np.array_equal(db, [2.0, -3.0])


def test_r_sequence_free_is_empty_or_zero():
    assert np.all(r_sequence(FREE) == 0.0)


def test_r_sequence_rank_one():
    t = 0.8
    r = r_sequence(JacobiCoefficients([1.0], [t]))
    assert r[0] == pytest.approx(t**4 - 2 * t**2, abs=1e-15)
    assert r[1] == 0.0
    assert len(r) == 2


def test_r_sequence_diagonal_case_closed_form(rng):
    # with a = 1 only the quartic and difference terms survive
    for _ in range(20):
        n = int(rng.integers(1, 9))
        b = rng.uniform(-1.0, 1.0, n)
        j = JacobiCoefficients(np.ones(n), b)
        da, db = differences(j)
        bp = j.b_padded(n + 1)
        expect = bp[: n]**4 - 2 * db**2
        r = r_sequence(j)
        assert np.allclose(r[: n], expect, atol=1e-14)


def test_r_sequence_invariant_under_canonicalization():
    j1 = JacobiCoefficients([1.1, 1.0], [0.4, 0.0, 0.0])
    j2 = JacobiCoefficients([1.1], [0.4])
    assert np.array_equal(r_sequence(j1), r_sequence(j2))


def test_family_materialize_prefix_consistency():
    fam = CoefficientFamily(kind="oscillatory", alpha_a=0.3, gamma_a=0.7,
                            alpha_b=1.0, gamma_b=0.5, mu=1.0)
    big = fam.materialize(64)
    small = fam.materialize(16)
    assert np.array_equal(big.a[:16], small.a_padded(16))
    assert np.array_equal(big.b[:16], small.b_padded(16))


def test_family_oscillatory_closed_form():
    fam = CoefficientFamily(kind="oscillatory", alpha_a=0.2, gamma_a=1.0,
                            alpha_b=0.5, gamma_b=0.5, mu=2.0)
    j = fam.materialize(10)
    n = np.arange(1, 11)
    assert np.allclose(j.a_padded(10), 1 + 0.2 * np.cos(2.0 * n) / n)
    assert np.allclose(j.b_padded(10), 0.5 * np.cos(2.0 * n) / np.sqrt(n))


def test_family_power_closed_form():
    fam = CoefficientFamily(kind="power", alpha_b=1.0, gamma_b=0.2)
    j = fam.materialize(8)
    assert np.allclose(j.b_padded(8), np.arange(1, 9) ** -0.2)
    assert np.all(j.a_padded(8) == 1.0)


def test_family_rejects_nonpositive_a():
    fam = CoefficientFamily(kind="power", alpha_a=-2.0, gamma_a=0.1)
    with pytest.raises(ValueError):
        fam.materialize(4)


def test_family_explicit_roundtrip():
    j = JacobiCoefficients([1.2], [0.3, -0.4])
    fam = CoefficientFamily.explicit(j)
    assert fam.materialize(10) == j
    assert fam.materialize(1) == JacobiCoefficients([1.2], [0.3])
