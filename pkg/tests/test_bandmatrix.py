import math

import numpy as np
import pytest

from jacobi_sumrules import (JacobiCoefficients, chebyshev_of_half, eq211,
                             one_minus_cos, one_plus_cos, p_w_matrix, pad,
                             strip, trace_p_w, xi_ell, xi_weighted)
from jacobi_sumrules.bandmatrix import (identity_window, jacobi_half_window,
                                        s_corner)
from jacobi_sumrules.errors import WindowTooSmallError
from conftest import dense_chebyshev_half, dense_p_w, random_jacobi

FREE = JacobiCoefficients.free()


def test_chebyshev_degree_zero_is_identity():
    t0 = chebyshev_of_half(FREE, 0, 8)
    assert np.all(t0.diagonal(8) == 1.0)
    assert t0.entry(0, 1) == 0.0


def test_chebyshev_two_free_diagonal():
    # frozen from the walk count: J0^2 has diagonal (1, 2, 2, ...)
    t2 = chebyshev_of_half(FREE, 2, 12)
    diag = t2.diagonal(8)
    assert diag[0] == pytest.approx(-0.5, abs=1e-15)
    assert np.allclose(diag[1:], 0.0, atol=1e-15)


def test_chebyshev_four_free_diagonal_vanishes_beyond_two():
    t4 = chebyshev_of_half(FREE, 4, 14)
    diag = t4.diagonal(10)
    assert diag[0] == pytest.approx(0.0, abs=1e-15)
    assert diag[1] == pytest.approx(-0.5, abs=1e-15)
    assert np.allclose(diag[2:], 0.0, atol=1e-15)   # includes j >= 5


def test_free_diagonal_partial_sums():
    # first k-1 diagonal entries of T_l(J0/2) sum to -(1 + (-1)^l)/4 for l < k
    for k in range(2, 9):
        for ell in range(1, k):
            t = chebyshev_of_half(FREE, ell, 2 * k + 6)
            total = float(np.sum(t.diagonal(k - 1)))
            assert total == pytest.approx(-(1 + (-1) ** ell) / 4, abs=1e-14), \
                (k, ell)


def test_chebyshev_matches_dense_oracle(rng):
    for _ in range(12):
        j = random_jacobi(rng, n_max=12)
        ell = int(rng.integers(1, 7))
        m = j.support + 2 * ell + 4
        window = chebyshev_of_half(j, ell, m)
        dense = dense_chebyshev_half(j, ell, m + 2 * ell + 8)
        vp = window.valid_prefix
        for i in range(min(vp, 9)):
            for d in range(0, min(ell, vp - i - 1) + 1):
                assert window.entry(i, i + d) == pytest.approx(
                    dense[i, i + d], abs=1e-13 * max(1.0, abs(dense).max()))


def test_window_too_small_raises():
    j = JacobiCoefficients(np.ones(4) * 1.1, np.zeros(4))
    with pytest.raises(WindowTooSmallError):
        chebyshev_of_half(j, 3, 4 + 2 * 3 + 1)


def test_valid_prefix_guard():
    t2 = chebyshev_of_half(FREE, 2, 10)
    with pytest.raises(WindowTooSmallError):
        t2.entry(t2.valid_prefix, t2.valid_prefix)
    with pytest.raises(WindowTooSmallError):
        t2.diagonal(t2.size + 1)


def test_pad_identity_cases():
    b = jacobi_half_window(JacobiCoefficients([1.2], [0.4]), 8)
    assert pad(b, 0) is b
    shifted = pad(identity_window(6), 1)
    assert np.array_equal(shifted.diagonal(6), [0, 1, 1, 1, 1, 1])


def test_pad_shifts_entries():
    j = JacobiCoefficients([1.3, 0.9], [0.2, -0.1])
    b = jacobi_half_window(j, 9)
    p = pad(b, 2)
    for i in range(5):
        for d in (0, 1):
            assert p.entry(i + 2, i + 2 + d) == b.entry(i, i + d)
    assert p.entry(0, 0) == 0.0 and p.entry(1, 2) == 0.0


def test_s_corner_quartic_weight():
    assert s_corner(eq211()) == pytest.approx(7.0 / 8.0, abs=1e-16)
    assert s_corner(one_plus_cos()) == 0.0
    assert s_corner(one_minus_cos()) == 0.0


def test_p_w_free_diagonal():
    p = p_w_matrix(FREE, eq211(), 14)
    diag = p.diagonal(8)
    assert diag[0] == pytest.approx(-0.125, abs=1e-15)
    assert diag[1] == pytest.approx(+0.125, abs=1e-15)
    assert np.allclose(diag[2:], 0.0, atol=1e-15)


def test_p_w_closed_form_quartic(rng):
    # P_w(J) = S - 3A - (J^4 - 12 J^2 + 18)/8 entrywise on the valid prefix
    for _ in range(6):
        j = random_jacobi(rng, n_max=8)
        m = j.support + 12
        p = p_w_matrix(j, eq211(), m)
        jd = np.diag(j.b_padded(m + 10))
        off = j.a_padded(m + 9)
        jd += np.diag(off, 1) + np.diag(off, -1)
        closed = -(np.linalg.matrix_power(jd, 4) - 12 * jd @ jd
                   + 18 * np.eye(m + 10)) / 8.0
        closed -= 3.0 * np.diag(np.log(j.a_padded(m + 10)))
        closed[0, 0] += 7.0 / 8.0
        scale = max(1.0, np.abs(closed[: m, : m]).max())
        for i in range(p.valid_prefix):
            for d in range(0, min(4, p.valid_prefix - i - 1) + 1):
                assert p.entry(i, i + d) == pytest.approx(
                    closed[i, i + d], abs=1e-13 * scale)


def test_p_w_linear_weights_diagonal(rng):
    # diagonal of P_w for w = 1 +- cos is -[ln a_j +- b_j / 2]
    for _ in range(8):
        j = random_jacobi(rng, n_max=10)
        m = j.support + 8
        expect_base = np.log(j.a_padded(m - 2))
        half_b = 0.5 * j.b_padded(m - 2)
        dp = p_w_matrix(j, one_plus_cos(), m).diagonal(m - 2)
        dm = p_w_matrix(j, one_minus_cos(), m).diagonal(m - 2)
        assert np.allclose(dp, -(expect_base + half_b), atol=1e-13)
        assert np.allclose(dm, -(expect_base - half_b), atol=1e-13)


def test_trace_free_is_exactly_zero():
    for w in (eq211(), one_plus_cos(), one_minus_cos()):
        assert trace_p_w(FREE, w).total == 0.0


def test_trace_rank_one_linear_weight():
    t = 0.8
    result = trace_p_w(JacobiCoefficients([1.0], [t]), one_plus_cos())
    assert result.total == pytest.approx(-t / 2, abs=1e-15)


def test_trace_matches_dense_oracle(rng):
    for _ in range(8):
        j = random_jacobi(rng, n_max=10)
        w = eq211()
        mine = trace_p_w(j, w)
        cut = j.support + w.degree
        dense = dense_p_w(j, w, cut + 40)
        assert mine.total == pytest.approx(
            float(np.trace(dense[: cut, : cut])), abs=1e-12)
        assert len(mine.partial_sums) == cut
        assert mine.partial_sums[-1] == mine.total


def test_diagonal_vanishes_beyond_support_plus_degree(rng):
    j = random_jacobi(rng, n_max=6)
    w = eq211()
    p = p_w_matrix(j, w, j.support + 2 * w.degree + 6)
    cut = j.support + w.degree
    tail = p.diagonal(p.valid_prefix)[cut:]
    assert np.max(np.abs(tail)) <= 1e-13


def test_xi_zero_and_free():
    assert xi_ell(JacobiCoefficients(np.ones(3), [0.1, 0.2, 0.3]), 2, 0) == 0.0
    j = JacobiCoefficients([1.5, 0.7], [0.0])
    expect = -(math.log(1.5) + math.log(0.7))
    assert xi_ell(j, 3, 0) == pytest.approx(expect, abs=1e-15)


def test_xi_weighted_free_vanishes():
    for n in (1, 2, 5):
        assert xi_weighted(FREE, eq211(), n) == pytest.approx(0.0, abs=1e-15)


def test_xi_weighted_equals_trace_past_support(rng):
    # once the stripped matrix is free the o(1) term vanishes identically
    for _ in range(10):
        j = random_jacobi(rng, n_max=8)
        w = eq211()
        n = j.support + w.degree + int(rng.integers(0, 3))
        total = trace_p_w(j, w).total
        assert xi_weighted(j, w, max(n, 1)) == pytest.approx(total, abs=1e-12)


def test_xi_ell_against_dense_difference(rng):
    # brute-force the defining trace of T_l(J/2) - T_l(J^(n)/2)(n)
    for _ in range(6):
        j = random_jacobi(rng, n_max=6)
        n = int(rng.integers(1, 5))
        ell = int(rng.integers(1, 5))
        m = j.support + n + 6 * ell + 12
        full = dense_chebyshev_half(j, ell, m)
        stripped = dense_chebyshev_half(strip(j, n), ell, m)
        diff = np.diag(full).copy()
        diff[n:] -= np.diag(stripped)[: m - n]
        expect = -math.fsum(diff[: n + ell - 1]) / ell
        assert xi_ell(j, n, ell) == pytest.approx(expect, abs=1e-12)
        # the difference diagonal really does terminate at row n + ell
        assert np.max(np.abs(diff[n + ell - 1: m - 3 * ell])) <= 1e-12
