"""Shared corpora and independent dense oracles for the test suite."""

import numpy as np
import pytest

from jacobi_sumrules import JacobiCoefficients


def random_jacobi(rng, n_max=20, a_lo=0.5, a_hi=1.5, b_amp=1.5):
    n = int(rng.integers(1, n_max + 1))
    a = rng.uniform(a_lo, a_hi, n)
    b = rng.uniform(-b_amp, b_amp, n)
    return JacobiCoefficients(a, b)


def dense_jacobi(coeffs, m):
    """Dense m x m truncation of J."""
    full = np.diag(coeffs.b_padded(m))
    off = coeffs.a_padded(m - 1)
    full += np.diag(off, 1) + np.diag(off, -1)
    return full


def dense_chebyshev_half(coeffs, ell, m):
    """T_ell(J/2) on a dense m x m truncation via the three-term recurrence."""
    x = dense_jacobi(coeffs, m) / 2.0
    t_prev = np.eye(m)
    if ell == 0:
        return t_prev
    t_cur = x
    for _ in range(ell - 1):
        t_prev, t_cur = t_cur, 2.0 * x @ t_cur - t_prev
    return t_cur


def dense_p_w(coeffs, weight, m):
    """Dense window of P_w(J); rows far from the bottom boundary are exact."""
    p = np.zeros((m, m))
    p[0, 0] = -sum((1.0 + (-1.0) ** ell) * weight.c[ell] / (4.0 * ell)
                   for ell in range(1, len(weight.c)))
    p -= weight.c[0] * np.diag(np.log(coeffs.a_padded(m)))
    for ell in range(1, len(weight.c)):
        if weight.c[ell] != 0.0:
            p -= (weight.c[ell] / ell) * dense_chebyshev_half(coeffs, ell, m)
    return p


def resolvent_entry_11(coeffs, m, z):
    """(J_m - z)^{-1}_{11} of the m x m truncation by continued fraction."""
    diag = coeffs.b_padded(m)
    off = coeffs.a_padded(m - 1)
    g = 1.0 / (diag[m - 1] - z)
    for j in range(m - 2, -1, -1):
        g = 1.0 / (diag[j] - z - off[j] * off[j] * g)
    return g


def stieltjes_inversion_density(coeffs, x, *, truncation=4000, eta0=5e-3,
                                ratio=1.25, rungs=9):
    """Independent density oracle: truncation resolvent, eta -> 0 extrapolated.

    Polynomial (Neville) extrapolation through a geometric eta ladder; the
    smallest eta keeps the truncation transient negligible while the ladder
    length controls the extrapolation order.
    """
    etas = np.array([eta0 * ratio**k for k in range(rungs)])
    vals = np.array([resolvent_entry_11(coeffs, truncation, x + 1j * e).imag
                     / np.pi for e in etas])
    t = vals.copy()
    for m in range(1, rungs):
        for i in range(rungs - m):
            t[i] = t[i] + (t[i] - t[i + 1]) * etas[i] / (etas[i + m] - etas[i])
    return float(t[0])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
