"""Point spectrum outside [-2, 2] for eventually-free Jacobi matrices.

Eigenvalues are parametrized by the Joukowski variable ``E = beta + 1/beta``
with ``|beta| > 1``.  The production solver shoots the decaying free-tail
solution ``u_n = beta^{-n}`` backward through the three-term recurrence and
finds zeros of the boundary residual on a log-spaced grid in ``|beta| - 1``;
every solve is certified against an independent Sturm-sequence count on a
large truncation.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coefficients import strip
from .errors import CompletenessMismatchError
from .summation import exact_sum

#: eigenvalues with |beta| - 1 below this are flagged as near the band edge
RESONANCE_THRESHOLD = 1e-6

#: lower end of the beta search window, in |beta| - 1
BETA_FLOOR = 1e-9

_CERT_MARGIN = 40.0  # required (|beta|-1) * (truncation - support) at the cutoff


def energy_from_beta(beta):
    """E = beta + 1/beta."""
    beta = np.asarray(beta, dtype=float)
    return beta + 1.0 / beta


def beta_from_energy(energy):
    """The branch with |beta| > 1; requires |E| > 2."""
    e = np.asarray(energy, dtype=float)
    if np.any(np.abs(e) <= 2.0):
        raise ValueError("beta is defined only for |E| > 2")
    root = np.sqrt(e * e - 4.0)
    return np.where(e > 0, (e + root) / 2.0, (e - root) / 2.0)


@dataclass(frozen=True)
class Eigenvalue:
    energy: float
    beta: float
    residual: float
    near_edge: bool


@dataclass(frozen=True)
class PointSpectrum:
    """Eigenvalues below -2 (energy increasing) and above 2 (decreasing)."""

    below: tuple
    above: tuple
    certification: dict = field(default_factory=dict, compare=False)

    @property
    def count(self):
        return len(self.below) + len(self.above)

    def betas(self, side):
        """Array of beta values on one side, in stored order."""
        if side == "+":
            return np.array([e.beta for e in self.above])
        if side == "-":
            return np.array([e.beta for e in self.below])
        raise ValueError("side must be '+' or '-'")

    def energies(self, side):
        if side == "+":
            return np.array([e.energy for e in self.above])
        if side == "-":
            return np.array([e.energy for e in self.below])
        raise ValueError("side must be '+' or '-'")

    @property
    def any_near_edge(self):
        return any(e.near_edge for e in self.below + self.above)


def shooting_residual(coeffs, betas):
    """Boundary residual of the decaying tail solution, vectorized.

    For each beta the free-tail solution is propagated from the first free
    index down to the boundary; the returned value is the scaled residual of
    the first row of ``(J - E) u = 0``.  Zeros coincide with eigenvalues.
    """
    betas = np.asarray(betas, dtype=float)
    n_sup = coeffs.support
    energy = betas + 1.0 / betas
    a = coeffs.a_padded(n_sup + 1)
    b = coeffs.b_padded(n_sup + 1)
    u = np.ones_like(betas)        # u at index n, starting at n = N + 1
    v = 1.0 / betas                # u at index n + 1
    for n in range(n_sup + 1, 1, -1):
        u, v = ((energy - b[n - 1]) * u - a[n - 1] * v) / a[n - 2], u
        if n % 32 == 0:
            scale = np.maximum(np.abs(u), np.abs(v))
            scale[scale == 0.0] = 1.0
            u /= scale
            v /= scale
    scale = np.maximum(np.abs(u), np.abs(v))
    scale[scale == 0.0] = 1.0
    return ((b[0] - energy) * u + a[0] * v) / scale


def beta_search_bound(coeffs):
    """Safe upper bound on |beta|: 1 + sup|b| + 2 sup|a-1| + 2."""
    da, db = coeffs.perturbation_norms()
    return 3.0 + db + 2.0 * da


def _scan_side(coeffs, sign, grid_points, beta_tol):
    beta_max = beta_search_bound(coeffs)
    s = np.linspace(math.log(BETA_FLOOR), math.log(beta_max - 1.0), grid_points)
    betas = sign * (1.0 + np.exp(s))
    resid = shooting_residual(coeffs, betas)
    signs = np.sign(resid)
    hit = np.nonzero(resid == 0.0)[0]
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    lo = s[flips].copy()
    hi = s[flips + 1].copy()
    rlo = resid[flips].copy()
    # bisect all brackets simultaneously until beta is pinned to beta_tol
    while len(lo) and np.max(np.exp(hi) - np.exp(lo)) > beta_tol:
        mid = 0.5 * (lo + hi)
        rmid = shooting_residual(coeffs, sign * (1.0 + np.exp(mid)))
        go_left = rlo * rmid <= 0.0
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
        rlo = np.where(go_left, rlo, rmid)
    roots = sign * (1.0 + np.exp(0.5 * (lo + hi)))
    if len(hit):
        roots = np.concatenate([roots, betas[hit]])
    roots = np.sort(roots)
    final = np.abs(shooting_residual(coeffs, roots)) if len(roots) else roots
    eigs = [Eigenvalue(float(b + 1.0 / b), float(b), float(r),
                       abs(b) - 1.0 < RESONANCE_THRESHOLD)
            for b, r in zip(roots, final)]
    eigs.sort(key=lambda e: e.energy)
    if sign > 0:
        eigs.reverse()   # above: energy decreasing
    return tuple(eigs)


def _sturm_arrays(coeffs, truncation):
    diag = coeffs.b_padded(truncation).tolist()
    off2 = (coeffs.a_padded(truncation - 1) ** 2).tolist()
    return diag, off2


def sturm_count(coeffs, truncation, interval):
    """Eigenvalue count of the truncation in (lo, hi) via Sturm sequences.

    Independent oracle: counts sign agreements of the shifted LDL^T pivots
    of the ``truncation x truncation`` leading principal submatrix.
    Requires ``truncation >= 4 * support + 64``.
    """
    lo, hi = interval
    if hi <= lo:
        raise ValueError("interval must be increasing")
    if truncation < 4 * coeffs.support + 64:
        raise ValueError("truncation too small for a reliable Sturm count")
    diag, off2 = _sturm_arrays(coeffs, truncation)
    return _count_below(diag, off2, hi) - _count_below(diag, off2, lo)


def _count_below(diag, off2, shift):
    """Number of truncation eigenvalues strictly below ``shift``."""
    count = 0
    d = diag[0] - shift
    if d == 0.0:
        d = -1e-300
    if d < 0.0:
        count += 1
    for k in range(1, len(diag)):
        d = (diag[k] - shift) - off2[k - 1] / d
        if d == 0.0:
            d = -1e-300
        if d < 0.0:
            count += 1
    return count


def sturm_eigenvalues(coeffs, truncation, interval, tol=1e-12):
    """All truncation eigenvalues in (lo, hi), refined by count bisection."""
    lo, hi = interval
    diag, off2 = _sturm_arrays(coeffs, truncation)
    n_lo = _count_below(diag, off2, lo)
    n_hi = _count_below(diag, off2, hi)
    k = n_hi - n_lo
    if k == 0:
        return np.empty(0)
    out = np.empty(k)
    for i, rank in enumerate(range(n_lo + 1, n_hi + 1)):
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _count_below(diag, off2, mid) >= rank:
                b = mid
            else:
                a = mid
        out[i] = 0.5 * (a + b)
    return out


def _certify(coeffs, spectrum_side, sign, truncation):
    """Compare the shooting count against the Sturm oracle above a cutoff.

    The cutoff is placed where the truncation error is provably negligible
    (``(|beta|-1) (M - N) >= 40``) and then shifted into a gap of the
    computed spectrum so boundary ambiguity cannot flip the count.
    """
    m = truncation
    n_sup = coeffs.support
    beta_cut = 1.0 + max(_CERT_MARGIN / (m - n_sup), RESONANCE_THRESHOLD)
    e_cut = beta_cut + 1.0 / beta_cut
    energies = np.array([abs(e.energy) for e in spectrum_side])
    gap = 1e-6
    if len(energies):
        near = np.abs(energies - e_cut) < gap
        if np.any(near):
            above = energies[energies > e_cut + gap]
            nxt = np.min(above) if len(above) else e_cut + 2 * gap
            e_cut = 0.5 * (np.max(energies[near]) + nxt)
    hi = abs(energy_from_beta(beta_search_bound(coeffs))) + 1.0
    oracle = sturm_count(coeffs, m, (e_cut, hi) if sign > 0 else (-hi, -e_cut))
    mine = int(np.sum(energies > e_cut))
    if oracle != mine:
        raise CompletenessMismatchError(
            f"shooting found {mine} eigenvalue(s) with {'E' if sign > 0 else '-E'}"
            f" > {e_cut:.6g} but the Sturm oracle counts {oracle}",
            side="+" if sign > 0 else "-",
            shooting_count=mine, sturm_count=oracle, cutoff=e_cut)
    return {"cutoff": e_cut, "count": mine, "truncation": m}


def eigenvalues_outside(coeffs, *, grid_points=None, beta_tol=1e-13,
                        certify=True, truncation=None):
    """All eigenvalues of J outside [-2, 2], certified against the Sturm oracle.

    Parameters
    ----------
    grid_points : int, optional
        Scan resolution per side; defaults to ``max(4096, 32 * support)``.
    beta_tol : float
        Bracketing target in beta.
    certify : bool
        Cross-check counts on a truncation (raises
        ``CompletenessMismatchError`` on disagreement; never silently
        reconciled).
    truncation : int, optional
        Certification truncation size; defaults to ``max(2000, 4 N + 64)``.
    """
    pts = grid_points if grid_points is not None else max(8192, 32 * coeffs.support)
    above = _scan_side(coeffs, +1, pts, beta_tol)
    below = _scan_side(coeffs, -1, pts, beta_tol)
    certification = {}
    if certify:
        m = truncation if truncation is not None else max(2000, 4 * coeffs.support + 64)
        certification["above"] = _certify(coeffs, above, +1, m)
        certification["below"] = _certify(coeffs, below, -1, m)
    return PointSpectrum(below=below, above=above, certification=certification)


def f_w(weight, beta):
    """Eigenvalue-side functional of the sum rule.

    ``f_w(beta) = c_0 ln|beta| + sum_l (c_l / 2l)(beta^l - beta^-l)`` for
    ``|beta| >= 1``; vanishes at beta = +-1.
    """
    beta_arr = np.asarray(beta, dtype=float)
    if np.any(np.abs(beta_arr) < 1.0 - 1e-12):
        raise ValueError("f_w requires |beta| >= 1")
    c = weight.c
    out = c[0] * np.log(np.abs(beta_arr))
    for ell in range(1, len(c)):
        if c[ell] != 0.0:
            out = out + (c[ell] / (2.0 * ell)) * (beta_arr**ell - beta_arr**(-ell))
    if np.isscalar(beta) or np.ndim(beta) == 0:
        return float(out)
    return out


def lieb_thirring_sum(spectrum, p):
    """sum_j (|E_j| - 2)^p over the stored eigenvalues."""
    if p <= 0:
        raise ValueError("moment exponent must be positive")
    gaps = [max(abs(e.energy) - 2.0, 0.0) for e in spectrum.below + spectrum.above]
    return exact_sum(g**p for g in gaps)


def _paired_betas(spec_full, spec_strip, side):
    """Sorted same-side beta pairs; deficits pad with the band-edge value."""
    bf = list(spec_full.betas(side))
    bs = list(spec_strip.betas(side))
    edge = 1.0 if side == "+" else -1.0
    n = max(len(bf), len(bs))
    for lst in (bf, bs):
        close = [i for i in range(len(lst) - 1)
                 if abs(lst[i] - lst[i + 1]) < 1e-12]
        if close:
            warnings.warn(
                "numerically equal eigenvalues encountered; sorted pairing "
                "among equals is arbitrary", stacklevel=3)
        lst.extend([edge] * (n - len(lst)))
    return np.array(bf), np.array(bs)


def x_ell(coeffs, n, ell, side="both", *, spectra=None):
    """Interlaced eigenvalue difference sum X_l^(n)(J).

    Pairs the sorted same-side eigenvalue lists of J and ``strip(J, n)``;
    unmatched entries pair against the band edge ``beta = +-1`` (which
    contributes the bare term).  ``side`` selects the positive sum, the
    negative sum, or their total.
    """
    if n < 1:
        raise ValueError("strip index n must be positive")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if side == "both":
        return (x_ell(coeffs, n, ell, "+", spectra=spectra)
                + x_ell(coeffs, n, ell, "-", spectra=spectra))
    spec_full, spec_strip = spectra if spectra is not None else (
        eigenvalues_outside(coeffs), eigenvalues_outside(strip(coeffs, n)))
    bf, bs = _paired_betas(spec_full, spec_strip, side)
    if len(bf) == 0:
        return 0.0
    if ell == 0:
        terms = np.log(np.abs(bf)) - np.log(np.abs(bs))
    else:
        terms = ((bf**ell - bf**(-ell)) - (bs**ell - bs**(-ell))) / (2.0 * ell)
    return exact_sum(terms)


def x_weighted(coeffs, weight, n, side="both", *, spectra=None):
    """sum_l c_l X_l^(n)(J) = sum_j [f_w(beta_j) - f_w(beta_j^(n))]."""
    if side == "both":
        return (x_weighted(coeffs, weight, n, "+", spectra=spectra)
                + x_weighted(coeffs, weight, n, "-", spectra=spectra))
    if spectra is None:
        spectra = (eigenvalues_outside(coeffs),
                   eigenvalues_outside(strip(coeffs, n)))
    bf, bs = _paired_betas(spectra[0], spectra[1], side)
    if len(bf) == 0:
        return 0.0
    return exact_sum(f_w(weight, bf) - f_w(weight, bs))
