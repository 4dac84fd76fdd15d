"""Exact banded Chebyshev calculus on a finite index window.

Polynomials of a Jacobi matrix are banded, so every quantity needed by the
trace side of the sum rules (matrix Chebyshev polynomials, the combination
P_w, its diagonal and partial traces, the window-difference coefficients
xi) is exactly computable on a finite window.  Each window tracks a
``valid_prefix``: the number of leading rows whose stored entries coincide
with those of the semi-infinite operator.  Requests beyond the valid
prefix raise, so window-sizing mistakes fail loudly instead of silently
truncating.

Symmetric band storage: ``diags[d][i]`` holds entry (i, i+d), 0-based.
"""

from dataclasses import dataclass

import numpy as np

from .coefficients import strip
from .errors import WindowTooSmallError
from .summation import neumaier_cumsum


@dataclass(frozen=True)
class BandWindow:
    """Symmetric banded window of a semi-infinite symmetric matrix."""

    size: int
    halfband: int
    diags: np.ndarray          # shape (halfband+1, size)
    valid_prefix: int

    def __post_init__(self):
        self.diags.setflags(write=False)

    def entry(self, i, j):
        """Entry (i, j), 0-based; both indices must lie in the valid prefix."""
        if min(i, j) < 0 or max(i, j) >= self.valid_prefix:
            raise WindowTooSmallError(
                f"entry ({i}, {j}) outside valid prefix {self.valid_prefix}")
        d = abs(j - i)
        if d > self.halfband:
            return 0.0
        return float(self.diags[d, min(i, j)])

    def diagonal(self, upto=None):
        """Leading diagonal entries (copy); ``upto`` defaults to the valid prefix."""
        n = self.valid_prefix if upto is None else upto
        if n > self.valid_prefix:
            raise WindowTooSmallError(
                f"diagonal request {n} exceeds valid prefix {self.valid_prefix}")
        return self.diags[0, :n].copy()

    def to_dense(self, n=None):
        """Dense n x n copy of the window (valid prefix by default)."""
        n = self.valid_prefix if n is None else n
        if n > self.size:
            raise WindowTooSmallError("dense copy larger than window")
        out = np.zeros((n, n))
        for d in range(self.halfband + 1):
            m = max(n - d, 0)
            idx = np.arange(m)
            out[idx, idx + d] = self.diags[d, :m]
            out[idx + d, idx] = self.diags[d, :m]
        return out


def identity_window(m):
    diags = np.zeros((1, m))
    diags[0] = 1.0
    return BandWindow(m, 0, diags, m)


def jacobi_half_window(coeffs, m):
    """Window of X = J/2 (half-bandwidth 1); exact on all m rows."""
    diags = np.zeros((2, m))
    diags[0] = 0.5 * coeffs.b_padded(m)
    diags[1, : m - 1] = 0.5 * coeffs.a_padded(m - 1)
    return BandWindow(m, 1, diags, m)


def _entry_arrays(window, offset):
    """Row-indexed array of entries (i, i+offset); zero-padded out of range."""
    m = window.size
    out = np.zeros(m)
    d = abs(offset)
    if d > window.halfband:
        return out
    if offset >= 0:
        out[: m - d] = window.diags[d, : m - d]
    else:
        out[d:] = window.diags[d, : m - d]
    return out


def multiply_tridiagonal(y, x):
    """Product Y @ X for a tridiagonal window X commuting with Y.

    Both inputs must be windows of polynomials in the same tridiagonal
    matrix so the product is symmetric; only upper diagonals are formed.
    The last row of the window is lost to truncation, hence the returned
    valid prefix shrinks accordingly.
    """
    if x.halfband != 1:
        raise ValueError("multiply_tridiagonal needs a tridiagonal right factor")
    if y.size != x.size:
        raise ValueError("window sizes differ")
    m = y.size
    p = y.halfband
    x0 = _entry_arrays(x, 0)             # X[k, k]
    x1 = x.diags[1]                       # X[k, k+1] at index k (last slot unused)
    diags = np.zeros((p + 2, m))
    for d in range(p + 2):
        # Z[i, i+d] = Y[i, i+d-1] X[i+d-1, i+d] + Y[i, i+d] X[i+d, i+d]
        #           + Y[i, i+d+1] X[i+d+1, i+d]
        yl = _entry_arrays(y, d - 1)
        ym = _entry_arrays(y, d)
        yr = _entry_arrays(y, d + 1)
        rows = np.arange(m)
        col = rows + d
        ok = col < m
        z = np.zeros(m)
        left = np.where((col - 1 >= 0) & ok, yl * _shifted(x1, col - 1, m), 0.0)
        midv = np.where(ok, ym * _shifted(x0, col, m), 0.0)
        right = np.where((col + 1 < m), yr * _shifted(x1, col, m), 0.0)
        z = left + midv + right
        diags[d] = np.where(ok, z, 0.0)
    vp = min(y.valid_prefix, m - y.halfband - 1)
    return BandWindow(m, p + 1, diags, vp)


def _shifted(arr, idx, m):
    """arr[idx] with out-of-range indices giving 0."""
    idx = np.asarray(idx)
    ok = (idx >= 0) & (idx < len(arr))
    out = np.zeros(m)
    out[ok] = arr[idx[ok]]
    return out


def combine(windows, coefficients, halfband, extra_diagonal=None,
            corner=0.0):
    """Linear combination of windows embedded at a common half-bandwidth.

    ``extra_diagonal`` is added to the main diagonal; ``corner`` to entry
    (0, 0).  The valid prefix is the minimum over the participants.
    """
    m = windows[0].size
    diags = np.zeros((halfband + 1, m))
    vp = m
    for w, c in zip(windows, coefficients):
        if w.size != m:
            raise ValueError("window sizes differ")
        if w.halfband > halfband:
            raise ValueError("halfband too small for combination")
        diags[: w.halfband + 1] += c * w.diags
        vp = min(vp, w.valid_prefix)
    if extra_diagonal is not None:
        diags[0] += extra_diagonal
    diags[0, 0] += corner
    return BandWindow(m, halfband, diags, vp)


def chebyshev_family(coeffs, degree, m):
    """Windows of T_0(J/2) .. T_degree(J/2) via the three-term recurrence."""
    if m < coeffs.support + 2 * degree + 2:
        raise WindowTooSmallError(
            f"window {m} too small for support {coeffs.support}, degree {degree}"
            f" (need >= {coeffs.support + 2 * degree + 2})")
    x = jacobi_half_window(coeffs, m)
    family = [identity_window(m)]
    if degree >= 1:
        family.append(x)
    for ell in range(2, degree + 1):
        xt = multiply_tridiagonal(family[-1], x)
        t_next = combine([xt, family[-2]], [2.0, -1.0], ell)
        family.append(t_next)
    # conservative uniform prefix: entries of T_l are exact on rows < m - l
    out = [family[0]]
    for ell, w in enumerate(family[1:], start=1):
        out.append(BandWindow(w.size, w.halfband, w.diags,
                              min(w.valid_prefix, m - ell)))
    return out


def chebyshev_of_half(coeffs, ell, m):
    """Window of T_ell(J/2); precondition m >= support + 2 ell + 2."""
    if ell < 0:
        raise ValueError("Chebyshev degree must be nonnegative")
    return chebyshev_family(coeffs, ell, m)[ell]


def pad(window, n):
    """Shift the window by n zero rows and columns from the top-left.

    The result lives on the same index window, so the last n rows of the
    input fall off the end; the valid prefix grows by the zero rows.
    """
    if n < 0:
        raise ValueError("padding must be nonnegative")
    if n == 0:
        return window
    m = window.size
    diags = np.zeros_like(window.diags)
    keep = max(m - n, 0)
    diags[:, n:] = window.diags[:, :keep]
    return BandWindow(m, window.halfband, diags,
                      min(window.valid_prefix + n, m))


def s_corner(weight):
    """Corner entry of the boundary-correction matrix S for a weight."""
    c = weight.c
    total = 0.0
    for ell in range(1, len(c)):
        total += (1.0 + (-1.0) ** ell) * c[ell] / (4.0 * ell)
    return -total


def p_w_matrix(coeffs, weight, m):
    """The banded window of P_w(J) = S - c_0 A - sum_l (c_l / l) T_l(J/2).

    ``A`` carries ``ln a_j`` on the diagonal and ``S`` is the rank-one
    boundary correction.  Diagonal entries vanish identically for rows
    beyond ``support + degree``.
    """
    k = weight.degree
    family = chebyshev_family(coeffs, k, m)
    windows = []
    scales = []
    for ell in range(1, k + 1):
        if weight.c[ell] != 0.0:
            windows.append(family[ell])
            scales.append(-weight.c[ell] / ell)
    if not windows:
        windows = [identity_window(m)]
        scales = [0.0]
    log_a = np.log(coeffs.a_padded(m))
    return combine(windows, scales, max(k, 1),
                   extra_diagonal=-weight.c[0] * log_a,
                   corner=s_corner(weight))


@dataclass(frozen=True)
class TraceResult:
    """Partial traces of P_w(J) and the exact total."""

    partial_sums: np.ndarray   # partial_sums[n-1] = sum_{j<=n} (P_w)_{jj}
    total: float


def trace_p_w(coeffs, weight, *, window=None):
    """Partial traces and the exact total trace of P_w(J).

    The diagonal of P_w vanishes beyond ``support + degree`` for an
    eventually-free matrix, so the total is a finite exact sum; partial
    sums are accumulated with compensated summation in index order.
    """
    n = coeffs.support
    k = weight.degree
    m = window if window is not None else n + 2 * k + 4
    p = p_w_matrix(coeffs, weight, m)
    cut = n + k
    diag = p.diagonal(min(cut + 2, p.valid_prefix))
    scale = max(1.0, float(np.max(np.abs(diag))) if len(diag) else 0.0)
    tail = diag[cut:]
    if len(tail) and float(np.max(np.abs(tail))) > 1e-12 * scale:
        raise WindowTooSmallError(
            "diagonal of P_w fails to vanish beyond support + degree; "
            "window bookkeeping is inconsistent")
    head = diag[:cut]
    partial = neumaier_cumsum(head) if len(head) else np.empty(0)
    total = float(partial[-1]) if len(partial) else 0.0
    return TraceResult(partial, total)


def xi_ell(coeffs, n, ell, *, families=None):
    """Window-difference coefficient xi_l^(n)(J).

    For ``ell = 0`` this is ``-sum_{j<=n} ln a_j``; for ``ell >= 1`` it is
    ``-(1/ell)`` times the diagonal sum of
    ``T_ell(J/2) - T_ell(J^(n)/2)(n)``, which terminates exactly at row
    ``n + ell - 1``.
    """
    if n < 1:
        raise ValueError("strip index n must be positive")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if ell == 0:
        log_a = np.log(coeffs.a_padded(n))
        return -float(neumaier_cumsum(log_a)[-1]) if n else 0.0
    if families is not None:
        fam_full, fam_strip = families
        t_full, t_strip = fam_full[ell], fam_strip[ell]
    else:
        t_full = chebyshev_of_half(
            coeffs, ell, max(coeffs.support, n + ell) + 2 * ell + 4)
        stripped = strip(coeffs, n)
        t_strip = chebyshev_of_half(
            stripped, ell, stripped.support + 2 * ell + 4)
    upto = n + ell - 1
    diag_full = t_full.diagonal(upto)
    diff = diag_full.copy()
    strip_part = t_strip.diagonal(min(max(upto - n, 0), t_strip.valid_prefix))
    diff[n: n + len(strip_part)] -= strip_part
    return -float(neumaier_cumsum(diff)[-1]) / ell if upto else 0.0


def xi_weighted(coeffs, weight, n):
    """sum_l c_l xi_l^(n)(J), sharing one Chebyshev recurrence per operator."""
    k = weight.degree
    stripped = strip(coeffs, n)
    fam_full = chebyshev_family(
        coeffs, k, max(coeffs.support, n + k) + 2 * k + 4)
    fam_strip = chebyshev_family(stripped, k, stripped.support + 2 * k + 4)
    terms = [weight.c[0] * xi_ell(coeffs, n, 0)]
    for ell in range(1, k + 1):
        if weight.c[ell] != 0.0:
            terms.append(weight.c[ell] *
                         xi_ell(coeffs, n, ell, families=(fam_full, fam_strip)))
    return float(neumaier_cumsum(terms)[-1])
