"""Eventually-free Jacobi matrices and their structural transforms.

A Jacobi matrix is stored as the finite prefix of its coefficients
``(a_1..a_Na, b_1..b_Nb)`` with the free tail ``a_n = 1``, ``b_n = 0``
implicit beyond the stored entries.  All transform operations are pure and
return new values; instances are immutable and safe to share.
"""

from dataclasses import dataclass, field

import numpy as np


def _trim_trailing(arr, free_value):
    """Drop trailing entries bitwise equal to the free value."""
    n = len(arr)
    while n > 0 and arr[n - 1] == free_value:
        n -= 1
    return arr[:n]


@dataclass(frozen=True)
class JacobiCoefficients:
    """Coefficients of a half-line Jacobi matrix with an exact free tail.

    Parameters
    ----------
    a : array_like
        Off-diagonal entries ``a_1, a_2, ...`` (all positive).
    b : array_like
        Diagonal entries ``b_1, b_2, ...``.

    Trailing entries exactly equal to the free values (``1.0`` for ``a``,
    ``0.0`` for ``b``) are trimmed at construction, so two representations
    of the same operator compare equal.  Queries beyond the stored prefix
    return the free values.
    """

    a: np.ndarray
    b: np.ndarray
    support: int = field(init=False)

    def __post_init__(self):
        a = _trim_trailing(np.asarray(self.a, dtype=float).copy(), 1.0)
        b = _trim_trailing(np.asarray(self.b, dtype=float).copy(), 0.0)
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("coefficient arrays must be one-dimensional")
        if np.any(a <= 0.0):
            raise ValueError("off-diagonal entries a_n must be positive")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "support", max(len(a), len(b)))

    @classmethod
    def free(cls):
        """The free matrix (a = 1, b = 0)."""
        return cls(np.empty(0), np.empty(0))

    def a_entry(self, n):
        """a_n with 1-based index n; free tail beyond the stored prefix."""
        if n < 1:
            raise IndexError("coefficient indices start at 1")
        return float(self.a[n - 1]) if n <= len(self.a) else 1.0

    def b_entry(self, n):
        """b_n with 1-based index n; free tail beyond the stored prefix."""
        if n < 1:
            raise IndexError("coefficient indices start at 1")
        return float(self.b[n - 1]) if n <= len(self.b) else 0.0

    def a_padded(self, m):
        """Array of ``a_1..a_m`` with the free tail filled in."""
        out = np.ones(m)
        k = min(m, len(self.a))
        out[:k] = self.a[:k]
        return out

    def b_padded(self, m):
        """Array of ``b_1..b_m`` with the free tail filled in."""
        out = np.zeros(m)
        k = min(m, len(self.b))
        out[:k] = self.b[:k]
        return out

    @property
    def is_free(self):
        return self.support == 0

    def perturbation_norms(self):
        """(sup |a_n - 1|, sup |b_n|) over the stored prefix."""
        da = float(np.max(np.abs(self.a - 1.0))) if len(self.a) else 0.0
        db = float(np.max(np.abs(self.b))) if len(self.b) else 0.0
        return da, db

    def __eq__(self, other):
        if not isinstance(other, JacobiCoefficients):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))

    def __repr__(self):
        return f"JacobiCoefficients(a={self.a.tolist()}, b={self.b.tolist()})"


def strip(coeffs, n):
    """Remove the first ``n`` rows and columns.

    ``strip(J, n)`` has coefficients ``a_k -> a_{k+n}``, ``b_k -> b_{k+n}``;
    ``n`` may exceed the support, in which case the result is free.
    """
    if n < 0:
        raise ValueError("strip count must be nonnegative")
    if n == 0:
        return coeffs
    return JacobiCoefficients(coeffs.a[n:], coeffs.b[n:])


def truncate_to_free(coeffs, n):
    """Replace ``a_j`` by 1 for ``j >= n`` and ``b_j`` by 0 for ``j >= n+1``.

    Keeps ``b_1..b_n`` and ``a_1..a_{n-1}``; satisfies
    ``strip(truncate_to_free(J, n), n) == free``.
    """
    if n < 1:
        raise ValueError("truncation index must be positive")
    return JacobiCoefficients(coeffs.a[: n - 1], coeffs.b[:n])


def differences(coeffs):
    """Forward differences ``(a_{n+1} - a_n, b_{n+1} - b_n)`` for n = 1..N.

    The entry at n = N uses the free tail values.  Returns a pair of arrays
    of length ``support``; both are empty for the free matrix.
    """
    n = coeffs.support
    a = coeffs.a_padded(n + 1)
    b = coeffs.b_padded(n + 1)
    return np.diff(a), np.diff(b)


def r_sequence(coeffs):
    """The quartic combination driving the divergence dichotomy.

    For each n, ``r_n = b_n^4 - 2 (db_n)^2 - 8 (da_n)^2
    + 4 (a_n^2 - 1)(b_n^2 + b_n b_{n+1} + b_{n+1}^2)`` with ``da, db`` the
    forward differences.  Entries for n = 1..N+1 are returned; all later
    ones vanish identically.
    """
    n = coeffs.support
    a = coeffs.a_padded(n + 2)
    b = coeffs.b_padded(n + 2)
    bn = b[: n + 1]
    bn1 = b[1: n + 2]
    an = a[: n + 1]
    da = np.diff(a)
    db = bn1 - bn
    return bn**4 - 2 * db**2 - 8 * da**2 + 4 * (an**2 - 1) * (bn**2 + bn * bn1 + bn1**2)


_FAMILY_KINDS = ("explicit", "power", "oscillatory")


@dataclass(frozen=True)
class CoefficientFamily:
    """A parametrized family of decaying coefficients.

    ``power`` gives ``a_n = 1 + alpha_a / n^gamma_a``,
    ``b_n = alpha_b / n^gamma_b``; ``oscillatory`` modulates both by
    ``cos(mu * n)``.  ``explicit`` wraps a fixed ``JacobiCoefficients`` so
    finite matrices can flow through the horizon-scan machinery unchanged.

    ``materialize(N)`` yields the horizon-N truncation; prefixes are
    consistent across horizons by construction.
    """

    kind: str
    coeffs: JacobiCoefficients = None
    alpha_a: float = 0.0
    gamma_a: float = 1.0
    alpha_b: float = 0.0
    gamma_b: float = 1.0
    mu: float = None
    horizon_max: int = 2**22

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "explicit":
            if self.coeffs is None:
                raise ValueError("explicit family requires coefficients")
        elif self.kind == "oscillatory":
            if self.mu is None:
                raise ValueError("oscillatory family requires a frequency mu")

    @classmethod
    def explicit(cls, coeffs):
        return cls(kind="explicit", coeffs=coeffs)

    def materialize(self, horizon):
        """The horizon-``N`` truncation as explicit coefficients.

        Raises ``ValueError`` if any materialized ``a_n`` is nonpositive or
        the horizon exceeds ``horizon_max``.
        """
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if horizon > self.horizon_max:
            raise ValueError(f"horizon {horizon} exceeds horizon_max {self.horizon_max}")
        if self.kind == "explicit":
            n = min(horizon, self.coeffs.support)
            return JacobiCoefficients(self.coeffs.a[: n], self.coeffs.b[: n])
        n = np.arange(1, horizon + 1, dtype=float)
        osc = np.cos(self.mu * n) if self.kind == "oscillatory" else 1.0
        a = 1.0 + self.alpha_a * osc / n**self.gamma_a
        b = self.alpha_b * osc / n**self.gamma_b
        if np.any(a <= 0.0):
            bad = int(np.argmax(a <= 0.0)) + 1
            raise ValueError(f"family produces a_{bad} <= 0; not a Jacobi matrix")
        return JacobiCoefficients(a, b)
