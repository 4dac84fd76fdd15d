"""Spectral-measure side: m-function, a.c. density, Z_w and Szego integrals.

The Weyl m-function of the delta_1 vector is computed by exact backward
coefficient stripping onto the free tail,

    m_N = m_free,   m_j = 1 / (b_{j+1} - z - a_{j+1}^2 m_{j+1}),

which needs no eta -> 0 limit because the tail is exactly free.  Boundary
values on (-2, 2) use the Herglotz convention: the upper half-plane maps
into the upper half-plane, ``m(z) ~ -1/z`` at infinity, and
``pi mu'(x) = Im m(x + i0)``.

The Z_w integrand is evaluated in three overlapping parametrizations (the
angle theta in the middle, the exact distance to each endpoint near 0 and
pi) so that adaptive refinement near the band edges never suffers
cancellation in reconstructing the distance to the edge.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coefficients import JacobiCoefficients
from .errors import DomainError, NonpositiveDensityError
from .quadrature import QuadratureResult, adaptive_panels
from .weights import eq211

_SEGMENT_EDGE = 0.7   # theta width handed to the endpoint-substituted segments

#: density values at or below this are treated as a positivity violation
_DENSITY_FLOOR = 1e-300


def m_free(z, boundary=False):
    """Stieltjes transform of the free measure, ``m(z) ~ -1/z`` at infinity.

    With ``boundary=True``, ``z`` must be real in (-2, 2) and the upper
    boundary value ``(-x + i sqrt(4 - x^2)) / 2`` is returned.
    """
    if boundary:
        x = np.asarray(z, dtype=float)
        if np.any(np.abs(x) >= 2.0):
            raise DomainError("boundary values exist only for x in (-2, 2)")
        out = (-x + 1j * np.sqrt(4.0 - x * x)) / 2.0
        return complex(out) if np.ndim(z) == 0 else out
    zc = np.asarray(z, dtype=complex)
    if np.any((zc.imag == 0.0) & (np.abs(zc.real) <= 2.0)):
        raise DomainError("z on [-2, 2] requires the boundary flag")
    root = np.sqrt(zc - 2.0) * np.sqrt(zc + 2.0)
    out = (-zc + root) / 2.0
    return complex(out) if np.ndim(z) == 0 else out


def _strip_down(a, b, z, m_tail):
    """Backward coefficient stripping from the free tail; vectorized in z."""
    m = m_tail
    for j in range(len(b) - 1, -1, -1):
        aj = a[j] if j < len(a) else 1.0
        m = 1.0 / (b[j] - z - aj * aj * m)
    return m


def boundary_m(coeffs, x):
    """m(x + i0) for x in (-2, 2), exact via the free-tail closure."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) >= 2.0):
        raise DomainError("the a.c. density lives on (-2, 2)")
    n = coeffs.support
    m0 = (-x_arr + 1j * np.sqrt(4.0 - x_arr * x_arr)) / 2.0
    m = _strip_down(coeffs.a_padded(n), coeffs.b_padded(n), x_arr, m0)
    return complex(m) if np.ndim(x) == 0 else m


def density(coeffs, x):
    """The a.c. spectral density mu'(x) = Im m(x + i0) / pi on (-2, 2).

    Raises ``NonpositiveDensityError`` if the value is not strictly
    positive, which for an eventually-free matrix signals a bug or a
    band-edge resonance pathology rather than a legitimate result.
    """
    m = boundary_m(coeffs, x)
    mu = np.asarray(np.imag(m)) / math.pi
    if np.any(mu <= _DENSITY_FLOOR):
        raise NonpositiveDensityError(
            f"mu'(x) <= 0 at x = {np.asarray(x)[np.asarray(mu) <= _DENSITY_FLOOR]}")
    return float(mu) if np.ndim(x) == 0 else mu


def free_density(x):
    """mu_0'(x) = sqrt(4 - x^2) / (2 pi) on (-2, 2)."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) >= 2.0):
        raise DomainError("the a.c. density lives on (-2, 2)")
    out = np.sqrt(4.0 - x_arr * x_arr) / (2.0 * math.pi)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class DensityEvaluator:
    """Callable wrapper around ``density`` with the branch convention pinned.

    The branch descriptor records the Herglotz convention used throughout:
    boundary values are taken from the upper half-plane.
    """

    source: JacobiCoefficients
    branch: str = "upper half-plane boundary values (Herglotz)"

    def __call__(self, x):
        return density(self.source, x)

    def log_ratio(self, theta):
        """ln(pi mu'(2 cos theta) / sin theta) for theta in (0, pi)."""
        theta = np.asarray(theta, dtype=float)
        n = self.source.support
        a = self.source.a_padded(n)
        b = self.source.b_padded(n)
        m = _strip_down(a, b, 2.0 * np.cos(theta), -np.exp(-1j * theta))
        return _log_positive_ratio(m.imag / np.sin(theta), theta)


def _log_positive_ratio(ratio, where):
    if np.any(ratio <= _DENSITY_FLOOR):
        raise NonpositiveDensityError(
            f"pi mu' / sin theta <= 0 near theta = "
            f"{np.asarray(where)[np.asarray(ratio) <= _DENSITY_FLOOR]}")
    return np.log(ratio)


def _zw_integrands(coeffs, weight):
    """Three stable parametrizations of ln(pi mu'/sin theta) * w(theta).

    Middle: theta itself.  Left: t = theta passed as the exact offset from
    0.  Right: u = pi - theta passed as the exact offset from pi, where
    ``x = -2 cos u`` and the free boundary value is ``exp(i u)``.  The
    substituted segments receive s with theta-offset s^2 and carry the
    Jacobian 2s.
    """
    n = coeffs.support
    a = coeffs.a_padded(n)
    b = coeffs.b_padded(n)

    def middle(theta):
        m = _strip_down(a, b, 2.0 * np.cos(theta), -np.exp(-1j * theta))
        ratio = _log_positive_ratio(m.imag / np.sin(theta), theta)
        return ratio * weight.evaluate(theta)

    def left(s):
        t = s * s
        m = _strip_down(a, b, 2.0 * np.cos(t), -np.exp(-1j * t))
        ratio = _log_positive_ratio(m.imag / np.sin(t), t)
        return ratio * weight.evaluate(t) * 2.0 * s

    def right(s):
        u = s * s
        m = _strip_down(a, b, -2.0 * np.cos(u), np.exp(1j * u))
        ratio = _log_positive_ratio(m.imag / np.sin(u), u)
        return ratio * weight.evaluate_reflected(u) * 2.0 * s

    return left, middle, right


def z_w_result(coeffs, weight, tol=1e-10, *, max_evaluations=6_000_000):
    """Z_w(J) with its quadrature error estimate and evaluation count."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    left, middle, right = _zw_integrands(coeffs, weight)
    budget = 2.0 * math.pi * tol / 3.0
    r_left = adaptive_panels(left, 0.0, math.sqrt(_SEGMENT_EDGE), budget,
                             max_evaluations=max_evaluations // 3)
    r_mid = adaptive_panels(middle, _SEGMENT_EDGE, math.pi - _SEGMENT_EDGE,
                            budget, max_evaluations=max_evaluations // 3)
    r_right = adaptive_panels(right, 0.0, math.sqrt(_SEGMENT_EDGE), budget,
                              max_evaluations=max_evaluations // 3)
    total = r_left + r_mid + r_right
    return QuadratureResult(-total.value / (2.0 * math.pi),
                            total.error_estimate / (2.0 * math.pi),
                            total.evaluations)


def z_w(coeffs, weight, tol=1e-10, *, max_evaluations=6_000_000):
    """The relative-entropy functional Z_w(J) to absolute tolerance tol."""
    return z_w_result(coeffs, weight, tol, max_evaluations=max_evaluations).value


def _szego_direct_integrands(coeffs):
    """ln(mu'(x)) (4 - x^2)^{3/2} in stable x-parametrizations."""
    n = coeffs.support
    a = coeffs.a_padded(n)
    b = coeffs.b_padded(n)

    def mu_at(x, root):
        m = _strip_down(a, b, x, (-x + 1j * root) / 2.0)
        mu = m.imag / math.pi
        if np.any(mu <= _DENSITY_FLOOR):
            raise NonpositiveDensityError("mu' <= 0 inside (-2, 2)")
        return mu

    def middle(x):
        root = np.sqrt(4.0 - x * x)
        return np.log(mu_at(x, root)) * root**3

    def edge(s, sign):
        # x = sign*(2 - s^2); 4 - x^2 = s^2 (4 - s^2) exactly in s
        x = sign * (2.0 - s * s)
        root = s * np.sqrt(4.0 - s * s)
        return np.log(mu_at(x, root)) * root**3 * 2.0 * s

    return middle, edge


def szego_integral_32_direct(coeffs, tol=1e-10):
    """Direct quadrature of the integral of ln(mu') (4 - x^2)^{3/2} over (-2, 2)."""
    middle, edge = _szego_direct_integrands(coeffs)
    cut = 0.49
    r_left = adaptive_panels(lambda s: edge(s, -1.0), 0.0, math.sqrt(cut),
                             tol / 3.0)
    r_mid = adaptive_panels(middle, -2.0 + cut, 2.0 - cut, tol / 3.0)
    r_right = adaptive_panels(lambda s: edge(s, 1.0), 0.0, math.sqrt(cut),
                              tol / 3.0)
    return (r_left + r_mid + r_right).value


@lru_cache(maxsize=8)
def _free_szego_constant(tol):
    return szego_integral_32_direct(JacobiCoefficients.free(), tol)


def szego_integral_32(coeffs, tol=1e-10):
    """The Szego-type integral with weight (4 - x^2)^{3/2}, via Z_w.

    Uses the identity with the quartic weight: the integral equals
    ``K0 - 4 pi Z_w(J)`` where ``K0`` is the free-matrix value (computed
    once by quadrature).  ``szego_integral_32_direct`` provides the
    independent route and must agree within tolerances.
    """
    z = z_w(coeffs, eq211(), tol / (8.0 * math.pi))
    return _free_szego_constant(tol) - 4.0 * math.pi * z
