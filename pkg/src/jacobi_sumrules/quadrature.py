"""Adaptive panel quadrature with batched vectorized evaluation.

The integrator bisects Gauss-Legendre panels, accepting a panel when the
parent-versus-children discrepancy falls below its share of the error
budget or below the floating-point noise floor of the panel.  Panels from
every refinement round are evaluated in a single call to the (vectorized)
integrand, and the accepted contributions are accumulated in positional
order with ``math.fsum``, so results are deterministic.

Integrable endpoint singularities (logarithms, half-powers) are handled by
the callers via a square-root change of variable: they pass an integrand
already written in the substituted variable, which keeps the evaluation
numerically stable arbitrarily close to the endpoint.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __add__(self, other):
        return QuadratureResult(self.value + other.value,
                                self.error_estimate + other.error_estimate,
                                self.evaluations + other.evaluations)


def adaptive_panels(f, a, b, tol, *, nodes=15, max_rounds=64,
                    max_evaluations=6_000_000):
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    ``f`` must accept a 1-d ndarray and return one.  Raises
    ``QuadratureError`` (carrying the best value and achieved estimate) if
    the evaluation budget runs out before the tolerance is met.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if b <= a:
        raise ValueError("integration interval must have positive length")
    x0, w0 = _gauss_legendre(nodes)

    def panel_values(lows, highs):
        mid = 0.5 * (lows + highs)[:, None]
        half = 0.5 * (highs - lows)[:, None]
        pts = mid + half * x0[None, :]
        fv = f(pts.ravel()).reshape(pts.shape)
        vals = (fv * w0[None, :]).sum(axis=1) * half[:, 0]
        mags = (np.abs(fv) * w0[None, :]).sum(axis=1) * half[:, 0]
        return vals, mags

    width = b - a
    lows = np.array([a])
    highs = np.array([b])
    parents, _ = panel_values(lows, highs)
    accepted = []
    accepted_err = 0.0
    evaluations = nodes

    for _ in range(max_rounds):
        if len(lows) == 0:
            break
        mids = 0.5 * (lows + highs)
        lo2 = np.concatenate([lows, mids])
        hi2 = np.concatenate([mids, highs])
        vals2, mags2 = panel_values(lo2, hi2)
        evaluations += 2 * len(lows) * nodes
        npanel = len(lows)
        child_sum = vals2[:npanel] + vals2[npanel:]
        child_mag = mags2[:npanel] + mags2[npanel:]
        err = np.abs(parents - child_sum)
        if not np.all(np.isfinite(err)):
            bad = ~np.isfinite(err)
            raise QuadratureError(
                f"non-finite integrand near x = {lows[bad][0]!r}")
        total_open = float(np.sum(err))
        if accepted_err + total_open <= tol:
            # everything remaining is already within the global budget
            accepted.extend(zip(lows, child_sum))
            accepted_err += total_open
            lows = lows[:0]
            break
        budget = np.maximum(0.5 * tol * (highs - lows) / width,
                            64.0 * _EPS * child_mag)
        done = err <= budget
        for i in np.nonzero(done)[0]:
            accepted.append((lows[i], child_sum[i]))
            accepted_err += float(err[i])
        keep = ~done
        lows = np.concatenate([lo2[:npanel][keep], lo2[npanel:][keep]])
        highs = np.concatenate([hi2[:npanel][keep], hi2[npanel:][keep]])
        parents = np.concatenate([vals2[:npanel][keep], vals2[npanel:][keep]])
        if evaluations > max_evaluations:
            break

    if len(lows):
        accepted.extend(zip(lows, parents))
        accepted.sort(key=lambda t: t[0])
        value = math.fsum(v for _, v in accepted)
        achieved = accepted_err + total_open
        raise QuadratureError(
            f"quadrature did not converge to {tol:g} "
            f"(achieved error estimate {achieved:g} with {evaluations} evaluations)",
            value=value, error_estimate=achieved, evaluations=evaluations)

    accepted.sort(key=lambda t: t[0])
    value = math.fsum(v for _, v in accepted)
    return QuadratureResult(value, accepted_err, evaluations)


def integrate_with_endpoint_substitution(f, a, b, tol, *, nodes=15,
                                         max_evaluations=6_000_000):
    """Integrate ``f`` over [a, b] mapping both endpoints through theta = s^2.

    Splits at the midpoint and substitutes ``x = a + s^2`` on the left half
    and ``x = b - s^2`` on the right half, which tames integrable log and
    half-power endpoint singularities.  Use only when ``f`` is cheap to
    evaluate in the original variable; callers with cancellation-sensitive
    integrands should substitute themselves and call ``adaptive_panels``.
    """
    mid = 0.5 * (a + b)

    def left(s):
        return f(a + s * s) * 2.0 * s

    def right(s):
        return f(b - s * s) * 2.0 * s

    rl = adaptive_panels(left, 0.0, math.sqrt(mid - a), tol / 2,
                         nodes=nodes, max_evaluations=max_evaluations // 2)
    rr = adaptive_panels(right, 0.0, math.sqrt(b - mid), tol / 2,
                         nodes=nodes, max_evaluations=max_evaluations // 2)
    return rl + rr
