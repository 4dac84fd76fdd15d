"""Nonnegative cosine-polynomial weights w(theta) = sum_l c_l cos(l theta)."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidWeightError

_GRID_POINTS = 4096
_SLACK = 1e-12


@dataclass(frozen=True)
class TrigWeight:
    """A cosine polynomial that must be nonnegative on [0, pi].

    Nonnegativity is grid-checked at construction (4096 points, slack
    ``1e-12 * sum |c_l|``); a violation raises ``InvalidWeightError``.
    """

    c: tuple
    degree: int = field(init=False)

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        if not c:
            raise InvalidWeightError("weight needs at least the constant coefficient")
        if not all(np.isfinite(c)):
            raise InvalidWeightError("weight coefficients must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "degree", len(c) - 1)
        scale = sum(abs(x) for x in c)
        theta = np.linspace(0.0, np.pi, _GRID_POINTS)
        if np.min(self.evaluate(theta)) < -_SLACK * max(scale, 1.0):
            raise InvalidWeightError(
                f"w(theta) dips below zero on [0, pi] (coefficients {c})")

    def evaluate(self, theta):
        """w(theta), vectorized."""
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.c[0])
        for ell in range(1, len(self.c)):
            out += self.c[ell] * np.cos(ell * theta)
        return out

    def evaluate_reflected(self, u):
        """w(pi - u), vectorized; exact in the distance-to-pi variable."""
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, self.c[0])
        for ell in range(1, len(self.c)):
            out += self.c[ell] * (-1.0) ** ell * np.cos(ell * u)
        return out

    def chebyshev_combination(self, x):
        """sum_l c_l T_l(x/2) as a scalar function on [-2, 2]."""
        x = np.asarray(x, dtype=float)
        return self.evaluate(np.arccos(np.clip(x / 2.0, -1.0, 1.0)))

    def __repr__(self):
        return f"TrigWeight(c={self.c})"


def eq211():
    """3 - 4 cos(2 theta) + cos(4 theta) = 2 (1 - cos 2 theta)^2."""
    return TrigWeight((3.0, 0.0, -4.0, 0.0, 1.0))


def one_plus_cos():
    return TrigWeight((1.0, 1.0))


def one_minus_cos():
    return TrigWeight((1.0, -1.0))


_NAMED = {
    "eq211": eq211,
    "one_plus_cos": one_plus_cos,
    "one_minus_cos": one_minus_cos,
}


def named_weight(name):
    """Look up a named weight; raises InvalidWeightError for unknown names."""
    try:
        return _NAMED[name]()
    except KeyError:
        raise InvalidWeightError(
            f"unknown weight {name!r}; known: {sorted(_NAMED)}") from None
