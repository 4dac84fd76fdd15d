import numpy as np
import pytest

from jacobi_sumrules import TrigWeight, eq211, named_weight, one_minus_cos, one_plus_cos
from jacobi_sumrules.errors import InvalidWeightError


def test_named_coefficients():
    assert eq211().c == (3.0, 0.0, -4.0, 0.0, 1.0)
    assert one_plus_cos().c == (1.0, 1.0)
    assert one_minus_cos().c == (1.0, -1.0)
    assert named_weight("eq211") == eq211()


def test_unknown_name_raises():
    with pytest.raises(InvalidWeightError):
        named_weight("parabolic")


def test_nonnegativity_contract():
    with pytest.raises(InvalidWeightError):
        TrigWeight((0.0, 1.0))           # cos(theta) < 0 on (pi/2, pi)
    with pytest.raises(InvalidWeightError):
        TrigWeight((1.0, 0.0, -1.5))


def test_quartic_weight_square_identity():
    # 3 - 4 cos(2t) + cos(4t) = 2 (1 - cos 2t)^2 pointwise
    theta = np.linspace(0.0, np.pi, 2001)
    w = eq211().evaluate(theta)
    assert np.allclose(w, 2.0 * (1.0 - np.cos(2 * theta)) ** 2, atol=1e-12)
    assert np.min(w) >= -1e-12


def test_quartic_weight_chebyshev_combination():
    # sum c_l T_l(x/2) = (4 - x^2)^2 / 2 on the band
    x = np.linspace(-1.999, 1.999, 1001)
    assert np.allclose(eq211().chebyshev_combination(x),
                       0.5 * (4.0 - x * x) ** 2, atol=1e-10)


def test_reflected_evaluation_matches():
    w = eq211()
    u = np.linspace(0.0, 0.5, 101)
    assert np.allclose(w.evaluate_reflected(u), w.evaluate(np.pi - u),
                       atol=1e-13)
    wm = one_minus_cos()
    assert np.allclose(wm.evaluate_reflected(u), wm.evaluate(np.pi - u),
                       atol=1e-13)


def test_degree_and_validation():
    assert eq211().degree == 4
    assert one_plus_cos().degree == 1
    with pytest.raises(InvalidWeightError):
        TrigWeight(())
