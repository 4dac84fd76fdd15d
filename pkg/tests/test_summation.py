import math

import numpy as np

from jacobi_sumrules.summation import exact_sum, neumaier_cumsum


def test_cumsum_matches_fsum_prefixes():
    rng = np.random.default_rng(7)
    values = rng.uniform(-1, 1, 200) * 10.0 ** rng.integers(-12, 12, 200)
    prefix = neumaier_cumsum(values)
    for i in (0, 1, 57, 199):
        assert prefix[i] == math.fsum(values[: i + 1])


def test_cumsum_cancellation():
    values = [1.0, 1e100, 1.0, -1e100]
    assert neumaier_cumsum(values)[-1] == 2.0


def test_exact_sum():
    assert exact_sum([0.1] * 10) == math.fsum([0.1] * 10)
    assert exact_sum([]) == 0.0


def test_exact_cancellation_to_zero():
    assert neumaier_cumsum([-0.125, 0.125])[-1] == 0.0
