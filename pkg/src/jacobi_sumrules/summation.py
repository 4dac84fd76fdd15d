"""Compensated (Neumaier) summation helpers.

Partial sums are first-class outputs of the trace and diagnostic code, so
they must be reproducible and immune to naive cancellation.  Totals use
``math.fsum``; running prefixes use a Neumaier accumulator.
"""

import math

import numpy as np


def neumaier_cumsum(values):
    """Compensated prefix sums of a 1-d sequence, in index order.

    Returns an array ``out`` with ``out[i] = sum(values[:i+1])`` where each
    prefix is accumulated with a Neumaier carry, so the result does not
    depend on how intermediate rounding would fall in a naive loop.
    """
    arr = np.asarray(values, dtype=float)
    out = np.empty(arr.shape[0])
    s = 0.0
    carry = 0.0
    for i, v in enumerate(arr):
        t = s + v
        if abs(s) >= abs(v):
            carry += (s - t) + v
        else:
            carry += (v - t) + s
        s = t
        out[i] = s + carry
    return out


def exact_sum(values):
    """Accurately rounded total via ``math.fsum``."""
    return math.fsum(float(v) for v in values)
