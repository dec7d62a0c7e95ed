"""Principal branch of the Lambert W function for real arguments."""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_BRANCH = -1.0 / math.e


def _initial_guess(x: float) -> float:
    if x < -0.25:
        # series about the branch point in p = sqrt(2 (e x + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    if x < 3.0:
        return math.log1p(x) * (1.0 - 0.25 * math.log1p(x) / (1.0 + math.log1p(x)))
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x: float) -> float:
    """Solve w e^w = x for w >= -1 by Halley iteration.

    Raises:
        DomainError: for x < -1/e.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("Lambert W of NaN")
    if x < _BRANCH:
        # tolerate round-off right at the branch point
        if x < _BRANCH * (1 + 1e-15):
            raise DomainError(f"Lambert W0 undefined for x = {x} < -1/e")
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = _initial_guess(x)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


lambert_w0_array = np.vectorize(lambert_w0, otypes=[float])
