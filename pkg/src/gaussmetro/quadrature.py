"""Adaptive Gauss-Legendre quadrature by interval bisection."""
from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(12)
# panels whose two estimates agree to a few ulps cannot be improved further
_ROUNDOFF = 64 * np.finfo(float).eps


def _panel(func, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * np.dot(_WEIGHTS, func(mid + half * _NODES))


def adaptive_gauss_legendre(func, a: float, b: float, abs_tol: float = 1e-12,
                            rel_tol: float = 1e-14, max_depth: int = 40):
    """Integrate a vectorised ``func`` over [a, b].

    A panel is accepted when the 12-point rule on the whole panel agrees with
    the sum over its two halves to within the local tolerance; otherwise both
    halves are refined with half the tolerance. ``func`` may be complex-valued.
    The effective tolerance is ``max(abs_tol, rel_tol * |I|)`` so that large
    integrals do not chase digits below double precision; a panel is also
    accepted once the disagreement is at the roundoff level of its value.

    Raises:
        QuadratureFailure: if some panel still fails at ``max_depth``.
    """
    if b == a:
        return 0.0
    whole = _panel(func, a, b)
    tol = max(abs_tol, rel_tol * abs(whole))
    # stack of (a, b, estimate, tolerance, depth)
    stack = [(a, b, whole, tol, 0)]
    total = 0.0
    while stack:
        lo, hi, est, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(func, lo, mid)
        right = _panel(func, mid, hi)
        if abs(left + right - est) <= max(tol, _ROUNDOFF * (abs(left) + abs(right))):
            total += left + right
        elif depth >= max_depth:
            raise QuadratureFailure(
                f"no convergence on [{lo}, {hi}] after {max_depth} bisections")
        else:
            stack.append((lo, mid, left, 0.5 * tol, depth + 1))
            stack.append((mid, hi, right, 0.5 * tol, depth + 1))
    return total
