"""Single-mode Gaussian states described by first and second moments.

Quadratures follow x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2), so the
vacuum covariance matrix is I/2 and a displacement alpha maps to
dbar = sqrt(2) * (Re alpha, Im alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NonPhysicalState

#: absolute tolerance on det(sigma) - 1/4
HEISENBERG_TOL = 1e-12


@dataclass(frozen=True)
class GaussianState:
    """First moments and covariance matrix of one bosonic mode.

    The covariance matrix is kept as its three independent entries so it is
    symmetric by construction.
    """

    x: float
    p: float
    sxx: float
    sxp: float
    spp: float

    def __post_init__(self):
        vals = (self.x, self.p, self.sxx, self.sxp, self.spp)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParams(f"non-finite moments {vals}")
        if self.sxx <= 0 or self.spp <= 0 or self.sxx * self.spp - self.sxp**2 <= 0:
            raise NonPhysicalState("covariance matrix is not positive definite")

    @classmethod
    def from_arrays(cls, dbar, sigma) -> "GaussianState":
        dbar = np.asarray(dbar, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if dbar.shape != (2,) or sigma.shape != (2, 2):
            raise InvalidParams("expected a 2-vector and a 2x2 matrix")
        if abs(sigma[0, 1] - sigma[1, 0]) > 1e-12 * max(1.0, abs(sigma[0, 1])):
            raise InvalidParams("covariance matrix is not symmetric")
        return cls(float(dbar[0]), float(dbar[1]), float(sigma[0, 0]),
                   float(0.5 * (sigma[0, 1] + sigma[1, 0])), float(sigma[1, 1]))

    @property
    def dbar(self) -> np.ndarray:
        return np.array([self.x, self.p])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([[self.sxx, self.sxp], [self.sxp, self.spp]])

    @property
    def det(self) -> float:
        return self.sxx * self.spp - self.sxp**2


@dataclass(frozen=True)
class StateParams:
    """Displaced squeezed thermal state D(alpha0) S(r0 e^{2i psi}) rho_th(n0).

    ``psi`` is the angle of the anti-squeezed axis measured counter-clockwise
    from x; it is reduced modulo pi on construction.
    """

    alpha0: complex = 0j
    r0: float = 0.0
    psi: float = 0.0
    n0: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.r0) or not math.isfinite(self.psi):
            raise InvalidParams("r0 and psi must be finite")
        if not (self.n0 >= 0):
            raise InvalidParams(f"thermal occupation n0 must be >= 0, got {self.n0}")
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        object.__setattr__(self, "psi", float(self.psi) % math.pi)

    @classmethod
    def coherent(cls, alpha0: complex) -> "StateParams":
        return cls(alpha0=alpha0)

    @classmethod
    def squeezed_vacuum(cls, nbar: float, psi: float = 0.0) -> "StateParams":
        """Squeezed vacuum carrying ``nbar`` = sinh^2 r0 photons."""
        return cls(r0=math.asinh(math.sqrt(nbar)), psi=psi)


def squeezed_covariance(r0, psi, n0):
    """Entries (sxx, sxp, spp) of R(psi) diag((n0+1/2)e^{2r0}, (n0+1/2)e^{-2r0}) R(psi)^T.

    Accepts scalars or broadcastable arrays.
    """
    big = (n0 + 0.5) * np.exp(2 * r0)
    small = (n0 + 0.5) * np.exp(-2 * r0)
    c, s = np.cos(psi), np.sin(psi)
    sxx = c * c * big + s * s * small
    spp = s * s * big + c * c * small
    sxp = c * s * (big - small)
    return sxx, sxp, spp


def build_state(params: StateParams) -> GaussianState:
    """Moments of the state described by ``params``."""
    if params.n0 < 0:
        raise InvalidParams("n0 must be non-negative")
    sxx, sxp, spp = squeezed_covariance(params.r0, params.psi, params.n0)
    a = params.alpha0
    return GaussianState(math.sqrt(2) * a.real, math.sqrt(2) * a.imag,
                         float(sxx), float(sxp), float(spp))


def mean_photons(state: GaussianState) -> float:
    """Mean boson number <a^dag a> = (tr sigma + |dbar|^2 - 1) / 2."""
    return 0.5 * (state.sxx + state.spp) + 0.5 * (state.x**2 + state.p**2) - 0.5


def purity(state: GaussianState, tol: float = HEISENBERG_TOL) -> float:
    """Purity tr(rho^2) = 1 / (2 sqrt(det sigma))."""
    det = state.det
    if det < 0.25 - tol:
        raise NonPhysicalState(f"det(sigma) = {det!r} < 1/4")
    return 0.5 / math.sqrt(det)


def wigner_at(state: GaussianState, point):
    """Value of the Wigner function at phase-space point ``(x, p)``.

    ``point`` may hold arrays of equal shape, in which case an array is returned.
    """
    dx = point[0] - state.x
    dp = point[1] - state.p
    det = state.det
    # inverse of [[sxx, sxp], [sxp, spp]] contracted with (dx, dp)
    quad = (state.spp * dx * dx - 2 * state.sxp * dx * dp + state.sxx * dp * dp) / det
    return np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(det))
