"""General Gaussian dissipative channel driven by a squeezed-thermal reservoir.

The reservoir enters through the coefficients

    N = N_th (2 N_sq + 1) + N_sq,    M = (2 N_th + 1) sqrt(N_sq (N_sq + 1)) e^{i xi},

and the coupling follows the power law Gamma(t) = Gamma * t**beta. After time t
a state with moments (dbar0, Sigma0) is mapped to

    dbar  = sqrt(eta) R(phi) dbar0,
    Sigma = eta (R Sigma0 R^T - Sigma_N) + Sigma_N + Sigma_M,

with R(phi) = [[cos, sin], [-sin, cos]] (a clockwise rotation, alpha -> alpha e^{-i phi}),
Sigma_N = (N + 1/2) I and Sigma_M the reflection-like term built from eta*M*C.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .errors import InvalidParams, NonPhysicalOutput
from .quadrature import adaptive_gauss_legendre
from .state import GaussianState

#: math-module stand-in for numpy in the scalar hot paths
SCALAR_OPS = SimpleNamespace(cos=math.cos, sin=math.sin, sqrt=math.sqrt,
                             exp=math.exp, arccosh=math.acosh)

OUTPUT_DET_TOL = 1e-9


@dataclass(frozen=True)
class ReservoirSpec:
    n_th: float = 0.0
    n_sq: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        if not (self.n_th >= 0 and self.n_sq >= 0):
            raise InvalidParams("reservoir occupations must be non-negative")


@dataclass(frozen=True)
class ReservoirCoeffs:
    """Liouvillian coefficients N (real) and M (complex).

    ``n_th`` is carried along so the identity |M|^2 = N(N+1) - N_th(N_th+1)
    can be checked.
    """

    n_big: float
    m_big: complex
    n_th: float = 0.0

    @property
    def m_abs(self) -> float:
        return abs(self.m_big)

    @property
    def xi(self) -> float:
        return cmath.phase(self.m_big) if self.m_big != 0 else 0.0

    def identity_residual(self) -> float:
        """Relative violation of |M|^2 = N(N+1) - N_th(N_th+1)."""
        lhs = abs(self.m_big) ** 2
        rhs = self.n_big * (self.n_big + 1) - self.n_th * (self.n_th + 1)
        return abs(lhs - rhs) / max(1.0, abs(rhs))


@dataclass(frozen=True)
class DissipationProfile:
    """Coupling law Gamma(t) = gamma * t**beta."""

    gamma: float
    beta: int = 0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise InvalidParams("gamma must be non-negative")
        if int(self.beta) != self.beta or self.beta < 0:
            raise InvalidParams("beta must be a non-negative integer")
        object.__setattr__(self, "beta", int(self.beta))

    def rate(self, t):
        return self.gamma * np.power(t, self.beta)

    def time_for_eta(self, eta: float) -> float:
        """Interaction time at which the dissipation coefficient equals ``eta``."""
        if self.gamma == 0:
            raise InvalidParams("eta < 1 is unreachable without dissipation")
        k = self.beta + 1
        return (-k * math.log(eta) / self.gamma) ** (1.0 / k)


@dataclass(frozen=True)
class ChannelAtTime:
    """Channel parameters after a fixed interaction time.

    ``omega`` records the frequency at which ``c_int`` was evaluated; the
    identity eta*C = 1 - eta is only enforced when it is zero.
    """

    eta: float
    c_int: complex
    phi: float
    coeffs: ReservoirCoeffs
    omega: float = field(default=0.0)

    def __post_init__(self):
        if not (0 < self.eta <= 1):
            raise InvalidParams(f"eta must lie in (0, 1], got {self.eta}")
        if self.omega == 0 and abs(self.eta * self.c_int - (1 - self.eta)) > 1e-10:
            raise InvalidParams("eta*C must equal 1 - eta at omega = 0")

    @classmethod
    def markovian(cls, coeffs: ReservoirCoeffs, eta: float, phi: float = 0.0):
        """Channel parametrised directly by eta (C taken at omega = 0)."""
        return cls(eta=eta, c_int=(1 - eta) / eta, phi=phi, coeffs=coeffs)

    @property
    def mc(self) -> complex:
        """eta * M * C, which fixes the Sigma_M term."""
        return self.eta * self.coeffs.m_big * self.c_int

    def with_phi(self, phi: float) -> "ChannelAtTime":
        return ChannelAtTime(self.eta, self.c_int, phi, self.coeffs, self.omega)


def derive_coeffs(spec: ReservoirSpec) -> ReservoirCoeffs:
    n_big = spec.n_th * (2 * spec.n_sq + 1) + spec.n_sq
    m_big = ((2 * spec.n_th + 1) * math.sqrt(spec.n_sq * (spec.n_sq + 1))
             * cmath.exp(1j * spec.xi))
    return ReservoirCoeffs(n_big=n_big, m_big=m_big, n_th=spec.n_th)


def eta_at(profile: DissipationProfile, t: float) -> float:
    """exp(-int_0^t Gamma(s) ds) for the power-law profile."""
    if t < 0:
        raise InvalidParams("t must be non-negative")
    k = profile.beta + 1
    return math.exp(-profile.gamma * t**k / k)


def c_integral(profile: DissipationProfile, t: float, omega: float = 0.0,
               abs_tol: float = 1e-12) -> complex:
    """C = int_0^t exp(int_0^s Gamma) Gamma(s) e^{2 i omega s} ds."""
    if t < 0:
        raise InvalidParams("t must be non-negative")
    g, beta = profile.gamma, profile.beta
    if t == 0 or g == 0:
        return 0j
    k = beta + 1
    if omega == 0:
        # the integrand is the derivative of exp(int_0^s Gamma)
        return complex(math.expm1(g * t**k / k))
    if beta == 0:
        z = g + 2j * omega
        return g * (cmath.exp(z * t) - 1) / z

    def integrand(s):
        return np.exp(g * s**k / k + 2j * omega * s) * g * s**beta

    return complex(adaptive_gauss_legendre(integrand, 0.0, t, abs_tol=abs_tol))


def eta_c_integral(profile: DissipationProfile, t: float, omega: float = 0.0,
                   abs_tol: float = 1e-12) -> complex:
    """eta * C, i.e. int_0^t exp(-int_s^t Gamma) Gamma(s) e^{2 i omega s} ds.

    Bounded by 1 - eta, so it stays finite where C itself overflows.
    """
    if t < 0:
        raise InvalidParams("t must be non-negative")
    g, beta = profile.gamma, profile.beta
    if t == 0 or g == 0:
        return 0j
    k = beta + 1
    if omega == 0:
        return complex(-math.expm1(-g * t**k / k))
    if beta == 0:
        z = g + 2j * omega
        return g * (cmath.exp(2j * omega * t) - math.exp(-g * t)) / z

    def integrand(u):
        # in u = t - s: int_s^t Gamma = g u sum_j t^(k-1-j) s^j / k, free of
        # cancellation; below u_max the integrand is under e^-40 of its peak
        s = t - u
        poly = sum(t ** (k - 1 - j) * s**j for j in range(k))
        return np.exp(-g * u * poly / k + 2j * omega * s) * g * s**beta

    u_max = min(t, 40 * k / (g * t**beta))
    return complex(adaptive_gauss_legendre(integrand, 0.0, u_max, abs_tol=abs_tol))


def channel_at(coeffs: ReservoirCoeffs, profile: DissipationProfile, t: float,
               omega: float = 0.0, phi: float | None = None) -> ChannelAtTime:
    """Channel after time ``t``; ``phi`` defaults to the accumulated omega*t."""
    eta = eta_at(profile, t)
    c = c_integral(profile, t, omega)
    return ChannelAtTime(eta=eta, c_int=c, phi=omega * t if phi is None else phi,
                         coeffs=coeffs, omega=omega)


def channel_moments(x0, p0, sxx, sxp, spp, eta, n_big, mc_abs, mc_arg, phi, xp=np,
                    with_det=False, det0=None):
    """Output moments of the channel, elementwise over broadcastable inputs.

    ``mc_abs`` and ``mc_arg`` are modulus and phase of eta*M*C. Pass
    ``xp=SCALAR_OPS`` for plain-float inputs on hot paths. With ``with_det``
    the output determinant is appended, expanded as

        eta^2 det(Sigma0) + eta tr(adj(R Sigma0 R^T) B) + det(B),

    B being the added noise. Only the middle term depends on phi, so for
    strongly squeezed inputs phi-differences of the determinant do not suffer
    the cancellation in sxx*spp - sxp^2. ``det0`` supplies det(Sigma0) when it
    is known exactly, e.g. (n0 + 1/2)^2 for a squeezed thermal input.
    """
    c, s = xp.cos(phi), xp.sin(phi)
    root = xp.sqrt(eta)
    x = root * (c * x0 + s * p0)
    p = root * (-s * x0 + c * p0)
    rxx = c * c * sxx + 2 * c * s * sxp + s * s * spp
    rpp = s * s * sxx - 2 * c * s * sxp + c * c * spp
    rxp = c * s * (spp - sxx) + (c * c - s * s) * sxp
    bath = (1 - eta) * (n_big + 0.5)
    ang = mc_arg - 2 * phi
    mcos = mc_abs * xp.cos(ang)
    msin = mc_abs * xp.sin(ang)
    out = (x, p,
           eta * rxx + bath + mcos,
           eta * rxp + msin,
           eta * rpp + bath - mcos)
    if not with_det:
        return out
    if det0 is None:
        det0 = sxx * spp - sxp * sxp
    det = (eta * eta * det0
           + eta * (bath * (sxx + spp) + mcos * (rpp - rxx) - 2 * msin * rxp)
           + bath * bath - mc_abs * mc_abs)
    return out + (det,)


def apply_channel(state: GaussianState, ch: ChannelAtTime) -> GaussianState:
    mc = ch.mc
    x, p, sxx, sxp, spp = channel_moments(
        state.x, state.p, state.sxx, state.sxp, state.spp, ch.eta,
        ch.coeffs.n_big, abs(mc), cmath.phase(mc), ch.phi, xp=SCALAR_OPS)
    det = sxx * spp - sxp * sxp
    if det < 0.25 - OUTPUT_DET_TOL:
        raise NonPhysicalOutput(f"output det(sigma) = {det!r} < 1/4")
    return GaussianState(x, p, sxx, sxp, spp)
