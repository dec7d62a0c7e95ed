"""Quantum Fisher information of single-mode Gaussian states.

For moments (dbar, Sigma) depending on a parameter theta,

    F = tr[(Sigma^-1 Sigma')^2] / (2 (1 + mu^2)) + 2 mu'^2 / (1 - mu^4)
        + dbar'^T Sigma^-1 dbar',

with mu = 1 / (2 sqrt(det Sigma)) the purity. Parameter derivatives of the
channel output are taken by central differences with one Richardson step.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channel import (SCALAR_OPS, ChannelAtTime, DissipationProfile,
                      ReservoirCoeffs, channel_at, channel_moments, eta_at,
                      eta_c_integral)
from .errors import DomainError, PurityDerivativeSingular
from .state import GaussianState, StateParams, build_state, squeezed_covariance

FD_STEP = 1e-5
PURE_GAP = 1e-9
PURE_DMU = 1e-7
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class ParamDerivatives:
    d_x: float
    d_p: float
    d_sxx: float
    d_sxp: float
    d_spp: float
    d_mu: float
    step: float

    @property
    def d_dbar(self) -> np.ndarray:
        return np.array([self.d_x, self.d_p])

    @property
    def d_sigma(self) -> np.ndarray:
        return np.array([[self.d_sxx, self.d_sxp], [self.d_sxp, self.d_spp]])


@dataclass(frozen=True)
class QfiResult:
    value: float
    parameter: str = "phase"
    at_point: float = 0.0
    method: str = "gaussian_formula"

    def __post_init__(self):
        if self.parameter not in ("phase", "frequency"):
            raise ValueError(f"unknown parameter {self.parameter!r}")
        if self.method not in ("gaussian_formula", "exact_pure", "fock_oracle"):
            raise ValueError(f"unknown method {self.method!r}")
        if -CLAMP_TOL <= self.value < 0:
            object.__setattr__(self, "value", 0.0)


def qfi_terms(sxx, sxp, spp, dx, dp, dsxx, dsxp, dspp, dmu, xp=np, det=None):
    """Evaluate the Gaussian QFI elementwise.

    The purity term is dropped for numerically pure states (1 - mu^4 < 1e-9)
    provided |mu'| < 1e-7; a larger mu' there raises PurityDerivativeSingular.
    ``det`` overrides det(Sigma) when a more accurate value is available.
    """
    if det is None:
        det = sxx * spp - sxp * sxp
    ixx, ixp, ipp = spp / det, -sxp / det, sxx / det
    a11 = ixx * dsxx + ixp * dsxp
    a12 = ixx * dsxp + ixp * dspp
    a21 = ixp * dsxx + ipp * dsxp
    a22 = ixp * dsxp + ipp * dspp
    mu2 = 0.25 / det
    shape_term = 0.5 * (a11 * a11 + 2 * a12 * a21 + a22 * a22) / (1 + mu2)
    disp_term = dx * (ixx * dx + ixp * dp) + dp * (ixp * dx + ipp * dp)
    gap = 1 - mu2 * mu2
    if xp is np:
        pure = gap < PURE_GAP
        if np.any(pure & (np.abs(dmu) >= PURE_DMU)):
            raise PurityDerivativeSingular("mu' does not vanish for a pure state")
        purity_term = np.where(pure, 0.0, 2 * dmu * dmu / np.where(pure, 1.0, gap))
    elif gap < PURE_GAP:
        if abs(dmu) >= PURE_DMU:
            raise PurityDerivativeSingular("mu' does not vanish for a pure state")
        purity_term = 0.0
    else:
        purity_term = 2 * dmu * dmu / gap
    return shape_term + purity_term + disp_term


def _with_purity(moments, xp):
    x, p, sxx, sxp, spp, det = moments
    return x, p, sxx, sxp, spp, 0.5 / xp.sqrt(det)


def richardson_derivative(func, at, step):
    """Derivative of a tuple-valued ``func`` by central differences at h and h/2.

    Combining the two differences as (4 D(h/2) - D(h)) / 3 cancels the h^2
    error term.
    """
    def central(h):
        hi, lo = func(at + h), func(at - h)
        return [(u - v) / (2 * h) for u, v in zip(hi, lo)]

    coarse = central(step)
    fine = central(0.5 * step)
    return [(4 * f - c) / 3 for f, c in zip(fine, coarse)]


def phase_qfi_arrays(x0, p0, sxx, sxp, spp, eta, n_big, mc_abs, mc_arg,
                     phi0=0.0, step=FD_STEP, xp=np, det0=None, axis=0.0):
    """Phase QFI at ``phi0`` for input moments given as arrays (or floats).

    ``det0`` is the input determinant if known exactly (see channel_moments).
    ``axis`` = psi declares that the moments are given in a frame rotated by
    psi, e.g. the input's own squeezing frame; the reservoir angle is shifted
    by -2 psi to match. The QFI does not depend on the frame, but highly
    squeezed inputs are only well conditioned in their own.
    """
    mc_arg = mc_arg - 2 * axis

    def moments(phi):
        return channel_moments(x0, p0, sxx, sxp, spp, eta, n_big, mc_abs, mc_arg, phi,
                               xp=xp, with_det=True, det0=det0)

    d = richardson_derivative(lambda phi: _with_purity(moments(phi), xp), phi0, step)
    _, _, oxx, oxp, opp, det = moments(phi0)
    return qfi_terms(oxx, oxp, opp, *d, xp=xp, det=det)


def _as_state(state_or_params) -> GaussianState:
    if isinstance(state_or_params, StateParams):
        return build_state(state_or_params)
    return state_or_params


def aligned_input(state_or_params):
    """Input moments in the frame of the squeezing axis.

    Returns (x0, p0, sxx, sxp, spp, det0, axis). For StateParams the frame is
    rotated by psi so the covariance is diagonal and det0 = (n0 + 1/2)^2 is
    exact; a GaussianState is passed through unchanged (axis 0, det0 None).
    """
    if isinstance(state_or_params, StateParams):
        prm = state_or_params
        sxx, _, spp = squeezed_covariance(prm.r0, 0.0, prm.n0)
        a = prm.alpha0 * cmath.exp(-1j * prm.psi)
        return (math.sqrt(2) * a.real, math.sqrt(2) * a.imag, float(sxx), 0.0,
                float(spp), (prm.n0 + 0.5) ** 2, prm.psi)
    st = state_or_params
    return st.x, st.p, st.sxx, st.sxp, st.spp, None, 0.0


def phase_derivatives(state, channel: ChannelAtTime, phi0: float = 0.0,
                      step: float = FD_STEP) -> ParamDerivatives:
    """Derivatives of the channel output moments and purity with respect to phi.

    ``state`` is a GaussianState or StateParams; C is held at the value stored
    in ``channel`` and only the explicit phi dependence is differentiated.
    """
    st = _as_state(state)
    mc = channel.mc

    def moments(phi):
        return _with_purity(channel_moments(
            st.x, st.p, st.sxx, st.sxp, st.spp, channel.eta, channel.coeffs.n_big,
            abs(mc), cmath.phase(mc), phi, xp=SCALAR_OPS, with_det=True),
            SCALAR_OPS)

    d = richardson_derivative(moments, phi0, step)
    return ParamDerivatives(*d, step=step)


def qfi_gaussian(dbar, sigma, deriv: ParamDerivatives, parameter: str = "phase",
                 at_point: float = 0.0) -> QfiResult:
    sigma = np.asarray(sigma, dtype=float)
    value = qfi_terms(sigma[0, 0], 0.5 * (sigma[0, 1] + sigma[1, 0]), sigma[1, 1],
                      deriv.d_x, deriv.d_p, deriv.d_sxx, deriv.d_sxp, deriv.d_spp,
                      deriv.d_mu, xp=SCALAR_OPS)
    return QfiResult(float(value), parameter, at_point, "gaussian_formula")


def qfi_phase(state, channel: ChannelAtTime, phi0: float = 0.0,
              step: float = FD_STEP) -> QfiResult:
    """Phase QFI of ``state`` sent through ``channel`` around ``phi0``."""
    x0, p0, sxx, sxp, spp, det0, axis = aligned_input(state)
    mc = channel.mc
    value = phase_qfi_arrays(x0, p0, sxx, sxp, spp, channel.eta, channel.coeffs.n_big,
                             abs(mc), cmath.phase(mc), phi0, step, xp=SCALAR_OPS,
                             det0=det0, axis=axis)
    return QfiResult(float(value), "phase", phi0, "gaussian_formula")


def full_omega_kernel(coeffs: ReservoirCoeffs, profile: DissipationProfile,
                      t: float, step: float = FD_STEP):
    """Frequency QFI at omega = 0 with the omega dependence of C retained.

    Returns ``kernel(x0, p0, sxx, sxp, spp, det0=None, axis=0.0, xp=np)``
    evaluating F_omega for input moments (``det0`` and ``axis`` as in
    :func:`phase_qfi_arrays`). The rotation omega*t and eta*C(omega) are varied together;
    the four eta*C values needed by the finite differences are computed once.
    """
    if t <= 0:
        raise DomainError("interrogation time must be positive")
    eta = eta_at(profile, t)
    h = step / t
    offsets = (-1.0, -0.5, 0.0, 0.5, 1.0)
    table = {}
    for u in offsets:
        mc = coeffs.m_big * eta_c_integral(profile, t, u * h)
        table[u] = (abs(mc), cmath.phase(mc))

    def kernel(x0, p0, sxx, sxp, spp, det0=None, axis=0.0, xp=np):
        def moments(u):
            mc_abs, mc_arg = table[u]
            return channel_moments(x0, p0, sxx, sxp, spp, eta, coeffs.n_big, mc_abs,
                                   mc_arg - 2 * axis, u * h * t, xp=xp, with_det=True,
                                   det0=det0)

        # differentiate in the offset u = omega / h and rescale to derivatives
        # per unit of the accumulated phase omega*t; F_omega = t^2 F in those
        # units, and the pure-state threshold on mu' applies on the same scale
        # as for phase estimation
        d = [v / step for v in richardson_derivative(
            lambda u: _with_purity(moments(u), xp), 0.0, 1.0)]
        _, _, oxx, oxp, opp, det = moments(0.0)
        return t * t * qfi_terms(oxx, oxp, opp, *d, xp=xp, det=det)

    return kernel


def qfi_frequency(state, coeffs: ReservoirCoeffs, profile: DissipationProfile,
                  t: float, diagnostic: bool = False, step: float = FD_STEP):
    """Frequency QFI around omega = 0 after interrogation time ``t``.

    The returned value is t^2 F_phi with C evaluated at omega = 0. With
    ``diagnostic=True`` a second result is returned, obtained by differencing
    the full output moments in omega, so that C(omega) also varies.
    """
    x0, p0, sxx, sxp, spp, det0, axis = aligned_input(state)
    if t <= 0:
        res = QfiResult(0.0, "frequency", 0.0, "gaussian_formula")
        return (res, res) if diagnostic else res
    eta = eta_at(profile, t)
    mc = (1 - eta) * coeffs.m_big
    f_phi = phase_qfi_arrays(x0, p0, sxx, sxp, spp, eta, coeffs.n_big,
                             abs(mc), cmath.phase(mc), 0.0, step, xp=SCALAR_OPS,
                             det0=det0, axis=axis)
    res = QfiResult(t * t * f_phi, "frequency", 0.0, "gaussian_formula")
    if not diagnostic:
        return res
    direct = full_omega_kernel(coeffs, profile, t, step)(
        x0, p0, sxx, sxp, spp, det0, axis, xp=SCALAR_OPS)
    return res, QfiResult(float(direct), "frequency", 0.0, "gaussian_formula")


def qfi_exact_pure(nbar_total: float, nbar_sq: float, eta: float, n_big: float,
                   m_abs: float) -> QfiResult:
    """Closed-form phase QFI for a pure displaced squeezed probe, as published.

    The probe carries ``nbar_sq`` = sinh^2 r0 squeezed photons and the rest of
    ``nbar_total`` as displacement; xi = phi = 0. The expression is evaluated
    exactly as printed. It disagrees with the Gaussian formula (already in the
    lossless limit), see :func:`qfi_pure_rederived` for the expression that
    follows from the channel moments.
    """
    nt, n, m = nbar_total, nbar_sq, m_abs
    if n > nt:
        raise DomainError("squeezed photons exceed the total photon number")
    root = math.sqrt(n * (n + 1))
    inner = (1 + 4 * (1 - eta) * (n_big + m) * ((1 - eta) * (n_big - m) + eta * n)
             + 4 * eta * (1 - eta) * (n_big + n * (n_big - 1)))
    # the printed expression has a pole where ``inner`` vanishes (e.g. N = 0,
    # eta = 1/2, n = 1); the first term tends to zero there
    if inner == 0:
        first = 0.0
    else:
        first_den = (1 + 2 * (1 - eta) * (n_big + m) + 2 * eta * (n + root)) * (1 + 1 / inner)
        first = 4 * eta**2 * (n - 2 * m) ** 2 / first_den
    second = 4 * eta * (nt - n) / (1 + 2 * (1 - eta) * (n_big - m)
                                   - 2 * eta * (root - n))
    return QfiResult(first + second, "phase", 0.0, "exact_pure")


def qfi_pure_rederived(nbar_total: float, nbar_sq: float, eta: float,
                       n_big: float, m_abs: float) -> QfiResult:
    """Closed-form phase QFI for the same probe as :func:`qfi_exact_pure`.

    Derived from the output covariance diag(a, b) with
    a = eta e^{2r}/2 + (1-eta)(N+M+1/2), b = eta e^{-2r}/2 + (1-eta)(N-M+1/2)
    and off-diagonal derivative -2[eta sinh r cosh r + (1-eta) M]; the purity
    derivative vanishes at phi = 0.
    """
    nt, n, m = nbar_total, nbar_sq, m_abs
    if n > nt:
        raise DomainError("squeezed photons exceed the total photon number")
    root = math.sqrt(n * (n + 1))
    two_a = 1 + 2 * (1 - eta) * (n_big + m) + 2 * eta * (n + root)
    two_b = 1 + 2 * (1 - eta) * (n_big - m) - 2 * eta * (root - n)
    first = 16 * (eta * root + (1 - eta) * m) ** 2 / (two_a * two_b + 1)
    second = 4 * eta * (nt - n) / two_b
    return QfiResult(first + second, "phase", 0.0, "exact_pure")
