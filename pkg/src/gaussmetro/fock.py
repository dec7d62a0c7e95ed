"""Brute-force reference path in a truncated Fock basis.

Density matrices evolve under the master equation with fixed-step RK4; the
QFI comes from the symmetric logarithmic derivative. Used to validate the
moment-based code on small instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg
from scipy.linalg import expm

from .channel import DissipationProfile, ReservoirCoeffs
from .errors import InvalidParams, StepFailure, TruncationLeak
from .state import GaussianState, StateParams

LEAK_TOL = 1e-6
STEP_TOL = 1e-8
SLD_EPS = 1e-10
SLD_DELTA = 1e-4
DEFAULT_DIM = 40
MAX_DIM = 160


@dataclass(frozen=True)
class FockDensity:
    rho: np.ndarray

    def __post_init__(self):
        rho = self.rho
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidParams("density matrix must be square")
        if abs(np.trace(rho) - 1) > 1e-8:
            raise InvalidParams(f"trace {np.trace(rho).real} differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise InvalidParams("density matrix is not Hermitian")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()


@dataclass(frozen=True)
class LiouvillianSpec:
    omega: float
    coeffs: ReservoirCoeffs
    profile: DissipationProfile
    dim: int

    def __post_init__(self):
        if self.dim < 4:
            raise InvalidParams("truncation dimension must be at least 4")


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def _check_leak(rho: np.ndarray, where: str, tol: float = LEAK_TOL):
    top = rho.diagonal().real[-3:].sum()
    if top > tol:
        raise TruncationLeak(f"{where}: population {top:.3e} in the top 3 Fock levels")


def build_fock_state(params: StateParams, dim: int, pad: int | None = None,
                     leak_tol: float = LEAK_TOL) -> FockDensity:
    """D(alpha) S(r e^{2i psi}) rho_th S^dag D^dag truncated to ``dim`` levels.

    The operators are exponentiated in a larger space of ``dim + pad`` levels
    and the result is cut down; a trace deficit above ``leak_tol`` (1e-6)
    raises TruncationLeak, otherwise the state is renormalised.
    """
    big = dim + (pad if pad is not None else max(40, dim))
    a = annihilation(big)
    ad = a.conj().T
    n0 = params.n0
    levels = np.arange(big)
    if n0 > 0:
        pops = (n0 / (n0 + 1)) ** levels / (n0 + 1)
    else:
        pops = (levels == 0).astype(float)
    rho = np.diag(pops / pops.sum()).astype(complex)
    if params.r0 != 0:
        zeta = params.r0 * np.exp(2j * params.psi)
        sq = expm(0.5 * (zeta * ad @ ad - np.conj(zeta) * a @ a))
        rho = sq @ rho @ sq.conj().T
    if params.alpha0 != 0:
        disp = expm(params.alpha0 * ad - np.conj(params.alpha0) * a)
        rho = disp @ rho @ disp.conj().T
    cut = rho[:dim, :dim]
    kept = np.trace(cut).real
    if kept < 1 - leak_tol:
        raise TruncationLeak(f"truncation to {dim} levels drops {1 - kept:.3e} of the trace")
    cut = 0.5 * (cut + cut.conj().T) / kept
    return FockDensity(cut)


class _Generator:
    """Sparse superoperator for d rho/dt = -i omega [n, rho] + Gamma(t)/2 (dissipator).

    Dissipator: (N+1) L[a] + N L[a^dag] - M^* D[a] - M D[a^dag], with
    L[o] rho = 2 o rho o^dag - o^dag o rho - rho o^dag o and
    D[o] rho = 2 o rho o - o^2 rho - rho o^2. The minus signs on the M terms
    give d<a^2>/dt = -Gamma <a^2> + Gamma M, the moment equation behind the
    closed-form channel. Density matrices are flattened row-major, so
    A rho B maps to kron(A, B^T) acting on the flattened vector.
    """

    def __init__(self, spec: LiouvillianSpec):
        d = spec.dim
        a = sparse.csr_matrix(annihilation(d))
        ad = a.conj().T.tocsr()
        eye = sparse.identity(d, dtype=complex, format="csr")

        def sandwich(left, right):
            return sparse.kron(left, right.T, format="csr")

        def dressed(op):
            return sandwich(op, eye) + sandwich(eye, op)

        num, aad, a2, ad2 = ad @ a, a @ ad, a @ a, ad @ ad
        self.hamiltonian = -1j * spec.omega * (sandwich(num, eye) - sandwich(eye, num))
        c = spec.coeffs
        self.dissipator = 0.5 * (
            (c.n_big + 1) * (2 * sandwich(a, ad) - dressed(num))
            + c.n_big * (2 * sandwich(ad, a) - dressed(aad))
            - np.conj(c.m_big) * (2 * sandwich(a, a) - dressed(a2))
            - c.m_big * (2 * sandwich(ad, ad) - dressed(ad2))).tocsr()
        self.profile = spec.profile
        self.dim = d

    def __call__(self, t: float, vec: np.ndarray) -> np.ndarray:
        out = self.hamiltonian @ vec
        if self.profile.gamma:
            out += self.profile.rate(t) * (self.dissipator @ vec)
        return out


def _rk4(gen: _Generator, rho: np.ndarray, t: float, steps: int) -> np.ndarray:
    h = t / steps
    vec = rho.reshape(-1)
    for i in range(steps):
        s = i * h
        k1 = gen(s, vec)
        k2 = gen(s + 0.5 * h, vec + 0.5 * h * k1)
        k3 = gen(s + 0.5 * h, vec + 0.5 * h * k2)
        k4 = gen(s + h, vec + h * k3)
        vec = vec + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return vec.reshape(rho.shape)


def trace_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    diff = r1 - r2
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def evolve_master(rho: FockDensity, spec: LiouvillianSpec, t: float,
                  max_doublings: int = 8, leak_tol: float = LEAK_TOL) -> FockDensity:
    """Integrate the master equation from 0 to ``t`` with RK4.

    The step count starts from a stability estimate and doubles until the
    trace distance between successive refinements falls below 1e-8. The
    trace is not renormalised; a population above ``leak_tol`` in the top
    three levels raises TruncationLeak.
    """
    if spec.dim != rho.dim:
        raise InvalidParams("Liouvillian and state dimensions differ")
    if t < 0:
        raise InvalidParams("t must be non-negative")
    if t == 0:
        return rho
    gen = _Generator(spec)
    # the infinity norm bounds the spectral radius; RK4 is stable for
    # h * radius up to about 2.7 on the real axis
    peak_rate = float(np.max(spec.profile.rate(np.array([0.0, t]))))
    radius = (sparse_linalg.norm(gen.hamiltonian, np.inf)
              + peak_rate * sparse_linalg.norm(gen.dissipator, np.inf))
    steps = max(16, int(math.ceil(t * radius / 2.5)))
    prev = _rk4(gen, rho.rho, t, steps)
    for _ in range(max_doublings):
        steps *= 2
        cur = _rk4(gen, rho.rho, t, steps)
        if trace_distance(cur, prev) < STEP_TOL:
            cur = 0.5 * (cur + cur.conj().T)
            _check_leak(cur, "evolve_master", leak_tol)
            return FockDensity(cur)
        prev = cur
    raise StepFailure(f"RK4 did not converge to {STEP_TOL} after {steps} steps")


def rotate(rho: FockDensity, phi: float) -> FockDensity:
    """Apply exp(-i phi n) rho exp(i phi n), i.e. alpha -> alpha e^{-i phi}."""
    ph = np.exp(-1j * phi * np.arange(rho.dim))
    return FockDensity(ph[:, None] * rho.rho * ph.conj()[None, :])


def fock_moments(rho: FockDensity) -> GaussianState:
    """First moments and covariance matrix of a Fock-basis density matrix."""
    r = rho.rho
    a = annihilation(rho.dim)
    ea = np.trace(a @ r)
    ea2 = np.trace(a @ a @ r)
    en = np.trace(a.conj().T @ a @ r).real
    x = math.sqrt(2) * ea.real
    p = math.sqrt(2) * ea.imag
    # <x^2> = (<a^2> + <a^dag 2> + 2<n> + 1)/2, similarly for p and {x,p}/2
    xx = (ea2.real + en + 0.5) - x * x
    pp = (-ea2.real + en + 0.5) - p * p
    xp = ea2.imag - x * p
    return GaussianState(x, p, float(xx), float(xp), float(pp))


def qfi_sld(rho_minus: FockDensity, rho_plus: FockDensity, delta: float,
            rho_center: FockDensity | None = None, eps: float = SLD_EPS) -> float:
    """QFI from the symmetric logarithmic derivative.

    d rho is the central difference (rho_plus - rho_minus)/(2 delta); the state
    at the operating point defaults to the midpoint of the two inputs.
    """
    drho = (rho_plus.rho - rho_minus.rho) / (2 * delta)
    center = rho_center.rho if rho_center is not None else 0.5 * (rho_plus.rho + rho_minus.rho)
    lam, vec = np.linalg.eigh(0.5 * (center + center.conj().T))
    d = vec.conj().T @ drho @ vec
    denom = lam[:, None] + lam[None, :]
    mask = denom > eps
    return float(np.sum(2 * np.abs(d[mask]) ** 2 / denom[mask]))


def channel_output(params: StateParams, coeffs: ReservoirCoeffs,
                   profile: DissipationProfile, t: float, dim: int = DEFAULT_DIM,
                   max_dim: int = MAX_DIM, leak_tol: float = LEAK_TOL) -> FockDensity:
    """Prepare ``params`` and evolve it for time ``t`` at omega = 0.

    The truncation starts at ``dim`` and doubles on TruncationLeak up to
    ``max_dim``; the last leak is re-raised if even that is too small.
    """
    while True:
        try:
            rho = build_fock_state(params, dim, leak_tol=leak_tol)
            return evolve_master(rho, LiouvillianSpec(0.0, coeffs, profile, dim), t,
                                 leak_tol=leak_tol)
        except TruncationLeak:
            if 2 * dim > max_dim:
                raise
            dim *= 2


def phase_qfi(rho: FockDensity, phi0: float = 0.0, delta: float = SLD_DELTA,
              richardson: bool = False) -> float:
    """SLD phase QFI of the family exp(-i phi n) rho exp(i phi n) around ``phi0``.

    The phase shift acts after the dissipative evolution, matching the
    Gaussian-path convention, so one evolution serves every phi. With
    ``richardson`` the O(delta^2) error of the central difference is removed
    by combining steps delta and delta/2.
    """
    def at(step):
        return qfi_sld(rotate(rho, phi0 - step), rotate(rho, phi0 + step), step,
                       rho_center=rotate(rho, phi0))

    if not richardson:
        return at(delta)
    return (4 * at(0.5 * delta) - at(delta)) / 3
