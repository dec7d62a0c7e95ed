"""Asymptotic precision bounds and benchmark limits.

All functions take the photon budget ``nbar`` and reservoir coefficients and
return either a phase error Delta phi or, for frequency estimation, the
product Delta omega^2 T together with the optimal interrogation time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import ReservoirCoeffs
from .errors import DegenerateBound, DomainError, InvalidParams
from .lambertw import lambert_w0


@dataclass(frozen=True)
class BoundInputs:
    """Inputs shared by the bound formulas.

    Phase bounds need ``eta``; frequency bounds need ``gamma`` and ``beta``.
    """

    nbar: float
    coeffs: ReservoirCoeffs
    eta: float | None = None
    gamma: float | None = None
    beta: int = 0
    total_time: float | None = None

    def __post_init__(self):
        if not self.nbar > 0:
            raise InvalidParams("nbar must be positive")
        if self.eta is not None and not (0 < self.eta <= 1):
            raise InvalidParams("eta must lie in (0, 1]")


@dataclass(frozen=True)
class FrequencyBound:
    var_t_product: float
    t_opt: float


def noise_factor(coeffs: ReservoirCoeffs) -> float:
    """1 + 2N - 2|M| cos(xi); must be positive for any physical reservoir."""
    value = 1 + 2 * coeffs.n_big - 2 * coeffs.m_big.real
    if value <= 0:
        raise DegenerateBound(f"1 + 2N - 2|M|cos(xi) = {value!r} is not positive")
    return value


def _need_eta(inp: BoundInputs) -> float:
    if inp.eta is None:
        raise InvalidParams("phase bounds need eta")
    return inp.eta


def _need_gamma(inp: BoundInputs) -> float:
    if inp.gamma is None or inp.gamma <= 0:
        raise InvalidParams("frequency bounds need gamma > 0")
    return inp.gamma


def phase_bound_general(inp: BoundInputs) -> float:
    """Leading-order phase error for the optimal (squeezed-vacuum) probe."""
    eta = _need_eta(inp)
    return math.sqrt((1 - eta) * noise_factor(inp.coeffs) / (4 * eta * inp.nbar))


def phase_bound_coherent(inp: BoundInputs) -> float:
    """Leading-order phase error for a coherent probe, reservoir aligned (xi = 0)."""
    eta = _need_eta(inp)
    c = inp.coeffs
    return math.sqrt((1 + 2 * (1 - eta) * (c.n_big - c.m_abs)) / (4 * eta * inp.nbar))


def freq_bound_optimal(inp: BoundInputs) -> FrequencyBound:
    """Asymptotic Delta omega^2 T and t_opt for squeezed-vacuum probes.

    The prefactor ((1+beta)/(2 beta))^beta is taken as 1 at beta = 0, its limit.
    """
    gamma, beta, nbar = _need_gamma(inp), inp.beta, inp.nbar
    k = noise_factor(inp.coeffs)
    pref = 1.0 if beta == 0 else ((1 + beta) / (2 * beta)) ** beta
    var_t = 0.25 * (pref * gamma * k / nbar ** (2 * beta + 1)) ** (1 / (beta + 1))
    if beta == 0:
        t_opt = 1 / (gamma * math.sqrt(nbar * k))
    else:
        t_opt = ((1 + beta) / (2 * beta) / (gamma * k * nbar)) ** (1 / (beta + 1))
    return FrequencyBound(var_t, t_opt)


def coherent_g(coeffs: ReservoirCoeffs, beta: int) -> float:
    """Lambert-W argument g_beta of the coherent-state frequency bound (xi = 0)."""
    d = coeffs.m_abs - coeffs.n_big
    return math.exp(-1 / (beta + 1)) / (1 + beta) * 2 * d / (1 - 2 * d)


def _coherent_lambert(coeffs: ReservoirCoeffs, beta: int):
    g = coherent_g(coeffs, beta)
    if g <= -1 / math.e:
        raise DomainError(f"g = {g!r} is outside the Lambert W0 domain")
    w = lambert_w0(g)
    # (|M| - N) / ((1 + beta) W(g)) rewritten through g / W(g) = e^W,
    # which stays finite as |M| - N -> 0
    ratio = (math.exp(w) * math.exp(1 / (beta + 1))
             * (1 + 2 * (coeffs.n_big - coeffs.m_abs)) / 2)
    return w, ratio


def freq_bound_coherent(inp: BoundInputs) -> FrequencyBound:
    """Asymptotic Delta omega^2 T and t_opt for coherent probes."""
    gamma, beta = _need_gamma(inp), inp.beta
    w, ratio = _coherent_lambert(inp.coeffs, beta)
    grow = 1 + (1 + beta) * w
    var_t = (gamma ** (1 / (beta + 1)) * ratio / (2 * inp.nbar)
             * grow ** (beta / (beta + 1)))
    t_opt = (grow / gamma) ** (1 / (beta + 1))
    return FrequencyBound(var_t, t_opt)


def freq_bound_coherent_markovian(inp: BoundInputs) -> FrequencyBound:
    """beta = 0 form: Gamma (|M| - N) / (2 nbar W(g0)), t_opt = (1 + W(g0)) / Gamma."""
    gamma = _need_gamma(inp)
    w, ratio = _coherent_lambert(inp.coeffs, 0)
    return FrequencyBound(gamma * ratio / (2 * inp.nbar), (1 + w) / gamma)


def cavity_gain(coeffs: ReservoirCoeffs) -> float:
    """Asymptotic Delta omega^2_sq / Delta omega^2_0 for coherent Markovian probes.

    Equals 2(|M| - N) / (e W(g0)).
    """
    w, ratio = _coherent_lambert(coeffs, 0)
    return 2 * ratio / math.e


def reference_limits(kind: str, nbar: float, eta: float | None = None,
                     gamma: float | None = None, beta: int = 0,
                     total_time: float | None = None):
    """Benchmark precisions.

    kind:
        ``"noiseless_phase"``      1/sqrt(8 nbar (nbar + 1))
        ``"infinite_sq_phase"``    sqrt(1 + eta^2) / (4 eta nbar)
        ``"noiseless_frequency"``  FrequencyBound(1/(8 T nbar (nbar+1)), T)
        ``"infinite_sq_frequency"`` leading-order Delta omega^2 T for an
        infinitely squeezed reservoir
    """
    if not nbar > 0:
        raise InvalidParams("nbar must be positive")
    if kind == "noiseless_phase":
        return 1 / math.sqrt(8 * nbar * (nbar + 1))
    if kind == "infinite_sq_phase":
        if eta is None:
            raise InvalidParams("eta required")
        return math.sqrt(1 + eta**2) / (4 * eta * nbar)
    if kind == "noiseless_frequency":
        if total_time is None or total_time <= 0:
            raise InvalidParams("total_time required")
        return FrequencyBound(1 / (8 * total_time * nbar * (nbar + 1)), total_time)
    if kind == "infinite_sq_frequency":
        if gamma is None:
            raise InvalidParams("gamma required")
        if beta == 0:
            return gamma * (1 + math.e**2) / (16 * nbar**2)
        k = 1 / (beta + 1)
        return (gamma**k / (16 * nbar**2) * (beta / (1 + beta)) ** k
                * (1 + math.exp(2 / beta)))
    raise InvalidParams(f"unknown reference kind {kind!r}")
