"""Exact (non-asymptotic) precision bounds by numerical optimisation.

Phase estimation maximises the QFI over single-mode Gaussian inputs with a
fixed mean boson number; frequency estimation additionally minimises
t / F_omega over the interrogation time t.

Inputs are parametrised by an energy split: a fraction ``s`` of the budget
goes into squeezing plus thermal noise, the rest into displacement,

    (n0 + 1/2) cosh(2 r0) - 1/2 = s nbar,   |dbar0| = sqrt(2 (1 - s) nbar),

with n0 = f s nbar for f in [0, 1]. Every point of the search space therefore
has exactly ``nbar`` bosons and the simplex search runs unconstrained. The
simplex works with a = sqrt(1 - s), the displacement amplitude as a fraction
of its maximum, because the QFI is smooth in a but not in s near s = 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .bounds import BoundInputs, freq_bound_optimal
from .channel import SCALAR_OPS, DissipationProfile, ReservoirCoeffs
from .errors import InvalidParams
from .qfi import FD_STEP, aligned_input, full_omega_kernel, phase_qfi_arrays
from .state import StateParams

GRID_SHAPE = (21, 5, 8, 8)
N_STARTS = 3
SIMPLEX_TOL = 1e-8
SIMPLEX_SIZE = 0.05
SNAP_TOL = 1e-6
TIE_TOL = 1e-12
SCAN_POINTS = 64
SCAN_SPAN = 1e4
GOLDEN_TOL = 1e-10
STATIONARITY_STEP = 1e-4


@dataclass(frozen=True)
class EnergyBudgetPoint:
    """Input state at fixed mean boson number, in energy-split coordinates."""

    nbar: float
    s: float
    n0: float
    psi: float
    delta: float

    def __post_init__(self):
        if not self.nbar > 0:
            raise InvalidParams("nbar must be positive")
        if not (0 <= self.s <= 1):
            raise InvalidParams(f"split s must lie in [0, 1], got {self.s}")
        if not (0 <= self.n0 <= self.s * self.nbar * (1 + 1e-12)):
            raise InvalidParams("n0 must lie in [0, s * nbar]")

    @classmethod
    def from_unit(cls, nbar: float, u, family: str = "optimal") -> "EnergyBudgetPoint":
        """Point from normalised search coordinates (see :func:`_unfold`)."""
        s, f, psi, delta = _unfold(np.asarray(u, dtype=float), family)
        return cls(nbar, float(s), float(f * s * nbar), float(psi), float(delta))

    @property
    def r0(self) -> float:
        return 0.5 * math.acosh((self.s * self.nbar + 0.5) / (self.n0 + 0.5))

    def to_params(self) -> StateParams:
        amp = math.sqrt((1 - self.s) * self.nbar)
        return StateParams(alpha0=amp * cmath.exp(1j * self.delta), r0=self.r0,
                           psi=self.psi, n0=self.n0)

    def unit(self) -> np.ndarray:
        """Normalised search coordinates (a, f, psi/pi, delta/2pi), a = sqrt(1 - s)."""
        f = self.n0 / (self.s * self.nbar) if self.s > 0 else 0.0
        return np.array([math.sqrt(1 - self.s), f, self.psi / math.pi,
                         self.delta / (2 * math.pi)])


@dataclass(frozen=True)
class Optimum:
    """Result of an optimisation.

    ``bound`` is Delta phi = 1/sqrt(F) for phase tasks and sqrt(t/(T F_omega))
    for frequency tasks (NaN when T is infinite); ``var_t_product`` is the
    minimised t/F_omega = Delta omega^2 T.
    """

    best_params: EnergyBudgetPoint
    qfi: float
    bound: float
    t_opt: float | None = None
    var_t_product: float | None = None
    boundary: bool = False
    stationarity: float | None = None
    trace: tuple = field(default=(), compare=False)


def budget_moments(nbar, s, f, psi, delta, xp=np):
    """Input moments for energy-split coordinates, in the squeezing frame.

    Returns (x0, p0, sxx, sxp, spp, det0, axis): the covariance is diagonal,
    the displacement is rotated by -psi, det0 = (n0 + 1/2)^2 and axis = psi
    (see :func:`phase_qfi_arrays`). The squeezed-thermal eigenvalues are
    written as (sN + 1/2) +- a root so no arccosh is needed.
    """
    sq = s * nbar + 0.5
    th = f * s * nbar + 0.5
    big = sq + xp.sqrt(sq * sq - th * th)
    small = th * th / big
    amp = xp.sqrt(2 * (1 - s) * nbar)
    return (amp * xp.cos(delta - psi), amp * xp.sin(delta - psi),
            big, 0.0 * big, small, th * th, psi)


def _fold(u):
    """Triangle wave mapping the real line onto [0, 1] (mirror at the ends)."""
    r = u % 2.0
    return 1.0 - abs(1.0 - r)


def _unfold(u, family):
    """(s, f, psi, delta) from normalised coordinates (a, f, psi/pi, delta/2pi)."""
    if family == "coherent":
        return 0.0, 0.0, 0.0, 2 * math.pi * u[0]
    a = _fold(u[0])
    return 1 - a * a, _fold(u[1]), math.pi * u[2], 2 * math.pi * u[3]


def phase_kernel(eta: float, coeffs: ReservoirCoeffs, phi0: float = 0.0):
    """Phase QFI of the channel output as a function of input moments.

    C is taken at omega = 0, so eta*M*C = (1 - eta) M.
    """
    eta = float(eta)
    mc_abs = (1 - eta) * coeffs.m_abs

    def kernel(x0, p0, sxx, sxp, spp, det0=None, axis=0.0, xp=np):
        return phase_qfi_arrays(x0, p0, sxx, sxp, spp, eta, coeffs.n_big, mc_abs,
                                coeffs.xi, phi0, FD_STEP, xp=xp, det0=det0, axis=axis)

    return kernel


def _grid(family):
    if family == "coherent":
        return [np.arange(GRID_SHAPE[3]) / GRID_SHAPE[3]]
    ns, nf, npsi, ndelta = GRID_SHAPE
    # uniform in the split s, stored as a = sqrt(1 - s)
    return [np.sqrt(1 - np.linspace(0, 1, ns)), np.linspace(0, 1, nf),
            np.arange(npsi) / npsi, np.arange(ndelta) / ndelta]


def _grid_values(nbar, kernel, family):
    axes = _grid(family)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = kernel(*budget_moments(nbar, *_unfold(pts.T, family)), xp=np)
    return pts, np.broadcast_to(np.asarray(vals, dtype=float), len(pts))


def _scalar_value(nbar, kernel, family, u):
    s, f, psi, delta = _unfold(u, family)
    return float(kernel(*budget_moments(nbar, s, f, psi, delta, xp=SCALAR_OPS),
                        xp=SCALAR_OPS))


def _simplex(u0):
    n = len(u0)
    sim = np.tile(u0, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += SIMPLEX_SIZE
    return sim


def _refine(nbar, kernel, family, u0, scale):
    """Nelder-Mead from ``u0``; stops when the simplex diameter is below 1e-8."""
    def neg(u):
        return -_scalar_value(nbar, kernel, family, u) / scale

    res = minimize(neg, u0, method="Nelder-Mead",
                   options={"initial_simplex": _simplex(u0),
                            "xatol": 0.5 * SIMPLEX_TOL, "fatol": np.inf,
                            "maxfev": 20000})
    u = np.array(res.x)
    best = -res.fun * scale
    # put points that stopped next to an edge of the (a, f) box onto it
    if family == "optimal":
        for i in (0, 1):
            folded = _fold(u[i])
            for edge in (0.0, 1.0):
                if abs(folded - edge) < SNAP_TOL:
                    trial = u.copy()
                    trial[i] = edge
                    val = _scalar_value(nbar, kernel, family, trial)
                    if val >= best * (1 - TIE_TOL):
                        u, best = trial, max(val, best)
    return u, best, int(res.nfev)


def _canonical(u, family):
    """Map search coordinates to their representative in the fundamental box."""
    if family == "coherent":
        return np.array([u[0] % 1.0])
    return np.array([_fold(u[0]), _fold(u[1]), u[2] % 1.0, u[3] % 1.0])


def _pick(cands, family):
    """Highest QFI; ties within 1e-12 relative go to smaller s, then smaller f."""
    top = max(c[1] for c in cands)
    tied = [c for c in cands if c[1] >= top * (1 - TIE_TOL)]
    if family == "coherent":
        return tied[0]
    # smaller s is larger a
    return min(tied, key=lambda c: (-c[0][0], c[0][1]))


def maximize_qfi(nbar: float, kernel, family: str = "optimal", starts=None,
                 grid: bool = True):
    """Maximise ``kernel`` over the energy budget.

    Returns (EnergyBudgetPoint, qfi, trace). ``starts`` adds extra simplex
    starting points in normalised coordinates; ``grid=False`` skips the
    coarse grid and refines from ``starts`` only.
    """
    if not nbar > 0:
        raise InvalidParams("nbar must be positive")
    if family not in ("optimal", "coherent"):
        raise InvalidParams(f"unknown state family {family!r}")
    trace = []
    cands = []
    seeds = []
    if grid:
        pts, vals = _grid_values(nbar, kernel, family)
        order = np.argsort(-vals, kind="stable")[:N_STARTS]
        trace.append(("grid", len(vals), float(vals[order[0]])))
        for i in order:
            cands.append((_canonical(pts[i], family), float(vals[i])))
            seeds.append(pts[i])
    for u in starts or ():
        seeds.append(np.asarray(u, dtype=float))
    if not seeds:
        raise InvalidParams("no starting points")
    scale = max(abs(c[1]) for c in cands) if cands else abs(
        _scalar_value(nbar, kernel, family, seeds[0]))
    scale = scale if scale > 0 else 1.0
    for u0 in seeds:
        u, val, nfev = _refine(nbar, kernel, family, u0, scale)
        cu = _canonical(u, family)
        cands.append((cu, float(val)))
        trace.append(("simplex", tuple(float(v) for v in u0), tuple(float(v) for v in cu),
                      val, nfev))
    u, val = _pick(cands, family)
    return EnergyBudgetPoint.from_unit(nbar, u, family), val, tuple(trace)


def optimize_state_phase(nbar: float, coeffs: ReservoirCoeffs, eta: float,
                         phi0: float = 0.0, family: str = "optimal",
                         extra_starts=None) -> Optimum:
    """Best phase QFI at fixed ``nbar`` after a channel with coefficient ``eta``.

    ``family="coherent"`` restricts the search to coherent inputs (only the
    displacement direction is free).
    """
    if not (0 <= eta <= 1):
        raise InvalidParams("eta must lie in [0, 1]")
    point, val, trace = maximize_qfi(nbar, phase_kernel(eta, coeffs, phi0), family,
                                     starts=extra_starts)
    return Optimum(point, val, 1 / math.sqrt(val) if val > 0 else math.inf, trace=trace)


def _fixed_state_moments(state):
    if isinstance(state, EnergyBudgetPoint):
        state = state.to_params()
    return aligned_input(state)


class _TimeObjective:
    """t/F_omega as a function of the scaled time tau = Gamma^{1/(beta+1)} t.

    With the unit-coupling profile the channel depends on tau alone, which is
    what makes the ratios of frequency bounds independent of Gamma.
    """

    def __init__(self, nbar, coeffs, beta, state, model):
        self.nbar, self.coeffs, self.state, self.model = nbar, coeffs, state, model
        self.profile = DissipationProfile(1.0, beta)
        self.k = beta + 1
        self.warm = None
        self.calls = 0

    def eta(self, tau):
        return math.exp(-tau**self.k / self.k)

    def _kernel(self, tau):
        if self.model == "full":
            return full_omega_kernel(self.coeffs, self.profile, tau)
        eta = self.eta(tau)
        base = phase_kernel(eta, self.coeffs)

        def kernel(*m, xp=np):
            return tau * tau * base(*m, xp=xp)
        return kernel

    def f_omega(self, tau, full_search=False):
        """Best F_omega at scaled time ``tau`` (unit coupling)."""
        self.calls += 1
        kernel = self._kernel(tau)
        if not isinstance(self.state, str):
            m = _fixed_state_moments(self.state)
            return float(kernel(*m, xp=SCALAR_OPS)), self.state
        if full_search or self.warm is None:
            point, val, _ = maximize_qfi(self.nbar, kernel, self.state,
                                         starts=None if self.warm is None else [self.warm])
        else:
            point, val, _ = maximize_qfi(self.nbar, kernel, self.state,
                                         starts=[self.warm], grid=False)
        self.warm = point.unit() if self.state == "optimal" else point.unit()[3:]
        return val, point

    def __call__(self, tau):
        val, _ = self.f_omega(tau)
        return tau / val if val > 0 else math.inf

    def scan(self, taus):
        """Objective on a tau grid using the coarse state grid only (vectorised)."""
        if not isinstance(self.state, str):
            return np.array([self(t) for t in taus])
        out = np.empty(len(taus))
        for i, tau in enumerate(taus):
            _, vals = _grid_values(self.nbar, self._kernel(tau), self.state)
            best = float(np.max(vals))
            # plain floats: a tiny F at the scan edge gives inf without a warning
            out[i] = float(tau) / best if best > 0 else math.inf
        return out


def _first_local_min(values):
    for i in range(1, len(values) - 1):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            return i
    return None


def _refined_bracket(obj, taus, vals, i):
    """Move the scan index until the refined objective brackets a minimum.

    The scan uses the coarse state grid only; after refinement the three
    points around the scan minimum need not bracket any more.
    """
    refined = {}

    def val(j):
        if j not in refined:
            refined[j] = obj(float(taus[j]))
        return refined[j]

    for _ in range(len(taus)):
        left, mid, right = val(i - 1), val(i), val(i + 1)
        if mid < left and mid < right:
            return i
        step = -1 if left < right else 1
        if not 1 <= i + step <= len(taus) - 2:
            return i
        i += step
    return i


def optimize_time_frequency(nbar: float, coeffs: ReservoirCoeffs,
                            profile: DissipationProfile, total_time: float = math.inf,
                            state="optimal", model: str = "reparametrized") -> Optimum:
    """Minimise t/F_omega over 0 < t <= T.

    ``state`` is ``"optimal"`` (inputs re-optimised at every t), ``"coherent"``,
    or a fixed StateParams / EnergyBudgetPoint. ``model="reparametrized"``
    uses F_omega = t^2 F_phi with C at omega = 0; ``model="full"`` keeps the
    omega dependence of C.

    The time search is a 64-point log scan over [1e-4 t*, min(T, 1e4 t*)],
    t* being the asymptotic optimal time, followed by golden-section search
    around the first interior local minimum of the scan. Without one the best
    end point is returned with ``boundary=True``.
    """
    if not nbar > 0:
        raise InvalidParams("nbar must be positive")
    if not total_time > 0:
        raise InvalidParams("total time T must be positive")
    if model not in ("reparametrized", "full"):
        raise InvalidParams(f"unknown model {model!r}")
    if isinstance(state, str) and state not in ("optimal", "coherent"):
        raise InvalidParams(f"unknown state mode {state!r}")
    beta, k = profile.beta, profile.beta + 1
    trace = []

    if profile.gamma == 0:
        if math.isinf(total_time):
            raise InvalidParams("without dissipation the optimum needs a finite T")
        kern = phase_kernel(1.0, coeffs)
        if isinstance(state, str):
            point, f_phi, tr = maximize_qfi(nbar, kern, state)
        else:
            point = state
            f_phi = float(kern(*_fixed_state_moments(state), xp=SCALAR_OPS))
            tr = ()
        t = total_time
        var_t = 1 / (t * f_phi)
        return Optimum(_as_point(point, nbar), t * t * f_phi, math.sqrt(var_t / total_time),
                       t_opt=t, var_t_product=var_t, boundary=True, trace=tr)

    scale = profile.gamma ** (1 / k)
    tau_total = scale * total_time
    tau_star = freq_bound_optimal(BoundInputs(nbar, coeffs, gamma=1.0, beta=beta)).t_opt
    hi = min(tau_total, SCAN_SPAN * tau_star)
    lo = tau_star / SCAN_SPAN
    if lo >= hi:
        lo = hi / SCAN_SPAN
    taus = np.geomspace(lo, hi, SCAN_POINTS)
    obj = _TimeObjective(nbar, coeffs, beta, state, model)
    vals = obj.scan(taus)
    trace.append(("scan", float(lo), float(hi), SCAN_POINTS))
    i = _first_local_min(vals)
    boundary = i is None
    if boundary:
        i = int(np.argmin(vals))
        tau_opt = float(taus[i])
        obj.f_omega(tau_opt, full_search=True)
        g = obj(tau_opt)
        trace.append(("no_interior_minimum", tau_opt))
    else:
        obj.f_omega(float(taus[i]), full_search=True)
        i = _refined_bracket(obj, taus, vals, i)
        res = minimize_scalar(obj, bracket=(taus[i - 1], taus[i], taus[i + 1]),
                              method="golden", tol=GOLDEN_TOL)
        tau_opt, g = float(res.x), float(res.fun)
        trace.append(("golden", tau_opt, int(res.nfev)))
    f_best, point = obj.f_omega(tau_opt)
    stationarity = None
    if not boundary:
        h = STATIONARITY_STEP * tau_opt
        slope = (obj(tau_opt + h) - obj(tau_opt - h)) / (2 * h)
        stationarity = abs(slope) * tau_opt / g
        obj.f_omega(tau_opt)
    trace.append(("objective_calls", obj.calls))
    var_t = scale * g
    t_opt = tau_opt / scale
    bound = math.sqrt(var_t / total_time) if math.isfinite(total_time) else math.nan
    return Optimum(_as_point(point, nbar), f_best / scale**2, bound, t_opt=t_opt,
                   var_t_product=var_t, boundary=boundary or tau_opt >= tau_total,
                   stationarity=stationarity, trace=tuple(trace))


def _as_point(point, nbar):
    if isinstance(point, EnergyBudgetPoint):
        return point
    # fixed StateParams: record it through its energy split
    a2 = abs(point.alpha0) ** 2
    s = 1 - a2 / nbar if nbar > 0 else 0.0
    return EnergyBudgetPoint(nbar, min(max(s, 0.0), 1.0), min(point.n0, max(s, 0.0) * nbar),
                             point.psi, cmath.phase(point.alpha0) if a2 > 0 else 0.0)


def exact_curve(task: str, nbar_list, coeffs: ReservoirCoeffs, eta: float | None = None,
                profile: DissipationProfile | None = None, family: str = "optimal",
                total_time: float = math.inf, model: str = "reparametrized"):
    """Map the optimiser over ``nbar_list``.

    Rows are dicts with keys nbar, bound, s, n0, t_opt (and qfi, boundary).
    For phase tasks ``bound`` is Delta phi; for frequency tasks it is
    Delta omega^2 T. The previous optimum seeds an extra simplex start.
    """
    rows = []
    prev = None
    for nbar in nbar_list:
        if task == "phase":
            if eta is None:
                raise InvalidParams("phase curves need eta")
            opt = optimize_state_phase(nbar, coeffs, eta, family=family,
                                       extra_starts=None if prev is None else [prev])
            bound, t_opt = opt.bound, None
        elif task == "frequency":
            if profile is None:
                raise InvalidParams("frequency curves need a dissipation profile")
            opt = optimize_time_frequency(nbar, coeffs, profile, total_time, family, model)
            bound, t_opt = opt.var_t_product, opt.t_opt
        else:
            raise InvalidParams(f"unknown task {task!r}")
        u = opt.best_params.unit()
        prev = u if family == "optimal" else u[3:]
        rows.append({"nbar": float(nbar), "bound": bound, "s": opt.best_params.s,
                     "n0": opt.best_params.n0, "t_opt": t_opt, "qfi": opt.qfi,
                     "boundary": opt.boundary})
    return rows
