"""Precision bounds for Gaussian phase and frequency estimation in general
Gaussian dissipative (squeezed-thermal, possibly non-Markovian) reservoirs."""
from .bounds import (BoundInputs, FrequencyBound, cavity_gain, freq_bound_coherent,
                     freq_bound_coherent_markovian, freq_bound_optimal, noise_factor,
                     phase_bound_coherent, phase_bound_general, reference_limits)
from .channel import (ChannelAtTime, DissipationProfile, ReservoirCoeffs, ReservoirSpec,
                      apply_channel, c_integral, channel_at, derive_coeffs, eta_at,
                      eta_c_integral)
from .errors import (DegenerateBound, DomainError, GaussMetroError, InvalidParams,
                     NonPhysicalOutput, NonPhysicalState, PurityDerivativeSingular,
                     QuadratureFailure, StepFailure, TruncationLeak)
from .fock import (FockDensity, LiouvillianSpec, build_fock_state, channel_output,
                   evolve_master, fock_moments, phase_qfi, qfi_sld)
from .lambertw import lambert_w0
from .optimize import (EnergyBudgetPoint, Optimum, exact_curve, optimize_state_phase,
                       optimize_time_frequency)
from .qfi import (ParamDerivatives, QfiResult, phase_derivatives, qfi_exact_pure,
                  qfi_frequency, qfi_gaussian, qfi_phase, qfi_pure_rederived)
from .quadrature import adaptive_gauss_legendre
from .state import (GaussianState, StateParams, build_state, mean_photons, purity,
                    wigner_at)

__version__ = "0.1.0"
