"""The moment formulas against a brute-force density matrix.

One displaced squeezed probe is pushed through a squeezed-thermal reservoir
twice: once with the closed-form Gaussian channel, once by integrating the
master equation in a truncated Fock basis. The covariance matrices and the
phase QFI should agree.
"""
import math

import numpy as np

from gaussmetro import (DissipationProfile, ReservoirSpec, StateParams, apply_channel,
                        build_state, channel_at, channel_output, derive_coeffs, fock_moments,
                        phase_qfi, qfi_phase)

coeffs = derive_coeffs(ReservoirSpec(n_th=0.5, n_sq=1.0, xi=0.4))
prof = DissipationProfile(1.0, 0)
t = prof.time_for_eta(0.7)
probe = StateParams(alpha0=0.8 * np.exp(0.3j), r0=0.4, psi=math.pi / 8)

ch = channel_at(coeffs, prof, t)
gauss = apply_channel(build_state(probe), ch)
rho = channel_output(probe, coeffs, prof, t)
fock = fock_moments(rho)
print(f"truncation used: D = {rho.dim}")
print("Gaussian covariance\n", gauss.sigma)
print("Fock covariance\n", fock.sigma)
print(f"QFI Gaussian {qfi_phase(probe, ch).value:.8f}, SLD {phase_qfi(rho):.8f}")
