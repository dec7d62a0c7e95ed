"""Phase estimation through a squeezed-thermal loss channel.

A probe with N photons passes a channel that keeps a fraction eta = 0.9 of
its energy and mixes in a reservoir with N_sq = 10 squeezed photons. We
compare the best Gaussian probe with a coherent probe and with sending
nothing at all, then look at how the exact bound approaches its large-N
asymptote.
"""
import math

import numpy as np

from gaussmetro import (BoundInputs, ChannelAtTime, ReservoirSpec, StateParams, derive_coeffs,
                        optimize_state_phase, phase_bound_coherent, phase_bound_general,
                        qfi_phase, reference_limits)

eta = 0.9
squeezed = derive_coeffs(ReservoirSpec(n_th=0.0, n_sq=10.0, xi=0.0))
lossy = derive_coeffs(ReservoirSpec())
channel = ChannelAtTime.markovian(squeezed, eta)

# The reservoir alone already imprints the phase: the output of a vacuum
# input is a squeezed state whose axis rotates with phi.
vac = qfi_phase(StateParams(), channel).value
print(f"vacuum input: F = {vac:.4f}, dphi = {1 / math.sqrt(vac):.4f}")

print(f"\n{'N':>8} {'optimal':>10} {'coherent':>10} {'lossy':>10} {'s_opt':>6} "
      f"{'ratio':>7}")
for nbar in np.geomspace(0.1, 1e4, 11):
    best = optimize_state_phase(nbar, squeezed, eta)
    coh = optimize_state_phase(nbar, squeezed, eta, family="coherent")
    plain = optimize_state_phase(nbar, lossy, eta)
    ratio = best.bound / reference_limits("noiseless_phase", nbar)
    print(f"{nbar:8.3g} {best.bound:10.4e} {coh.bound:10.4e} {plain.bound:10.4e} "
          f"{best.best_params.s:6.3f} {ratio:7.3f}")

# A squeezed vacuum that matches the reservoir is left unchanged by the
# channel, so at N = N_sq the bound sits exactly on the noiseless limit.
matched = qfi_phase(StateParams.squeezed_vacuum(10.0), channel).value
print(f"\nmatched probe at N = 10: F = {matched:.6f} (noiseless 8N(N+1) = 880)")

nbar = 1e4
inp = BoundInputs(nbar, squeezed, eta=eta)
exact = optimize_state_phase(nbar, squeezed, eta).bound
print(f"N = 1e4: exact {exact:.5e}, asymptote {phase_bound_general(inp):.5e}, "
      f"coherent asymptote {phase_bound_coherent(inp):.5e}")
