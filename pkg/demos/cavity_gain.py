"""Coherent light in a cavity fed by squeezed vacuum.

Markovian loss, coherent probe. Without reservoir squeezing the optimum is
t = 1/Gamma and Delta omega^2 T = e Gamma / (4 N); with N_sq = 10 the
optimal time grows and the variance drops by the factor
2(|M| - N) / (e W(g0)).
"""
import math

from gaussmetro import (DissipationProfile, ReservoirSpec, cavity_gain, derive_coeffs,
                        optimize_time_frequency)

gamma = 1.0
squeezed = derive_coeffs(ReservoirSpec(n_sq=10.0))
plain = derive_coeffs(ReservoirSpec())
prof = DissipationProfile(gamma, 0)
target = cavity_gain(squeezed)
print(f"asymptotic variance gain: {target:.5f}")

for nbar in (10.0, 100.0, 1e3, 1e4):
    a = optimize_time_frequency(nbar, plain, prof, state="coherent", model="full")
    b = optimize_time_frequency(nbar, squeezed, prof, state="coherent", model="full")
    print(f"N = {nbar:6.0f}: t_opt {a.t_opt:.4f} -> {b.t_opt:.4f}, "
          f"N dw^2 T {nbar * a.var_t_product:.5f} (e/4 = {math.e / 4:.5f}) -> "
          f"{nbar * b.var_t_product:.5f}, gain {b.var_t_product / a.var_t_product:.5f}")
