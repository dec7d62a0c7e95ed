"""How much a squeezed reservoir helps frequency estimation.

For each photon budget the interrogation time is optimised and the ratio
Delta omega^2 (vacuum reservoir) / Delta omega^2 (N_sq = 10) is reported for
optimal and coherent probes, in the Markovian (beta = 0) and the
non-Markovian (beta = 1) cases. The ratio does not depend on Gamma, which is
checked on the way.
"""
from gaussmetro import (BoundInputs, DissipationProfile, ReservoirSpec, derive_coeffs,
                        freq_bound_coherent, freq_bound_optimal, optimize_time_frequency)

squeezed = derive_coeffs(ReservoirSpec(n_sq=10.0))
plain = derive_coeffs(ReservoirSpec())
grid = [1.0, 10.0, 100.0, 1e3]


def ratio(nbar, beta, family, gamma=1.0, model="full"):
    prof = DissipationProfile(gamma, beta)
    a = optimize_time_frequency(nbar, plain, prof, state=family, model=model)
    b = optimize_time_frequency(nbar, squeezed, prof, state=family, model=model)
    return a.var_t_product / b.var_t_product


for beta in (0, 1):
    opt_asym = (freq_bound_optimal(BoundInputs(1, plain, gamma=1, beta=beta)).var_t_product
                / freq_bound_optimal(BoundInputs(1, squeezed, gamma=1, beta=beta)).var_t_product)
    coh_asym = (freq_bound_coherent(BoundInputs(1, plain, gamma=1, beta=beta)).var_t_product
                / freq_bound_coherent(BoundInputs(1, squeezed, gamma=1, beta=beta)).var_t_product)
    print(f"beta = {beta}: asymptotic gain optimal {opt_asym:.3f}, coherent {coh_asym:.3f}")
    for nbar in grid:
        print(f"  N = {nbar:7.0f}  optimal {ratio(nbar, beta, 'optimal'):8.3f}"
              f"  coherent {ratio(nbar, beta, 'coherent'):8.3f}")

# Gamma only sets the time scale.
r1 = ratio(100.0, 1, "coherent", gamma=1.0)
r10 = ratio(100.0, 1, "coherent", gamma=10.0)
print(f"\nGamma = 1 vs 10 at N = 100: {r1:.10f} vs {r10:.10f}")
