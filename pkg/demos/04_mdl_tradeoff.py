"""
Choosing K by minimum description length
========================================

A larger ``K`` makes the counts more accurate but the header longer. For a
frame of ``N`` symbols the total cost is ``header_bits + N * dH``. This
script sweeps ``K`` for a few frame lengths and reports the cheapest one.
"""
# %%
import numpy as np

from ansprob import (DeformParams, entropy, header_cost_bits, kl_divergence, mdl_penalty,
                     quantize, random_simplex, reconstruct)

D = 64
sources = [random_simplex(D, (4, t)) for t in range(50)]
Ks = [64, 128, 256, 512, 1024, 2048, 4096]
params = DeformParams(1.0, 0.0)


def mean_dh(K):
    return np.mean([kl_divergence(p, reconstruct(quantize(p, K, min_count=1), params))
                    for p in sources])


dh = {K: mean_dh(K) for K in Ks}

# %%
for N in (1_000, 10_000, 100_000, 1_000_000):
    reports = {K: mdl_penalty(header_cost_bits(D, K).exact, N, dh[K]) for K in Ks}
    best = min(reports, key=lambda K: reports[K].total)
    r = reports[best]
    print(f"N={N:>9,d}  best K={best:5d}  header {r.header_bits:7.1f} bits  "
          f"loss {N * r.delta_h:9.1f} bits")

# %%
# Longer frames justify finer counts. For reference, the mean entropy is
print("mean H = %.3f bits/symbol" % np.mean([entropy(p) for p in sources]))
