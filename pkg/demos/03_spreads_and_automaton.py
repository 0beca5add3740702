"""
Symbol spreads and the rate of a tANS automaton
===============================================

A tANS coder with ``L`` states assigns each state a symbol. Symbol ``s``
owns ``L_s`` states, and how those states are laid out (the spread) changes
the real compression rate. The automaton is a Markov chain on states, so
its stationary distribution gives the exact bits per symbol.
"""
# %%
import numpy as np

from ansprob import (automaton_delta_h, build_coder, build_model, encode, entropy,
                     kl_divergence, make_spread, mean_bits_per_symbol, stationary)

p = np.array([0.04, 0.16, 0.16, 0.64])
Ls = np.array([1, 3, 2, 10])
L = 16
H = entropy(p)
print("quantization alone costs dH/H = %.5f" % (kl_divergence(p, Ls / L) / H))

# %%
for kind in ("fast", "tuned-sorted", "tuned-bucketed", "tuned-iterated"):
    table = make_spread(kind, Ls, L, p)
    print(f"{kind:15s} {''.join(map(str, table.spread))}  dH/H = "
          f"{automaton_delta_h(p, table):.5f}")

# %%
# The tuned spread can even beat the quantization penalty: its states are
# visited with probability close to lg(1 + 1/x), not uniformly.
table = make_spread("tuned-sorted", Ls, L, p)
model = build_model(table, p)
rho = stationary(model)
print("stationary rho  ", np.round(rho, 4))
analytic = mean_bits_per_symbol(model, rho)

# %%
# Check the analytic rate against an actual encoder run.
rng = np.random.default_rng(0)
seq = rng.choice(4, size=200_000, p=p)
bits, _ = encode(build_coder(table), seq)
print(f"analytic {analytic:.5f}  measured {len(bits) / seq.size:.5f}  entropy {H:.5f}")
