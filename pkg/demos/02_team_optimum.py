"""
Team optimum of slotted Aloha in a Poisson network
==================================================

With access probability p each node succeeds with probability
exp(-p lam C). The density of success lam p exp(-p lam C) peaks at
p = 1 / (lam C) once the network is dense enough.
"""
import numpy as np

from sagames import (NetworkParams, goodput_integral, goodput_typical, team_densities,
                     team_optimal_map)

params = NetworkParams(lam=0.5, r=1.0, beta=4.0, T=1.0)
print("C =", params.C, " lam C =", params.lam_C)

# Closed form against the numerical Laplace-functional integral
for p in (0.1, 0.4, 0.8):
    print(f"p={p}: closed {goodput_typical(p, params):.12f}  integral {goodput_integral(p, params):.12f}")

p = np.linspace(0, 1, 11)
dens = params.lam * p * np.exp(-p * params.lam_C)
for pi, d in zip(p, dens):
    print(f"{pi:4.1f} {'#' * int(400 * d)}")

p_m = team_optimal_map(params)
d_s, d_t = team_densities(params)
print("\nbest access probability", p_m)
print("density of success", d_s, " spatial delay density", d_t)
print("d_s * d_t =", d_s * d_t, "= lam^2 =", params.lam ** 2)
