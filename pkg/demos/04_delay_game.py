"""
The delay game: two equilibria and a jump in efficiency
=======================================================

Nodes minimise exp(p lam C) / q + rho q. Their best response
min(1, exp(p lam Cb) / sqrt(rho)) is convex in p, so it can cross the
diagonal twice.
"""
import math

import numpy as np

from sagames import Branch, GameParams
from sagames import delay_game as dg

params = GameParams(lam=1.0, C=3.0)
th = dg.thresholds(params)
print(f"two equilibria for rho in ({th.rho_t:.4f}, {th.rho_boundary:.4f})")

for rho in (10.0, th.rho_t, 18.0, 22.0, 40.0):
    eqs = dg.sne_all(rho, params)
    desc = ", ".join(f"{e.p_star:.4f} ({'stable' if e.stable else 'unstable'})" for e in eqs)
    print(f"rho={rho:8.4f}  {dg.regime_label(rho, params):10s} {desc}")

# the corner p = 1 is also a best response fixed point inside the window
print("with the corner:", [e.p_star for e in dg.sne_all(18.0, params, include_boundary=True)])

rho_star, d = dg.optimal_price(params)
print(f"\noptimal price {rho_star:.4f} gives delay density {d:.6f} = 3e = {3 * math.e:.6f}")
print("penalty of the bad branch:", dg.bad_equilibrium_penalty(params), " e/2 =", math.e / 2)

# Price of Anarchy. value = optimal cost / worst equilibrium cost, so 1 is
# perfect; it drops inside the window, where the bad equilibrium lives,
# and recovers as soon as that equilibrium disappears at rho = e^3.
grid = np.linspace(th.rho_t, 30, 12)
print("\n rho      PoA     bounds")
for rho in grid:
    rep = dg.poa(rho, params)
    print(f"{rho:7.3f}  {rep.value:.4f}  [{rep.lower_bound:.4f}, {rep.upper_bound:.4f}]")
