"""
Selfish nodes and a price on energy
===================================

Each node maximises q (exp(-p lam C) - rho). Without a price everybody
transmits all the time, which is far from the team optimum. A price
rho = 1/e (dense case) fixes that exactly.
"""
import math

import numpy as np

from sagames import GameParams, team_densities
from sagames import goodput_game as gg

params = GameParams(lam=1.0, C=3.0)

print(" rho      p*       density   PoA")
for rho in (0.0, 0.02, 0.04, 1 / math.e, 0.6, 1.0):
    eq = gg.sne(rho, params)
    d = params.lam * gg.equilibrium_goodput(rho, params)
    print(f"{rho:5.3f}  {eq.p_star:7.4f}  {d:8.5f}   {gg.poa(rho, params).value:.4g}")

rho_star = gg.optimal_price(params)
print("\noptimal price", rho_star, " team density", team_densities(params)[0])

# Beyond rho = exp(-lam C) the equilibrium earns nothing and the PoA is infinite,
# yet the equilibrium density of success is maximal there. The PoA only
# looks at utilities, which include the price.

# Replicator dynamics pull every interior start to the equilibrium.
for p0 in (0.05, 0.5, 0.95):
    traj = gg.replicator_trajectory(p0, 0.5, params)
    i = np.searchsorted(traj.times, [1, 10, 100])
    print(f"p0={p0}: p(1)={traj.states[i[0]]:.4f} p(10)={traj.states[i[1]]:.4f} "
          f"p(100)={traj.states[i[2]]:.6f} -> {traj.final:.9f} (target {math.log(2) / 3:.9f})")
