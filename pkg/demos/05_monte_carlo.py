"""
Checking the closed forms by simulation
=======================================

Interferers are drawn nearest first, so a snapshot only needs the ones
inside the window; the rest enter through an exact far-field factor.
"""
import math

import numpy as np
from scipy import stats

from sagames import NetworkParams
from sagames.montecarlo import (SimConfig, coverage_z_score, estimate_coverage,
                                estimate_local_delay, simulate_local_delay_slots,
                                truncation_radius)

params = NetworkParams(lam=0.2, r=1.0, beta=4.0, T=1.0)
p = 0.5
closed = math.exp(-p * params.lam_C)
print("window radius", truncation_radius(params, p))

est = estimate_coverage(params, p, SimConfig(n_samples=100_000, seed=7))
print(f"coverage {est.value:.5f} +- {est.std_error:.5f}, closed form {closed:.5f}, "
      f"z = {coverage_z_score(est, closed):.2f}")

# heavier tails need more points; beta = 2.5 still runs in a couple of seconds
heavy = NetworkParams(lam=0.1, r=1.0, beta=2.5, T=0.5)
q = math.exp(-0.6 * heavy.lam_C)
est = estimate_coverage(heavy, 0.6, SimConfig(n_samples=50_000, seed=1))
print(f"beta=2.5: {est.value:.5f} vs {q:.5f} (z = {coverage_z_score(est, q):.2f}), "
      f"{est.budget_fraction:.1%} of snapshots hit the point budget")

# Local delay, with positions redrawn every slot: geometric slot counts.
sim = SimConfig(n_samples=10_000, seed=0)
delay = estimate_local_delay(params, p, sim)
print(f"\nmean local delay {delay.value:.4f} +- {delay.std_error:.4f}, "
      f"1/g = {1 / (p * closed):.4f}")
counts, _ = simulate_local_delay_slots(params, p, sim)
q = p * closed
k = np.arange(1, 9)
obs = np.array([(counts == i).sum() for i in k] + [(counts > 8).sum()])
exp = counts.size * np.append(q * (1 - q) ** (k - 1), (1 - q) ** 8)
print("geometric fit p-value", stats.chisquare(obs, exp).pvalue)
