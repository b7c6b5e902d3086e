"""
Two real branches of Lambert W
==============================

Every equilibrium of the delay game is a Lambert W value, so start there.
"""
import math

import numpy as np

from sagames import Branch, lambert_w, lambert_w_prime

# Both branches meet at x = -1/e where they equal -1.
x0 = -1 / math.e
print("W0(-1/e) =", lambert_w(x0), "  W-1(-1/e) =", lambert_w(x0, Branch.MINUS1))

# On [-1/e, 0) there are two solutions of w e^w = x
xs = np.linspace(-1 / math.e, -0.01, 8)
print("\n      x         W0          W-1")
for x in xs:
    print(f"{x:9.5f}  {lambert_w(x):10.6f}  {lambert_w(x, Branch.MINUS1):10.6f}")

# residuals over a dense grid
grid = np.linspace(-1 / math.e + 1e-9, 50, 10_000)
res = max(abs(lambert_w(x) * math.exp(lambert_w(x)) - x) / max(1, abs(x)) for x in grid)
print("\nworst relative residual on the principal branch:", res)

# The derivative W / (x (1 + W)) blows up at the branch point.
for x in (-0.36, -0.3, 0.5, math.e):
    print(f"W0'({x:.3f}) = {lambert_w_prime(x):.6f}")
