"""
Recycling gains against mirror reflectivity
===========================================

The closed-form gains of power recycling (A) and dual recycling (B) are
swept over the mirror reflectivity and compared with the traversal-sum
engine, which adds the cavity round trips one by one.
"""

import numpy as np

from cyclicwv import recycling as rc

phi = 0.1

# %%
# Gains over r for three loss levels. Both optima equal 1/sin(phi).

r = np.linspace(0.0, 0.999, 500)
for gamma in (0.0, 0.1, 0.2):
    a = np.array([rc.factor_A(x, gamma, phi) for x in r])
    b = np.array([rc.factor_B(x, gamma, phi) for x in r])
    print(f"gamma={gamma:.1f}: max A={a.max():.4f} at r={r[a.argmax()]:.3f}, max B={b.max():.4f} at r={r[b.argmax()]:.3f}")

r_a, a_max = rc.maximize_factor("power", 0.0, phi)
r_b, b_max = rc.maximize_factor("dual", 0.0, phi)
print(f"golden section: A_max={a_max:.7f} (r={r_a:.7f}), B_max={b_max:.7f} (r={r_b:.7f}), 1/sin(phi)={1 / np.sin(phi):.7f}")

# %%
# The series oracle reproduces the closed forms. n_used is the number of
# round trips the sum needed before the newest term fell below 1e-12.

for scheme, closed in (("power", rc.factor_A), ("dual", rc.factor_B)):
    for r_i in (0.3, 0.9, 0.99):
        ratio, n_used = rc.series_factor(rc.CavityConfig(scheme, r=r_i, gamma=0.1), phi)
        print(f"{scheme:5s} r={r_i:.2f}: series {ratio:.10f}  closed {closed(r_i, 0.1, phi):.10f}  n_used={n_used}")

# %%
# The cos(2 phi) variant of A drifts away from the series as r grows.

for r_i in (0.3, 0.6, 0.9):
    ratio, _ = rc.series_factor(rc.CavityConfig("power", r=r_i), phi)
    print(f"r={r_i:.1f}: series {ratio:.6f}  cos(phi) {rc.factor_A(r_i, 0, phi):.6f}  cos(2 phi) {rc.factor_A_printed(r_i, 0, phi):.6f}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for gamma in (0.0, 0.1, 0.2):
        ax.plot(r, [rc.factor_A(x, gamma, phi) for x in r], label=f"A, gamma={gamma}")
        ax.plot(r, [rc.factor_B(x, gamma, phi) for x in r], "--", label=f"B, gamma={gamma}")
    ax.set_xlabel("r")
    ax.set_ylabel("gain")
    ax.legend()
    fig.savefig("recycling_gains.png", dpi=120)
