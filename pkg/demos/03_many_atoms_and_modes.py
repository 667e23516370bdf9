"""Scaling with atom number, and what a ring cavity buys.

With N U0 and U0 eta^2 held fixed the cooling time grows linearly with N.
A ring cavity supports two running waves; at equal saturation it cools
about twice as fast. Takes several minutes on one core.
"""

import numpy as np

from cavcool.analysis import linear_regression
from cavcool.scenarios import parse_config, simulate

taus = []
for n in (1, 2, 4):
    cfg = parse_config(overrides={"preset": "fig2", "n_atoms": n})
    _, result, code = simulate(cfg)
    fit = result.get("fit")
    taus.append(fit["tau_c"] if fit else np.nan)
    print(f"N = {n}: tau_c = {taus[-1]:.0f} 1/kappa, exit code {code}")
line = linear_regression([1, 2, 4], taus)
print(f"tau_c ~ {line.slope:.0f} N + {line.intercept:.0f}  (R^2 = {line.r_squared:.3f})")

ring_vs_single = {}
for name in ("fig1", "ring"):
    cfg = parse_config(overrides={"preset": name, "n_atoms": 4, "n_trajectories": 200})
    _, result, _ = simulate(cfg)
    ring_vs_single[name] = result["fit"]["tau_c"]
print("tau_ring / tau_single =", round(ring_vs_single["ring"] / ring_vs_single["fig1"], 3))
