"""Where the closed-form friction and diffusion come from.

1. Drag one atom through the cavity at constant speed and average the force:
   the slope of force against velocity is the friction coefficient.
2. Eliminate the cavity field fluctuations: the momentum diffusion that
   remains sets the temperature kT = D / |F_1| = kappa / 2.
"""

import numpy as np

from cavcool import SimParams, friction_scan, local_friction, predict_single_atom
from cavcool.noise import effective_momentum_diffusion

params = SimParams(n_atoms=1, u0=-0.01, gamma=0.0, delta=-1.0, eta=3.0)
basis = params.basis()
pred = predict_single_atom(params)

scan = friction_scan(params, basis, np.linspace(-0.1, 0.1, 9))
print(f"friction from the velocity scan: {scan.slope:.4e}")
print(f"closed form -eta^2 U0^2 / 4:     {pred.f1_bar:.4e}")

theta = 2 * np.pi * np.arange(64) / 64
print(f"position average of the local friction: {local_friction(params, theta).mean():.4e}")
print("local friction vanishes at nodes and antinodes:",
      local_friction(params, np.array([0.0, np.pi / 2, np.pi])))

# <dP^2> = 2 D dt, hence the factor 1/2
d = 0.5 * np.mean([effective_momentum_diffusion([t], basis, params) for t in theta])
print(f"momentum diffusion, field noise eliminated: {d:.4e}")
print(f"closed form kappa eta^2 U0^2 / 8:          {pred.d_bar:.4e}")
print(f"temperature D / |F_1| = {d / abs(scan.slope):.3f} kappa (closed form 0.5)")
