"""Cooling of a single atom in a standing-wave cavity.

Runs the single-atom ensemble with the published parameters, fits the
exponential law and compares with the closed-form estimates.
Takes a few seconds.
"""

import numpy as np

from cavcool import FlatSampler, SimParams, fit_exponential, predict_single_atom, run_ensemble

# N U0 = -0.6, N^2 gamma = 0.03, Delta = -0.6, eta = 3 sqrt(N); all in units of kappa
params = SimParams(n_atoms=1, u0=-0.6, gamma=0.03, delta=-0.6, eta=3.0,
                   kappa_over_omega_r=415.0, dt=0.01, t_final=800.0, n_trajectories=100, seed=1)

series = run_ensemble(params, initial_sampler=FlatSampler(e_kin0=1000.0), stride=100)
fit = fit_exponential(series, kappa_over_omega_r=params.kappa_over_omega_r)
pred = predict_single_atom(params)

print(f"trajectories: {series.n_trajectories}, diverged: {series.n_diverged}")
print(f"fitted tau_c      = {fit.tau_c:7.1f} 1/kappa   (+- {fit.stderr['tau_c']:.1f})")
print(f"closed-form tau_c = {pred.tau_c:7.1f} 1/kappa")
print(f"steady E_kin      = {fit.plateau:7.1f} hbar omega_R")
print(f"closed-form kT/2  = {pred.k_b_t * params.kappa_over_omega_r / 2:7.1f} hbar omega_R "
      "(weak-coupling, flat-distribution limit)")
print(f"photons per atom scattered in one cooling time: {pred.n_ph:.1f}")

# the atoms localize while cooling: <cos^2 theta> climbs above 1/2
print("localization at t = 0, 400, 800:",
      np.round(series.localization_mean[[0, series.times.size // 2, -1]], 3))
