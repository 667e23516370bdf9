"""Semiclassical Monte Carlo simulation of cavity-enhanced laser cooling."""

from .model import (ModeBasis, ModeFamily, RegimeWarning, SimParams, SystemState,
                    build_mode_basis, empty_cavity_amplitude, field_amplitude, field_gradient)
from .dynamics import Drift, drift, dipole_force, field_drift, radiation_pressure_force
from .noise import NoiseIncrement, diffusion_matrix, induced_increments, spontaneous_increments
from .integrator import (DivergenceError, EnsembleSeries, FlatSampler, TrajectoryRecord,
                         run_ensemble, run_trajectory, step, trajectory_rng)
from .analysis import FitResult, NoCoolingDetected, fit_exponential, friction_scan, local_friction
from .predictor import (AnalyticPredictions, doppler_reference, photon_budget, predict_scaled,
                        predict_single_atom, ring_multimode_predictions)

__version__ = "0.1.0"
