"""Deterministic drift of the coupled atom-field equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModeBasis, SimParams, SystemState, fields


@dataclass
class Drift:
    dtheta: np.ndarray
    dp: np.ndarray
    dalpha: np.ndarray


def dipole_forces(state: SystemState, basis: ModeBasis, params: SimParams) -> np.ndarray:
    """``-U0 (E dE* + E* dE)`` for every atom, in hbar k kappa."""
    E, G = fields(state, basis)
    return -2.0 * params.u0 * np.real(E * np.conj(G))


def radiation_pressure_forces(state: SystemState, basis: ModeBasis, params: SimParams) -> np.ndarray:
    """``i gamma (E dE* - E* dE)`` for every atom, in hbar k kappa."""
    E, G = fields(state, basis)
    return -2.0 * params.gamma * np.imag(E * np.conj(G))


def dipole_force(state, basis, params, n: int) -> float:
    return float(dipole_forces(state, basis, params)[n])


def radiation_pressure_force(state, basis, params, n: int) -> float:
    return float(radiation_pressure_forces(state, basis, params)[n])


def _scattered(state: SystemState, basis: ModeBasis) -> np.ndarray:
    # sum_n E(x_n) f_k*(x_n), shared by all mode equations
    f = basis.values(state.theta)
    E = f @ state.alpha
    return np.conj(f).T @ E


def field_drifts(state: SystemState, basis: ModeBasis, params: SimParams) -> np.ndarray:
    S = _scattered(state, basis)
    a = state.alpha
    return (-np.conj(params.eta) + 1j * (params.delta * a - params.u0 * S)
            - (params.kappa * a + params.gamma * S))


def field_drift(state, basis, params, k: int) -> complex:
    return complex(field_drifts(state, basis, params)[k])


def drift(state: SystemState, basis: ModeBasis, params: SimParams) -> Drift:
    f = basis.values(state.theta)
    fp = basis.derivatives(state.theta)
    E = f @ state.alpha
    G = fp @ state.alpha
    EG = E * np.conj(G)
    dp = -2.0 * params.u0 * EG.real - 2.0 * params.gamma * EG.imag
    S = np.conj(f).T @ E
    a = state.alpha
    dalpha = (-np.conj(params.eta) + 1j * (params.delta * a - params.u0 * S)
              - (params.kappa * a + params.gamma * S))
    dtheta = 2.0 * params.omega_r * state.p
    return Drift(dtheta, dp, dalpha)
