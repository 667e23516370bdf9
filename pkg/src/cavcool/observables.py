"""Scalar diagnostics of states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModeBasis, SimParams, SystemState, fields


@dataclass
class ObservableSet:
    e_kin_per_atom: float
    photon_number: np.ndarray
    localization: float
    saturation: float | None


def kinetic_energy_per_atom(state: SystemState, params: SimParams | None = None) -> float:
    """Mean of ``p**2`` over atoms, i.e. kinetic energy per atom in hbar omega_R."""
    if state.n_atoms == 0:
        return 0.0
    return float(np.mean(state.p ** 2))


def photon_numbers(state: SystemState) -> np.ndarray:
    return np.abs(state.alpha) ** 2


def localization(state: SystemState) -> float:
    """Mean ``cos^2 theta``: 1 with all atoms at antinodes, 0 at nodes."""
    if state.n_atoms == 0:
        return 0.0
    return float(np.mean(np.cos(state.theta) ** 2))


def saturation_closed_form(params: SimParams) -> float:
    """``s = eta^2 U0^2 / (4 kappa^2 g^2)`` using the first mode's pump."""
    if params.g_over_kappa is None:
        raise ValueError("g_over_kappa is required for the saturation estimate")
    eta2 = float(np.abs(params.eta[0]) ** 2)
    kappa = float(params.kappa[0])
    return eta2 * params.u0 ** 2 / (4.0 * kappa ** 2 * params.g_over_kappa ** 2)


def pump_for_saturation(s: float, u0: float, g_over_kappa: float, kappa: float = 1.0) -> float:
    """Invert :func:`saturation_closed_form` for the pump strength."""
    return float(np.sqrt(4.0 * s * kappa ** 2 * g_over_kappa ** 2 / u0 ** 2))


def saturation(state: SystemState, basis: ModeBasis, params: SimParams) -> float:
    """Atomic saturation averaged over atoms, from the local intensity.

    ``g^2 / (Delta_a^2 + Gamma^2) = (U0^2 + gamma^2) / g^2``, so no atomic
    detuning is needed.
    """
    if params.g_over_kappa is None:
        raise ValueError("g_over_kappa is required for the saturation estimate")
    if state.n_atoms == 0:
        return 0.0
    E, _ = fields(state, basis)
    per_photon = (params.u0 ** 2 + params.gamma ** 2) / params.g_over_kappa ** 2
    return float(np.mean(np.abs(E) ** 2) * per_photon)


def observe(state: SystemState, basis: ModeBasis, params: SimParams) -> ObservableSet:
    sat = saturation(state, basis, params) if params.g_over_kappa is not None else None
    return ObservableSet(kinetic_energy_per_atom(state), photon_numbers(state),
                         localization(state), sat)
