"""Closed-form estimates for friction, temperature, cooling time and photon budget.

Conventions: k = 1, energies and rates in units of kappa unless a name says
otherwise. Cooling times are returned in ``1/kappa``; ``*_omega_r`` variants
are in ``1/omega_R``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import SimParams


class NoCoolingChannel(ValueError):
    pass


@dataclass
class AnalyticPredictions:
    f1_bar: float
    d_bar: float
    k_b_t: float  # kappa units
    tau_c: float  # 1/kappa
    tau_c_omega_r: float
    n_modes: int = 1
    s: float | None = None
    tau_c_scaled: float | None = None
    f1_doppler: float | None = None
    tau_c_doppler: float | None = None
    n_ph: float | None = None
    n_ph_atomic: float | None = None
    n_ph_doppler: float | None = None
    validity_coupling: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _pump_and_kappa(params: SimParams) -> tuple[float, float]:
    return float(np.abs(params.eta[0])), float(params.kappa[0])


def cooling_time_omega_r(eta: float, u0: float, kappa: float = 1.0) -> float:
    """Single-mode cooling time ``kappa^4 / (eta^2 U0^2)`` in ``1/omega_R``."""
    if eta == 0 or u0 == 0:
        raise NoCoolingChannel("pump strength and light shift must both be nonzero")
    return kappa ** 4 / (eta ** 2 * u0 ** 2)


def predict_single_atom(params: SimParams) -> AnalyticPredictions:
    eta, kappa = _pump_and_kappa(params)
    u0 = params.u0
    if eta == 0 or u0 == 0:
        raise NoCoolingChannel("pump strength and light shift must both be nonzero")
    x = eta ** 2 * u0 ** 2 / kappa ** 4
    f1 = -x / 4.0
    d = kappa * x / 8.0
    tau_w = cooling_time_omega_r(eta, u0, kappa)
    pred = AnalyticPredictions(f1_bar=f1, d_bar=d, k_b_t=-d / f1, tau_c=tau_w * params.kappa_over_omega_r,
                               tau_c_omega_r=tau_w, validity_coupling=params.n_atoms * abs(u0))
    if params.gamma > 0:
        pred.n_ph = photon_budget(params)
    if params.g_over_kappa is not None:
        s, f1s, tau_s = predict_scaled(params)
        pred.s = s
        pred.tau_c_scaled = tau_s * params.kappa_over_omega_r
        if 0 < s < 1:
            f1d, tau_d, nph_d = doppler_reference(s, params.gamma_atom_over_omega_r)
            pred.f1_doppler = f1d
            pred.tau_c_doppler = tau_d * params.kappa_over_omega_r
            pred.n_ph_doppler = nph_d
        if params.gamma_atom_over_omega_r is not None:
            pred.n_ph_atomic = photon_budget_atomic(params.gamma_atom_over_omega_r, params.g_over_kappa)
    return pred


def predict_scaled(params: SimParams) -> tuple[float, float, float]:
    """Saturation, friction and cooling time (``1/omega_R``) in saturation form."""
    if params.g_over_kappa is None:
        raise ValueError("g_over_kappa is required")
    eta, kappa = _pump_and_kappa(params)
    g = params.g_over_kappa * kappa
    s = eta ** 2 * params.u0 ** 2 / (4.0 * kappa ** 2 * g ** 2)
    if s == 0:
        raise NoCoolingChannel("zero saturation")
    f1 = -s * (g / kappa) ** 2
    tau = kappa ** 2 / (4.0 * s * g ** 2)
    return s, f1, tau


def doppler_reference(s: float, gamma_atom_over_omega_r: float | None = None):
    """Free-space Doppler cooling at optimal detuning, same saturation.

    Returns friction, cooling time in ``1/omega_R`` and, if the linewidth is
    given, the scattered-photon number per cooling time.
    """
    if not 0 < s < 1:
        raise ValueError(f"saturation must lie in (0, 1), got {s}")
    n_ph = 0.5 * gamma_atom_over_omega_r if gamma_atom_over_omega_r is not None else None
    return -s, 1.0 / (4.0 * s), n_ph


def photon_budget(params: SimParams) -> float:
    """Spontaneous photons per atom per cooling time, ``gamma kappa^2 / (2 omega_R U0^2)``."""
    if params.u0 == 0:
        raise ValueError("U0 must be nonzero")
    kappa = float(params.kappa[0])
    return params.gamma * kappa ** 2 * params.kappa_over_omega_r / (2.0 * params.u0 ** 2)


def photon_budget_atomic(gamma_atom_over_omega_r: float, g_over_kappa: float) -> float:
    """Same budget from atom and cavity constants, ``(Gamma/omega_R)(kappa/g)^2 / 2``."""
    return 0.5 * gamma_atom_over_omega_r / g_over_kappa ** 2


def ring_multimode_predictions(params: SimParams, n_modes: int) -> AnalyticPredictions:
    """Single-mode estimates with cooling time and photon budget divided by ``n_modes``.

    ``n_modes=2`` is the ring-cavity result; larger values extrapolate it.
    The reference pump is the root-sum-square of the per-mode pumps, so a
    ring pumped with ``eta / sqrt(2)`` in each running wave is compared with
    a standing-wave cavity pumped with ``eta`` (same mean saturation).
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    eta_total = float(np.sqrt(np.sum(np.abs(params.eta) ** 2)))
    single = params.replace(n_modes=1, eta=eta_total, delta=params.delta[0], kappa=params.kappa[0],
                            mode_family="single_cosine", mode_normalization="verbatim")
    pred = predict_single_atom(single)
    pred.n_modes = n_modes
    pred.tau_c /= n_modes
    pred.tau_c_omega_r /= n_modes
    pred.f1_bar *= n_modes
    pred.d_bar *= n_modes
    for name in ("tau_c_scaled", "n_ph", "n_ph_atomic"):
        value = getattr(pred, name)
        if value is not None:
            setattr(pred, name, value / n_modes)
    pred.validity_coupling = n_modes * params.n_atoms * abs(params.u0)
    return pred
