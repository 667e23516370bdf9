"""Stochastic increments: spontaneous emission and photon rescattering.

Random numbers are consumed in a fixed order per step so that the compiled
ensemble kernel and the reference :func:`cavcool.integrator.step` see the same
stream: ``N`` atom kicks, ``2M`` field quadratures (re, im per mode), then
``2N`` rescattering variables (W+, W- per atom).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModeBasis, SimParams, SystemState, fields


@dataclass
class NoiseIncrement:
    dP: np.ndarray
    dA: np.ndarray

    def __add__(self, other: NoiseIncrement) -> NoiseIncrement:
        return NoiseIncrement(self.dP + other.dP, self.dA + other.dA)


def n_normals(n_atoms: int, n_modes: int) -> int:
    """Standard normals consumed per timestep."""
    return 3 * n_atoms + 2 * n_modes


def half_phase(G: np.ndarray) -> np.ndarray:
    """``exp(i phi/2)`` with ``exp(i phi) = (dE*)^2 / |dE|^2``, principal branch.

    Returns 1 where the gradient vanishes.
    """
    G = np.asarray(G, dtype=complex)
    mag = np.abs(G)
    u = np.where(mag > 0, np.conj(G) / np.where(mag > 0, mag, 1.0), 1.0)
    # principal sqrt of u**2 has arg in (-pi/2, pi/2]
    flip = (u.real < 0) | ((u.real == 0) & (u.imag < 0))
    return np.where(flip, -u, u)


def spontaneous_increments(state: SystemState, basis: ModeBasis, params: SimParams,
                           dt: float, rng: np.random.Generator, size: int | None = None) -> NoiseIncrement:
    """Momentum kicks from spontaneous emission and vacuum noise entering the modes.

    With ``size`` given, a leading axis of independent draws is added.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    lead = () if size is None else (size,)
    E, _ = fields(state, basis)
    xi = rng.standard_normal(lead + (state.n_atoms,))
    w = rng.standard_normal(lead + (basis.n_modes, 2))
    dP = np.sqrt(2.0 * params.gamma * np.abs(E) ** 2 * dt) * xi
    dA = np.sqrt(0.5 * params.kappa * dt) * (w[..., 0] + 1j * w[..., 1])
    return NoiseIncrement(dP, dA)


def rescattering_vectors(state: SystemState, basis: ModeBasis) -> tuple[np.ndarray, np.ndarray]:
    """Phase-rotated noise vectors ``v_n exp(i phi_n/2)``.

    Returns the momentum components (length N) and the field components as a
    complex ``(N, M)`` array ``c`` such that the real-part quadrature vector is
    ``-i c`` and the imaginary-part quadrature vector is ``c``.
    """
    f = basis.values(state.theta)
    fp = basis.derivatives(state.theta)
    G = fp @ state.alpha
    u = half_phase(G)
    return G * u, 0.5 * f * u[:, None]


def induced_increments(state: SystemState, basis: ModeBasis, params: SimParams,
                       dt: float, rng: np.random.Generator, size: int | None = None) -> NoiseIncrement:
    """Correlated momentum and field noise from photons rescattered between modes."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    lead = () if size is None else (size,)
    W = rng.standard_normal(lead + (state.n_atoms, 2))
    wP, c = rescattering_vectors(state, basis)
    scale = np.sqrt(2.0 * params.gamma * dt)
    wplus, wminus = W[..., 0], W[..., 1]
    dP = scale * (wP.real * wplus + wP.imag * wminus)
    dAr = scale * (c.imag * wplus[..., None] - c.real * wminus[..., None]).sum(axis=-2)
    dAi = scale * (c.real * wplus[..., None] + c.imag * wminus[..., None]).sum(axis=-2)
    return NoiseIncrement(dP, dAr + 1j * dAi)


def diffusion_matrix(state: SystemState, basis: ModeBasis, params: SimParams) -> np.ndarray:
    """Noise covariance per unit time over ``(P_1..P_N, Ar_1..Ar_M, Ai_1..Ai_M)``."""
    N, M = state.n_atoms, basis.n_modes
    E, _ = fields(state, basis)
    D = np.zeros((N + 2 * M, N + 2 * M))
    idx = np.arange(N)
    D[idx, idx] += 2.0 * params.gamma * np.abs(E) ** 2
    D[N + np.arange(2 * M), N + np.arange(2 * M)] += np.tile(0.5 * params.kappa, 2)

    wP, c = rescattering_vectors(state, basis)
    for n in range(N):
        v = np.zeros(N + 2 * M, dtype=complex)
        v[n] = wP[n]
        v[N:N + M] = -1j * c[n]
        v[N + M:] = c[n]
        D += 2.0 * params.gamma * (np.outer(v.real, v.real) + np.outer(v.imag, v.imag))
    return D


def _field_jacobian(theta: np.ndarray, basis: ModeBasis, params: SimParams) -> np.ndarray:
    # real 2M x 2M Jacobian of the field drift at fixed atom positions
    M = basis.n_modes
    f = basis.values(theta)
    K = np.diag(1j * params.delta - params.kappa) - (1j * params.u0 + params.gamma) * (np.conj(f).T @ f)
    J = np.zeros((2 * M, 2 * M))
    J[:M, :M], J[:M, M:] = K.real, -K.imag
    J[M:, :M], J[M:, M:] = K.imag, K.real
    return J


def pinned_field(theta, basis: ModeBasis, params: SimParams) -> np.ndarray:
    """Deterministic field amplitudes with the atoms held at ``theta``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    f = basis.values(theta)
    K = np.diag(1j * params.delta - params.kappa) - (1j * params.u0 + params.gamma) * (np.conj(f).T @ f)
    return np.linalg.solve(K, np.conj(params.eta))


def effective_momentum_diffusion(theta, basis: ModeBasis, params: SimParams, atom: int = 0) -> float:
    """Momentum diffusion of one atom with the field fluctuations eliminated.

    Atoms are pinned at ``theta`` and the field sits at its deterministic value.
    Field fluctuations are linearized; their zero-frequency contribution to
    the force noise is added to the direct momentum noise, including the
    momentum-field cross correlations.

    Returns the variance rate ``<dP^2>/dt``. The diffusion coefficient in the
    convention ``<dP^2> = 2 D dt`` (where ``k_B T = D / |F_1|``) is half of it.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    N, M = theta.size, basis.n_modes
    state = SystemState(theta, np.zeros(N), pinned_field(theta, basis, params))
    D = diffusion_matrix(state, basis, params)
    J = _field_jacobian(theta, basis, params)

    # force on `atom` is quadratic in the field quadratures; central differences are exact
    y0 = np.concatenate([state.alpha.real, state.alpha.imag])
    h = 1e-3

    def force(y):
        s = SystemState(theta, np.zeros(N), y[:M] + 1j * y[M:])
        E, G = fields(s, basis)
        EG = E[atom] * np.conj(G[atom])
        return -2.0 * params.u0 * EG.real - 2.0 * params.gamma * EG.imag

    grad = np.array([(force(y0 + h * e) - force(y0 - h * e)) / (2 * h) for e in np.eye(2 * M)])
    v = -np.linalg.solve(J.T, grad)
    B_yy = D[N:, N:]
    B_yP = D[N:, atom]
    return float(D[atom, atom] + 2.0 * v @ B_yP + v @ B_yy @ v)
