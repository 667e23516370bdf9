"""Euler-Maruyama integration of single trajectories and ensembles."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import _kernel
from .dynamics import drift
from .model import ModeBasis, SimParams, SystemState, empty_cavity_amplitude
from .noise import induced_increments, n_normals, spontaneous_increments

log = logging.getLogger(__name__)

DEFAULT_STRIDE = 200
_CHUNK_NORMALS = 1 << 19


class DivergenceError(RuntimeError):
    """Too many trajectories of an ensemble ran away."""

    def __init__(self, message, series=None):
        super().__init__(message)
        self.series = series


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for trajectory ``index`` of run ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def step(state: SystemState, basis: ModeBasis, params: SimParams,
         rng: np.random.Generator | None = None, noise: bool = True) -> SystemState:
    """One Euler-Maruyama step (reference implementation, not used in ensembles)."""
    dt = params.dt
    d = drift(state, basis, params)
    theta = state.theta + d.dtheta * dt
    p = state.p + d.dp * dt
    alpha = state.alpha + d.dalpha * dt
    if noise:
        if rng is None:
            raise ValueError("a random generator is required when noise is on")
        inc = spontaneous_increments(state, basis, params, dt, rng)
        inc = inc + induced_increments(state, basis, params, dt, rng)
        p = p + inc.dP
        alpha = alpha + inc.dA
    return SystemState(theta, p, alpha, state.t + dt)


@dataclass
class FlatSampler:
    """Atoms spread evenly in space with a large Gaussian momentum spread.

    With ``stratified=True`` each atom of each trajectory draws its position
    from its own slice of ``[0, 2 pi)``; the slices tile the period, so the
    ensemble stays flat while position-induced scatter between runs shrinks.
    Atoms of the same trajectory land in slices ``2 pi / N`` apart.
    """

    e_kin0: float
    stratified: bool = True

    def __call__(self, index: int, params: SimParams, basis: ModeBasis,
                 rng: np.random.Generator) -> SystemState:
        N = params.n_atoms
        u = rng.uniform(0.0, 1.0, (2, N))
        sigma = np.sqrt(self.e_kin0)
        if self.stratified:
            n_traj = params.n_trajectories
            slot = np.arange(N) * n_traj + (index % n_traj)
            theta = 2 * np.pi * (slot + u[0]) / (N * n_traj)
            # momentum quantile slots follow a run-wide shuffle, independent of position
            order = np.random.default_rng([params.seed, n_traj, N]).permutation(N * n_traj)
            p = sigma * ndtri((order[slot] + u[1]) / (N * n_traj))
        else:
            theta = 2 * np.pi * u[0]
            p = sigma * ndtri(u[1])
        return SystemState(theta, p, empty_cavity_amplitude(params), 0.0)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    e_kin: np.ndarray
    photons: np.ndarray  # (n_samples, M)
    localization: np.ndarray
    final_state: SystemState
    status: str = "completed"
    index: int = 0

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"


def _sample(state: SystemState):
    N = state.n_atoms
    e = float(np.mean(state.p ** 2)) if N else 0.0
    loc = float(np.mean(np.cos(state.theta) ** 2)) if N else 0.0
    return e, np.abs(state.alpha) ** 2, loc


def run_trajectory(initial: SystemState, basis: ModeBasis, params: SimParams,
                   rng: np.random.Generator | None = None, stride: int = DEFAULT_STRIDE,
                   noise: bool = True, index: int = 0) -> TrajectoryRecord:
    """Integrate to ``params.t_final``, sampling observables every ``stride`` steps.

    The initial state is sampled at ``t = 0``; a final partial block is
    sampled at its end.
    """
    if noise and rng is None:
        raise ValueError("a random generator is required when noise is on")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    theta = initial.theta.astype(float).copy()
    p = initial.p.astype(float).copy()
    alpha = initial.alpha.astype(complex).copy()
    N, M = theta.size, alpha.size
    if M != basis.n_modes:
        raise ValueError("state and basis disagree on the number of modes")
    nz = n_normals(N, M) if noise else 0

    n_steps = params.n_steps
    n_samples = 1 + -(-n_steps // stride)
    e_out = np.empty(n_samples)
    ph_out = np.empty((n_samples, M))
    loc_out = np.empty(n_samples)
    step_out = np.zeros(n_samples, dtype=np.int64)
    e_out[0], ph_out[0], loc_out[0] = _sample(SystemState(theta, p, alpha))
    n_rec = 1

    # draw normals in chunks of whole strides, a few MB at a time
    chunk = max(stride, (_CHUNK_NORMALS // max(nz, 1)) // stride * stride)
    status = "completed"
    done = 0
    while done < n_steps:
        rows = min(chunk, n_steps - done)
        normals = rng.standard_normal((rows, nz)) if noise else np.zeros((rows, 0))
        code, taken, n_rec = _kernel.advance(
            theta, p, alpha, basis.plus, basis.minus, params.u0, params.gamma, params.delta,
            params.kappa, params.eta, 2.0 * params.omega_r, params.dt, normals, noise,
            stride, done, n_steps, e_out, ph_out, loc_out, step_out, n_rec)
        done += taken
        if code == _kernel.DIVERGED:
            status = "diverged"
            break
    t = initial.t + done * params.dt
    times = initial.t + step_out[:n_rec] * params.dt

    return TrajectoryRecord(times, e_out[:n_rec].copy(), ph_out[:n_rec].copy(), loc_out[:n_rec].copy(),
                            SystemState(theta, p, alpha, t), status, index)


@dataclass
class EnsembleSeries:
    """Ensemble statistics over completed trajectories."""

    times: np.ndarray
    e_kin_mean: np.ndarray
    e_kin_sem: np.ndarray
    photon_mean: np.ndarray  # total over modes
    localization_mean: np.ndarray
    n_trajectories: int
    n_diverged: int = 0
    n_modes: int = 1
    final_states: list = field(default_factory=list, repr=False)

    @property
    def photon_mean_excess(self) -> np.ndarray:
        """Photon number with the half quantum of vacuum noise per mode removed."""
        return self.photon_mean - 0.5 * self.n_modes

    def __len__(self):
        return self.times.size


def aggregate(records: list[TrajectoryRecord], n_modes: int) -> EnsembleSeries:
    ok = [r for r in sorted(records, key=lambda r: r.index) if not r.diverged]
    n_div = len(records) - len(ok)
    if not ok:
        empty = np.zeros(0)
        return EnsembleSeries(empty, empty, empty, empty, empty, 0, n_div, n_modes)
    n_samples = min(r.times.size for r in ok)
    e = np.stack([r.e_kin[:n_samples] for r in ok])
    ph = np.stack([r.photons[:n_samples].sum(axis=1) for r in ok])
    lo = np.stack([r.localization[:n_samples] for r in ok])
    n = len(ok)
    sem = e.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(n_samples, np.nan)
    return EnsembleSeries(ok[0].times[:n_samples].copy(), e.mean(axis=0), sem, ph.mean(axis=0),
                          lo.mean(axis=0), n, n_div, n_modes, [r.final_state for r in ok])


def run_ensemble(params: SimParams, basis: ModeBasis | None = None, initial_sampler=None, *,
                 stride: int = DEFAULT_STRIDE, threads: int | None = None, noise: bool = True,
                 max_diverged_fraction: float = 0.1) -> EnsembleSeries:
    """Run ``params.n_trajectories`` independent trajectories and average them.

    ``initial_sampler(index, params, basis, rng)`` returns the starting state;
    it draws from the trajectory's own stream before any integration noise.
    Results do not depend on ``threads``.
    """
    basis = basis or params.basis()
    if initial_sampler is None:
        initial_sampler = FlatSampler(e_kin0=0.0)
    threads = threads or os.cpu_count() or 1

    def one(index):
        rng = trajectory_rng(params.seed, index)
        start = initial_sampler(index, params, basis, rng)
        return run_trajectory(start, basis, params, rng, stride=stride, noise=noise, index=index)

    indices = range(params.n_trajectories)
    if threads == 1:
        records = [one(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, indices))

    series = aggregate(records, basis.n_modes)
    if series.n_diverged:
        log.warning("%d of %d trajectories diverged", series.n_diverged, params.n_trajectories)
    if series.n_diverged > max_diverged_fraction * params.n_trajectories:
        raise DivergenceError(
            f"{series.n_diverged} of {params.n_trajectories} trajectories diverged", series)
    return series
