"""Units, parameters, cavity mode bases and the system state.

Everything is dimensionless with hbar = 1:

* position is the phase ``theta = k x`` (stored unwrapped),
* momentum is in units of ``hbar k``,
* rates and frequencies are in units of the reference cavity decay rate
  ``kappa``, time in units of ``1/kappa``,
* kinetic energy is reported in recoil units, ``E_kin = p**2`` (hbar omega_R).

The recoil frequency only enters through the ratio ``kappa / omega_R``.
"""

from __future__ import annotations

import dataclasses
import enum
import warnings
from dataclasses import dataclass, field

import numpy as np


class RegimeWarning(UserWarning):
    """Parameters leave the regime where the semiclassical model is trustworthy."""


class ModeFamily(str, enum.Enum):
    SINGLE_COSINE = "single_cosine"
    RING_PAIR = "ring_pair"
    DEGENERATE_SET = "degenerate_set"


@dataclass(frozen=True)
class ModeBasis:
    """Mode functions ``f_k(theta) = plus[k] e^{i theta} + minus[k] e^{-i theta}``.

    All modes share one wavenumber, so two complex coefficients per mode are
    enough for every family we support. ``labels`` is a transverse index that
    only enters the orthogonality bookkeeping: modes with different labels are
    orthogonal through their (unmodelled) transverse profiles.
    """

    family: ModeFamily
    plus: np.ndarray
    minus: np.ndarray
    labels: np.ndarray
    mean_intensity: float  # period average of |f_k|^2, identical for all members

    @property
    def n_modes(self) -> int:
        return self.plus.size

    def values(self, theta) -> np.ndarray:
        """``f_k(theta_n)`` with shape ``(len(theta), M)``."""
        e = np.exp(1j * np.asarray(theta, dtype=float))[..., None]
        return self.plus * e + self.minus * np.conj(e)

    def derivatives(self, theta) -> np.ndarray:
        """``d f_k / d theta`` at ``theta_n``, shape ``(len(theta), M)``."""
        e = np.exp(1j * np.asarray(theta, dtype=float))[..., None]
        return 1j * (self.plus * e - self.minus * np.conj(e))

    def overlap_matrix(self, n_points: int = 256) -> np.ndarray:
        """Period-averaged overlaps ``<f_j f_k^*>`` including the transverse labels.

        The trapezoidal rule on a periodic grid is exact for these trigonometric
        polynomials, so the result is correct to round-off.
        """
        theta = 2 * np.pi * np.arange(n_points) / n_points
        f = self.values(theta)
        overlap = f.T @ f.conj() / n_points
        same_label = self.labels[:, None] == self.labels[None, :]
        return np.where(same_label, overlap, 0.0)


def build_mode_basis(family, n_modes: int | None = None, normalization: str = "verbatim") -> ModeBasis:
    """Construct a mode basis.

    ``normalization="verbatim"`` uses ``cos theta`` and ``e^{+-i theta}`` as is.
    ``normalization="standing"`` rescales every member so that its period
    average of ``|f|^2`` equals that of ``cos theta`` (1/2); for running waves
    this is the ``1/sqrt(2)`` factor needed to compare a ring cavity with a
    standing-wave cavity at equal mode volume.
    """
    family = ModeFamily(family)
    if normalization not in ("verbatim", "standing"):
        raise ValueError(f"unknown normalization {normalization!r}")

    if family is ModeFamily.SINGLE_COSINE:
        if n_modes not in (None, 1):
            raise ValueError("single_cosine basis has exactly one mode")
        plus, minus, labels = [0.5], [0.5], [0]
    elif family is ModeFamily.RING_PAIR:
        if n_modes not in (None, 2):
            raise ValueError("ring_pair basis has exactly two modes")
        plus, minus, labels = [1.0, 0.0], [0.0, 1.0], [0, 0]
    else:
        if n_modes is None or n_modes < 1:
            raise ValueError("degenerate_set needs n_modes >= 1")
        # cos/sin pairs sharing a transverse label, repeated with new labels
        plus, minus, labels = [], [], []
        for j in range(n_modes):
            if j % 2 == 0:
                plus.append(0.5)
                minus.append(0.5)
            else:
                plus.append(-0.5j)
                minus.append(0.5j)
            labels.append(j // 2)

    plus = np.asarray(plus, dtype=complex)
    minus = np.asarray(minus, dtype=complex)
    mean_intensity = float(np.abs(plus[0]) ** 2 + np.abs(minus[0]) ** 2)
    if normalization == "standing":
        scale = np.sqrt(0.5 / mean_intensity)
        plus, minus = plus * scale, minus * scale
        mean_intensity = 0.5
    return ModeBasis(family, plus, minus, np.asarray(labels, dtype=int), mean_intensity)


def _per_mode(value, n_modes: int, dtype) -> np.ndarray:
    arr = np.asarray(value, dtype=dtype)
    if arr.ndim == 0:
        arr = np.full(n_modes, arr, dtype=dtype)
    if arr.shape != (n_modes,):
        raise ValueError(f"expected a scalar or {n_modes} per-mode values, got shape {arr.shape}")
    return arr


@dataclass
class SimParams:
    """Physical and numerical parameters, all in units of kappa (see module doc).

    Per-mode quantities (``delta``, ``kappa``, ``eta``) accept scalars, which
    are broadcast over ``n_modes``.
    """

    n_atoms: int
    u0: float
    gamma: float
    delta: np.ndarray
    eta: np.ndarray
    n_modes: int = 1
    kappa: np.ndarray = 1.0
    g_over_kappa: float | None = None
    gamma_atom_over_omega_r: float | None = None
    kappa_over_omega_r: float = 415.0
    dt: float = 0.01
    t_final: float = 800.0
    n_trajectories: int = 100
    seed: int = 0
    mode_family: ModeFamily = ModeFamily.SINGLE_COSINE
    mode_normalization: str = "verbatim"

    def __post_init__(self):
        self.mode_family = ModeFamily(self.mode_family)
        if self.n_atoms < 0:
            raise ValueError("n_atoms must be >= 0")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        self.delta = _per_mode(self.delta, self.n_modes, float)
        self.kappa = _per_mode(self.kappa, self.n_modes, float)
        self.eta = _per_mode(self.eta, self.n_modes, complex)
        if np.any(self.kappa <= 0):
            raise ValueError("kappa must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.kappa_over_omega_r <= 0:
            raise ValueError("kappa_over_omega_r must be positive")

    @property
    def omega_r(self) -> float:
        """Recoil frequency in units of kappa."""
        return 1.0 / self.kappa_over_omega_r

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def basis(self) -> ModeBasis:
        return build_mode_basis(self.mode_family, self.n_modes, self.mode_normalization)

    def replace(self, **changes) -> SimParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["delta"] = self.delta.tolist()
        d["kappa"] = self.kappa.tolist()
        d["eta"] = [[z.real, z.imag] for z in self.eta.tolist()]
        d["mode_family"] = self.mode_family.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SimParams:
        d = dict(d)
        if "eta" in d:
            eta = d["eta"]
            if isinstance(eta, list):
                eta = [complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in eta]
            d["eta"] = eta
        return cls(**d)

    def regime_warnings(self, basis: ModeBasis | None = None) -> list[str]:
        """Human-readable messages for violated validity conditions."""
        msgs = []
        if np.any(np.abs(self.delta + self.kappa) > 0.5 * self.kappa):
            msgs.append("cavity detuning far from -kappa; cooling force is not optimal")
        coupling = self.n_atoms * abs(self.u0)
        if basis is not None and basis.n_modes > 1:
            coupling *= basis.n_modes
        if coupling > self.kappa.min():
            msgs.append(f"collective light shift {coupling:.3g} exceeds kappa; cooling may fail")
        dt_scale = self.dt * max(self.kappa.max(), np.abs(self.delta).max(), self.n_atoms * abs(self.u0))
        if dt_scale > 0.1:
            msgs.append(f"timestep too coarse: dt*rate = {dt_scale:.3g} > 0.1")
        if self.g_over_kappa is not None:
            from .observables import saturation_closed_form

            s = saturation_closed_form(self)
            if s >= 1:
                msgs.append(f"model validity violated: saturation s = {s:.3g} >= 1")
        return msgs

    def warn_regime(self, basis: ModeBasis | None = None) -> list[str]:
        msgs = self.regime_warnings(basis)
        for msg in msgs:
            warnings.warn(msg, RegimeWarning, stacklevel=2)
        return msgs


@dataclass
class SystemState:
    theta: np.ndarray
    p: np.ndarray
    alpha: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float, ndmin=1)
        self.p = np.array(self.p, dtype=float, ndmin=1)
        self.alpha = np.array(self.alpha, dtype=complex, ndmin=1)
        if self.theta.shape != self.p.shape:
            raise ValueError("theta and p must have the same length")

    @property
    def n_atoms(self) -> int:
        return self.theta.size

    def copy(self) -> SystemState:
        return SystemState(self.theta.copy(), self.p.copy(), self.alpha.copy(), self.t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.p))
                    and np.all(np.isfinite(self.alpha)))


def fields(state: SystemState, basis: ModeBasis) -> tuple[np.ndarray, np.ndarray]:
    """Field ``E(theta_n)`` and its gradient ``dE/dtheta`` at every atom."""
    f = basis.values(state.theta)
    fp = basis.derivatives(state.theta)
    return f @ state.alpha, fp @ state.alpha


def field_amplitude(state: SystemState, basis: ModeBasis, n: int) -> complex:
    if not 0 <= n < state.n_atoms:
        raise IndexError(f"atom index {n} out of range")
    return complex(basis.values(state.theta[n : n + 1])[0] @ state.alpha)


def field_gradient(state: SystemState, basis: ModeBasis, n: int) -> complex:
    if not 0 <= n < state.n_atoms:
        raise IndexError(f"atom index {n} out of range")
    return complex(basis.derivatives(state.theta[n : n + 1])[0] @ state.alpha)


def empty_cavity_amplitude(params: SimParams) -> np.ndarray:
    """Deterministic steady state of the pumped cavity without atoms."""
    return -np.conj(params.eta) / (params.kappa - 1j * params.delta)
