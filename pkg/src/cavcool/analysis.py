"""Cooling-curve fits and the brute-force friction scan."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModeBasis, SimParams


class NoCoolingDetected(ValueError):
    pass


class FitError(RuntimeError):
    pass


@dataclass
class FitResult:
    """Parameters of ``E(t) = (e0 - kT/2) exp(-t/tau_c) + kT/2``.

    Energies are in hbar omega_R; ``k_b_t_kappa`` is the same temperature in
    units of kappa when the recoil ratio is known.
    """

    e0: float
    k_b_t: float
    tau_c: float
    residual_rms: float
    stderr: dict
    iterations: int
    weighted: bool
    k_b_t_kappa: float | None = None

    @property
    def plateau(self) -> float:
        """Steady-state kinetic energy per atom (= kT/2)."""
        return 0.5 * self.k_b_t

    def to_dict(self) -> dict:
        return {"e0": self.e0, "k_b_t": self.k_b_t, "k_b_t_kappa": self.k_b_t_kappa,
                "plateau": self.plateau, "tau_c": self.tau_c,
                "residual_rms": self.residual_rms, "stderr": self.stderr,
                "iterations": self.iterations, "weighted": self.weighted}


def _model(t, e0, b, rate):
    x = np.exp(-rate * t)
    return (e0 - b) * x + b, x


def fit_exponential(series=None, *, times=None, energies=None, sem=None,
                    kappa_over_omega_r: float | None = None, weighted: bool = False,
                    rtol: float = 1e-8, max_iter: int = 200) -> FitResult:
    """Least-squares fit of the exponential cooling law.

    Pass either an :class:`~cavcool.integrator.EnsembleSeries` or the raw
    arrays. ``sem`` enters the decay test (last sample must sit 2 SEM below
    the first). With ``weighted=True`` it also supplies inverse-variance
    weights, provided every entry is positive and finite.
    """
    if series is not None:
        times, energies, sem = series.times, series.e_kin_mean, series.e_kin_sem
    t = np.asarray(times, dtype=float)
    y = np.asarray(energies, dtype=float)
    if t.size < 10:
        raise NoCoolingDetected("need at least 10 samples to fit a cooling curve")

    sem_ok = sem is not None and np.all(np.isfinite(sem)) and np.all(np.asarray(sem) > 0)
    last_err = 2.0 * float(sem[-1]) if sem_ok else 0.0
    if not y[0] > y[-1] + last_err:
        raise NoCoolingDetected("no cooling detected: final energy not below initial energy")
    weighted = bool(weighted and sem_ok)
    w = 1.0 / np.asarray(sem, dtype=float) if weighted else np.ones_like(y)

    t0 = t[0]
    tt = t - t0
    b = float(np.mean(y[-max(1, t.size // 10):]))
    e0 = float(y[0])
    target = b + (e0 - b) / np.e
    below = np.nonzero(y <= target)[0]
    tau = float(tt[below[0]]) if below.size and tt[below[0]] > 0 else float(tt[-1]) / 3.0
    theta = np.array([e0, b, 1.0 / tau])

    def residuals(th):
        m, x = _model(tt, *th)
        return w * (y - m), x

    r, x = residuals(theta)
    cost = r @ r
    lam = 1e-3
    for it in range(1, max_iter + 1):
        J = np.column_stack([x, 1.0 - x, -(theta[0] - theta[1]) * tt * x]) * w[:, None]
        JTJ = J.T @ J
        g = J.T @ r
        diag = np.diag(JTJ).copy()
        while True:
            try:
                delta = np.linalg.solve(JTJ + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                if lam > 1e16:
                    raise FitError("singular normal equations")
                continue
            trial = theta + delta
            if trial[2] <= 0:
                lam *= 10.0
                if lam > 1e16:
                    raise FitError("fit failed to keep a positive cooling rate")
                continue
            r_new, x_new = residuals(trial)
            cost_new = r_new @ r_new
            if cost_new <= cost:
                break
            lam *= 10.0
            if lam > 1e16:
                break
        converged = np.all(np.abs(delta) <= rtol * (np.abs(theta) + 1e-300))
        if cost_new <= cost:
            theta, r, x, cost = trial, r_new, x_new, cost_new
            lam = max(lam / 10.0, 1e-12)
        if converged or lam > 1e16:
            break
    else:
        raise FitError(f"exponential fit did not converge in {max_iter} iterations")

    J = np.column_stack([x, 1.0 - x, -(theta[0] - theta[1]) * tt * x]) * w[:, None]
    dof = max(t.size - 3, 1)
    try:
        cov = np.linalg.inv(J.T @ J) * (cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.nan)
    e0, b, rate = theta
    var = np.diag(cov)
    stderr = {"e0": float(np.sqrt(var[0])), "k_b_t": float(2.0 * np.sqrt(var[1])),
              "tau_c": float(np.sqrt(var[2]) / rate ** 2)}
    m, _ = _model(tt, *theta)
    rms = float(np.sqrt(np.mean((y - m) ** 2)))
    kbt = 2.0 * b
    return FitResult(float(e0), float(kbt), float(1.0 / rate), rms, stderr, it, bool(weighted),
                     kbt / kappa_over_omega_r if kappa_over_omega_r else None)


def local_friction(params: SimParams, theta) -> np.ndarray:
    """Linear friction coefficient at position ``theta`` (k = 1 units).

    ``cos^2 sin^2`` has period pi/2, so theta is first reduced by the nearest
    multiple of pi/2; nodes and antinodes then give exactly zero.
    """
    eta2 = float(np.abs(params.eta[0]) ** 2)
    kappa = float(params.kappa[0])
    theta = np.asarray(theta, dtype=float)
    quarter = 0.5 * np.pi
    r = theta - np.round(theta / quarter) * quarter
    s2 = np.sin(2.0 * r)
    return -0.5 * s2 ** 2 * eta2 * params.u0 ** 2 / kappa ** 4


@dataclass
class FrictionScan:
    velocities: np.ndarray
    forces: np.ndarray
    slope: float
    intercept: float
    periods: np.ndarray


def _force_and_field_rhs(basis: ModeBasis, params: SimParams, v: float, theta0: float):
    M = basis.n_modes
    eta_c = np.conj(params.eta)
    lin = 1j * params.delta - params.kappa
    coupling = 1j * params.u0 + params.gamma

    def rhs(t, y):
        alpha = y[:M] + 1j * y[M:2 * M]
        th = np.array([theta0 + v * t])
        f = basis.values(th)[0]
        fp = basis.derivatives(th)[0]
        E = f @ alpha
        G = fp @ alpha
        da = -eta_c + lin * alpha - coupling * np.conj(f) * E
        EG = E * np.conj(G)
        force = -2.0 * params.u0 * EG.real - 2.0 * params.gamma * EG.imag
        return np.concatenate([da.real, da.imag, [force]])

    return rhs


def _static_average_force(basis: ModeBasis, params: SimParams, n_points: int = 512) -> float:
    from .noise import pinned_field

    total = 0.0
    for th in 2 * np.pi * np.arange(n_points) / n_points:
        alpha = pinned_field([th], basis, params)
        f = basis.values([th])[0]
        fp = basis.derivatives([th])[0]
        EG = (f @ alpha) * np.conj(fp @ alpha)
        total += -2.0 * params.u0 * EG.real - 2.0 * params.gamma * EG.imag
    return total / n_points


def average_force(params: SimParams, basis: ModeBasis, v: float, *, theta0: float = 0.0,
                  tol: float = 1e-6, max_periods: int = 20, rtol: float = 1e-11) -> tuple[float, int]:
    """Time-averaged force on one atom dragged at constant velocity ``v`` (kappa/k units).

    The field follows the deterministic mode equations. After a relaxation
    period, consecutive spatial-period averages are compared until they agree
    to ``tol`` relative to the instantaneous force scale.
    """
    if v == 0:
        return _static_average_force(basis, params), 0
    if abs(v) >= params.kappa.min():
        warnings.warn(f"velocity {v} outside the linear friction regime kv < kappa", stacklevel=2)
    M = basis.n_modes
    rhs = _force_and_field_rhs(basis, params, v, theta0)
    from .noise import pinned_field

    a0 = pinned_field([theta0], basis, params)
    y = np.concatenate([a0.real, a0.imag, [0.0]])
    period = 2 * np.pi / abs(v)
    t = 0.0
    t_relax = 30.0 / params.kappa.min()
    sol = solve_ivp(rhs, (t, t + t_relax), y, method="DOP853", rtol=rtol, atol=1e-13)
    y, t = sol.y[:, -1].copy(), t + t_relax
    previous = None
    for n in range(1, max_periods + 1):
        y[-1] = 0.0
        sol = solve_ivp(rhs, (t, t + period), y, method="DOP853", rtol=rtol, atol=1e-13,
                        dense_output=False)
        y, t = sol.y[:, -1].copy(), t + period
        avg = y[-1] / period
        scale = np.max(np.abs(np.diff(sol.y[-1]) / np.maximum(np.diff(sol.t), 1e-300)))
        if previous is not None and abs(avg - previous) <= tol * max(scale, 1e-300):
            return float(avg), n
        previous = avg
    raise FitError(f"force average at v={v} did not settle within {max_periods} periods")


def friction_scan(params: SimParams, basis: ModeBasis | None, v_grid) -> FrictionScan:
    """Average force over a grid of velocities and its linear regression.

    The slope estimates the position-averaged friction coefficient; the
    intercept should vanish.
    """
    basis = basis or params.basis()
    v = np.asarray(v_grid, dtype=float)
    out = [average_force(params, basis, vi) for vi in v]
    forces = np.array([o[0] for o in out])
    periods = np.array([o[1] for o in out])
    slope, intercept = np.polyfit(v, forces, 1)
    return FrictionScan(v, forces, float(slope), float(intercept), periods)


@dataclass
class LinearFit:
    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    r_squared: float


def linear_regression(x, y) -> LinearFit:
    """Ordinary least squares with residual-based standard errors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points")
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    cov = np.linalg.inv(A.T @ A) * ss_res / (x.size - 2)
    return LinearFit(float(coef[0]), float(coef[1]), float(np.sqrt(cov[0, 0])),
                     float(np.sqrt(cov[1, 1])), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)
