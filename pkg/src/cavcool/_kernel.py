"""Compiled Euler-Maruyama inner loop.

Mirrors :func:`cavcool.integrator.step` exactly, including the order in which
standard normals are consumed (see :mod:`cavcool.noise`).
"""

import math

import numba as nb
import numpy as np

RUNNING = 0
DIVERGED = 1

P_MAX = 1.0e3
PHOTONS_MAX = 1.0e6


@nb.njit(cache=True, nogil=True)
def _step(theta, p, alpha, plus, minus, u0, gamma, delta, kappa, eta, two_omega_r, dt,
          row, noise_on, f, fp, S, dA, dp):
    # one step in place; returns True when the divergence guard trips
    N = theta.size
    M = alpha.size
    sq_dt = math.sqrt(dt)
    sq_ind = math.sqrt(2.0 * gamma * dt)
    for k in range(M):
        S[k] = 0.0
        dA[k] = 0.0
    for n in range(N):
        e = complex(math.cos(theta[n]), math.sin(theta[n]))
        ec = e.conjugate()
        E = 0.0j
        G = 0.0j
        for k in range(M):
            f[k] = plus[k] * e + minus[k] * ec
            fp[k] = 1j * (plus[k] * e - minus[k] * ec)
            E += f[k] * alpha[k]
            G += fp[k] * alpha[k]
        EG = E * G.conjugate()
        dp[n] = (-2.0 * u0 * EG.real - 2.0 * gamma * EG.imag) * dt
        for k in range(M):
            S[k] += E * f[k].conjugate()

        if noise_on:
            aE2 = E.real * E.real + E.imag * E.imag
            dp[n] += math.sqrt(2.0 * gamma * aE2) * sq_dt * row[n]
            aG = abs(G)
            if aG > 0.0:
                u = G.conjugate() / aG
                if u.real < 0.0 or (u.real == 0.0 and u.imag < 0.0):
                    u = -u
            else:
                u = 1.0 + 0.0j
            wplus = row[N + 2 * M + 2 * n]
            wminus = row[N + 2 * M + 2 * n + 1]
            w = G * u
            dp[n] += sq_ind * (w.real * wplus + w.imag * wminus)
            for k in range(M):
                c = 0.5 * f[k] * u
                dA[k] += sq_ind * complex(c.imag * wplus - c.real * wminus,
                                          c.real * wplus + c.imag * wminus)

    photons = 0.0
    for k in range(M):
        a = alpha[k]
        da = (-eta[k].conjugate() + 1j * (delta[k] * a - u0 * S[k])
              - (kappa[k] * a + gamma * S[k])) * dt
        if noise_on:
            q = math.sqrt(0.5 * kappa[k] * dt)
            da += dA[k] + q * complex(row[N + 2 * k], row[N + 2 * k + 1])
        alpha[k] = a + da
        photons += alpha[k].real ** 2 + alpha[k].imag ** 2

    bad = not (photons < PHOTONS_MAX)
    for n in range(N):
        theta[n] += two_omega_r * p[n] * dt
        p[n] += dp[n]
        if not (abs(p[n]) < P_MAX) or not math.isfinite(theta[n]):
            bad = True
    return bad


@nb.njit(cache=True, nogil=True)
def advance(theta, p, alpha, plus, minus, u0, gamma, delta, kappa, eta,
            two_omega_r, dt, normals, noise_on, stride, done, n_total,
            out_e, out_ph, out_loc, out_step, n_rec):
    """Advance the state in place by ``normals.shape[0]`` steps.

    Observables are written to ``out_*[n_rec:]`` whenever the global step
    count is a multiple of ``stride`` or equals ``n_total``.
    Returns ``(status, steps_done, n_rec)``.
    """
    N = theta.size
    M = alpha.size
    f = np.empty(M, np.complex128)
    fp = np.empty(M, np.complex128)
    S = np.empty(M, np.complex128)
    dA = np.empty(M, np.complex128)
    dp = np.empty(N)
    for s in range(normals.shape[0]):
        bad = _step(theta, p, alpha, plus, minus, u0, gamma, delta, kappa, eta, two_omega_r, dt,
                    normals[s], noise_on, f, fp, S, dA, dp)
        if bad:
            return DIVERGED, s + 1, n_rec
        count = done + s + 1
        if count % stride == 0 or count == n_total:
            e = 0.0
            loc = 0.0
            for n in range(N):
                e += p[n] * p[n]
                c = math.cos(theta[n])
                loc += c * c
            if N > 0:
                e /= N
                loc /= N
            out_e[n_rec] = e
            out_loc[n_rec] = loc
            for k in range(M):
                out_ph[n_rec, k] = alpha[k].real ** 2 + alpha[k].imag ** 2
            out_step[n_rec] = count
            n_rec += 1
    return RUNNING, normals.shape[0], n_rec
