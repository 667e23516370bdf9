import numpy as np
import pytest

from cavcool import (DivergenceError, FlatSampler, SimParams, SystemState, build_mode_basis,
                     empty_cavity_amplitude, run_ensemble, run_trajectory, step, trajectory_rng)
from cavcool.integrator import aggregate
from cavcool.noise import pinned_field


def params(**kw):
    base = dict(n_atoms=1, u0=-0.6, gamma=0.03, delta=-0.6, eta=3.0, t_final=10.0, n_trajectories=4)
    base.update(kw)
    return SimParams(**base)


@pytest.mark.parametrize("family,m", [("single_cosine", None), ("ring_pair", None), ("degenerate_set", 3)])
def test_kernel_matches_reference_step(family, m):
    b = build_mode_basis(family, m)
    p = params(n_atoms=3, n_modes=b.n_modes, mode_family=family, t_final=2.0, eta=1.5 + 0.5j)
    start = SystemState([0.1, 2.0, 4.5], [20.0, -5.0, 1.0], 0.5 + 0.2j * np.arange(b.n_modes))
    rec = run_trajectory(start, b, p, trajectory_rng(7, 0), stride=37)
    s, rng = start.copy(), trajectory_rng(7, 0)
    for _ in range(p.n_steps):
        s = step(s, b, p, rng)
    fin = rec.final_state
    assert np.allclose(fin.theta, s.theta, rtol=0, atol=1e-10)
    assert np.allclose(fin.p, s.p, rtol=0, atol=1e-10)
    assert np.allclose(fin.alpha, s.alpha, rtol=0, atol=1e-10)
    assert fin.t == pytest.approx(s.t)


def test_empty_cavity_fixed_point_without_noise():
    b = build_mode_basis("single_cosine")
    p = params(n_atoms=0)
    s = SystemState(np.zeros(0), np.zeros(0), empty_cavity_amplitude(p))
    out = step(s, b, p, noise=False)
    assert np.max(np.abs(out.alpha - s.alpha)) < 1e-14
    rec = run_trajectory(s, b, p, noise=False, stride=100)
    assert np.max(np.abs(rec.final_state.alpha - s.alpha)) < 1e-12


def test_step_requires_rng_with_noise():
    b = build_mode_basis("single_cosine")
    with pytest.raises(ValueError):
        step(SystemState([0.0], [0.0], [1.0]), b, params())


def test_cavity_decay_accuracy():
    b = build_mode_basis("single_cosine")
    p = params(n_atoms=0, u0=0.0, gamma=0.0, eta=0.0, delta=-0.6, dt=1e-3, t_final=5.0)
    rec = run_trajectory(SystemState(np.zeros(0), np.zeros(0), [1.0]), b, p, noise=False, stride=10)
    err = np.abs(rec.photons[:, 0] - np.exp(-2 * rec.times))
    assert err[-1] < 1e-4
    # first-order method: worst-case error over the whole decay stays O(dt)
    assert err.max() <= 0.2 * p.dt


def _two_atom_final(dt):
    b = build_mode_basis("single_cosine")
    p = params(n_atoms=2, dt=dt, t_final=4.0)
    start = SystemState([0.3, 1.9], [30.0, -12.0], pinned_field([0.3, 1.9], b, p))
    fin = run_trajectory(start, b, p, noise=False, stride=10_000).final_state
    return np.concatenate([fin.theta, fin.p, fin.alpha.real, fin.alpha.imag])


def test_first_order_convergence():
    ref = _two_atom_final(1e-5)
    errs = np.array([np.linalg.norm(_two_atom_final(dt) - ref) for dt in (4e-3, 2e-3, 1e-3)])
    ratios = errs[:-1] / errs[1:]
    assert np.all(np.abs(ratios - 2) < 0.25), ratios


def test_zero_temperature_start_stays_cold():
    b = build_mode_basis("single_cosine")
    p = params(n_atoms=2, dt=1e-3, t_final=5.0)
    th = np.array([0.0, np.pi])
    start = SystemState(th, np.zeros(2), pinned_field(th, b, p))
    rec = run_trajectory(start, b, p, noise=False, stride=100)
    assert np.max(rec.e_kin) < 1e-20


def test_records_deterministic_and_strided():
    b = build_mode_basis("single_cosine")
    p = params(t_final=3.0)
    sampler = FlatSampler(100.0)
    recs = []
    for _ in range(2):
        rng = trajectory_rng(3, 5)
        recs.append(run_trajectory(sampler(5, p, b, rng), b, p, rng, stride=25))
    assert np.array_equal(recs[0].e_kin, recs[1].e_kin)
    assert np.array_equal(recs[0].photons, recs[1].photons)
    assert np.all(np.diff(recs[0].times) > 0)
    assert np.allclose(np.diff(recs[0].times), 0.25)
    assert recs[0].times.size == 13


def test_bad_stride():
    b = build_mode_basis("single_cosine")
    with pytest.raises(ValueError):
        run_trajectory(SystemState([0.0], [0.0], [1.0]), b, params(), trajectory_rng(0, 0), stride=0)


def test_single_trajectories_cool_on_average():
    b = build_mode_basis("single_cosine")
    p = params(t_final=1300.0, n_trajectories=20)
    drops = 0
    for i in range(20):
        rng = trajectory_rng(11, i)
        start = SystemState([rng.uniform(0, 2 * np.pi)], [np.sqrt(3000.0)], empty_cavity_amplitude(p))
        rec = run_trajectory(start, b, p, rng, stride=1000)
        drops += rec.e_kin[-50:].mean() < rec.e_kin[0]
    # sign test: 17 of 20 is far beyond chance
    assert drops >= 17


def test_sampler_is_flat_and_gaussian():
    b = build_mode_basis("single_cosine")
    p = params(n_atoms=4, n_trajectories=500)
    sampler = FlatSampler(400.0)
    states = [sampler(i, p, b, trajectory_rng(0, i)) for i in range(p.n_trajectories)]
    th = np.concatenate([s.theta for s in states])
    mom = np.concatenate([s.p for s in states])
    assert np.all((th >= 0) & (th < 2 * np.pi))
    counts = np.histogram(th, bins=20, range=(0, 2 * np.pi))[0]
    assert counts.min() == counts.max() == 100
    assert np.mean(mom ** 2) == pytest.approx(400.0, rel=0.05)
    assert abs(np.mean(mom)) < 0.1 * 20
    plain = FlatSampler(400.0, stratified=False)
    s = plain(0, p, b, trajectory_rng(0, 0))
    assert s.theta.shape == (4,) and np.allclose(s.alpha, empty_cavity_amplitude(p))


def test_ensemble_thread_independent():
    p = params(n_atoms=2, t_final=20.0, n_trajectories=6, seed=4)
    a = run_ensemble(p, initial_sampler=FlatSampler(500.0), stride=50, threads=1)
    b = run_ensemble(p, initial_sampler=FlatSampler(500.0), stride=50, threads=3)
    for name in ("times", "e_kin_mean", "e_kin_sem", "photon_mean", "localization_mean"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_noise_off_identical_starts_have_zero_sem():
    p = params(n_trajectories=5)

    def same(index, params, basis, rng):
        return SystemState([0.4], [10.0], empty_cavity_amplitude(params))

    s = run_ensemble(p, initial_sampler=same, noise=False, stride=100)
    assert np.all(s.e_kin_sem <= 1e-12 * s.e_kin_mean)


def test_sem_shrinks_with_more_trajectories():
    p = params(t_final=5.0)
    sem = []
    for n in (200, 800):
        s = run_ensemble(p.replace(n_trajectories=n), initial_sampler=FlatSampler(1000.0, stratified=False),
                         stride=500, threads=1)
        sem.append(s.e_kin_sem[-1])
    assert sem[0] / sem[1] == pytest.approx(2.0, rel=0.2)


def test_empty_cavity_stochastic_photon_number():
    p = params(n_atoms=0, u0=0.0, gamma=0.0, eta=3.0, delta=-0.6, t_final=205.0, n_trajectories=40)
    b = p.basis()
    means = []
    for i in range(p.n_trajectories):
        rng = trajectory_rng(21, i)
        start = SystemState(np.zeros(0), np.zeros(0), empty_cavity_amplitude(p))
        rec = run_trajectory(start, b, p, rng, stride=100)
        means.append(rec.photons[rec.times >= 5.0, 0].mean())
    means = np.array(means)
    target = 9 / 1.36 + 0.5
    se = means.std(ddof=1) / np.sqrt(means.size)
    assert abs(means.mean() - target) < 3 * se + 0.01


def test_divergence_is_reported():
    # strong blue-detuned pumping with a huge light shift heats without bound
    p = params(n_atoms=1, u0=-50.0, gamma=0.0, delta=1.0, eta=40.0, t_final=50.0, n_trajectories=3)
    with pytest.raises(DivergenceError) as info:
        run_ensemble(p, initial_sampler=FlatSampler(1e5), stride=100, threads=1)
    assert info.value.series.n_diverged > 0


def test_aggregate_excludes_diverged():
    p = params(n_trajectories=3, t_final=1.0)
    b = p.basis()
    recs = [run_trajectory(FlatSampler(10.0)(i, p, b, trajectory_rng(0, i)), b, p,
                           trajectory_rng(0, i), stride=10, index=i) for i in range(3)]
    recs[1].status = "diverged"
    s = aggregate(recs, 1)
    assert s.n_trajectories == 2 and s.n_diverged == 1
    assert np.allclose(s.photon_mean_excess, s.photon_mean - 0.5)
