import math

import numpy as np
import pytest
from scipy.integrate import quad

from matherlab.integrate import (IntegrationOverflowError, UnwrapError,
                                 detect_escape, integrate, integrate_back,
                                 integrate_batch)
from matherlab.measure import Complement, MomentumBall, MomentumBand, PlaneDisk
from matherlab.phase import (PLANE, HamiltonianSystem, annulus_system,
                             channel_system, cross_term_system,
                             pendulum_system, plateau_bump)

TWO_PI = 2.0 * math.pi


def test_linear_flow_exact():
    # H0 = I1*I2: theta(1) = theta(0) + (I2, I1), I frozen, exactly
    traj = integrate(cross_term_system(), [0.0, 0.0, 1.0, 2.0], 1.0, 1e-3)
    end = traj.samples[-1]
    assert np.allclose(end[:2], [0.0, 0.0], atol=1e-12)   # (2,1) mod 1
    assert np.array_equal(end[2:], [1.0, 2.0])
    assert np.allclose(traj.unwrapped[-1], [2.0, 1.0], atol=1e-9)


def test_channel_escape_time_matches_quadrature():
    eps, K = 0.05, 2.0
    sys_ = channel_system(eps, K)
    oracle, _ = quad(lambda s: 1.0 / (TWO_PI * eps * plateau_bump(s, K)),
                     0.0, K)
    traj = integrate(sys_, [0.0, 0.0, 0.0, 0.0], 9.0, 1e-3, record_every=10)
    event = detect_escape(traj, Complement(MomentumBand(K, dof=2, index=0)))
    assert event is not None
    assert abs(event.time - oracle) < 0.01 * oracle


def test_annulus_circle_orbit_stays_on_circle():
    traj = integrate(annulus_system(), [3.0, 0.0], 100.0, 1e-3,
                     record_every=100)
    r = np.hypot(traj.samples[:, 0], traj.samples[:, 1])
    assert np.max(np.abs(r - 3.0)) < 1e-6


def test_detect_escape_already_escaped():
    traj = integrate(cross_term_system(), [0.1, 0.2, 3.0, 0.0], 1.0, 1e-2)
    event = detect_escape(traj, Complement(MomentumBall(1.0, dof=2)))
    assert event is not None and event.time == traj.times[0]


def test_detect_escape_absent():
    traj = integrate(annulus_system(), [3.0, 0.0], 20.0, 1e-3,
                     record_every=10)
    assert detect_escape(traj, Complement(PlaneDisk(4.0))) is None


def test_reversibility_channel():
    sys_ = channel_system(0.05, 2.0)
    x0 = np.array([0.17, 0.62, 0.35, 0.4])
    fwd = integrate_batch(sys_, [x0], 2.0, 1e-3)[0]
    back = integrate_back(sys_, fwd.samples[-1], 2.0, 1e-3)
    diff = back.samples[0] - x0
    diff[:2] = (diff[:2] + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(diff)) < 1e-8 * (1.0 + np.linalg.norm(x0))


def test_scalar_and_batch_paths_agree():
    sys_ = channel_system(0.05, 2.0)
    x0 = [0.3, 0.1, 0.5, 0.2]
    scalar = integrate(sys_, x0, 5.0, 1e-3, record_every=100)
    batch = integrate_batch(sys_, [x0], 5.0, 1e-3, record_every=100)[0]
    assert np.max(np.abs(scalar.samples - batch.samples)) < 1e-9
    assert np.max(np.abs(scalar.unwrapped - batch.unwrapped)) < 1e-9


def test_batch_results_independent_of_chunking():
    sys_ = channel_system(0.05, 2.0)
    rng = np.random.default_rng(4)
    x0 = np.column_stack([rng.random(6), rng.random(6),
                          1.8 * (2 * rng.random(6) - 1),
                          2 * rng.random(6) - 1])
    whole = integrate_batch(sys_, x0, 2.0, 1e-3, record_every=100)
    chunked = integrate_batch(sys_, x0, 2.0, 1e-3, record_every=100,
                              threads=3)
    for a, b in zip(whole, chunked):
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.unwrapped, b.unwrapped)


def test_energy_drift_short_all_systems():
    cases = [
        (channel_system(0.05, 2.0), [0.13, 0.41, 0.3, 0.2]),
        (annulus_system(), [3.0, 0.0]),
        (pendulum_system(), [0.52, 0.05]),
        (cross_term_system(), [0.2, 0.9, 1.0, 2.0]),
    ]
    for system, x0 in cases:
        traj = integrate(system, x0, 50.0, 1e-3, record_every=100)
        assert traj.drift_bound < 1e-6, system.name


def test_energy_inequality_random_orbits():
    eps, K = 0.05, 2.0
    sys_ = channel_system(eps, K)
    rng = np.random.default_rng(2)
    x0 = np.column_stack([rng.random(10), rng.random(10),
                          0.95 * K * (2 * rng.random(10) - 1),
                          2 * rng.random(10) - 1])
    for traj in integrate_batch(sys_, x0, 50.0, 1e-3, record_every=50):
        s0 = math.sin(TWO_PI * traj.samples[0, 0])
        lhs = np.abs(plateau_bump(traj.samples[:, 2], K)
                     * np.sin(TWO_PI * traj.samples[:, 0]) - s0)
        bound = (2.0 * K / eps) * abs(traj.samples[0, 3]) \
            + 10.0 * traj.drift_bound
        assert np.max(lhs) <= bound


def test_unwrap_limit_enforced():
    # scalar path (pendulum) and vectorized path both enforce the
    # nearest-image validity bound; the closed-form integrable runner
    # computes exact increments and needs no unwrapping
    with pytest.raises(UnwrapError):
        integrate(pendulum_system(), [0.0, 480.0], 0.1, 1e-3)
    with pytest.raises(UnwrapError):
        integrate_batch(cross_term_system(), [[0.0, 0.0, 480.0, 0.0]],
                        0.1, 1e-3)


def test_overflow_carries_last_sample():
    def value(z):
        with np.errstate(invalid="ignore", over="ignore"):
            return 50.0 * z[..., 0] * z[..., 1]

    def grad(z):
        with np.errstate(invalid="ignore", over="ignore"):
            g = np.empty_like(z)
            g[..., 0] = 50.0 * z[..., 1]
            g[..., 1] = 50.0 * z[..., 0]
            return g

    hyperbolic = HamiltonianSystem("hyperbolic", PLANE, 1, value, grad)
    with pytest.raises(IntegrationOverflowError) as err:
        integrate_batch(hyperbolic, [[1.0, 1.0]], 20.0, 1e-3,
                        record_every=100)
    assert np.all(np.isfinite(err.value.last_sample))


def test_trajectory_invariants():
    traj = integrate(pendulum_system(), [0.3, 0.4], 5.0, 1e-3,
                     record_every=10)
    assert traj.samples.shape[0] == traj.energies.shape[0] > 0
    assert traj.samples.shape[0] == traj.times.shape[0]
    lo, hi = traj.window_indices(1.0, 2.0)
    assert hi > lo
    with pytest.raises(ValueError):
        traj.window_indices(2.0, 1.0)


def test_trajectory_csv_export(tmp_path):
    traj = integrate(pendulum_system(), [0.3, 0.4], 1.0, 1e-2)
    path = tmp_path / "orbit.csv"
    traj.to_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,theta1,I1,H"
    assert len(lines) == traj.times.size + 1
    # 17 significant digits survive a round trip
    val = float(lines[1].split(",")[2])
    assert val == traj.samples[0, 1]
