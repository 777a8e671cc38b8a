"""Long-time structure-preserving integration of Hamiltonian orbits.

Scheme selection follows the declared structure of the system:

 - Strang splitting when a splitting H = H0(I) + V is declared: exact
   drift for H0, exact kick when V is momentum-free, otherwise a symplectic
   implicit-midpoint substep for the V-flow (order 2 overall);
 - implicit midpoint otherwise (order 2, symplectic), the nonlinear stage
   equation solved by fixed-point iteration to tol 1e-12, max 20 sweeps
   (contraction requires dt * Lip(X_H) < 1, comfortably true for the
   built-in systems at the default step).

Both maps are time-symmetric, so forward/backward runs invert each other
up to solver tolerance.  Trajectories carry cumulative (unwrapped) angle
increments, accumulated per integration step by the nearest-image rule;
a per-step angle change >= 0.45 aborts the run since wrap-around detection
is no longer reliable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .phase import TORUS, HamiltonianSystem, as_state

SOLVER_TOL = 1e-12
SOLVER_MAXIT = 20
UNWRAP_LIMIT = 0.45


class IntegrationOverflowError(RuntimeError):
    """State became non-finite; carries the last valid sample."""

    def __init__(self, message, time, last_sample):
        super().__init__(message)
        self.time = time
        self.last_sample = np.asarray(last_sample)


class UnwrapError(RuntimeError):
    """Per-step angle change too large for nearest-image unwrapping."""


@dataclass
class Trajectory:
    """Sampled orbit: states, energies, and unwrapped angle increments."""

    system: HamiltonianSystem
    t0: float
    dt: float
    times: np.ndarray            # recorded times, shape (k,)
    samples: np.ndarray          # recorded states, shape (k, dim)
    energies: np.ndarray         # H at the recorded states, shape (k,)
    unwrapped: np.ndarray        # cumulative angle increments, shape (k, m)

    @property
    def span(self):
        return float(self.times[0]), float(self.times[-1])

    @property
    def drift_bound(self) -> float:
        """max_k |H(z_k) - H(z_0)| over the recorded samples."""
        return float(np.max(np.abs(self.energies - self.energies[0])))

    @property
    def empirical_drift_constant(self) -> float:
        """C in the order-2 drift model |H(z_t) - H(z_0)| <= C dt^2."""
        return self.drift_bound / self.dt ** 2

    def state_at(self, index: int) -> np.ndarray:
        return self.samples[index].copy()

    def window_indices(self, t_a: float, t_b: float):
        if t_b < t_a:
            raise ValueError("empty window: t_b < t_a")
        lo = int(np.searchsorted(self.times, t_a - 1e-12, side="left"))
        hi = int(np.searchsorted(self.times, t_b + 1e-12, side="right"))
        if hi - lo < 1:
            raise ValueError(f"window [{t_a}, {t_b}] contains no samples")
        return lo, hi

    def to_csv(self, path):
        from .emit import write_trajectory_csv
        write_trajectory_csv(path, self)


@dataclass
class EscapeEvent:
    """First time a region predicate flips from False to True."""

    time: float
    point: np.ndarray
    criterion: str


# ---------------------------------------------------------------------------
# batched steppers (numpy, state shape (m, dim))
# ---------------------------------------------------------------------------

def _solve_midpoint(field: Callable, z: np.ndarray, h: float) -> np.ndarray:
    """Solve m = z + (h/2) field(m) by damped-free fixed point, per row."""
    h2 = 0.5 * h
    # non-finite states propagate and are rejected right after the step
    with np.errstate(invalid="ignore", over="ignore"):
        m = z + h2 * field(z)
        scale = 1.0 + np.linalg.norm(z, axis=-1)
        active = np.ones(z.shape[0], dtype=bool)
        for _ in range(SOLVER_MAXIT):
            m_new = z + h2 * field(m)
            delta = np.max(np.abs(m_new - m), axis=-1)
            m = np.where(active[:, None], m_new, m)
            active &= ~(delta <= SOLVER_TOL * scale)
            if not active.any():
                return m
    return m


def _xh_from_grad(system, g):
    out = np.empty_like(g)
    if system.kind == TORUS:
        n = system.dof
        out[..., :n] = g[..., n:]
        out[..., n:] = -g[..., :n]
    else:
        out[..., 0] = -g[..., 1]
        out[..., 1] = g[..., 0]
    return out


def _step_midpoint(system, z, h):
    m = _solve_midpoint(lambda w: _xh_from_grad(system, system.grad(w)), z, h)
    with np.errstate(invalid="ignore", over="ignore"):
        return 2.0 * m - z


def _step_strang(system, z, h):
    n = system.dof
    out = z.copy()
    out[:, :n] += 0.5 * h * system.h0_grad(out[:, n:])
    if system.v_grad is not None:
        if system.v_momentum_free:
            out[:, n:] -= h * system.v_grad(out)[:, :n]
        elif system.v_substep is not None:
            out = system.v_substep(out, h, SOLVER_TOL, SOLVER_MAXIT)
        else:
            m = _solve_midpoint(
                lambda w: _xh_from_grad(system, system.v_grad(w)), out, h)
            out = 2.0 * m - out
    out[:, :n] += 0.5 * h * system.h0_grad(out[:, n:])
    return out


def make_stepper(system) -> Callable:
    if system.kind == TORUS and system.has_splitting:
        return _step_strang
    return _step_midpoint


def step_once(system, z, h):
    """Advance a single flat state by one step of size h (h may be < 0)."""
    z = np.asarray(z, dtype=float).reshape(1, -1)
    return make_stepper(system)(system, z, h)[0]


# ---------------------------------------------------------------------------
# unwrapping helpers
# ---------------------------------------------------------------------------

def _angle_coords(system, z):
    if system.kind == TORUS:
        return z[:, :system.dof]
    return np.arctan2(z[:, 1], z[:, 0])[:, None] / (2.0 * math.pi)


def _unwrap_increment(prev_angles, new_angles):
    d = (new_angles - prev_angles + 0.5) % 1.0 - 0.5
    if np.any(np.abs(d) >= UNWRAP_LIMIT):
        raise UnwrapError(
            "per-step angle change exceeds the nearest-image limit 0.45; "
            "reduce dt")
    return d


# ---------------------------------------------------------------------------
# main entry points
# ---------------------------------------------------------------------------

def integrate_batch(system, x0_batch, T, dt, record_every=1, t0=0.0,
                    threads=None):
    """Integrate a batch of orbits over [t0, t0+T]; returns one Trajectory
    per row.  Rows evolve independently (elementwise arithmetic), so each
    orbit's output does not depend on how the batch is chunked or scheduled;
    `threads` > 1 splits the batch into concurrently stepped chunks with
    identical per-orbit results.
    """
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    if threads and threads > 1 and len(x0_batch) > 1:
        from concurrent.futures import ThreadPoolExecutor
        chunks = np.array_split(np.arange(len(x0_batch)), min(
            threads, len(x0_batch)))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(integrate_batch, system,
                                   [x0_batch[i] for i in idx], T, dt,
                                   record_every, t0)
                       for idx in chunks if idx.size]
            out = []
            for fut in futures:
                out.extend(fut.result())
        return out
    z = np.array([as_state(x) for x in x0_batch], dtype=float)
    if z.shape[1] != system.dim:
        raise ValueError(
            f"states have dimension {z.shape[1]}, system expects {system.dim}")
    stepper = make_stepper(system)
    n_steps = int(round(T / dt))
    record_every = max(1, int(record_every))
    n_rec = n_steps // record_every + 1

    m = z.shape[0]
    n_unwrap = system.dof if system.kind == TORUS else 1
    rec_states = np.empty((n_rec, m, z.shape[1]))
    rec_unwrap = np.empty((n_rec, m, n_unwrap))
    rec_energy = np.empty((n_rec, m))
    rec_times = np.empty(n_rec)

    unwrap = np.zeros((m, n_unwrap))
    angles = _angle_coords(system, z)
    rec_states[0], rec_unwrap[0] = z, unwrap
    rec_energy[0] = system.value(z)
    rec_times[0] = t0

    k_rec = 1
    for k in range(1, n_steps + 1):
        z = stepper(system, z, dt)
        new_angles = _angle_coords(system, z)
        unwrap = unwrap + _unwrap_increment(angles, new_angles)
        angles = new_angles
        if system.kind == TORUS:
            z[:, :system.dof] %= 1.0
        if k % record_every == 0:
            # finiteness is validated at recording granularity; the last
            # recorded sample is the carried "last valid" state
            if not np.all(np.isfinite(z)):
                bad = np.where(~np.isfinite(z).all(axis=1))[0]
                raise IntegrationOverflowError(
                    f"non-finite state in rows {bad.tolist()} at t="
                    f"{t0 + k * dt:g}", float(rec_times[k_rec - 1]),
                    rec_states[k_rec - 1][bad[0]])
            rec_states[k_rec] = z
            rec_unwrap[k_rec] = unwrap
            rec_energy[k_rec] = system.value(z)
            rec_times[k_rec] = t0 + k * dt
            k_rec += 1

    out = []
    for j in range(m):
        out.append(Trajectory(
            system=system, t0=t0, dt=dt, times=rec_times[:k_rec].copy(),
            samples=rec_states[:k_rec, j].copy(),
            energies=rec_energy[:k_rec, j].copy(),
            unwrapped=rec_unwrap[:k_rec, j].copy()))
    return out


def integrate(system, x0, T, dt, record_every=1, t0=0.0) -> Trajectory:
    """Integrate a single orbit; uses a scalar fast path when the system
    provides one, otherwise the batch-size-1 vectorized path."""
    runner = _SCALAR_RUNNERS.get(system.name)
    if runner is not None:
        return runner(system, as_state(x0), T, dt, record_every, t0)
    return integrate_batch(system, [x0], T, dt, record_every, t0)[0]


def integrate_back(system, x0, T, dt, record_every=1, t0=0.0) -> Trajectory:
    """Integrate backward in time over [t0 - T, t0] (steps of -dt)."""
    z = as_state(x0).copy().reshape(1, -1)
    stepper = make_stepper(system)
    n_steps = int(round(T / dt))
    for _ in range(n_steps):
        z = stepper(system, z, -dt)
    traj = Trajectory(
        system=system, t0=t0 - T, dt=dt, times=np.array([t0 - T]),
        samples=z.copy(), energies=np.atleast_1d(system.value(z[0])),
        unwrapped=np.zeros((1, system.dof if system.kind == TORUS else 1)))
    return traj


# ---------------------------------------------------------------------------
# escape detection
# ---------------------------------------------------------------------------

def detect_escape(trajectory: Trajectory, region_predicate,
                  describe: str = "") -> Optional[EscapeEvent]:
    """First recorded flip of region_predicate from False to True, refined
    by bisection on the last integration step to tolerance dt * 1e-3."""
    traj = trajectory
    flags = np.array([bool(region_predicate(s)) for s in traj.samples])
    hits = np.where(flags)[0]
    if hits.size == 0:
        return None
    k = int(hits[0])
    label = describe or getattr(region_predicate, "description",
                                repr(region_predicate))
    if k == 0:
        return EscapeEvent(float(traj.times[0]), traj.samples[0].copy(), label)

    system, dt = traj.system, traj.dt
    z = traj.samples[k - 1].copy()
    t = float(traj.times[k - 1])
    # walk dt-steps inside the recorded stride to bracket the flip
    stride = int(round((traj.times[k] - traj.times[k - 1]) / dt))
    for _ in range(stride):
        z_next = step_once(system, z, dt)
        if region_predicate(z_next):
            break
        z, t = z_next, t + dt
    # bisect the step size
    lo, hi = 0.0, dt
    z_hi = z_next
    tol = dt * 1e-3
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        z_mid = step_once(system, z, mid)
        if region_predicate(z_mid):
            hi, z_hi = mid, z_mid
        else:
            lo = mid
    return EscapeEvent(t + hi, z_hi, label)


# ---------------------------------------------------------------------------
# scalar fast paths for the built-in systems (plain-float loops; the
# vectorized path above is the reference implementation for batches)
# ---------------------------------------------------------------------------

def _record_arrays(n_steps, record_every, dim, n_unwrap):
    n_rec = n_steps // record_every + 1
    return (np.empty(n_rec), np.empty((n_rec, dim)), np.empty(n_rec),
            np.empty((n_rec, n_unwrap)))


def _wrap_inc(d):
    return (d + 0.5) % 1.0 - 0.5


def _run_channel(system, z0, T, dt, record_every, t0):
    eps, K = system.params["eps"], system.params["K"]
    two_pi = 2.0 * math.pi

    def phi(s):
        a = abs(s) - K
        if a <= 0.0:
            return 1.0
        if a >= 1.0:
            return 0.0
        return 1.0 - a * a * a * (10.0 + a * (-15.0 + 6.0 * a))

    def phi_d(s):
        a = abs(s) - K
        if a <= 0.0 or a >= 1.0:
            return 0.0
        return -math.copysign(30.0 * a * a * (1.0 - a) ** 2, s)

    def energy(th1, i1, i2):
        return i1 * i2 + eps * phi(i1) * math.sin(two_pi * th1)

    n_steps = int(round(T / dt))
    record_every = max(1, int(record_every))
    times, states, energies, unwraps = _record_arrays(
        n_steps, record_every, 4, 2)
    th1, th2, i1, i2 = (float(v) for v in z0)
    u1 = u2 = 0.0
    times[0], states[0] = t0, (th1 % 1.0, th2 % 1.0, i1, i2)
    energies[0], unwraps[0] = energy(th1, i1, i2), (0.0, 0.0)
    k_rec = 1
    h2 = 0.5 * dt
    for k in range(1, n_steps + 1):
        p_th1, p_th2 = th1, th2
        # half drift for H0 = I1*I2
        th1 += h2 * i2
        th2 += h2 * i1
        if eps != 0.0:
            # midpoint substep for V = eps*phi(I1)*sin(2*pi*theta1)
            mt, mi = th1, i1
            for _ in range(SOLVER_MAXIT):
                s = math.sin(two_pi * mt)
                c = math.cos(two_pi * mt)
                nt = th1 + h2 * eps * phi_d(mi) * s
                ni = i1 - h2 * eps * phi(mi) * two_pi * c
                if abs(nt - mt) + abs(ni - mi) <= SOLVER_TOL * (
                        1.0 + abs(th1) + abs(i1)):
                    mt, mi = nt, ni
                    break
                mt, mi = nt, ni
            th1, i1 = 2.0 * mt - th1, 2.0 * mi - i1
        th1 += h2 * i2
        th2 += h2 * i1
        d1, d2 = _wrap_inc(th1 % 1.0 - p_th1 % 1.0), _wrap_inc(
            th2 % 1.0 - p_th2 % 1.0)
        if abs(d1) >= UNWRAP_LIMIT or abs(d2) >= UNWRAP_LIMIT:
            raise UnwrapError("per-step angle change exceeds 0.45; reduce dt")
        u1 += d1
        u2 += d2
        th1 %= 1.0
        th2 %= 1.0
        if k % record_every == 0:
            times[k_rec], states[k_rec] = t0 + k * dt, (th1, th2, i1, i2)
            energies[k_rec], unwraps[k_rec] = energy(th1, i1, i2), (u1, u2)
            k_rec += 1
    return Trajectory(system, t0, dt, times[:k_rec], states[:k_rec],
                      energies[:k_rec], unwraps[:k_rec])


def _run_annulus(system, z0, T, dt, record_every, t0):
    def hval(r):
        return 2.0 - r * r if r <= 1.0 else (r - 2.0) ** 2

    def ratio(r):
        # h'(r)/r, continuous through the origin
        return -2.0 if r <= 1.0 else 2.0 * (r - 2.0) / r

    n_steps = int(round(T / dt))
    record_every = max(1, int(record_every))
    times, states, energies, unwraps = _record_arrays(
        n_steps, record_every, 2, 1)
    x, y = (float(v) for v in z0)
    phi_acc = 0.0
    prev_phi = math.atan2(y, x) / (2.0 * math.pi)
    times[0], states[0] = t0, (x, y)
    energies[0], unwraps[0] = hval(math.hypot(x, y)), 0.0
    k_rec = 1
    h2 = 0.5 * dt
    for k in range(1, n_steps + 1):
        # implicit midpoint: X_H = (h'(r)/r) * (-y, x)
        mx, my = x, y
        for _ in range(SOLVER_MAXIT):
            w = ratio(math.hypot(mx, my))
            nx = x - h2 * w * my
            ny = y + h2 * w * mx
            if abs(nx - mx) + abs(ny - my) <= SOLVER_TOL * (
                    1.0 + abs(x) + abs(y)):
                mx, my = nx, ny
                break
            mx, my = nx, ny
        x, y = 2.0 * mx - x, 2.0 * my - y
        new_phi = math.atan2(y, x) / (2.0 * math.pi)
        d = _wrap_inc(new_phi - prev_phi)
        if abs(d) >= UNWRAP_LIMIT:
            raise UnwrapError("per-step angle change exceeds 0.45; reduce dt")
        phi_acc += d
        prev_phi = new_phi
        if k % record_every == 0:
            times[k_rec], states[k_rec] = t0 + k * dt, (x, y)
            energies[k_rec] = hval(math.hypot(x, y))
            unwraps[k_rec] = phi_acc
            k_rec += 1
    return Trajectory(system, t0, dt, times[:k_rec], states[:k_rec],
                      energies[:k_rec], unwraps[:k_rec])


def _run_pendulum(system, z0, T, dt, record_every, t0):
    two_pi = 2.0 * math.pi
    n_steps = int(round(T / dt))
    record_every = max(1, int(record_every))
    times, states, energies, unwraps = _record_arrays(
        n_steps, record_every, 2, 1)
    q, p = (float(v) for v in z0)
    acc = 0.0
    times[0], states[0] = t0, (q % 1.0, p)
    energies[0] = 0.5 * p * p + math.cos(two_pi * q)
    unwraps[0] = 0.0
    k_rec = 1
    h2 = 0.5 * dt
    for k in range(1, n_steps + 1):
        q_prev = q
        q += h2 * p
        p += dt * two_pi * math.sin(two_pi * q)
        q += h2 * p
        d = _wrap_inc(q % 1.0 - q_prev % 1.0)
        if abs(d) >= UNWRAP_LIMIT:
            raise UnwrapError("per-step angle change exceeds 0.45; reduce dt")
        acc += d
        q %= 1.0
        if k % record_every == 0:
            times[k_rec], states[k_rec] = t0 + k * dt, (q, p)
            energies[k_rec] = 0.5 * p * p + math.cos(two_pi * q)
            unwraps[k_rec] = acc
            k_rec += 1
    return Trajectory(system, t0, dt, times[:k_rec], states[:k_rec],
                      energies[:k_rec], unwraps[:k_rec])


def _run_integrable(system, z0, T, dt, record_every, t0):
    """Exact flow for systems with V == 0: theta(t) = theta0 + t*dH0/dI."""
    z0 = np.asarray(z0, dtype=float)
    n = system.dof
    vel = system.h0_grad(z0[None, n:])[0]
    n_steps = int(round(T / dt))
    record_every = max(1, int(record_every))
    ks = np.arange(0, n_steps + 1, record_every)
    times = t0 + ks * dt
    unwraps = np.outer(ks * dt, vel)
    states = np.empty((ks.size, 2 * n))
    states[:, :n] = (z0[:n] + unwraps) % 1.0
    states[:, n:] = z0[n:]
    energies = system.value(states)
    return Trajectory(system, t0, dt, times, states, energies, unwraps)


_SCALAR_RUNNERS = {
    "channel": _run_channel,
    "annulus": _run_annulus,
    "pendulum": _run_pendulum,
    "cross_term": _run_integrable,
    "pathological": _run_integrable,
}
