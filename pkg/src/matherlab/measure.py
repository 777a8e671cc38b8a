"""Occupation measures of orbits and their invariants.

An occupation measure is a weighted finite sample of phase points (weights
nonnegative, summing to 1).  Time averages over a trajectory window are
realized with trapezoidal end-correction, so atom averages of a smooth
observable match the time average to O(dt^2).  Support diagnostics use the
atom set itself (empirical-measure semantics), not a closure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .phase import (TORUS, ClosedOneForm, HamiltonianSystem,
                    PhaseDimensionError)
from .integrate import Trajectory

WEIGHT_TOL = 1e-12
W_MIN = 1e-9  # atoms below this weight are ignored by support diagnostics


@dataclass
class OccupationMeasure:
    """Borel probability measure given by weighted atoms in phase space."""

    points: np.ndarray              # shape (m, dim)
    weights: np.ndarray             # shape (m,)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.points.shape[0] != self.weights.size:
            raise ValueError("one weight per atom required")
        if np.any(self.weights < -WEIGHT_TOL):
            raise ValueError("negative atom weight")
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total!r}, not 1")
        self.weights = np.clip(self.weights, 0.0, None) / total

    @property
    def n_atoms(self) -> int:
        return self.weights.size

    def average(self, f: Callable) -> float:
        """Atom average of a scalar observable f(points) (vectorized)."""
        return float(np.dot(self.weights, np.asarray(f(self.points))))

    def merged(self, decimals: Optional[int] = None) -> "OccupationMeasure":
        """Merge duplicate atoms (exact, or rounded to `decimals`)."""
        pts = self.points if decimals is None else np.round(
            self.points, decimals)
        order = np.lexsort(pts.T[::-1])
        pts_sorted = pts[order]
        w_sorted = self.weights[order]
        keep = np.ones(len(order), dtype=bool)
        keep[1:] = np.any(pts_sorted[1:] != pts_sorted[:-1], axis=1)
        idx = np.cumsum(keep) - 1
        w_out = np.zeros(int(idx[-1]) + 1)
        np.add.at(w_out, idx, w_sorted)
        return OccupationMeasure(pts_sorted[keep], w_out,
                                 dict(self.provenance, merged=True))

    def to_csv(self, path):
        from .emit import write_measure_csv
        write_measure_csv(path, self)

    def to_json(self, path):
        from .emit import write_measure_json
        write_measure_json(path, self)


@dataclass(frozen=True)
class RotationVector:
    """Pairings of a measure with a basis of closed 1-forms (units 1/time)."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", np.atleast_1d(
            np.asarray(self.components, dtype=float)))

    def pair(self, coefficients) -> float:
        return float(np.dot(self.components,
                            np.atleast_1d(np.asarray(coefficients))))

    def __add__(self, other):
        return RotationVector(self.components + other.components)

    def __getitem__(self, i):
        return float(self.components[i])


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def occupation_measure(trajectory: Trajectory, window=None) -> OccupationMeasure:
    """Time average over a window of a trajectory as an atomic measure.

    Uniform weights with trapezoidal end-correction over the recorded
    samples inside ``window = (t_a, t_b)`` (defaults to the full span).
    """
    traj = trajectory
    if window is None:
        window = traj.span
    t_a, t_b = window
    lo, hi = traj.window_indices(t_a, t_b)
    pts = traj.samples[lo:hi]
    m = pts.shape[0]
    if m == 1:
        w = np.ones(1)
    else:
        w = np.ones(m)
        w[0] = w[-1] = 0.5
        w /= w.sum()
    prov = {
        "source": "orbit",
        "system": traj.system.name,
        "window": [float(t_a), float(t_b)],
        "dt": traj.dt,
        "t0": traj.t0,
    }
    return OccupationMeasure(pts, w, prov)


def fixed_point_measure(point, system_name="analytic") -> OccupationMeasure:
    z = np.atleast_1d(np.asarray(point, dtype=float))
    return OccupationMeasure(z[None, :], np.ones(1),
                             {"source": "analytic", "system": system_name})


# ---------------------------------------------------------------------------
# invariants of a measure
# ---------------------------------------------------------------------------

def rotation_vector(measure: OccupationMeasure, system: HamiltonianSystem,
                    forms: Sequence[ClosedOneForm]) -> RotationVector:
    """rho(mu) paired with each form: component_i = sum_w <eta_i, X_H>."""
    comps = []
    vel = system.angle_velocity(measure.points)
    for eta in forms:
        if eta.kind != system.kind or (
                system.kind == TORUS and eta.dof != system.dof):
            raise PhaseDimensionError("form/system dimension mismatch")
        vals = eta.pair_with_velocity(measure.points, vel)
        comps.append(float(np.dot(measure.weights, vals)))
    return RotationVector(np.array(comps))


def rotation_from_unwrapped(trajectory: Trajectory, window=None) -> RotationVector:
    """Cross-check route: unwrapped angle increment over window length."""
    traj = trajectory
    if window is None:
        window = traj.span
    lo, hi = traj.window_indices(*window)
    dt_span = traj.times[hi - 1] - traj.times[lo]
    if dt_span <= 0:
        raise ValueError("window too short for a rotation estimate")
    inc = traj.unwrapped[hi - 1] - traj.unwrapped[lo]
    scale = 1.0 if traj.system.kind == TORUS else 2.0 * np.pi
    return RotationVector(scale * inc / dt_span)


def action_of_measure(measure: OccupationMeasure,
                      system: HamiltonianSystem) -> float:
    """A_{H,lambda}(mu) = sum_w (H - <lambda, X_H>) over atoms.

    lambda is the canonical primitive: sum I_i dtheta_i on T*T^n, the
    rotationally symmetric (x dy - y dx)/2 on the plane.
    """
    vals = system.value(measure.points) - system.liouville_pairing(
        measure.points)
    return float(np.dot(measure.weights, vals))


def convex_combine(measures: Sequence[OccupationMeasure],
                   weights) -> OccupationMeasure:
    """Convex combination, atoms merged when they coincide exactly."""
    w = np.asarray(weights, dtype=float)
    if w.size != len(measures):
        raise ValueError("one weight per measure required")
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
        raise ValueError("weights must be nonnegative and sum to 1")
    pts = np.concatenate([m.points for m in measures], axis=0)
    ws = np.concatenate([wi * m.weights for wi, m in zip(w, measures)])
    prov = {"source": "convex_combination",
            "weights": [float(x) for x in w],
            "parents": [m.provenance.get("source", "?") for m in measures]}
    return OccupationMeasure(pts, ws, prov).merged()


def support_clearance(measure: OccupationMeasure, region,
                      w_min: float = W_MIN) -> float:
    """min over atoms (weight > w_min) of the signed distance to the region
    (positive outside).  A positive value certifies that the empirical
    support avoids the region at sampling resolution.
    """
    mask = measure.weights > w_min
    d = region.signed_distance(measure.points[mask])
    return float(np.min(d))


# ---------------------------------------------------------------------------
# regions with a signed distance (positive outside, negative inside)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentumBall:
    """{|I| < radius} in the momentum factor of T*T^n."""

    radius: float
    dof: int

    @property
    def description(self):
        return f"|I| < {self.radius:g}"

    def signed_distance(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.linalg.norm(z[..., self.dof:], axis=-1) - self.radius

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return bool(np.linalg.norm(z[..., self.dof:], axis=-1) < self.radius)


@dataclass(frozen=True)
class MomentumBand:
    """{|I_index| < radius} in T*T^n."""

    radius: float
    dof: int
    index: int = 0

    @property
    def description(self):
        return f"|I_{self.index + 1}| < {self.radius:g}"

    def signed_distance(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.abs(z[..., self.dof + self.index]) - self.radius

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return bool(abs(float(z[..., self.dof + self.index])) < self.radius)


@dataclass(frozen=True)
class PlaneDisk:
    """{r < radius} in the plane."""

    radius: float

    @property
    def description(self):
        return f"r < {self.radius:g}"

    def signed_distance(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.hypot(z[..., 0], z[..., 1]) - self.radius

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return bool(np.hypot(z[..., 0], z[..., 1]) < self.radius)


@dataclass(frozen=True)
class Complement:
    """Complement of another region ({outside}); flips the sign."""

    region: object

    @property
    def description(self):
        return f"not ({getattr(self.region, 'description', self.region)})"

    def signed_distance(self, z):
        return -self.region.signed_distance(z)

    def __call__(self, z):
        return not self.region(z)
