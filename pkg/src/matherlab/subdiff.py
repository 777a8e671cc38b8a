"""Nonsmooth calculus numerics: Dini derivatives, Clarke subdifferential
estimation by gradient sampling, and Lebourg mean-value witnesses.

The Clarke subdifferential of a locally Lipschitz function is the convex
hull of its limiting gradients; sampling gradients in a small ball around
the base point and taking the hull estimates it from below, a shrinking
radius refines the estimate.  Only the hull is observable this way, which
by the hull-closure identity is exactly the Clarke set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np


class ScheduleOutsideBoxError(ValueError):
    pass


@dataclass
class SampledFunction:
    """Locally Lipschitz scalar function on a box in R^m."""

    evaluator: Callable
    gradient: Optional[Callable] = None
    box: Optional[tuple] = None          # (lo, hi) arrays
    lipschitz: Optional[float] = None

    def __call__(self, x):
        return float(self.evaluator(np.asarray(x, dtype=float)))

    def in_box(self, x) -> bool:
        if self.box is None:
            return True
        lo, hi = self.box
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.all(x >= np.asarray(lo) - 1e-15)
                    and np.all(x <= np.asarray(hi) + 1e-15))

    def grad_at(self, x, fd_step: Optional[float] = None):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.gradient is not None:
            return np.atleast_1d(np.asarray(self.gradient(x), dtype=float))
        h = fd_step if fd_step is not None else 1e-6 * (
            1.0 + float(np.linalg.norm(x)))
        g = np.empty(x.size)
        for i in range(x.size):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            g[i] = (self.evaluator(xp) - self.evaluator(xm)) / (2.0 * h)
        return g

    def validate_lipschitz(self, seed: int = 0, n_pairs: int = 200) -> float:
        """Largest random secant slope; should not exceed 1.05x the estimate."""
        if self.box is None or self.lipschitz is None:
            raise ValueError("needs a declared box and Lipschitz estimate")
        lo = np.atleast_1d(np.asarray(self.box[0], dtype=float))
        hi = np.atleast_1d(np.asarray(self.box[1], dtype=float))
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_pairs):
            a = lo + rng.random(lo.size) * (hi - lo)
            b = lo + rng.random(lo.size) * (hi - lo)
            d = float(np.linalg.norm(b - a))
            if d < 1e-12:
                continue
            worst = max(worst, abs(self.evaluator(b) - self.evaluator(a)) / d)
        return worst


# ---------------------------------------------------------------------------
# convex polytopes (vertex representation)
# ---------------------------------------------------------------------------

def _hull_1d(points):
    return np.array([[float(points.min())], [float(points.max())]])


def _hull_2d(points):
    """Monotone chain; returns counterclockwise vertices."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    lower, upper = [], []
    for p in pts:
        while len(lower) > 1 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) > 1 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _segment_distance(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(a + t * ab - p))


def _support_directions(m, n_dirs=64, seed=0):
    dirs = [np.eye(m)[i] * s for i in range(m) for s in (1.0, -1.0)]
    rng = np.random.default_rng(seed)
    extra = rng.normal(size=(n_dirs, m))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([dirs, extra])


def _hull_support(points, seed=0):
    """Farthest-point vertex subset along a fixed direction set (m >= 3)."""
    pts = np.asarray(points, dtype=float)
    dirs = _support_directions(pts.shape[1], seed=seed)
    idx = sorted(set(int(np.argmax(pts @ d)) for d in dirs))
    return pts[idx]


@dataclass
class ConvexPolytope:
    """Compact convex subset of R^m as a reduced vertex list."""

    vertices: np.ndarray
    refined: Optional["ConvexPolytope"] = None
    skipped: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def support(self, direction) -> float:
        return float(np.max(self.vertices @ np.asarray(direction)))

    def interval(self):
        """(lo, hi) for 1-D polytopes."""
        if self.dim != 1:
            raise ValueError("interval() is for 1-D polytopes")
        v = self.vertices[:, 0]
        return float(v.min()), float(v.max())

    def pairing_range(self, direction):
        v = self.vertices @ np.asarray(direction, dtype=float)
        return float(v.min()), float(v.max())

    def contains(self, point, tol: float = 1e-9) -> bool:
        """Hull membership within tol (exact geometry in 1-D and 2-D)."""
        return self.distance_to(point) <= tol

    def distance_to(self, point) -> float:
        """Euclidean distance of a point to the hull (0 if inside).

        Exact in 1-D and 2-D; for m >= 3 a Frank-Wolfe projection onto the
        vertex hull, adequate for the coarse containment diagnostics.
        """
        p = np.atleast_1d(np.asarray(point, dtype=float))
        V = self.vertices
        if V.shape[0] == 1:
            return float(np.linalg.norm(V[0] - p))
        if self.dim == 1:
            lo, hi = self.interval()
            return float(max(0.0, lo - p[0], p[0] - hi))
        if self.dim == 2:
            verts = _hull_2d(V)
            if verts.shape[0] == 1:
                return float(np.linalg.norm(verts[0] - p))
            if verts.shape[0] == 2:
                return _segment_distance(verts[0], verts[1], p)
            inside = True
            d_edges = []
            k = verts.shape[0]
            for i in range(k):
                a, b = verts[i], verts[(i + 1) % k]
                cr = ((b[0] - a[0]) * (p[1] - a[1])
                      - (b[1] - a[1]) * (p[0] - a[0]))
                if cr < 0:
                    inside = False
                d_edges.append(_segment_distance(a, b, p))
            return 0.0 if inside else float(min(d_edges))
        x = V.mean(axis=0)
        for _ in range(2000):
            g = x - p
            j = int(np.argmin(V @ g))
            d = V[j] - x
            gap = float(-g @ d)
            if gap <= 1e-18:
                break
            step = min(1.0, gap / max(float(d @ d), 1e-300))
            x = x + step * d
        return float(np.linalg.norm(x - p))

    def hausdorff_1d(self, lo: float, hi: float) -> float:
        a, b = self.interval()
        return max(abs(a - lo), abs(b - hi))

    def summary(self) -> dict:
        out = {"dim": self.dim, "n_vertices": int(self.vertices.shape[0])}
        if self.dim == 1:
            out["interval"] = list(self.interval())
        elif self.dim == 2 and self.vertices.shape[0] == 2:
            out["segment"] = self.vertices.tolist()
        return out

    def to_json(self, path):
        from .emit import write_json
        payload = {
            "vertices": self.vertices.tolist(),
            "summary": self.summary(),
            "skipped_samples": self.skipped,
            "seed": self.seed,
        }
        if self.refined is not None:
            payload["refined"] = {
                "vertices": self.refined.vertices.tolist(),
                "summary": self.refined.summary(),
            }
        return write_json(path, payload)


def convex_hull(points) -> ConvexPolytope:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[1]
    if m == 1:
        return ConvexPolytope(_hull_1d(pts))
    if m == 2:
        return ConvexPolytope(_hull_2d(pts))
    return ConvexPolytope(_hull_support(pts))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

class DiniDerivative(NamedTuple):
    value: float
    tau: float


def dini_lower_derivative(f: SampledFunction, x, v,
                          step_schedule=None) -> DiniDerivative:
    """liminf surrogate: min over a geometric step schedule of the forward
    difference quotient, reported with the achieving step."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if step_schedule is None:
        step_schedule = [1e-2 * 0.5 ** k for k in range(20)]
    fx = f.evaluator(x)
    best, best_tau = math.inf, None
    for tau in step_schedule:
        point = x + tau * v
        if not f.in_box(point):
            raise ScheduleOutsideBoxError(
                f"step {tau:g} leaves the declared box")
        q = (f.evaluator(point) - fx) / tau
        if q < best:
            best, best_tau = q, tau
    return DiniDerivative(float(best), float(best_tau))


def _ball_samples(rng, center, radius, n, m):
    u = rng.normal(size=(n, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    scale = radius * rng.random(n) ** (1.0 / m)
    return center + u * scale[:, None]


def clarke_subdifferential(f: SampledFunction, x, radius: float = 0.05,
                           n_samples: int = 64, seed: int = 0
                           ) -> ConvexPolytope:
    """Gradient-sampling estimate of the Clarke subdifferential at x.

    Uniform samples in the radius-ball, gradients analytic or by central
    differences; samples whose gradient disagrees with a local secant by
    more than 10x the declared Lipschitz estimate are skipped (finite
    differences straddling a kink).  The result carries a shrunk-radius
    refinement (radius/2) in ``refined``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = x.size

    def estimate(rad, rng_seed):
        rng = np.random.default_rng(rng_seed)
        pts = _ball_samples(rng, x, rad, n_samples, m)
        grads, skipped = [], 0
        probe = 1e-7 * (1.0 + float(np.linalg.norm(x)))
        for p in pts:
            if not f.in_box(p):
                skipped += 1
                continue
            try:
                g = f.grad_at(p)
            except Exception:
                skipped += 1
                continue
            if not np.all(np.isfinite(g)):
                skipped += 1
                continue
            if f.gradient is None and f.lipschitz is not None:
                u = rng.normal(size=m)
                u /= np.linalg.norm(u)
                secant = (f.evaluator(p + probe * u)
                          - f.evaluator(p - probe * u)) / (2.0 * probe)
                if abs(secant - float(g @ u)) > 10.0 * f.lipschitz:
                    skipped += 1
                    continue
            grads.append(g)
        if not grads:
            raise RuntimeError("all gradient samples failed")
        hull = convex_hull(np.array(grads))
        hull.skipped = skipped
        hull.seed = seed
        return hull

    out = estimate(radius, seed)
    out.refined = estimate(0.5 * radius, seed + 1)
    return out


class LebourgWitness(NamedTuple):
    t: float
    subgradient: np.ndarray
    residual: float


def lebourg_witness(f: SampledFunction, x, y, grid: int = 256,
                    local_radius: float = 1e-6) -> LebourgWitness:
    """Search the segment x..y for a point whose Clarke set contains a v*
    with <v*, x - y> = f(x) - f(y) (Lebourg's mean value theorem).

    A coarse grid locates a sign change of the smooth residual, bisection
    refines it, and the local subdifferential estimate at the refined point
    supplies the witness (interpolating across a kink when needed).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    delta = f.evaluator(x) - f.evaluator(y)
    direction = x - y

    def point(t):
        return t * y + (1.0 - t) * x

    def g(t):
        return float(f.grad_at(point(t)) @ direction) - delta

    ts = np.linspace(0.0, 1.0, grid + 1)
    ts = ts[1:-1]
    vals = np.array([g(t) for t in ts])
    k = int(np.argmin(np.abs(vals)))
    t_best = float(ts[k])
    # refine a bracketing sign change by bisection when one exists
    sign_change = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if sign_change.size:
        i = int(sign_change[np.argmin(
            np.minimum(np.abs(vals[sign_change]), np.abs(vals[sign_change + 1])))])
        a, bnd = float(ts[i]), float(ts[i + 1])
        ga = g(a)
        for _ in range(80):
            mid = 0.5 * (a + bnd)
            gm = g(mid)
            if ga * gm <= 0:
                bnd = mid
            else:
                a, ga = mid, gm
        t_best = 0.5 * (a + bnd)

    seg_len = float(np.linalg.norm(direction))
    local = clarke_subdifferential(
        f, point(t_best), radius=local_radius * (1.0 + seg_len),
        n_samples=16, seed=7)
    lo, hi = local.pairing_range(direction)
    if lo - 1e-12 <= delta <= hi + 1e-12:
        residual = 0.0
        lam = 0.5 if hi == lo else np.clip((delta - lo) / (hi - lo), 0.0, 1.0)
        v_lo = local.vertices[int(np.argmin(local.vertices @ direction))]
        v_hi = local.vertices[int(np.argmax(local.vertices @ direction))]
        witness = v_lo + lam * (v_hi - v_lo)
    else:
        residual = float(min(abs(delta - lo), abs(delta - hi)))
        witness = local.vertices[int(np.argmin(
            np.abs(local.vertices @ direction - delta)))]
    return LebourgWitness(float(t_best), np.asarray(witness), residual)
