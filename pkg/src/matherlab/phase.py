"""Phase-space types, Hamiltonian systems and 1-form pairings.

Two chart models are supported:

 - the cotangent bundle of the n-torus, states ``z = [theta_1..theta_n,
   I_1..I_n]`` with angles in [0,1) and the symplectic form ``sum dI_i ^
   dtheta_i``, so that ``theta_dot = dH/dI`` and ``I_dot = -dH/dtheta``;
 - the plane R^2, states ``z = [x, y]`` with ``omega = dx ^ dy`` and
   ``(x_dot, y_dot) = (-dH/dy, dH/dx)``.

Both choices realize ``i_X omega = -dH``; the orientation on the plane is
the one for which a radial Hamiltonian ``H = h(r)`` circulates with angular
speed ``h'(r)/r`` (counterclockwise where h is increasing).

Angles are stored on the unit torus; the factor 2*pi only ever appears
inside trigonometric evaluations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

TORUS = "torus"
PLANE = "plane"


class PhaseDimensionError(ValueError):
    """Raised when point/form/system dimensions do not match."""


def wrap_angles(theta):
    """Reduce angle coordinates to [0, 1). Idempotent, ignores momenta."""
    t = np.asarray(theta, dtype=float) % 1.0
    # tiny negative inputs round up to exactly 1.0 under fmod
    return np.where(t >= 1.0, 0.0, t)


@dataclass(frozen=True)
class TorusCotangentPoint:
    """A point of T*T^n: angles (unit torus) and conjugate momenta."""

    theta: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        theta = wrap_angles(np.atleast_1d(np.asarray(self.theta, dtype=float)))
        momentum = np.atleast_1d(np.asarray(self.momentum, dtype=float))
        if theta.shape != momentum.shape:
            raise PhaseDimensionError(
                f"theta has shape {theta.shape}, momentum {momentum.shape}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "momentum", momentum)

    @property
    def dof(self) -> int:
        return self.theta.size

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.theta, self.momentum])

    @staticmethod
    def from_array(z) -> "TorusCotangentPoint":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return TorusCotangentPoint(z[:n], z[n:])


@dataclass(frozen=True)
class PlanePoint:
    """A point of the plane R^2 with polar accessors."""

    x: float
    y: float

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def phi(self) -> float:
        return math.atan2(self.y, self.x)

    @staticmethod
    def from_polar(r: float, phi: float) -> "PlanePoint":
        return PlanePoint(r * math.cos(phi), r * math.sin(phi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @staticmethod
    def from_array(z) -> "PlanePoint":
        z = np.asarray(z, dtype=float)
        return PlanePoint(float(z[0]), float(z[1]))


def as_state(point) -> np.ndarray:
    """Accept a typed point or a flat array and return the flat state."""
    if isinstance(point, (TorusCotangentPoint, PlanePoint)):
        return point.as_array()
    return np.asarray(point, dtype=float)


# ---------------------------------------------------------------------------
# Smooth bump profiles
# ---------------------------------------------------------------------------

def smoothstep(u):
    """Quintic smoothstep: 0 -> 1 on [0,1] with vanishing first and second
    derivatives at both ends."""
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 + u * (-15.0 + 6.0 * u))


def smoothstep_d(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    uc = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * uc ** 2 * (1.0 - uc) ** 2, 0.0)


def plateau_bump(s, K):
    """Even profile: 1 on [-K, K], quintic ramp down to 0 at |s| = K + 1."""
    a = np.abs(np.asarray(s, dtype=float))
    return 1.0 - smoothstep(a - K)


def plateau_bump_d(s, K):
    s = np.asarray(s, dtype=float)
    return -np.sign(s) * smoothstep_d(np.abs(s) - K)


def radial_bump(u):
    """1 at u=0, 0 for u >= 1, monotone quintic in between."""
    return 1.0 - smoothstep(np.asarray(u, dtype=float))


def radial_bump_d(u):
    return -smoothstep_d(np.asarray(u, dtype=float))


# ---------------------------------------------------------------------------
# Hamiltonian systems
# ---------------------------------------------------------------------------

class HamiltonianSystem:
    """An autonomous Hamiltonian on one of the two chart models.

    ``value`` and ``grad`` accept states of shape (d,) or batches (..., d);
    ``grad`` returns [dH/dtheta..., dH/dI...] (resp. [dH/dx, dH/dy]).  When
    no analytic gradient is supplied, central differences with step
    ``1e-5 * (1 + |z|)`` are used.

    An optional splitting H = H0(I) + V(theta, I) enables Strang stepping:
    ``h0_grad`` gives the exact drift velocity, and ``v_momentum_free``
    declares whether V depends on the angles only (exact kick).
    """

    def __init__(self, name, kind, dof, value, grad=None,
                 h0_grad=None, v_value=None, v_grad=None,
                 v_momentum_free=False, v_substep=None, params=None):
        if kind not in (TORUS, PLANE):
            raise ValueError(f"unknown phase-space kind {kind!r}")
        if kind == PLANE and dof != 1:
            raise ValueError("plane systems have a single degree of freedom")
        self.name = name
        self.kind = kind
        self.dof = int(dof)
        self.dim = 2 * self.dof
        self._value = value
        self._grad = grad
        self.h0_grad = h0_grad
        self.v_value = v_value
        self.v_grad = v_grad
        self.v_momentum_free = bool(v_momentum_free)
        self.v_substep = v_substep   # optional specialized midpoint kick
        self.params = dict(params or {})

    @property
    def has_splitting(self) -> bool:
        return self.h0_grad is not None

    def value(self, z):
        return self._value(np.asarray(z, dtype=float))

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        if self._grad is not None:
            return self._grad(z)
        return self.fd_grad(z)

    def fd_grad(self, z):
        """Central finite differences of H, step 1e-5*(1+|z|)."""
        z = np.asarray(z, dtype=float)
        h = 1e-5 * (1.0 + np.linalg.norm(z, axis=-1, keepdims=True))
        g = np.empty_like(z)
        for i in range(z.shape[-1]):
            zp = z.copy()
            zm = z.copy()
            zp[..., i] += h[..., 0]
            zm[..., i] -= h[..., 0]
            g[..., i] = (self._value(zp) - self._value(zm)) / (2.0 * h[..., 0])
        return g

    def vector_field(self, z):
        """The symplectic gradient X_H at z (batched)."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            raise PhaseDimensionError(
                f"state has dimension {z.shape[-1]}, system expects {self.dim}")
        g = self.grad(z)
        out = np.empty_like(z)
        if self.kind == TORUS:
            n = self.dof
            out[..., :n] = g[..., n:]      # theta_dot = dH/dI
            out[..., n:] = -g[..., :n]     # I_dot = -dH/dtheta
        else:
            out[..., 0] = -g[..., 1]       # x_dot = -dH/dy
            out[..., 1] = g[..., 0]        # y_dot = dH/dx
        return out

    def angle_velocity(self, z):
        """Configuration part of X_H (theta_dot, or (x_dot, y_dot))."""
        xh = self.vector_field(z)
        if self.kind == TORUS:
            return xh[..., :self.dof]
        return xh

    def liouville_pairing(self, z):
        """<lambda, X_H> for the canonical primitive of omega.

        On T*T^n, lambda = sum I_i dtheta_i; on the plane we take the
        rotationally symmetric primitive lambda = (x dy - y dx)/2.
        """
        z = np.asarray(z, dtype=float)
        xh = self.vector_field(z)
        if self.kind == TORUS:
            n = self.dof
            return np.sum(z[..., n:] * xh[..., :n], axis=-1)
        return 0.5 * (z[..., 0] * xh[..., 1] - z[..., 1] * xh[..., 0])


def hamiltonian_vector_field(system: HamiltonianSystem, point):
    """X_H at a phase point; returns (theta_dot..., I_dot...) as a flat array."""
    return system.vector_field(as_state(point))


# ---------------------------------------------------------------------------
# Closed 1-forms
# ---------------------------------------------------------------------------

@dataclass
class ClosedOneForm:
    """eta = sum c_i dtheta_i + du on T*T^n, or c_0 * dphi (+ du) on the plane.

    ``constant_part`` holds the coefficients in the basis [dtheta_i]
    (torus) or [dphi] (plane, angle form normalized so that a positively
    oriented loop around the origin integrates to 2*pi).  ``potential`` is a
    periodic scalar function of the angles; its differential is paired via
    ``potential_grad`` or finite differences.
    """

    constant_part: np.ndarray
    potential: Optional[Callable] = None
    potential_grad: Optional[Callable] = None
    kind: str = TORUS

    def __post_init__(self):
        self.constant_part = np.atleast_1d(
            np.asarray(self.constant_part, dtype=float))

    @property
    def dof(self) -> int:
        return self.constant_part.size

    def _du(self, theta):
        if self.potential_grad is not None:
            return np.asarray(self.potential_grad(theta), dtype=float)
        if self.potential is None:
            return np.zeros_like(theta)
        h = 1e-6
        g = np.empty_like(theta)
        for i in range(theta.shape[-1]):
            tp = theta.copy()
            tm = theta.copy()
            tp[..., i] += h
            tm[..., i] -= h
            g[..., i] = (np.asarray(self.potential(tp))
                         - np.asarray(self.potential(tm))) / (2.0 * h)
        return g

    def pair_with_velocity(self, z, velocity):
        """<eta, v> for a configuration velocity at state z."""
        z = np.asarray(z, dtype=float)
        v = np.asarray(velocity, dtype=float)
        if self.kind == TORUS:
            theta = z[..., :self.dof]
            val = np.tensordot(v, self.constant_part, axes=([-1], [0]))
            if self.potential is not None or self.potential_grad is not None:
                val = val + np.sum(self._du(theta) * v, axis=-1)
            return val
        # plane: c0 * dphi with dphi = (x dy - y dx)/r^2, plus optional du(x,y)
        x, y = z[..., 0], z[..., 1]
        r2 = x * x + y * y
        val = self.constant_part[0] * (x * v[..., 1] - y * v[..., 0]) / r2
        if self.potential is not None or self.potential_grad is not None:
            val = val + np.sum(self._du(z) * v, axis=-1)
        return val


def angle_form(coefficient: float = 1.0) -> ClosedOneForm:
    """coefficient * dphi on the plane (loop integral = 2*pi*coefficient)."""
    return ClosedOneForm(np.array([coefficient]), kind=PLANE)


def dtheta(i: int, dof: int, coefficient: float = 1.0) -> ClosedOneForm:
    c = np.zeros(dof)
    c[i] = coefficient
    return ClosedOneForm(c)


def pair_form_with_field(eta: ClosedOneForm, system: HamiltonianSystem, point):
    """<eta, X_H> at a phase point."""
    z = as_state(point)
    if system.kind != eta.kind:
        raise PhaseDimensionError(
            f"form lives on {eta.kind!r}, system on {system.kind!r}")
    if system.kind == TORUS and eta.dof != system.dof:
        raise PhaseDimensionError(
            f"form has {eta.dof} components, system {system.dof}")
    return eta.pair_with_velocity(z, system.angle_velocity(z))


# ---------------------------------------------------------------------------
# Built-in systems
# ---------------------------------------------------------------------------

def channel_system(eps: float = 0.05, K: float = 2.0) -> HamiltonianSystem:
    """H = I1*I2 + eps * phi(I1) * sin(2*pi*theta1) on T*T^2.

    phi is even, 1 on [-K, K], 0 off [-K-1, K+1] and monotone on each side
    (quintic ramp).  The lines {I1 = 0} and {I2 = 0} are superconductivity
    channels along which orbits drift linearly.
    """
    two_pi = 2.0 * math.pi

    def value(z):
        th1 = z[..., 0]
        i1, i2 = z[..., 2], z[..., 3]
        return i1 * i2 + eps * plateau_bump(i1, K) * np.sin(two_pi * th1)

    def grad(z):
        th1 = z[..., 0]
        i1, i2 = z[..., 2], z[..., 3]
        s = np.sin(two_pi * th1)
        g = np.zeros_like(z)
        g[..., 0] = eps * plateau_bump(i1, K) * two_pi * np.cos(two_pi * th1)
        g[..., 2] = i2 + eps * plateau_bump_d(i1, K) * s
        g[..., 3] = i1
        return g

    def h0_grad(momentum):
        g = np.empty_like(momentum)
        g[..., 0] = momentum[..., 1]
        g[..., 1] = momentum[..., 0]
        return g

    def v_value(z):
        return eps * plateau_bump(z[..., 2], K) * np.sin(two_pi * z[..., 0])

    def v_grad(z):
        th1, i1 = z[..., 0], z[..., 2]
        s = np.sin(two_pi * th1)
        g = np.zeros_like(z)
        g[..., 0] = eps * plateau_bump(i1, K) * two_pi * np.cos(two_pi * th1)
        g[..., 2] = eps * plateau_bump_d(i1, K) * s
        return g

    def v_substep(z, h, tol, maxit):
        # V touches only the (theta1, I1) pair; implicit midpoint on it
        th1 = z[:, 0]
        i1 = z[:, 2]
        h2 = 0.5 * h
        mt, mi = th1, i1
        scale = tol * (1.0 + np.abs(th1) + np.abs(i1))
        active = np.ones(th1.shape, dtype=bool)
        for _ in range(maxit):
            nt = th1 + h2 * eps * plateau_bump_d(mi, K) * np.sin(two_pi * mt)
            ni = i1 - h2 * eps * plateau_bump(mi, K) * two_pi * np.cos(
                two_pi * mt)
            delta = np.abs(nt - mt) + np.abs(ni - mi)
            mt = np.where(active, nt, mt)
            mi = np.where(active, ni, mi)
            active &= ~(delta <= scale)
            if not active.any():
                break
        z[:, 0] = 2.0 * mt - th1
        z[:, 2] = 2.0 * mi - i1
        return z

    return HamiltonianSystem(
        "channel", TORUS, 2, value, grad,
        h0_grad=h0_grad, v_value=v_value, v_grad=v_grad,
        v_momentum_free=False, v_substep=v_substep,
        params={"eps": eps, "K": K})


def cross_term_system() -> HamiltonianSystem:
    """Integrable normal form H0 = I1*I2 on T*T^2 (exactly splittable)."""
    sys = channel_system(eps=0.0, K=2.0)
    sys.name = "cross_term"
    sys.params = {}
    # V vanishes identically: declare the kick momentum-free and exact.
    sys.v_momentum_free = True
    return sys


def annulus_h(r):
    """Radial profile of the annulus example: 2 - r^2 on [0,1], (r-2)^2 beyond."""
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1.0, 2.0 - r * r, (r - 2.0) ** 2)


def annulus_h_d(r):
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1.0, -2.0 * r, 2.0 * (r - 2.0))


def annulus_system() -> HamiltonianSystem:
    """H(x, y) = h(sqrt(x^2+y^2)) on the plane, h as in ``annulus_h``.

    The circle {r = 2} = {H = 0} consists of fixed points; circles inside
    rotate clockwise, circles outside counterclockwise, with angular speed
    h'(r)/r.
    """

    def value(z):
        return annulus_h(np.hypot(z[..., 0], z[..., 1]))

    def grad(z):
        x, y = z[..., 0], z[..., 1]
        r = np.hypot(x, y)
        # h'(r)/r extends continuously through r=0 (value -2)
        ratio = np.where(r <= 1.0, -2.0,
                         2.0 * (r - 2.0) / np.where(r == 0.0, 1.0, r))
        g = np.empty_like(z)
        g[..., 0] = ratio * x
        g[..., 1] = ratio * y
        return g

    return HamiltonianSystem("annulus", PLANE, 1, value, grad)


def pendulum_system() -> HamiltonianSystem:
    """Mechanical pendulum H = p^2/2 + cos(2*pi*q) on T*T^1."""
    two_pi = 2.0 * math.pi

    def value(z):
        return 0.5 * z[..., 1] ** 2 + np.cos(two_pi * z[..., 0])

    def grad(z):
        g = np.empty_like(z)
        g[..., 0] = -two_pi * np.sin(two_pi * z[..., 0])
        g[..., 1] = z[..., 1]
        return g

    def h0_grad(momentum):
        return momentum.copy()

    def v_value(z):
        return np.cos(two_pi * z[..., 0])

    def v_grad(z):
        g = np.zeros_like(z)
        g[..., 0] = -two_pi * np.sin(two_pi * z[..., 0])
        return g

    return HamiltonianSystem(
        "pendulum", TORUS, 1, value, grad,
        h0_grad=h0_grad, v_value=v_value, v_grad=v_grad, v_momentum_free=True)


def mechanical_system(potential, potential_grad, dof, name="mechanical"):
    """H = |p|^2/2 + U(theta) on T*T^n."""

    def value(z):
        p = z[..., dof:]
        return 0.5 * np.sum(p * p, axis=-1) + potential(z[..., :dof])

    def grad(z):
        g = np.empty_like(z)
        g[..., :dof] = potential_grad(z[..., :dof])
        g[..., dof:] = z[..., dof:]
        return g

    def h0_grad(momentum):
        return momentum.copy()

    def v_value(z):
        return potential(z[..., :dof])

    def v_grad(z):
        g = np.zeros_like(z)
        g[..., :dof] = potential_grad(z[..., :dof])
        return g

    return HamiltonianSystem(
        name, TORUS, dof, value, grad,
        h0_grad=h0_grad, v_value=v_value, v_grad=v_grad, v_momentum_free=True)


def pathological_system(p0=(1.0, 0.0), r: float = 0.3,
                        direction=None) -> HamiltonianSystem:
    """Integrable H(q, p) = h(p) with a flat pathological profile.

    h vanishes at p0, has dh(p0) a unit vector orthogonal to p0, is even
    (h(p) = h(-p)) and is supported in the two balls of radius r around
    +-p0.  Requires the origin to stay clear of those balls: |p0| > 2r.
    """
    p0 = np.asarray(p0, dtype=float)
    n = p0.size
    if np.linalg.norm(p0) <= 2.0 * r or r <= 0.0:
        raise ValueError("pathological profile needs 0 outside B_2r(p0): "
                         f"|p0|={np.linalg.norm(p0):g}, r={r:g}")
    if direction is None:
        d0 = np.zeros(n)
        d0[1 % n] = 1.0
        if n == 1:
            raise ValueError("needs at least two momentum dimensions")
    else:
        d0 = np.asarray(direction, dtype=float)
    if abs(float(d0 @ p0)) > 1e-12 or abs(np.linalg.norm(d0) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector orthogonal to p0")

    def h_of_p(p):
        u1 = np.linalg.norm(p - p0, axis=-1) / r
        u2 = np.linalg.norm(p + p0, axis=-1) / r
        t1 = np.tensordot(p - p0, d0, axes=([-1], [0]))
        t2 = np.tensordot(-p - p0, d0, axes=([-1], [0]))
        return t1 * radial_bump(u1) + t2 * radial_bump(u2)

    def dh_of_p(p):
        out = np.zeros_like(p)
        for sign in (1.0, -1.0):
            q = sign * p - p0
            d = np.linalg.norm(q, axis=-1)
            u = d / r
            b = radial_bump(u)
            db = radial_bump_d(u)
            t = np.tensordot(q, d0, axes=([-1], [0]))
            safe = np.where(d == 0.0, 1.0, d)
            coeff = t * db / (r * safe)
            out += sign * (b[..., None] * d0 + coeff[..., None] * q)
        return out

    def value(z):
        return h_of_p(z[..., n:])

    def grad(z):
        g = np.zeros_like(z)
        g[..., n:] = dh_of_p(z[..., n:])
        return g

    sys = HamiltonianSystem(
        "pathological", TORUS, n, value, grad,
        h0_grad=dh_of_p, v_value=lambda z: np.zeros(z.shape[:-1]),
        v_grad=lambda z: np.zeros_like(z), v_momentum_free=True,
        params={"p0": tuple(p0), "r": r, "direction": tuple(d0)})
    return sys


BUILTIN_SYSTEMS = {
    "channel": channel_system,
    "cross_term": cross_term_system,
    "annulus": annulus_system,
    "pendulum": pendulum_system,
    "pathological": pathological_system,
}


def system_from_config(config) -> HamiltonianSystem:
    """Build a built-in system from a mapping {"system": name, **params}."""
    cfg = dict(config)
    name = cfg.pop("system", None)
    if name not in BUILTIN_SYSTEMS:
        raise ValueError(f"unknown system {name!r}; "
                         f"available: {sorted(BUILTIN_SYSTEMS)}")
    return BUILTIN_SYSTEMS[name](**cfg)


def load_system(path) -> HamiltonianSystem:
    """Load a system description from a .json or .toml file."""
    path = str(path)
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    else:
        with open(path) as fh:
            cfg = json.load(fh)
    return system_from_config(cfg)
