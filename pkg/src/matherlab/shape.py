"""Lagrange flux, period groups, kappa and pb+ estimators, shape witnesses.

Flux of a Lagrange isotopy is computed as the cylinder integral of omega
over (s, t) -> psi_t(gamma(s)) by tensor-product midpoint quadrature with
Richardson extrapolation.  The cylinder orientation is fixed per chart so
that the two canonical families carry their conventional signs: shrinking
a planar circle from r0 to r1 has flux pairing pi*(r0^2 - r1^2) against
the positively oriented circle loop, and the torus graph isotopy
theta -> (theta, t*c) has flux coefficients c.

kappa and pb+ are computed over finite-dimensional families (circle
radius paths, Fourier-truncated graph potentials / form potentials), so
the reported values are one-sided UPPER bounds on the true infima.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .phase import PLANE, TORUS, HamiltonianSystem

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# isotopy families
# ---------------------------------------------------------------------------

@dataclass
class LagrangeIsotopy:
    """A path of Lagrangian embeddings psi_t over a circle/torus parameter.

    ``evaluate(t, s)`` maps isotopy time t in [0,1] and parameter points s
    (shape (..., k)) to phase-space points; ``kind`` names the chart.
    """

    kind: str
    param_dim: int
    evaluate: Callable
    descriptor: dict = field(default_factory=dict)

    def basis_loops(self):
        """Basis loops in the parameter domain, as callables of s in [0,1]."""
        if self.param_dim == 1:
            return [lambda s: np.asarray(s, dtype=float)[..., None]]
        loops = []
        for i in range(self.param_dim):
            def loop(s, i=i):
                s = np.asarray(s, dtype=float)
                out = np.zeros(s.shape + (self.param_dim,))
                out[..., i] = s
                return out
            loops.append(loop)
        return loops

    def embedding_injective(self, t=1.0, n_probe=256, tol=1e-9) -> bool:
        """Sampled injectivity check of psi_t."""
        rng = np.random.default_rng(12345)
        s = rng.random((n_probe, self.param_dim))
        img = self.evaluate(t, s)
        d = np.linalg.norm(img[:, None, :] - img[None, :, :], axis=-1)
        ds = np.linalg.norm((s[:, None, :] - s[None, :, :] + 0.5) % 1.0 - 0.5,
                            axis=-1)
        mask = ds > 1e-3
        return bool(np.all(d[mask] > tol))


def circle_isotopy(r_start: float, r_end: float) -> LagrangeIsotopy:
    """Planar circles of linearly interpolated radius (shrink/grow)."""

    def evaluate(t, s):
        s = np.asarray(s, dtype=float)
        r = r_start + np.asarray(t, dtype=float) * (r_end - r_start)
        ang = TWO_PI * s[..., 0]
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)

    return LagrangeIsotopy(PLANE, 1, evaluate,
                           {"family": "circle", "r_start": r_start,
                            "r_end": r_end})


def constant_isotopy(base: LagrangeIsotopy) -> LagrangeIsotopy:
    def evaluate(t, s):
        return base.evaluate(0.0, s)
    return LagrangeIsotopy(base.kind, base.param_dim, evaluate,
                           {"family": "constant", "base": base.descriptor})


def graph_isotopy(c_end, potential: Optional["FourierPotential"] = None,
                  c_start=None) -> LagrangeIsotopy:
    """Torus graph path theta -> (theta, c(t) + t * du(theta))."""
    c_end = np.atleast_1d(np.asarray(c_end, dtype=float))
    n = c_end.size
    c_start = np.zeros(n) if c_start is None else np.atleast_1d(
        np.asarray(c_start, dtype=float))

    def evaluate(t, s):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        mom = c_start + t[..., None] * (c_end - c_start) if t.ndim else \
            c_start + t * (c_end - c_start)
        mom = np.broadcast_to(mom, s.shape[:-1] + (n,)).copy()
        if potential is not None:
            mom = mom + (t if np.ndim(t) == 0 else t[..., None]) * \
                potential.grad(s)
        return np.concatenate([s, mom], axis=-1)

    return LagrangeIsotopy(TORUS, n, evaluate,
                           {"family": "graph", "c_end": tuple(c_end),
                            "c_start": tuple(c_start),
                            "potential": getattr(potential, "descriptor", None)})


def concatenate_isotopies(first: LagrangeIsotopy,
                          second: LagrangeIsotopy) -> LagrangeIsotopy:
    def evaluate(t, s):
        t = float(t)
        if t <= 0.5:
            return first.evaluate(2.0 * t, s)
        return second.evaluate(2.0 * t - 1.0, s)
    return LagrangeIsotopy(first.kind, first.param_dim, evaluate,
                           {"family": "concatenation",
                            "parts": [first.descriptor, second.descriptor]})


# ---------------------------------------------------------------------------
# flux quadrature
# ---------------------------------------------------------------------------

class FluxConvergenceError(RuntimeError):
    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


def _omega_pairing(kind, gs, gt):
    """omega(ds-partial, dt-partial) pointwise for the chart's form."""
    if kind == PLANE:
        return gs[..., 0] * gt[..., 1] - gt[..., 0] * gs[..., 1]
    n = gs.shape[-1] // 2
    return np.sum(gs[..., n:] * gt[..., :n] - gt[..., n:] * gs[..., :n],
                  axis=-1)


def _cylinder_integral(isotopy, loop, ns, nt):
    s_mid = (np.arange(ns) + 0.5) / ns
    t_mid = (np.arange(nt) + 0.5) / nt
    hs, ht = 1.0 / ns, 1.0 / nt
    ds = 1e-6
    total = 0.0
    for t in t_mid:
        pts = loop(s_mid)
        gs = (isotopy.evaluate(t, loop((s_mid + ds) % 1.0))
              - isotopy.evaluate(t, loop((s_mid - ds) % 1.0))) / (2 * ds)
        gt = (isotopy.evaluate(min(t + ds, 1.0), pts)
              - isotopy.evaluate(max(t - ds, 0.0), pts)) / (
                  min(t + ds, 1.0) - max(t - ds, 0.0))
        val = _omega_pairing(isotopy.kind, gs, gt)
        total += val.sum() * hs * ht
    if isotopy.kind == TORUS:
        total = -total  # cylinder oriented (t, s) on the torus chart
    return total


def lagrange_flux(isotopy: LagrangeIsotopy, loops=None, ns: int = 64,
                  nt: int = 8, tol: float = 1e-6) -> np.ndarray:
    """Pairings of Flux_L(psi) with the given basis loops.

    Tensor-product midpoint quadrature at (ns, nt) and (2ns, 2nt) panels,
    Richardson-extrapolated; raises FluxConvergenceError when successive
    refinements disagree beyond tol.

    The loop coordinate must wind through the parameter domain; for graph
    loops discontinuities of the naive difference quotient across the seam
    are avoided because the families are evaluated on lifted coordinates.
    """
    if loops is None:
        loops = isotopy.basis_loops()
    out = []
    for loop in loops:
        coarse = _cylinder_integral(isotopy, loop, ns, nt)
        fine = _cylinder_integral(isotopy, loop, 2 * ns, 2 * nt)
        rich = (4.0 * fine - coarse) / 3.0
        # |fine - coarse| ~ 3x the fine-level O(h^2) error
        if abs(fine - coarse) > 3.0 * max(tol, 1e-10 * (1.0 + abs(fine))):
            raise FluxConvergenceError(
                f"flux quadrature not converging: {coarse!r} vs {fine!r}",
                (coarse, fine))
        out.append(rich)
    return np.array(out)


def circle_flux_pairing(r_start: float, r_end: float) -> float:
    """Closed form: area swept against the positively oriented circle loop."""
    return math.pi * (r_start ** 2 - r_end ** 2)


# ---------------------------------------------------------------------------
# period group generator gamma_L(c)
# ---------------------------------------------------------------------------

class IncomparableUnitsError(ValueError):
    pass


@dataclass(frozen=True)
class GammaTerm:
    """An exact generator value: coeff * factor * unit.

    ``coeff`` is an exact rational; ``factor`` tags an irrational multiplier
    symbolically ("1", "sqrt2", ...); ``unit`` is a common transcendental
    unit such as "pi" carried symbolically so closed-form values like
    12pi or r^2 pi stay exact.
    """

    coeff: Fraction
    factor: str = "1"
    unit: str = "pi"

    _FACTORS = {"1": 1.0, "sqrt2": math.sqrt(2.0), "sqrt3": math.sqrt(3.0),
                "sqrt5": math.sqrt(5.0)}
    _UNITS = {"pi": math.pi, "1": 1.0}

    def numeric(self) -> float:
        return float(self.coeff) * self._FACTORS[self.factor] * \
            self._UNITS[self.unit]

    def __str__(self):
        c = self.coeff
        parts = []
        if c.denominator == 1:
            parts.append(str(c.numerator))
        else:
            parts.append(f"{c.numerator}/{c.denominator}")
        if self.factor != "1":
            parts.append(self.factor)
        if self.unit != "1":
            parts.append(self.unit)
        body = "".join(p for p in parts if p)
        return body


def parse_gamma_term(text) -> GammaTerm:
    """Parse '4pi', '3/2pi', '2sqrt2pi', '16pi', '5', '0'."""
    if isinstance(text, GammaTerm):
        return text
    if isinstance(text, (int, Fraction)):
        return GammaTerm(Fraction(text), "1", "1")
    if isinstance(text, float):
        raise ValueError(
            f"floats are not exact; pass ints, Fractions or strings: {text!r}")
    s = str(text).strip().lower().replace(" ", "").replace("*", "")
    unit = "1"
    if s.endswith("pi"):
        unit = "pi"
        s = s[:-2]
    factor = "1"
    for name in ("sqrt2", "sqrt3", "sqrt5"):
        if s.endswith(name):
            factor = name
            s = s[: -len(name)]
            break
    if s in ("", "+"):
        coeff = Fraction(1)
    elif s == "-":
        coeff = Fraction(-1)
    else:
        coeff = Fraction(s)
    return GammaTerm(coeff, factor, unit)


@dataclass
class PeriodGroupInput:
    """Exact pairings of [omega] - dc with generators of pi_2(M, L)."""

    generators: list

    def __post_init__(self):
        self.generators = [parse_gamma_term(g) for g in self.generators]

    @staticmethod
    def parse(text: str) -> "PeriodGroupInput":
        text = text.strip()
        if not text:
            return PeriodGroupInput([])
        return PeriodGroupInput([t for t in text.split(",") if t.strip()])


@dataclass(frozen=True)
class GammaResult:
    """gamma_L(c): positive generator, 0 (non-discrete) or inf (trivial)."""

    kind: str                     # "finite" | "zero" | "infinite"
    term: Optional[GammaTerm] = None

    def numeric(self) -> float:
        if self.kind == "infinite":
            return math.inf
        if self.kind == "zero":
            return 0.0
        return self.term.numeric()

    def __str__(self):
        if self.kind == "infinite":
            return "inf"
        if self.kind == "zero":
            return "0"
        return str(self.term)

    def is_positive_multiple_of(self, base: GammaTerm) -> bool:
        """True when this value lies in the positive lattice base * Z>0."""
        if self.kind != "finite":
            return False
        if (self.term.unit != base.unit) or (self.term.factor != base.factor):
            return False
        ratio = self.term.coeff / base.coeff
        return ratio > 0 and ratio.denominator == 1


def _fraction_gcd(values) -> Fraction:
    num = 0
    den = 1
    for v in values:
        num = math.gcd(num, abs(v.numerator))
        den = den * v.denominator // math.gcd(den, v.denominator)
    return Fraction(num, den)


def gamma_generator(group: PeriodGroupInput) -> GammaResult:
    """Positive generator of the subgroup generated by the input pairings.

    Empty (or all-zero) input generates the trivial subgroup: gamma = inf.
    Rational inputs sharing one symbolic factor/unit give their gcd times
    that factor.  Two entries with irrational ratio make the subgroup
    non-discrete: gamma = 0.  Mixing different transcendental units is
    rejected as incomparable.
    """
    terms = [t for t in group.generators if t.coeff != 0]
    if not terms:
        return GammaResult("infinite")
    units = {t.unit for t in terms}
    if len(units) > 1:
        raise IncomparableUnitsError(
            f"mixed symbolic units {sorted(units)} are not comparable")
    factors = {t.factor for t in terms}
    if len(factors) > 1:
        return GammaResult("zero")
    g = _fraction_gcd([t.coeff for t in terms])
    return GammaResult("finite", GammaTerm(g, terms[0].factor, terms[0].unit))


# ---------------------------------------------------------------------------
# Fourier potentials on the torus
# ---------------------------------------------------------------------------

class FourierPotential:
    """u(theta) = sum over modes 0 < |k|_inf <= order of
    a_k cos(2 pi k.theta) + b_k sin(2 pi k.theta)."""

    def __init__(self, dof: int, order: int, coeffs=None):
        self.dof = dof
        self.order = order
        self.modes = self._half_lattice(dof, order)
        n = 2 * len(self.modes)
        self.coeffs = np.zeros(n) if coeffs is None else np.asarray(
            coeffs, dtype=float).copy()
        if self.coeffs.size != n:
            raise ValueError(f"expected {n} coefficients for order {order}")

    @staticmethod
    def _half_lattice(dof, order):
        if order == 0:
            return []
        rng = range(-order, order + 1)
        modes = []
        if dof == 1:
            modes = [(k,) for k in range(1, order + 1)]
        else:
            for k in itertools.product(rng, repeat=dof):
                if all(v == 0 for v in k):
                    continue
                # keep one representative of {k, -k}
                lead = next(v for v in k if v != 0)
                if lead > 0:
                    modes.append(k)
        return [np.array(m, dtype=float) for m in modes]

    @property
    def descriptor(self):
        return {"order": self.order, "coeffs": self.coeffs.tolist()}

    def value(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape[:-1])
        for i, k in enumerate(self.modes):
            phase = TWO_PI * (theta @ k)
            out = out + self.coeffs[2 * i] * np.cos(phase) \
                + self.coeffs[2 * i + 1] * np.sin(phase)
        return out

    def grad(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for i, k in enumerate(self.modes):
            phase = TWO_PI * (theta @ k)
            da = -TWO_PI * np.sin(phase)
            db = TWO_PI * np.cos(phase)
            coeff = self.coeffs[2 * i] * da + self.coeffs[2 * i + 1] * db
            out = out + coeff[..., None] * k
        return out


# ---------------------------------------------------------------------------
# kappa estimation (upper bounds)
# ---------------------------------------------------------------------------

class FluxConstraintError(RuntimeError):
    pass


@dataclass
class KappaEstimate:
    bound: float
    side: str                      # always "upper": finite-dim family
    witness: dict
    flux_pairing: np.ndarray


def kappa_circle_estimate(system: HamiltonianSystem, r_start: float,
                          target_pairing: float, n_circle: int = 512
                          ) -> KappaEstimate:
    """Circle family: the flux constraint pins the final radius exactly,
    so the bound is max of H over that circle."""
    r1_sq = r_start ** 2 - target_pairing / math.pi
    if r1_sq <= 0.0:
        raise FluxConstraintError(
            f"no circle realizes flux pairing {target_pairing:g} from "
            f"r={r_start:g}")
    r1 = math.sqrt(r1_sq)
    iso = circle_isotopy(r_start, r1)
    got = lagrange_flux(iso)[0]
    if abs(got - target_pairing) > 1e-6 * (1.0 + abs(target_pairing)):
        raise FluxConstraintError(
            f"witness flux {got!r} misses target {target_pairing!r}")
    ang = TWO_PI * (np.arange(n_circle) + 0.5) / n_circle
    pts = np.stack([r1 * np.cos(ang), r1 * np.sin(ang)], axis=-1)
    bound = float(np.max(system.value(pts)))
    return KappaEstimate(bound, "upper",
                         {"family": "circle", "r_end": r1}, np.array([got]))


def _map_coefficients(source: FourierPotential, dof: int, order: int):
    """Re-express a potential's coefficients in another order's mode basis."""
    target = FourierPotential(dof, order)
    key_to_col = {tuple(int(v) for v in k): 2 * i
                  for i, k in enumerate(target.modes)}
    out = np.zeros(target.coeffs.size)
    for i, k in enumerate(source.modes):
        col = key_to_col.get(tuple(int(v) for v in k))
        if col is not None:
            out[col] = source.coeffs[2 * i]
            out[col + 1] = source.coeffs[2 * i + 1]
    return out


def kappa_graph_estimate(system: HamiltonianSystem, c, order: int = 2,
                         budget: int = 200, multistarts: int = 8,
                         seed: int = 0, grid: int = 48,
                         warm_start: Optional["KappaEstimate"] = None
                         ) -> KappaEstimate:
    """Graph family: minimize max_theta H(theta, c + du(theta)) over
    Fourier potentials of the given order (Nelder-Mead, multistart).
    Warm-starting from a lower order keeps the bound nonincreasing in the
    order since the smaller family embeds in the larger one."""
    from scipy.optimize import minimize

    c = np.atleast_1d(np.asarray(c, dtype=float))
    n = c.size
    if n == 1:
        thetas = ((np.arange(grid) + 0.5) / grid)[:, None]
    else:
        ax = (np.arange(grid) + 0.5) / grid
        thetas = np.stack(np.meshgrid(*([ax] * n), indexing="ij"),
                          axis=-1).reshape(-1, n)

    proto = FourierPotential(n, order)
    ncoef = proto.coeffs.size

    def objective(w):
        pot = FourierPotential(n, order, w)
        mom = c + pot.grad(thetas)
        z = np.concatenate([thetas, mom], axis=-1)
        return float(np.max(system.value(z)))

    rng = np.random.default_rng(seed)
    best_w = np.zeros(ncoef)
    best = objective(best_w)
    if ncoef:
        starts = [np.zeros(ncoef)]
        if warm_start is not None and warm_start.witness.get("coeffs"):
            prev = FourierPotential(n, warm_start.witness["order"],
                                    warm_start.witness["coeffs"])
            starts.append(_map_coefficients(prev, n, order))
        starts += [0.1 * rng.standard_normal(ncoef)
                   for _ in range(max(0, multistarts - len(starts)))]
        for w0 in starts:
            v0 = objective(w0)
            if v0 < best:
                best, best_w = v0, np.asarray(w0, dtype=float)
            res = minimize(objective, w0, method="Nelder-Mead",
                           options={"maxiter": budget * max(1, ncoef),
                                    "fatol": 1e-12, "xatol": 1e-10})
            if res.fun < best:
                best, best_w = float(res.fun), np.asarray(res.x)

    pot = FourierPotential(n, order, best_w)
    iso = graph_isotopy(c, potential=pot)
    got = lagrange_flux(iso)
    if np.max(np.abs(got - c)) > 1e-6 * (1.0 + float(np.max(np.abs(c)))):
        raise FluxConstraintError(
            f"witness flux {got!r} misses target class {c!r}")
    return KappaEstimate(best, "upper",
                         {"family": "graph", "order": order,
                          "coeffs": best_w.tolist()}, got)


# ---------------------------------------------------------------------------
# shape witnesses
# ---------------------------------------------------------------------------

@dataclass
class ShapeWitness:
    isotopy: LagrangeIsotopy
    params: dict
    flux_pairing: np.ndarray
    margin: float
    image_sample: np.ndarray

    def write(self, path_base):
        """Emit <base>.json (family parameters) and <base>_image.csv."""
        from .emit import write_csv, write_json
        jpath = write_json(path_base + ".json", {
            "family": self.isotopy.descriptor,
            "params": self.params,
            "flux_pairing": self.flux_pairing.tolist(),
            "margin": self.margin,
        })
        dim = self.image_sample.shape[1]
        cpath = write_csv(path_base + "_image.csv",
                          [f"z{i + 1}" for i in range(dim)],
                          self.image_sample)
        return jpath, cpath


def shape_witness_circle(region, r_start: float, c_pairing: float,
                         a_pairing: float, margin: float = 0.0,
                         n_sample: int = 256) -> Optional[ShapeWitness]:
    """Witness for a in sh(region; circle L, c): a circle isotopy with
    Flux - c = a whose final circle lies in the region (sampled, with
    margin).  Returns None when the family contains no witness.
    """
    target = c_pairing + a_pairing
    r1_sq = r_start ** 2 - target / math.pi
    if r1_sq <= 0.0:
        return None
    r1 = math.sqrt(r1_sq)
    ang = TWO_PI * (np.arange(n_sample) + 0.5) / n_sample
    pts = np.stack([r1 * np.cos(ang), r1 * np.sin(ang)], axis=-1)
    sd = region.signed_distance(pts)
    worst = float(np.max(sd))
    if worst > -margin:
        return None
    iso = circle_isotopy(r_start, r1)
    flux = lagrange_flux(iso)
    return ShapeWitness(iso, {"r_end": r1}, flux, -worst, pts[:: max(1, n_sample // 16)])


# ---------------------------------------------------------------------------
# pb+ estimation (upper bounds)
# ---------------------------------------------------------------------------

@dataclass
class PbPlusBound:
    value: float
    side: str
    order: int
    coeffs: np.ndarray
    seed: int


def pb_plus_estimate(system: HamiltonianSystem, sample_points, c,
                     fourier_order: int = 2, budget: int = 200,
                     multistarts: int = 8, seed: int = 0,
                     warm_start: Optional[PbPlusBound] = None) -> PbPlusBound:
    """Upper bound on pb+ restricted to the sample set X.

    Minimizes max over X of <eta, X_H> with eta = sum c_i dtheta_i + du, u
    in the Fourier span of the given order.  The max is smoothed by a
    softmax with temperature doubling from 10 to 1e4 (200 descent steps per
    stage, 8 multistarts); the reported value is the best TRUE max seen, so
    it is a valid upper bound, and warm-starting from a lower order keeps
    the bound nonincreasing in the order.
    """
    X = np.atleast_2d(np.asarray(sample_points, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    vel = system.angle_velocity(X)
    g0 = vel @ c

    pot = FourierPotential(system.dof, fourier_order)
    ncoef = pot.coeffs.size
    if ncoef == 0:
        return PbPlusBound(float(np.max(g0)), "upper", fourier_order,
                           np.zeros(0), seed)

    theta = X[:, :system.dof]
    cols = []
    for k in pot.modes:
        phase = TWO_PI * (theta @ k)
        kdot = vel @ k
        cols.append(-TWO_PI * np.sin(phase) * kdot)   # cos coefficient
        cols.append(TWO_PI * np.cos(phase) * kdot)    # sin coefficient
    G = np.stack(cols, axis=-1)

    def true_max(w):
        return float(np.max(g0 + G @ w))

    def softmax_value(vals, beta):
        m = vals.max()
        return m + math.log(np.exp(beta * (vals - m)).sum()) / beta

    def descend(w):
        best_w, best_v = w.copy(), true_max(w)
        beta = 10.0
        step = 1.0
        while beta <= 1e4:
            for _ in range(budget):
                vals = g0 + G @ w
                p = np.exp(beta * (vals - vals.max()))
                p /= p.sum()
                grad = G.T @ p
                gnorm2 = float(grad @ grad)
                if gnorm2 < 1e-24:
                    break
                f0 = softmax_value(vals, beta)
                # backtracking line search with doubling memory
                step = min(step * 2.0, 1e6)
                while step > 1e-18:
                    w_try = w - step * grad
                    if softmax_value(g0 + G @ w_try, beta) \
                            <= f0 - 0.25 * step * gnorm2:
                        break
                    step *= 0.5
                w = w - step * grad
                v = true_max(w)
                if v < best_v:
                    best_v, best_w = v, w.copy()
            beta *= 2.0
        return best_w, best_v

    rng = np.random.default_rng(seed)
    starts = [np.zeros(ncoef)]
    if warm_start is not None and warm_start.coeffs.size:
        # re-express the lower-order optimum in the current mode basis
        prev = FourierPotential(system.dof, warm_start.order,
                                warm_start.coeffs)
        padded = np.zeros(ncoef)
        key_to_col = {tuple(int(v) for v in k): 2 * i
                      for i, k in enumerate(pot.modes)}
        for i, k in enumerate(prev.modes):
            col = key_to_col.get(tuple(int(v) for v in k))
            if col is not None:
                padded[col] = prev.coeffs[2 * i]
                padded[col + 1] = prev.coeffs[2 * i + 1]
        starts.append(padded)
    starts += [0.05 * rng.standard_normal(ncoef)
               for _ in range(max(0, multistarts - len(starts)))]
    best_w, best_v = None, math.inf
    for w0 in starts:
        w, v = descend(w0)
        if v < best_v:
            best_v, best_w = v, w
    return PbPlusBound(best_v, "upper", fourier_order, best_w, seed)
