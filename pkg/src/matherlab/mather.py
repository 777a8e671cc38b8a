"""Mather's alpha-function by linear programming over transition measures.

The torus is discretized into N^n cells and the time-1 dynamics into
transitions (q, q + d) with lifted displacements d (all multiples of 1/N
up to a per-component cap R, i.e. nearest-lift steps plus explicit winding
channels).  The one-step action S(q, d) is the midpoint-rule action of the
constant-velocity lifted path; minimizing S(q,d) - <c, d> over holonomy-
constrained probability weights gives -alpha(c), the minimizing transition
measure and its rotation vector (average displacement per step).

alpha is a max of affine functions of c by construction, hence convex, and
the optimal rotation vector is an exact subgradient up to the LP duality
gap.  ``alpha_lax_oleinik`` provides the independent value-iteration
oracle for the same discrete problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measure import RotationVector
from .simplex import revised_simplex


class LaxOleinikError(RuntimeError):
    """Value iteration did not settle; carries the last oscillation."""

    def __init__(self, message, oscillation):
        super().__init__(message)
        self.oscillation = oscillation


@dataclass
class DiscreteLagrangian:
    """One-step generating actions on a periodic grid."""

    dof: int
    grid_size: int                  # N per torus dimension
    cap: float                      # max |d|_inf (lifted coordinates)
    substeps: int
    half_width: int                 # J: integer steps run over [-J, J]
    disp: np.ndarray                # (K, dof) lifted displacements
    disp_steps: np.ndarray          # (K, dof) integer displacements (units 1/N)
    cost: np.ndarray                # (N^dof, K) one-step actions

    @property
    def n_cells(self) -> int:
        return self.grid_size ** self.dof

    @property
    def n_transitions(self) -> int:
        return self.n_cells * self.disp.shape[0]

    def grid(self) -> np.ndarray:
        N = self.grid_size
        axes = [np.arange(N) / N] * self.dof
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return pts.reshape(-1, self.dof)

    def cell_index(self, steps) -> np.ndarray:
        """Flattened index of integer grid coordinates (mod N)."""
        steps = np.asarray(steps, dtype=int) % self.grid_size
        idx = steps[..., 0]
        for a in range(1, self.dof):
            idx = idx * self.grid_size + steps[..., a]
        return idx

    def target_index(self) -> np.ndarray:
        """(N^dof, K) flattened index of (q + d) mod 1."""
        N = self.grid_size
        axes = [np.arange(N)] * self.dof
        qi = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        qi = qi.reshape(-1, 1, self.dof)
        return self.cell_index(qi + self.disp_steps[None, :, :])


def discretize_lagrangian(lagrangian: Callable, N: int, R: float = 2.5,
                          substeps: int = 8, dof: int = 1) -> DiscreteLagrangian:
    """Tabulate S(q, d) = sum_j l(q + (j+1/2)d/m, d)/m over the grid.

    ``lagrangian(q, v)`` must broadcast over leading axes.  Displacements
    run over all per-component multiples of 1/N with |d| <= R, so R >= 0.5
    (nearest lifts) is required and R >= 1 enables winding.
    """
    if N < 8:
        raise ValueError("need N >= 8")
    if R < 0.5:
        raise ValueError("displacement cap R must be at least 0.5")
    J = int(math.floor(R * N + 1e-9))
    steps_1d = np.arange(-J, J + 1)
    grids = np.meshgrid(*([steps_1d] * dof), indexing="ij")
    disp_steps = np.stack([g.ravel() for g in grids], axis=-1)
    disp = disp_steps / float(N)

    axes = [np.arange(N) / N] * dof
    q = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dof)

    cost = np.zeros((q.shape[0], disp.shape[0]))
    for j in range(substeps):
        frac = (j + 0.5) / substeps
        pos = q[:, None, :] + frac * disp[None, :, :]
        cost += lagrangian(pos, np.broadcast_to(disp[None, :, :], pos.shape))
    cost /= substeps
    if not np.all(np.isfinite(cost)):
        raise ValueError("one-step action is not finite on admitted pairs")
    return DiscreteLagrangian(dof=dof, grid_size=N, cap=R, substeps=substeps,
                              half_width=J, disp=disp, disp_steps=disp_steps,
                              cost=cost)


def free_lagrangian(q, v):
    return 0.5 * np.sum(np.asarray(v) ** 2, axis=-1)


def pendulum_lagrangian(q, v):
    q = np.asarray(q)
    return (0.5 * np.sum(np.asarray(v) ** 2, axis=-1)
            - np.cos(2.0 * math.pi * q[..., 0]))


def mechanical_lagrangian(potential):
    def l(q, v):
        return 0.5 * np.sum(np.asarray(v) ** 2, axis=-1) - potential(q)
    return l


# ---------------------------------------------------------------------------
# the transition-measure LP
# ---------------------------------------------------------------------------

@dataclass
class TransitionMeasure:
    """Nonnegative weights on grid transitions with balanced holonomy."""

    lagrangian: DiscreteLagrangian
    q_index: np.ndarray          # (k,)
    d_index: np.ndarray          # (k,)
    weights: np.ndarray          # (k,), sum 1
    invariance_residual: float

    def rotation(self) -> np.ndarray:
        return self.weights @ self.lagrangian.disp[self.d_index]

    def mean_action(self) -> float:
        return float(self.weights @ self.lagrangian.cost[
            self.q_index, self.d_index])

    def holonomy_residual(self) -> float:
        S = self.lagrangian
        out_flow = np.zeros(S.n_cells)
        in_flow = np.zeros(S.n_cells)
        tgt = S.target_index()[self.q_index, self.d_index]
        np.add.at(out_flow, self.q_index, self.weights)
        np.add.at(in_flow, tgt, self.weights)
        return float(np.max(np.abs(out_flow - in_flow)))


@dataclass
class AlphaResult:
    c: np.ndarray
    alpha: float
    measure: TransitionMeasure
    rotation: RotationVector
    duality_gap: float
    iterations: int


def _warm_basis(S: DiscreteLagrangian):
    """Feasible starting basis: for each kept holonomy row, the nearest-lift
    transition into the dropped cell; plus the dropped cell's rest loop."""
    N, n = S.grid_size, S.dof
    K = S.disp.shape[0]
    J = S.half_width
    dropped = S.n_cells - 1
    dropped_coords = np.array(np.unravel_index(dropped, (N,) * n))

    axes = [np.arange(N)] * n
    qi = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    # nearest lift of (dropped - q) per component, in integer steps
    steps = ((dropped_coords[None, :] - qi + N // 2) % N) - N // 2
    d_idx = np.zeros(S.n_cells, dtype=int)
    zero_idx = 0
    for a in range(n):
        d_idx = d_idx * (2 * J + 1) + (steps[:, a] + J)
        zero_idx = zero_idx * (2 * J + 1) + J
    var = np.arange(S.n_cells) * K + d_idx
    basis = list(var[:dropped]) + [dropped * K + zero_idx]
    return np.array(basis, dtype=int)


def _constraint_matrix(S: DiscreteLagrangian):
    """Dense (N^n) x (N^n * K) matrix: holonomy rows (last cell dropped)
    plus the normalization row."""
    n_cells = S.n_cells
    K = S.disp.shape[0]
    nvars = n_cells * K
    tgt = S.target_index().ravel()
    src = np.repeat(np.arange(n_cells), K)
    A = np.zeros((n_cells, nvars))
    rows = n_cells - 1
    mask_src = src < rows
    A[src[mask_src], np.arange(nvars)[mask_src]] += 1.0
    mask_tgt = tgt < rows
    A[tgt[mask_tgt], np.arange(nvars)[mask_tgt]] -= 1.0
    A[rows, :] = 1.0
    return A


def alpha_lp(S: DiscreteLagrangian, c) -> AlphaResult:
    """Solve the discrete Mather problem at cohomology class c.

    minimize sum w(q,d) (S(q,d) - <c, d>) over transition measures; returns
    alpha(c) = -optimum with the minimizing measure and its rotation vector.
    The duality gap bound max(0, -min reduced cost) is valid because the
    weights are normalized to total mass 1.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size != S.dof:
        raise ValueError(f"class has {c.size} components, expected {S.dof}")
    cost = (S.cost - S.disp @ c).ravel()
    A = _constraint_matrix(S)
    b = np.zeros(S.n_cells)
    b[-1] = 1.0
    res = revised_simplex(cost, A, b, basis=_warm_basis(S))
    gap = max(0.0, -res.min_reduced_cost)

    w = res.x
    nz = np.where(w > 0.0)[0]
    K = S.disp.shape[0]
    measure = TransitionMeasure(
        lagrangian=S, q_index=nz // K, d_index=nz % K, weights=w[nz],
        invariance_residual=0.0)
    measure.invariance_residual = measure.holonomy_residual()
    rho = measure.rotation()
    return AlphaResult(c=c, alpha=-res.objective, measure=measure,
                       rotation=RotationVector(rho), duality_gap=gap,
                       iterations=res.iterations)


# ---------------------------------------------------------------------------
# Lax-Oleinik value iteration (independent oracle)
# ---------------------------------------------------------------------------

def alpha_lax_oleinik(S: DiscreteLagrangian, c, max_iters: int = 20000,
                      tol: float = 1e-9, max_period: int = 64) -> float:
    """(Tu)(q') = min_q [u(q) + S(q,q') - <c, d>] iterated to its additive
    eigenvalue; the per-iteration normalization constant converges to
    -alpha(c).  When the optimal cycles have period p > 1 the increments
    settle on a p-cycle rather than a constant, so the stopping rule
    accepts any window length p <= max_period whose averaged increment has
    oscillation below tol.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    cost = S.cost - S.disp @ c              # (n_cells, K)
    tgt = S.target_index()                  # (n_cells, K)
    n_cells = S.n_cells
    K = S.disp.shape[0]
    # source-index map: for arrival cell q', src[d, q'] is the source cell
    src = np.empty((K, n_cells), dtype=int)
    arr = tgt  # arrival of (q, d)
    for d in range(K):
        src[d, arr[:, d]] = np.arange(n_cells)

    u = np.zeros(n_cells)
    history = np.zeros((max_period + 1, n_cells))
    history[0] = u
    offsets = np.zeros(max_period + 1)
    cost_by_d = cost.T  # (K, n_cells)

    last_osc = np.inf
    for it in range(1, max_iters + 1):
        cand = u[src] + cost_by_d[np.arange(K)[:, None], src]
        v = cand.min(axis=0)
        shift = v.max()
        u = v - shift
        slot = it % (max_period + 1)
        prev_offset = offsets[(it - 1) % (max_period + 1)]
        offsets[slot] = prev_offset + shift
        history[slot] = u
        if it >= 2:
            best_osc, best_lam = np.inf, 0.0
            for p in range(1, min(it - 1, max_period) + 1):
                back = (it - p) % (max_period + 1)
                diff = (u + offsets[slot]) - (history[back] + offsets[back])
                osc = float(diff.max() - diff.min())
                if osc / p < best_osc:
                    best_osc = osc / p
                    best_lam = float(diff.mean()) / p
            last_osc = best_osc
            if best_osc < tol:
                return -best_lam
    raise LaxOleinikError(
        f"Lax-Oleinik iteration did not settle in {max_iters} sweeps "
        f"(oscillation {last_osc:.3e})", last_osc)


# ---------------------------------------------------------------------------
# conjugation and subgradient checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaValue:
    value: float
    on_boundary: bool   # argmax attained on the sampled boundary: the
                        # dual range was too small to certify beta(h)


def _as_sample_arrays(alpha_samples):
    if isinstance(alpha_samples, dict):
        cs = np.array([np.atleast_1d(np.asarray(k, dtype=float))
                       for k in alpha_samples])
        avals = np.array([float(v) for v in alpha_samples.values()])
    else:
        cs = np.array([np.atleast_1d(np.asarray(k, dtype=float))
                       for k, _ in alpha_samples])
        avals = np.array([float(v) for _, v in alpha_samples])
    return cs, avals


def beta_conjugate(alpha_samples, h) -> BetaValue:
    """beta(h) = max over sampled c of <c, h> - alpha(c)."""
    cs, avals = _as_sample_arrays(alpha_samples)
    h = np.atleast_1d(np.asarray(h, dtype=float))
    vals = cs @ h - avals
    k = int(np.argmax(vals))
    on_boundary = bool(np.any(np.isclose(cs[k], cs.min(axis=0))) or
                       np.any(np.isclose(cs[k], cs.max(axis=0))))
    return BetaValue(float(vals[k]), on_boundary)


@dataclass(frozen=True)
class SubgradientReport:
    c: np.ndarray
    rotation: np.ndarray
    max_violation: float
    satisfied: bool
    n_checked: int


def subdifferential_contains_rotation(result: AlphaResult, alpha_samples,
                                      slack: float = 2e-2) -> SubgradientReport:
    """Check alpha(c') >= alpha(c) + <c'-c, rho> - slack on the samples.

    Valid test because the discrete alpha is a max of affine functions of
    c, so the LP rotation vector is a true subgradient up to the gap.
    """
    cs, avals = _as_sample_arrays(alpha_samples)
    rho = result.rotation.components
    lhs = result.alpha + (cs - result.c) @ rho
    violations = lhs - avals
    max_violation = float(np.max(violations))
    return SubgradientReport(
        c=result.c, rotation=rho, max_violation=max_violation,
        satisfied=bool(max_violation <= slack), n_checked=len(avals))
