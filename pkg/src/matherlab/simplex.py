"""Revised simplex for dense standard-form linear programs.

Solves min c.x subject to A x = b, x >= 0.  Dantzig pricing with an
automatic switch to Bland's rule after a degenerate stall, which prevents
cycling.  The basis inverse is maintained explicitly with rank-one pivot
updates and refactored periodically for stability.

Intended for the moderately sized, very sparse-in-structure programs of
the transition-measure module; A is stored dense, so row counts should
stay in the hundreds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
RATIO_TOL = 1e-11
REFACTOR_EVERY = 128
STALL_LIMIT = 400


class SimplexError(RuntimeError):
    pass


class InfeasibleError(SimplexError):
    pass


class UnboundedError(SimplexError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray            # primal solution, length n
    objective: float
    dual: np.ndarray         # row multipliers y, length m
    reduced_costs: np.ndarray
    basis: np.ndarray
    iterations: int

    @property
    def min_reduced_cost(self) -> float:
        return float(np.min(self.reduced_costs))


def _refactor(A, basis):
    B = A[:, basis]
    return np.linalg.inv(B)


def _phase(A, b, c, basis, allowed, maxiter):
    """Run simplex iterations from a given basis; `allowed` masks columns
    that may enter.  Returns (basis, x_B, B_inv, y, r, iterations)."""
    m, n = A.shape
    basis = np.asarray(basis, dtype=int).copy()
    B_inv = _refactor(A, basis)
    x_B = B_inv @ b
    if np.min(x_B) < -1e-7:
        raise SimplexError("initial basis is not primal feasible")
    x_B = np.clip(x_B, 0.0, None)

    bland = False
    stall = 0
    last_obj = np.inf
    it = 0
    while True:
        it += 1
        if it > maxiter:
            raise SimplexError(f"iteration limit {maxiter} exceeded")
        if it % REFACTOR_EVERY == 0:
            B_inv = _refactor(A, basis)
            x_B = np.clip(B_inv @ b, 0.0, None)

        y = c[basis] @ B_inv
        r = c - y @ A
        r_masked = np.where(allowed, r, np.inf)
        if bland:
            candidates = np.where(r_masked < -PIVOT_TOL)[0]
            if candidates.size == 0:
                break
            j = int(candidates[0])
        else:
            j = int(np.argmin(r_masked))
            if r_masked[j] >= -PIVOT_TOL:
                break

        u = B_inv @ A[:, j]
        pos = u > RATIO_TOL
        if not pos.any():
            raise UnboundedError("unbounded direction encountered")
        ratios = np.where(pos, x_B / np.where(pos, u, 1.0), np.inf)
        theta = float(np.min(ratios))
        ties = np.where(np.abs(ratios - theta) <= RATIO_TOL * (1 + theta))[0]
        # smallest variable index among ties (Bland-safe leaving rule)
        leave = int(ties[np.argmin(basis[ties])])

        obj = float(c[basis] @ x_B)
        if theta <= RATIO_TOL and abs(obj - last_obj) <= 1e-13 * (1 + abs(obj)):
            stall += 1
            if stall > STALL_LIMIT:
                bland = True
        else:
            stall = 0
        last_obj = obj

        x_B = x_B - theta * u
        x_B[leave] = theta
        x_B = np.clip(x_B, 0.0, None)
        basis[leave] = j
        pivot = u[leave]
        row = B_inv[leave] / pivot
        B_inv = B_inv - np.outer(u, row)
        B_inv[leave] = row

    return basis, x_B, B_inv, y, r, it


def revised_simplex(c, A, b, basis=None, maxiter=200000) -> SimplexResult:
    """Two-phase revised simplex.  A starting basis (column indices forming
    a feasible basis) skips phase 1."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape

    if basis is None:
        # phase 1 with artificial identity columns
        sign = np.where(b < 0, -1.0, 1.0)
        A1 = np.hstack([A * sign[:, None], np.eye(m)])
        b1 = b * sign
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        art_basis = np.arange(n, n + m)
        allowed = np.ones(n + m, dtype=bool)
        basis, x_B, _, _, _, _ = _phase(A1, b1, c1, art_basis, allowed,
                                        maxiter)
        if float(c1[basis] @ x_B) > 1e-8:
            raise InfeasibleError("phase 1 ended with positive artificials")
        # phase 2 on the extended tableau; artificials may stay basic at 0
        # but can never re-enter
        c2 = np.concatenate([c, np.zeros(m)])
        allowed2 = np.concatenate([np.ones(n, bool), np.zeros(m, bool)])
        basis, x_B, B_inv, y, r, it = _phase(
            A1, b1, c2, basis, allowed2, maxiter)
        y = y * sign  # undo the row scaling applied for phase 1
        A_eff, c_eff = A1, c2
    else:
        allowed = np.ones(n, dtype=bool)
        basis, x_B, B_inv, y, r, it = _phase(A, b, c, basis, allowed, maxiter)
        A_eff, c_eff = A, c

    x = np.zeros(A_eff.shape[1])
    x[basis] = x_B
    obj = float(c_eff[basis] @ x_B)
    return SimplexResult(x=x[:n], objective=obj, dual=np.asarray(y),
                         reduced_costs=np.asarray(r)[:n], basis=basis,
                         iterations=it)
