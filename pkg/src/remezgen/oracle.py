"""Independent oracle: discrete best uniform approximation by linear programming.

The grid problem

    min d   s.t.  -d <= p(t_j) - f(t_j) <= d,   l_k(p) = b_k

is solved through its dual, which is already in standard form with a
nonnegative right-hand side:

    max  sum_j f_j z_j + b.w
    s.t. sum_j z_j u(t_j) + L^T w = 0,   sum_j |z_j| = 1.

Splitting z = y_minus - y_plus and w = w_plus - w_minus gives n + 1 equality
rows.  The simplex method below is a dense two-phase tableau method with
Bland's rule, written here so the oracle shares no linear algebra with the
exchange solver.  The primal (p, d) is read off the simplex multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constraints import ConstraintSet
from .errors import LPError
from .function_system import FunctionSystem

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    duals: np.ndarray  # simplex multipliers, one per equality row
    basis: np.ndarray
    iterations: int


class DenseSimplex:
    """min c.x subject to A x = b, x >= 0, with b >= 0.

    Phase one drives artificial variables out of the basis; their columns are
    kept (but never re-enter) because they hold the basis inverse.
    """

    def __init__(self, c: np.ndarray, A: np.ndarray, b: np.ndarray, max_pivots: int = 200_000):
        self.c = np.asarray(c, dtype=float)
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if np.any(self.b < 0):
            raise LPError("right-hand side must be nonnegative")
        self.m, self.n = self.A.shape
        self.max_pivots = max_pivots
        self.pivots = 0

    def _pivot(self, T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
        T[row] /= T[row, col]
        for i in range(T.shape[0]):
            if i != row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[row]
        basis[row] = col
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise LPError("pivot limit exceeded")

    def _run(self, T: np.ndarray, basis: np.ndarray, allowed: int) -> None:
        """Bland's rule on the first ``allowed`` columns; the cost row is T[-1]."""
        m = self.m
        scale = max(1.0, float(np.max(np.abs(T[-1, :allowed]))))
        while True:
            rc = T[-1, :allowed]
            neg = np.nonzero(rc < -FEAS_TOL * scale)[0]
            if neg.size == 0:
                return
            col = int(neg[0])
            colv = T[:m, col]
            pos = np.nonzero(colv > PIVOT_TOL)[0]
            if pos.size == 0:
                raise LPError("linear program is unbounded")
            ratios = T[pos, -1] / colv[pos]
            best = np.min(ratios)
            ties = pos[ratios <= best + 1e-14 * max(1.0, abs(best))]
            row = int(ties[np.argmin(basis[ties])])
            self._pivot(T, basis, row, col)

    def solve(self) -> LPResult:
        m, n = self.m, self.n
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = self.A
        T[:m, n : n + m] = np.eye(m)
        T[:m, -1] = self.b
        basis = np.arange(n, n + m)

        # phase one: minimise the sum of artificials
        T[-1, :n] = -np.sum(self.A, axis=0)
        T[-1, -1] = -np.sum(self.b)
        self._run(T, basis, n)
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.sum(self.b))):
            raise LPError("linear program is infeasible")
        for row in range(m):
            if basis[row] >= n:
                cand = np.nonzero(np.abs(T[row, :n]) > PIVOT_TOL)[0]
                if cand.size == 0:
                    raise LPError("equality rows are linearly dependent")
                self._pivot(T, basis, row, int(cand[0]))

        # phase two: reduced costs c_j - pi.A_j, artificials carry cost 0
        T[-1, :] = 0.0
        T[-1, :n] = self.c
        for row in range(m):
            T[-1] -= self.c[basis[row]] * T[row]
        self._run(T, basis, n)

        x = np.zeros(n)
        x[basis] = T[:m, -1]
        # the artificial columns hold B^-1; refine pi B = c_B against the
        # original data to shed the rounding of every pivot
        binv = T[:m, n : n + m]
        B, cb = self.A[:, basis], self.c[basis]
        duals = -T[-1, n : n + m]
        for _ in range(2):
            duals = duals + (cb - duals @ B) @ binv
        return LPResult(x, float(self.c @ x), duals, basis.copy(), self.pivots)


def linprog_standard(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> LPResult:
    """Solve min c.x, A x = b, x >= 0 (b >= 0) with the dense simplex method."""
    return DenseSimplex(c, A, b).solve()


@dataclass
class GridChebyshev:
    coeffs: np.ndarray
    value: float
    active: np.ndarray  # grid points carrying dual weight
    signs: np.ndarray  # sign of p - f at the active points
    weights: np.ndarray
    pivots: int

    def __iter__(self):
        yield self.coeffs
        yield self.value


def grid_chebyshev_lp(
    system: FunctionSystem,
    f: Callable[[np.ndarray], np.ndarray],
    grid: Sequence[float],
    constraints: ConstraintSet | None = None,
) -> GridChebyshev:
    """Exact minimax fit of f on a finite grid, with the dual certificate."""
    t = np.asarray(grid, dtype=float)
    n = system.n
    if len(t) < n + 1:
        raise LPError(f"grid needs at least {n + 1} points")
    u = system.matrix(t)
    fv = np.asarray(f(t), dtype=float) * np.ones(len(t))
    M = len(t)
    L = np.zeros((0, n)) if constraints is None else constraints.matrix
    bt = np.zeros(0) if constraints is None else constraints.targets
    r = L.shape[0]

    # columns: y_plus (M), y_minus (M), w_plus (r), w_minus (r)
    A = np.zeros((n + 1, 2 * M + 2 * r))
    A[:n, :M] = -u.T
    A[:n, M : 2 * M] = u.T
    A[:n, 2 * M : 2 * M + r] = L.T
    A[:n, 2 * M + r :] = -L.T
    A[n, : 2 * M] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    c = np.concatenate([fv, -fv, -bt, bt])

    res = linprog_standard(c, A, rhs)
    coeffs = -res.duals[:n]
    d = -res.duals[n]
    z = res.x[M : 2 * M] - res.x[:M]
    act = np.nonzero(np.abs(z) > 0)[0]
    # z_j > 0 where p - f = -d, z_j < 0 where p - f = +d
    return GridChebyshev(coeffs, float(d), t[act], -np.sign(z[act]), np.abs(z[act]), res.iterations)


def grid_chebyshev(
    system: FunctionSystem,
    f: Callable[[np.ndarray], np.ndarray],
    grid: Sequence[float],
    constraints: ConstraintSet | None = None,
) -> tuple[np.ndarray, float]:
    """(coefficients, minimax value) of the best approximation of f on the grid."""
    sol = grid_chebyshev_lp(system, f, grid, constraints)
    return sol.coeffs, sol.value


__all__ = ["DenseSimplex", "LPResult", "linprog_standard", "GridChebyshev", "grid_chebyshev", "grid_chebyshev_lp"]
