"""Finite-dimensional geometry of the exchange method.

Node sets carry *oriented* vectors a_i = sigma_i * u(t_i) (projected onto the
constraint-annihilating subspace in constrained mode).  The origin must stay
in their convex hull; the barycentric weights of the origin are the
optimality certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegeneracyError, ExchangeError
from .function_system import FunctionSystem, Poly

COND_LIMIT = 1e12
TIE_TOL = 1e-10


@dataclass(frozen=True)
class NodeSet:
    points: np.ndarray
    signs: np.ndarray
    oriented: np.ndarray  # shape (m, dim)

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        object.__setattr__(self, "signs", np.asarray(self.signs, dtype=float))
        object.__setattr__(self, "oriented", np.atleast_2d(np.asarray(self.oriented, dtype=float)))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.oriented.shape[1]

    def replace(self, s: int, t0: float, sigma0: float, a0: np.ndarray) -> "NodeSet":
        pts, sg, orient = self.points.copy(), self.signs.copy(), self.oriented.copy()
        pts[s], sg[s], orient[s] = t0, sigma0, a0
        return NodeSet(pts, sg, orient)

    def flipped(self) -> "NodeSet":
        return NodeSet(self.points, -self.signs, -self.oriented)

    def order(self) -> np.ndarray:
        return np.argsort(self.points, kind="stable")

    def take(self, idx: np.ndarray) -> "NodeSet":
        return NodeSet(self.points[idx], self.signs[idx], self.oriented[idx])


@dataclass(frozen=True)
class ExchangeResult:
    index: int
    nodes: NodeSet
    alpha: np.ndarray
    alpha0: float  # weight of the incoming vertex in the new certificate
    ratios: np.ndarray
    tie: bool


@dataclass
class CertificateReport:
    level_ok: bool
    weights_ok: bool
    balance_ok: bool
    min_level_ratio: float
    min_weight: float
    weight_sum: float
    balance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.level_ok and self.weights_ok and self.balance_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "level_ok": self.level_ok,
            "weights_ok": self.weights_ok,
            "balance_ok": self.balance_ok,
            "min_level_ratio": self.min_level_ratio,
            "min_weight": self.min_weight,
            "weight_sum": self.weight_sum,
            "balance": self.balance,
        }


def _cond(mat: np.ndarray) -> float:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[-1] == 0.0:
        return float("inf")
    return float(sv[0] / sv[-1])


def subset_conditions(vectors: np.ndarray) -> np.ndarray:
    """Condition number of every dim-subset of ``dim + 1`` vectors (rows).

    The system is nondegenerate iff all are finite and below the limit.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    m = v.shape[0]
    batch = np.stack([np.delete(v, i, axis=0) for i in range(m)])
    sv = np.linalg.svd(batch, compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.where(sv[:, -1] > 0, sv[:, 0] / np.where(sv[:, -1] > 0, sv[:, -1], 1.0), np.inf)


def signed_null(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signs and barycentric weights from the unique null combination of dim+1 vectors.

    Returns ``(sigma, alpha)`` with sum_i alpha_i sigma_i v_i = 0, alpha >= 0,
    sum alpha = 1.  The global sign is fixed so that the first sign is +1.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    m, dim = v.shape
    if m != dim + 1:
        raise ValueError(f"signed_null needs dim+1 vectors, got {m} in R^{dim}")
    conds = subset_conditions(v)
    worst = float(np.max(conds))
    if not np.isfinite(worst) or worst > COND_LIMIT:
        raise DegeneracyError(f"degenerate node vectors (condition number {worst:.3g})", cond=worst)
    _, _, vt = np.linalg.svd(v.T)
    x = vt[-1]
    if x[0] < 0:
        x = -x
    sigma = np.where(x >= 0, 1.0, -1.0)
    alpha = np.abs(x) / np.sum(np.abs(x))
    return sigma, alpha


def certificate_weights(oriented: np.ndarray) -> np.ndarray | None:
    """Barycentric weights of the origin for oriented vertices, or None if the
    null combination has mixed signs (origin outside the hull)."""
    v = np.atleast_2d(oriented)
    _, _, vt = np.linalg.svd(v.T)
    x = vt[-1]
    if np.sum(x) < 0:
        x = -x
    scale = np.max(np.abs(x))
    if scale == 0 or np.min(x) < -1e-9 * scale:
        return None
    x = np.clip(x, 0.0, None)
    return x / np.sum(x)


def level_matrix(system: FunctionSystem, nodes: NodeSet, constraint_rows: np.ndarray | None = None) -> np.ndarray:
    u = system.matrix(nodes.points)
    top = np.hstack([u, -nodes.signs[:, None]])
    if constraint_rows is None or len(constraint_rows) == 0:
        return top
    bottom = np.hstack([constraint_rows, np.zeros((len(constraint_rows), 1))])
    return np.vstack([top, bottom])


def solve_level_system(
    nodes: NodeSet,
    f: Callable[[np.ndarray], np.ndarray],
    system: FunctionSystem,
    constraints=None,
) -> tuple[Poly, float, NodeSet]:
    """Solve p(t_i) - f(t_i) = sigma_i d (plus l_j(p) = b_j); flip signs so that d >= 0.

    Returns the polynomial, the level d and the (possibly sign-flipped) nodes.
    """
    rows = None if constraints is None else constraints.matrix
    mat = level_matrix(system, nodes, rows)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"level system is {mat.shape[0]}x{mat.shape[1]}, expected square")
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegeneracyError(f"singular level system (condition number {cond:.3g})", cond=float(cond))
    rhs = np.asarray(f(nodes.points), dtype=float)
    if rows is not None and len(rows):
        rhs = np.concatenate([rhs, constraints.targets])
    sol = np.linalg.solve(mat, rhs)
    coeffs, d = sol[:-1], float(sol[-1])
    if d < 0:
        nodes, d = nodes.flipped(), -d
    return Poly(coeffs, system), d, nodes


def exchange_vertex(nodes: NodeSet, alpha: np.ndarray, a0: np.ndarray, t0: float, sigma0: float) -> ExchangeResult:
    """Replace the vertex whose opposite facet is crossed by the negative extension of a0.

    The vertex is the argmax of x_i / alpha_i for any solution of
    a0 = sum x_i a_i; ties within TIE_TOL go to the smaller index and are
    flagged.
    """
    a = nodes.oriented
    a0 = np.asarray(a0, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    cond = _cond(a.T)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ExchangeError(f"ratio system singular (condition number {cond:.3g})", cond=cond)
    x, *_ = np.linalg.lstsq(a.T, a0, rcond=None)
    scale = max(np.max(np.abs(a)), np.max(np.abs(a0)), 1e-300)
    if np.max(np.abs(a.T @ x - a0)) > 1e-8 * scale:
        raise ExchangeError("incoming vector is outside the span of the vertices")
    safe = np.where(alpha > 1e-300, alpha, 1e-300)
    ratios = x / safe
    tau = float(np.max(ratios))
    if not tau > 0 or not np.isfinite(tau):
        raise ExchangeError("all exchange ratios are nonpositive")
    near = np.nonzero(ratios >= tau - TIE_TOL * max(1.0, abs(tau)))[0]
    s = int(near[0])
    tie = len(near) > 1
    weights = tau * alpha - x
    weights[s] = 1.0
    weights = np.clip(weights, 0.0, None)
    weights /= np.sum(weights)
    new_nodes = nodes.replace(s, t0, sigma0, a0)
    # recompute from scratch; keep the incremental update if the null vector is unusable
    fresh = certificate_weights(new_nodes.oriented)
    if fresh is not None and _balance(new_nodes.oriented, fresh) <= _balance(new_nodes.oriented, weights) + 1e-12:
        weights = fresh
    return ExchangeResult(s, new_nodes, weights, float(weights[s]), ratios, tie)


def _balance(oriented: np.ndarray, alpha: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(oriented))), 1e-300)
    return float(np.max(np.abs(alpha @ oriented))) / scale


def verify_certificate(
    nodes: NodeSet,
    alpha: np.ndarray,
    p: Poly,
    f: Callable[[np.ndarray], np.ndarray],
    dist: float,
    tol: float = 1e-8,
    level_tol: float | None = None,
) -> CertificateReport:
    """Check that the nodes form a generalized alternance of ``p`` at level ``dist``.

    (i) every node error is at least (1 - level_tol) * dist, (ii) weights are a
    probability vector, (iii) the weighted oriented vectors balance to zero.
    ``level_tol`` defaults to ``tol``.
    """
    level_tol = tol if level_tol is None else level_tol
    alpha = np.asarray(alpha, dtype=float)
    err = np.abs(np.asarray(p(nodes.points)) - np.asarray(f(nodes.points), dtype=float))
    ratio = float(np.min(err) / dist) if dist > 0 else 1.0
    level_ok = bool(np.all(err >= (1 - level_tol) * dist))
    wsum = float(np.sum(alpha))
    wmin = float(np.min(alpha))
    weights_ok = wmin >= -tol and abs(wsum - 1.0) <= tol
    bal = _balance(nodes.oriented, alpha)
    return CertificateReport(level_ok, weights_ok, bal <= tol, ratio, wmin, wsum, bal)
