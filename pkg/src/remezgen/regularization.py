"""Vanishing polynomials and the separation objective used by the regularized exchange.

For a node set t_1..t_m (m = dim + 1) and a pair (i1, i2), q_{i1 i2} is the
unit-norm polynomial vanishing at every other node (and annihilated by the
constraints).  |q(t)| is the distance from u(t) to the hyperplane spanned by
the moment vectors of those nodes, so

    g(t) = sum_{i1 < i2} 1 / q_{i1 i2}(t)**2

is small exactly when u(t) is far from all of them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constraints import ConstraintSet
from .errors import DegeneracyError
from .function_system import FunctionSystem, Poly
from .search import Sampler, superlevel_min_g

G_ZERO = 1e-300


class DegenerateNullspaceError(DegeneracyError):
    """The zero conditions do not determine a one-dimensional null space."""


@dataclass(frozen=True)
class VanishingPoly:
    pair: tuple[int, int]
    coeffs: np.ndarray

    def __call__(self, u: np.ndarray) -> np.ndarray:
        """Values at moment vectors ``u`` (rows)."""
        return np.asarray(u) @ self.coeffs


def _null_vector(rows: np.ndarray, n: int) -> np.ndarray:
    if rows.shape[0] == 0:
        if n == 1:
            return np.ones(1)
        raise DegenerateNullspaceError(f"no zero conditions in dimension {n}")
    _, sv, vt = np.linalg.svd(rows)
    tol = 1e-10 * max(sv[0], 1e-300)
    rank = int(np.sum(sv > tol))
    if rank != n - 1:
        raise DegenerateNullspaceError(f"null space has dimension {n - rank}, expected 1")
    q = vt[-1]
    nz = np.nonzero(np.abs(q) > 1e-12)[0]
    if nz.size and q[nz[0]] < 0:
        q = -q
    return q / np.linalg.norm(q)


def vanishing_polynomial(
    system: FunctionSystem,
    points: Sequence[float],
    i1: int,
    i2: int,
    constraints: ConstraintSet | None = None,
) -> VanishingPoly:
    """Unit-norm q vanishing at every node except i1 and i2.

    Sign is fixed by making the first nonzero coefficient positive.
    """
    points = np.asarray(points, dtype=float)
    keep = [i for i in range(len(points)) if i not in (i1, i2)]
    rows = system.matrix(points[keep], check=False) if keep else np.zeros((0, system.n))
    if constraints is not None and constraints.r:
        rows = np.vstack([rows, constraints.matrix])
    return VanishingPoly((min(i1, i2), max(i1, i2)), _null_vector(rows, system.n))


def all_vanishing(system: FunctionSystem, points: Sequence[float], constraints: ConstraintSet | None = None) -> list[VanishingPoly]:
    m = len(points)
    return [vanishing_polynomial(system, points, i, j, constraints) for i, j in itertools.combinations(range(m), 2)]


def q_matrix(qs: Sequence[VanishingPoly]) -> np.ndarray:
    return np.column_stack([q.coeffs for q in qs])


def g_from_values(qvals: np.ndarray) -> np.ndarray:
    """g for an array of q values (last axis = pairs); saturates to +inf at zeros."""
    qvals = np.atleast_2d(qvals)
    sq = qvals * qvals
    zero = np.any(np.abs(qvals) <= G_ZERO, axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.sum(1.0 / np.where(sq > 0, sq, 1.0), axis=-1)
    out = np.where(zero | ~np.isfinite(out), math.inf, out)
    return out


def g_objective(t: float, qs: Sequence[VanishingPoly], system: FunctionSystem) -> float:
    u = system.matrix([t], check=False)
    return float(g_from_values(u @ q_matrix(qs))[0])


def g_function(qs: Sequence[VanishingPoly], system: FunctionSystem) -> Callable[[np.ndarray], np.ndarray]:
    qm = q_matrix(qs)

    def g(t: np.ndarray) -> np.ndarray:
        return g_from_values(system.matrix(np.atleast_1d(t), check=False) @ qm)

    return g


@dataclass(frozen=True)
class FacetSeparation:
    """How close u(t0) comes to the facet hyperplanes kept after replacing node s.

    ``raw`` is min over j != s of |q_{s j}(t0)| for unit-norm q.  ``ratio`` is
    min over j of |q_{s j}(t0)| / |q_{s j}(t_s)|: the volume of the new simplex
    facet-by-facet relative to the old one, which does not depend on the scale
    or conditioning of the basis.
    """

    raw: float
    ratio: float


def facet_separation(
    system: FunctionSystem,
    points: Sequence[float],
    s: int,
    t0: float,
    constraints: ConstraintSet | None = None,
) -> FacetSeparation:
    u = system.matrix([t0, points[s]], check=False)
    raw, ratio = math.inf, math.inf
    for j in range(len(points)):
        if j == s:
            continue
        try:
            v = vanishing_polynomial(system, points, s, j, constraints)(u)
        except DegenerateNullspaceError:
            return FacetSeparation(0.0, 0.0)
        new, old = abs(float(v[0])), abs(float(v[1]))
        raw = min(raw, new)
        ratio = min(ratio, new / old if old > 0 else (math.inf if new > 0 else 0.0))
    return FacetSeparation(raw, ratio)


def min_q_against(system: FunctionSystem, points: Sequence[float], s: int, t0: float, constraints: ConstraintSet | None = None) -> float:
    """min over j != s of |q_{s j}(t0)| for unit-norm q."""
    return facet_separation(system, points, s, t0, constraints).raw


@dataclass
class RegularizedChoice:
    t: float
    sign: float
    g: float
    error: float
    fallback: bool


def select_regularized_point(
    p: Poly,
    f: Callable,
    points: Sequence[float],
    r: float,
    b: float,
    nu: float,
    sampler: Sampler,
    t0: float,
    constraints: ConstraintSet | None = None,
) -> RegularizedChoice:
    """Point of the superlevel set {|p - f| >= (1 - nu) r + nu b} farthest from degenerate hyperplanes.

    Falls back to t0 (with a warning from the search) when no feasible point
    has finite g.
    """
    system = p.system
    threshold = (1.0 - nu) * r + nu * b
    try:
        qs = all_vanishing(system, points, constraints)
    except DegenerateNullspaceError:
        qs = None
    t_nu, g_val, fallback = None, math.inf, False
    if qs is not None:
        t_nu, g_val = superlevel_min_g(p, f, sampler.domain, threshold, g_function(qs, system), sampler=sampler, t0=t0)
    if t_nu is None:
        t_nu, fallback = t0, True
    e = sampler.error_at(t_nu, p.coeffs)
    return RegularizedChoice(float(t_nu), 1.0 if e >= 0 else -1.0, float(g_val), abs(e), fallback)
