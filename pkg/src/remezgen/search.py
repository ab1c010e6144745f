"""Global one-dimensional search: grid scan followed by golden-section refinement."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .function_system import Domain, FunctionSystem, Poly

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchGrid:
    """Grid density for the global scans.

    ``density`` is points per unit length; the grid never has fewer than
    ``min_points`` points (nor fewer than 2(n+1)) and never more than
    ``max_points``.  The ``refine_candidates`` largest local maxima of a
    scan are each refined by ``refine_iters`` golden-section steps.
    """

    density: float = 2000.0
    min_points: int = 4096
    max_points: int = 400_000
    refine_iters: int = 60
    refine_candidates: int = 16

    def points(self, domain: Domain, n: int = 1) -> np.ndarray:
        if domain.is_halfline:
            raise DomainError("search grids need a compact domain; truncate the half-line first")
        count = int(min(self.max_points, max(self.min_points, 2 * (n + 1), math.ceil(self.density * domain.length) + 1)))
        return np.linspace(domain.a, domain.b, count)

    def to_dict(self) -> dict:
        return {
            "density": self.density,
            "min_points": self.min_points,
            "max_points": self.max_points,
            "refine_iters": self.refine_iters,
            "refine_candidates": self.refine_candidates,
        }


def golden_section(fn: Callable[[float], float], a: float, b: float, iters: int = 60, maximize: bool = False) -> tuple[float, float]:
    """Golden-section search for a local minimum (or maximum) of fn on [a, b].

    Returns the best point seen and its value; the endpoints are included as
    candidates so the result is never worse than them.
    """
    sign = -1.0 if maximize else 1.0

    def h(x):
        v = fn(x)
        return sign * v if np.isfinite(v) else math.inf

    best_x, best_v = a, h(a)
    vb = h(b)
    if vb < best_v:
        best_x, best_v = b, vb
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = h(c), h(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = h(d)
    for x, v in ((c, fc), (d, fd)):
        if v < best_v:
            best_x, best_v = x, v
    return best_x, sign * best_v


def golden_section_many(
    fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, iters: int = 60, maximize: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised golden_section over several brackets at once; ``fn`` maps arrays to arrays."""
    sign = -1.0 if maximize else 1.0

    def h(x):
        v = np.asarray(fn(x), dtype=float)
        return np.where(np.isfinite(v), sign * v, math.inf)

    a, b = np.array(lo, dtype=float), np.array(hi, dtype=float)
    best_x, best_v = a.copy(), h(a)
    vb = h(b)
    take = vb < best_v
    best_x[take], best_v[take] = b[take], vb[take]
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = h(c), h(d)
    for _ in range(iters):
        left = fc <= fd
        # left: keep [a, d]; right: keep [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - INV_PHI * (b - a), d)
        nd = np.where(left, c, a + INV_PHI * (b - a))
        nfc = np.where(left, math.nan, fd)
        nfd = np.where(left, fc, math.nan)
        fresh = np.where(left, nc, nd)
        fv = h(fresh)
        fc = np.where(left, fv, nfc)
        fd = np.where(left, nfd, fv)
        c, d = nc, nd
    for x, v in ((c, fc), (d, fd)):
        take = v < best_v
        best_x[take], best_v[take] = x[take], v[take]
    return best_x, sign * best_v


class Sampler:
    """Basis and target values cached on a search grid over a compact domain."""

    def __init__(self, system: FunctionSystem, f: Callable, domain: Domain, grid: SearchGrid | None = None):
        self.system = system
        self.f = f
        self.domain = domain
        self.grid = grid or SearchGrid()
        self.t = self.grid.points(domain, system.n)
        self.u = system.matrix(self.t, check=False)
        self.fv = np.asarray(f(self.t), dtype=float)

    def errors(self, coeffs: np.ndarray) -> np.ndarray:
        """p - f on the grid."""
        return self.u @ coeffs - self.fv

    def errors_at(self, t: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        return self.system.matrix(tt, check=False) @ coeffs - np.asarray(self.f(tt), dtype=float)

    def error_at(self, t: float, coeffs: np.ndarray) -> float:
        tt = np.array([t])
        return float(self.system.matrix(tt, check=False)[0] @ coeffs - np.asarray(self.f(tt), dtype=float)[0])

    def bracket(self, j: int) -> tuple[float, float]:
        lo = self.t[max(j - 1, 0)]
        hi = self.t[min(j + 1, len(self.t) - 1)]
        return float(lo), float(hi)


def _top_local_maxima(v: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest discrete local maxima of v (ties to the smaller index)."""
    left = np.concatenate([[True], v[1:] >= v[:-1]])
    right = np.concatenate([v[:-1] >= v[1:], [True]])
    idx = np.nonzero(left & right)[0]
    if idx.size > k:
        idx = idx[np.argsort(-v[idx], kind="stable")[:k]]
    return np.sort(idx)


def global_max_abs_error(
    p: Poly,
    f: Callable,
    domain: Domain,
    grid: SearchGrid | None = None,
    sampler: Sampler | None = None,
) -> tuple[float, float, float]:
    """Point t0 maximizing |p - f| on the domain, the maximum r and sign(p(t0) - f(t0))."""
    if sampler is None:
        sampler = Sampler(p.system, f, domain, grid)
    e = sampler.errors(p.coeffs)
    ae = np.abs(e)
    j = int(np.argmax(ae))
    t0, r = float(sampler.t[j]), float(ae[j])
    # near equioscillation the best grid cell need not hold the true maximum
    cand = _top_local_maxima(ae, sampler.grid.refine_candidates)
    lo = sampler.t[np.maximum(cand - 1, 0)]
    hi = sampler.t[np.minimum(cand + 1, len(sampler.t) - 1)]
    tr, vr = golden_section_many(lambda s: np.abs(sampler.errors_at(s, p.coeffs)), lo, hi, sampler.grid.refine_iters, maximize=True)
    k = int(np.argmax(vr))
    if vr[k] > r:
        t0, r = float(tr[k]), float(vr[k])
    sign = 1.0 if sampler.error_at(t0, p.coeffs) >= 0 else -1.0
    return t0, r, sign


def superlevel_min_g(
    p: Poly,
    f: Callable,
    domain: Domain,
    threshold: float,
    g: Callable[[np.ndarray], np.ndarray],
    grid: SearchGrid | None = None,
    sampler: Sampler | None = None,
    t0: float | None = None,
) -> tuple[float | None, float]:
    """Minimize g over {t : |p(t) - f(t)| >= threshold}.

    ``g`` is vectorised and may return +inf.  ``t0`` (a known feasible point)
    is always a candidate.  Returns ``(None, inf)`` with a warning when no
    feasible point has finite g.
    """
    if sampler is None:
        sampler = Sampler(p.system, f, domain, grid)
    ae = np.abs(sampler.errors(p.coeffs))
    feas = np.nonzero(ae >= threshold)[0]
    best_t, best_g = None, math.inf
    if feas.size:
        gv = np.asarray(g(sampler.t[feas]), dtype=float)
        k = int(np.argmin(gv))
        if np.isfinite(gv[k]):
            best_t, best_g = float(sampler.t[feas[k]]), float(gv[k])
    if t0 is not None:
        g0 = float(np.asarray(g(np.array([t0])))[0])
        if g0 < best_g:
            best_t, best_g = t0, g0
    if best_t is None:
        warnings.warn("regularization found no feasible point with finite g; falling back", RuntimeWarning, stacklevel=2)
        return None, math.inf

    def penalized(s: float) -> float:
        if abs(sampler.error_at(s, p.coeffs)) < threshold:
            return math.inf
        return float(np.asarray(g(np.array([s])))[0])

    j = int(np.argmin(np.abs(sampler.t - best_t)))
    lo, hi = sampler.bracket(j)
    if hi > lo:
        tr, vr = golden_section(penalized, lo, hi, sampler.grid.refine_iters)
        if vr < best_g and abs(sampler.error_at(tr, p.coeffs)) >= threshold:
            best_t, best_g = tr, vr
    return best_t, best_g
