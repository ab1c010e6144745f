"""Generalized Remez iteration for arbitrary function systems.

The node set always carries dim + 1 points whose oriented moment vectors
(projected onto L-perp when constraints are present) contain the origin in
their convex hull.  Each iteration replaces one vertex by the current
worst-error point, or by a better separated point of a superlevel set when
the simplex threatens to degenerate.  ``b`` (the level on the nodes) is a
lower bound for the distance and ``B`` (the best sup error seen) an upper
bound.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constraints import ConstraintSet
from .errors import DegeneracyError, InitializationError, TailSweepError
from .function_system import Domain, FunctionSystem, Poly, truncate_halfline
from .regularization import DegenerateNullspaceError, facet_separation, select_regularized_point
from .search import Sampler, SearchGrid, global_max_abs_error
from .simplex import (
    CertificateReport,
    NodeSet,
    exchange_vertex,
    signed_null,
    solve_level_system,
    verify_certificate,
)

log = logging.getLogger(__name__)

PLAIN = "plain"
REGULARIZED = "regularized"


@dataclass(frozen=True)
class SolverOptions:
    epsilon: float = 1e-6
    max_iters: int = 500
    nu: float = 0.5
    delta: float = 0.05
    init: Sequence[float] | None = None  # None = equispaced, perturbed on retry
    grid: SearchGrid = field(default_factory=SearchGrid)
    cert_tol: float = 1e-8
    seed: int = 0
    init_retries: int = 50
    stall_iters: int = 3
    stall_ratio: float = 0.01
    regularize: str = "auto"  # auto | always | never
    tail_tol: float = 1e-12
    keep_trace: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.nu < 1:
            raise ValueError("nu must lie in [0, 1)")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.regularize not in ("auto", "always", "never"):
            raise ValueError("regularize must be auto, always or never")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "max_iters": self.max_iters,
            "nu": self.nu,
            "delta": self.delta,
            "init": None if self.init is None else [float(x) for x in self.init],
            "grid": self.grid.to_dict(),
            "cert_tol": self.cert_tol,
            "seed": self.seed,
            "init_retries": self.init_retries,
            "stall_iters": self.stall_iters,
            "stall_ratio": self.stall_ratio,
            "regularize": self.regularize,
            "tail_tol": self.tail_tol,
            "keep_trace": self.keep_trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOptions":
        d = dict(d)
        if "grid" in d and isinstance(d["grid"], dict):
            d["grid"] = SearchGrid(**d["grid"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            from .errors import ParseError

            raise ParseError(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)


@dataclass
class TraceRow:
    k: int
    b: float
    B: float
    r: float
    alpha0: float | None
    index: int | None
    mode: str
    t_new: float | None
    qmin: float | None  # min |q_{s j}(t0)|, unit-norm q
    qratio: float | None = None  # facet separation ratio used by the mode controller

    @property
    def gap(self) -> float:
        return self.B - self.b


@dataclass
class Snapshot:
    poly: Poly
    nodes: NodeSet
    alpha: np.ndarray
    b: float
    r: float
    k: int


@dataclass
class SolverState:
    k: int
    poly: Poly
    nodes: NodeSet
    alpha: np.ndarray
    b: float
    B: float
    r: float
    t0: float
    sigma0: float
    best: Snapshot
    trace: list[TraceRow] = field(default_factory=list)
    stall: int = 0
    ties: int = 0
    fallbacks: int = 0

    @property
    def gap(self) -> float:
        return self.B - self.b


@dataclass
class ApproxResult:
    poly: Poly
    lower: float
    upper: float
    nodes: NodeSet
    alpha: np.ndarray
    final_poly: Poly
    iterations: int
    trace: list[TraceRow]
    certificate: CertificateReport
    converged: bool
    status: str
    constraints: ConstraintSet
    domain: Domain
    tail_sup: float | None = None
    degenerate_steps: int = 0
    target: Callable | None = None

    @property
    def distance(self) -> float:
        return self.upper

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coeffs

    def support(self, rel_tol: float = 1e-6) -> np.ndarray:
        """Indices of nodes carrying non-negligible certificate weight."""
        return np.nonzero(self.alpha > rel_tol * np.max(self.alpha))[0]

    def alternance_points(self, rel_tol: float = 1e-6, dip: float = 1e-3) -> list[AlternancePoint]:
        """Supported nodes, with nodes on one hump of |p - f| merged into a single point."""
        idx = self.support(rel_tol)
        if self.target is None:
            return [AlternancePoint(float(self.nodes.points[i]), float(self.nodes.signs[i]), float(self.alpha[i])) for i in idx]
        return merge_alternance(self.final_poly, self.target, self.nodes, self.alpha, idx, dip * self.upper)

    @property
    def alternance(self) -> np.ndarray:
        return np.array([a.t for a in self.alternance_points()])

    @property
    def mode_history(self) -> list[str]:
        return [row.mode for row in self.trace]


@dataclass(frozen=True)
class AlternancePoint:
    t: float
    sign: float
    weight: float


def merge_alternance(
    p: Poly, f: Callable, nodes: NodeSet, alpha: np.ndarray, idx: Sequence[int], dip: float, samples: int = 64
) -> list[AlternancePoint]:
    """Group consecutive nodes of equal sign when |p - f| stays within ``dip`` of
    the smaller node error between them.  Each group is reported at its node of
    largest error, carrying the group's total weight.
    """
    order = sorted(idx, key=lambda i: nodes.points[i])
    if not order:
        return []
    pts = nodes.points
    err = lambda t: np.asarray(p(np.atleast_1d(t))) - np.asarray(f(np.atleast_1d(t)), dtype=float)
    groups = [[order[0]]]
    for i in order[1:]:
        j = groups[-1][-1]
        same = nodes.signs[i] == nodes.signs[j]
        if same:
            seg = err(np.linspace(pts[j], pts[i], samples)) * nodes.signs[i]
            floor = min(seg[0], seg[-1]) - dip
            same = bool(np.min(seg) >= floor)
        if same:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        e = np.abs(err(pts[g]))
        best = g[int(np.argmax(e))]
        out.append(AlternancePoint(float(pts[best]), float(nodes.signs[best]), float(np.sum(alpha[g]))))
    return out


class _Problem:
    """Everything fixed during one solve."""

    def __init__(self, system: FunctionSystem, f: Callable, cs: ConstraintSet, opts: SolverOptions):
        self.f = as_target(f)
        self.cs = cs
        self.opts = opts
        self.full_system = system
        if system.domain.is_halfline:
            self.domain = truncate_halfline(system, self.f, opts.tail_tol)
        else:
            self.domain = system.domain
        self.system = system.with_domain(self.domain) if system.domain.is_halfline else system
        self.sampler = Sampler(self.system, self.f, self.domain, opts.grid)

    @property
    def dim(self) -> int:
        return self.cs.dim

    def oriented(self, t: np.ndarray, signs: np.ndarray) -> np.ndarray:
        u = self.system.matrix(np.atleast_1d(t), check=False)
        return self.cs.project(u) * np.asarray(signs, dtype=float)[:, None]

    def max_error(self, p: Poly) -> tuple[float, float, float]:
        return global_max_abs_error(p, self.f, self.domain, sampler=self.sampler)


def as_target(f) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap numbers and scalar-returning callables into vectorised targets."""
    if callable(f):

        def target(t):
            t = np.asarray(t, dtype=float)
            return np.broadcast_to(np.asarray(f(t), dtype=float), t.shape).astype(float)

        target.__wrapped__ = f
        return target
    value = float(f)
    return lambda t: np.full(np.shape(t), value)


def _seed(opts: SolverOptions) -> int:
    env = os.environ.get("REMEZGEN_SEED")
    return int(env) if env is not None else opts.seed


def _start_points(domain: Domain, m: int, attempt: int, rng: np.random.Generator, system: FunctionSystem, halfline: bool) -> np.ndarray:
    a, b = domain.a, domain.b
    if halfline:
        # place the start where the basis is still sizable
        b = a + min(domain.length, _effective_length(system, domain))
    pts = np.linspace(a, b, m)
    if attempt > 0:
        h = (b - a) / max(m - 1, 1)
        pts = np.clip(pts + rng.uniform(-0.45 * h, 0.45 * h, size=m), a, b)
        pts = np.sort(pts)
    return pts


def _effective_length(system: FunctionSystem, domain: Domain) -> float:
    t = np.linspace(domain.a, domain.b, 20001)
    level = np.max(np.abs(system.matrix(t, check=False)), axis=1)
    above = np.nonzero(level > 0.05 * np.max(level))[0]
    return float(t[above[-1]] - domain.a) if above.size and above[-1] > 0 else domain.length


def _initial_nodes(prob: _Problem) -> tuple[NodeSet, np.ndarray]:
    opts = prob.opts
    m = prob.dim + 1
    rng = np.random.default_rng(_seed(opts))
    attempts = 1 if opts.init is not None else opts.init_retries + 1
    last: Exception | None = None
    for attempt in range(attempts):
        if opts.init is not None:
            pts = np.sort(np.asarray(opts.init, dtype=float))
            if len(pts) != m:
                raise InitializationError(f"expected {m} initial points, got {len(pts)}")
            prob.domain.check(pts)
        else:
            pts = _start_points(prob.domain, m, attempt, rng, prob.system, prob.full_system.domain.is_halfline)
        if len(np.unique(pts)) < m:
            last = InitializationError("initial points are not distinct")
            continue
        vecs = prob.oriented(pts, np.ones(m))
        try:
            sigma, alpha = signed_null(vecs)
        except DegeneracyError as e:
            last = e
            continue
        return NodeSet(pts, sigma, vecs * sigma[:, None]), alpha
    raise InitializationError(f"could not find a nondegenerate starting node set: {last}")


def initialize(system: FunctionSystem, f: Callable, opts: SolverOptions | None = None, constraints: ConstraintSet | None = None) -> tuple[SolverState, _Problem]:
    """Nondegenerate start, first level solve and first upper bound."""
    opts = opts or SolverOptions()
    cs = constraints if constraints is not None else ConstraintSet.empty(system.n)
    prob = _Problem(system, f, cs, opts)
    nodes, alpha = _initial_nodes(prob)
    p, d, nodes = solve_level_system(nodes, prob.f, prob.system, cs)
    t0, r, s0 = prob.max_error(p)
    snap = Snapshot(p, nodes, alpha, d, r, 1)
    state = SolverState(1, p, nodes, alpha, d, r, r, t0, s0, snap)
    state.trace.append(TraceRow(1, d, r, r, None, None, "init", None, None, None))
    return state, prob


def _stalled(state: SolverState, opts: SolverOptions) -> bool:
    return state.stall >= opts.stall_iters


def mode_controller(state: SolverState, separation: float, opts: SolverOptions) -> str:
    """Plain exchange unless the incoming point nearly lies on a kept facet hyperplane or the gap stalls.

    ``separation`` is the facet separation ratio of the candidate exchange.
    """
    if opts.regularize == "always":
        return REGULARIZED
    if opts.regularize == "never":
        return PLAIN
    if separation < opts.delta or _stalled(state, opts):
        return REGULARIZED
    return PLAIN


def _exchange_and_solve(prob: _Problem, state: SolverState, t_new: float, sigma_new: float):
    a_new = prob.oriented(np.array([t_new]), np.array([sigma_new]))[0]
    ex = exchange_vertex(state.nodes, state.alpha, a_new, t_new, sigma_new)
    order = ex.nodes.order()
    nodes = ex.nodes.take(order)
    alpha = ex.alpha[order]
    p, d, nodes = solve_level_system(nodes, prob.f, prob.system, prob.cs)
    return ex, nodes, alpha, p, d


def iterate_once(state: SolverState, prob: _Problem) -> SolverState:
    """One vertex exchange; mutates and returns ``state``."""
    opts = prob.opts
    qmin, qratio = math.inf, math.inf
    try:
        a0 = prob.oriented(np.array([state.t0]), np.array([state.sigma0]))[0]
        probe = exchange_vertex(state.nodes, state.alpha, a0, state.t0, state.sigma0)
        sep = facet_separation(prob.system, state.nodes.points, probe.index, state.t0, prob.cs)
        qmin, qratio = sep.raw, sep.ratio
    except DegeneracyError:
        qmin, qratio = 0.0, 0.0
    mode = mode_controller(state, qratio, opts)

    t_new, s_new = state.t0, state.sigma0
    result = None
    if mode == PLAIN:
        try:
            result = _exchange_and_solve(prob, state, t_new, s_new)
        except DegeneracyError:
            if opts.regularize == "never":
                raise
            mode = REGULARIZED
    if mode == REGULARIZED:
        choice = select_regularized_point(
            state.poly, prob.f, state.nodes.points, state.r, state.b, opts.nu, prob.sampler, state.t0, prob.cs
        )
        if choice.fallback:
            state.fallbacks += 1
        t_new, s_new = choice.t, choice.sign
        result = _exchange_and_solve(prob, state, t_new, s_new)

    ex, nodes, alpha, p, d = result
    if ex.tie:
        state.ties += 1
    old_gap = state.gap
    t0, r, s0 = prob.max_error(p)
    state.k += 1
    state.poly, state.nodes, state.alpha, state.b = p, nodes, alpha, d
    state.r, state.t0, state.sigma0 = r, t0, s0
    state.B = min(state.B, r)
    if r <= state.best.r:
        state.best = Snapshot(p, nodes, alpha, d, r, state.k)
    new_gap = state.gap
    if old_gap > 0 and (old_gap - new_gap) < opts.stall_ratio * old_gap:
        state.stall += 1
    else:
        state.stall = 0
    row = TraceRow(
        state.k, d, state.B, r, ex.alpha0, ex.index, mode, t_new,
        None if not math.isfinite(qmin) else qmin,
        None if not math.isfinite(qratio) else qratio,
    )
    if opts.keep_trace:
        state.trace.append(row)
    else:
        state.trace[-1:] = [row]
    log.debug("k=%d b=%.12g B=%.12g r=%.12g mode=%s", state.k, d, state.B, r, mode)
    return state


def _tail_sweep(prob: _Problem, p: Poly) -> float | None:
    if not prob.full_system.domain.is_halfline:
        return None
    T = prob.domain.b
    t = T + (np.geomspace(1.0, 1.0 + 1e4 * max(T - prob.domain.a, 1.0), 20000) - 1.0)
    u = prob.full_system.matrix(t, check=False)
    return float(np.max(np.abs(u @ p.coeffs - prob.f(t))))


def _finish(state: SolverState, prob: _Problem, converged: bool, status: str) -> ApproxResult:
    opts = prob.opts
    B = state.B
    # the final node set certifies b_N; it is the alternance of the final iterate
    level_tol = opts.cert_tol + (opts.epsilon / B if B > 0 else 0.0)
    cert = verify_certificate(state.nodes, state.alpha, state.poly, prob.f, B, opts.cert_tol, level_tol=level_tol)
    poly = Poly(state.best.poly.coeffs, prob.full_system)
    tail = _tail_sweep(prob, poly)
    if tail is not None and tail > B + 1e-9:
        raise TailSweepError(f"error {tail:.3g} beyond truncation point exceeds the upper bound {B:.3g}")
    degenerate_steps = sum(1 for row in state.trace if row.qmin is not None and row.qmin < opts.delta)
    return ApproxResult(
        poly=poly,
        lower=state.b,
        upper=B,
        nodes=state.nodes,
        alpha=state.alpha,
        final_poly=Poly(state.poly.coeffs, prob.full_system),
        iterations=state.k,
        trace=state.trace,
        certificate=cert,
        converged=converged,
        status=status,
        constraints=prob.cs,
        domain=prob.domain,
        tail_sup=tail,
        degenerate_steps=degenerate_steps,
        target=prob.f,
    )


def run(state: SolverState, prob: _Problem) -> ApproxResult:
    opts = prob.opts
    while True:
        if state.gap < opts.epsilon:
            return _finish(state, prob, True, "converged")
        if state.k >= opts.max_iters:
            return _finish(state, prob, False, "max_iters")
        try:
            iterate_once(state, prob)
        except (DegeneracyError, DegenerateNullspaceError) as e:
            log.warning("aborting on degeneracy: %s", e)
            return _finish(state, prob, False, "degenerate")


def solve_constrained(
    system: FunctionSystem,
    f: Callable,
    constraints: ConstraintSet | None,
    opts: SolverOptions | None = None,
) -> ApproxResult:
    """Best uniform approximation of f subject to l_j(p) = b_j."""
    opts = opts or SolverOptions()
    state, prob = initialize(system, f, opts, constraints)
    return run(state, prob)


def solve(system: FunctionSystem, f: Callable, opts: SolverOptions | None = None) -> ApproxResult:
    """Best uniform approximation of f by polynomials over ``system``."""
    return solve_constrained(system, f, None, opts)


__all__ = [
    "SolverOptions",
    "SolverState",
    "ApproxResult",
    "TraceRow",
    "AlternancePoint",
    "merge_alternance",
    "initialize",
    "iterate_once",
    "mode_controller",
    "solve",
    "solve_constrained",
    "as_target",
]
