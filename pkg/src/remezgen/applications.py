"""Markov-Bernstein constants, ODE derivative bounds and dwell-time intervals.

Each quantity is the reciprocal of (or a threshold on) a minimal-norm problem

    ||p|| -> min   subject to   l(p) = 1,

which is best approximation of f = 0 under one linear constraint.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constraints import ConstraintSet, build_functional
from .errors import ConstraintError, HorizonError, ParseError, StabilityError
from .function_system import Domain, ExpTrig, FunctionSystem, Poly, Power, truncate_halfline
from .remez import ApproxResult, SolverOptions, solve_constrained
from .search import Sampler, global_max_abs_error

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Eigenvalue:
    re: float
    im: float = 0.0
    jordan: int = 1

    def to_dict(self) -> dict:
        return {"re": self.re, "im": self.im, "jordan": self.jordan}


@dataclass(frozen=True)
class SpectrumSpec:
    """Eigenvalues of a stable matrix; a conjugate pair is listed once."""

    eigenvalues: tuple[Eigenvalue, ...]

    def __post_init__(self):
        if not self.eigenvalues:
            raise ParseError("a spectrum needs at least one eigenvalue")
        for z in self.eigenvalues:
            if int(z.jordan) != z.jordan or z.jordan < 1:
                raise ParseError(f"Jordan block size must be a positive integer, got {z.jordan}")
            if not z.re < 0:
                raise StabilityError(f"eigenvalue {z.re}{z.im:+}i is not in the open left half-plane")

    @classmethod
    def from_list(cls, items: Sequence[dict]) -> "SpectrumSpec":
        out = []
        for d in items:
            unknown = set(d) - {"re", "im", "jordan"}
            if unknown:
                raise ParseError(f"unknown eigenvalue fields: {sorted(unknown)}")
            try:
                out.append(Eigenvalue(float(d["re"]), abs(float(d.get("im", 0.0))), int(d.get("jordan", 1))))
            except KeyError:
                raise ParseError("eigenvalue needs 're'") from None
        return cls(tuple(out))

    def to_list(self) -> list[dict]:
        return [z.to_dict() for z in self.eigenvalues]

    def basis(self) -> list[ExpTrig]:
        """t^s e^{at} cos(bt), t^s e^{at} sin(bt) for s < jordan (only cos when b = 0)."""
        out = []
        for z in self.eigenvalues:
            for s in range(z.jordan):
                out.append(ExpTrig(z.re, z.im, s, "cos"))
                if z.im != 0.0:
                    out.append(ExpTrig(z.re, z.im, s, "sin"))
        return out

    def system(self, a: float = 0.0) -> FunctionSystem:
        return FunctionSystem(self.basis(), Domain.halfline(a))

    @property
    def slowest_time_constant(self) -> float:
        return max(1.0 / -z.re for z in self.eigenvalues)


@dataclass
class MinNorm:
    """Solution of ||p|| -> min under l(p) = 1."""

    value: float
    poly: Poly
    result: ApproxResult | None = None  # None when the constraint fixes p outright

    @property
    def reciprocal(self) -> float:
        return 1.0 / self.value if self.value > 0 else math.inf


def min_norm(system: FunctionSystem, spec: dict, opts: SolverOptions | None = None) -> MinNorm:
    """min ||p|| over the system subject to the single constraint described by ``spec``.

    When the system is one-dimensional the constraint determines p, and its
    norm is measured directly.
    """
    opts = opts or SolverOptions()
    spec = {**spec, "value": 1.0}
    if system.n == 1:
        ell = build_functional(spec, system).vector[0]
        if ell == 0.0:
            raise ConstraintError("constraint functional vanishes on the system")
        p = Poly(np.array([1.0 / ell]), system)
        dom = system.domain
        if dom.is_halfline:
            dom = truncate_halfline(system, None, opts.tail_tol)
        sampler = Sampler(system.with_domain(dom) if system.domain.is_halfline else system, lambda t: np.zeros_like(t), dom, opts.grid)
        _, r, _ = global_max_abs_error(Poly(p.coeffs, sampler.system), sampler.f, dom, sampler=sampler)
        return MinNorm(r, p)
    cs = ConstraintSet.from_specs([spec], system)
    res = solve_constrained(system, 0.0, cs, opts)
    return MinNorm(res.upper, res.poly, res)


@dataclass
class MarkovBernstein:
    constant: float
    order: int
    norm: float  # the minimal norm; constant * norm == 1
    poly: Poly | None
    result: ApproxResult | None


def _markov_bernstein(system: FunctionSystem, t: float, j: int, opts: SolverOptions | None) -> MarkovBernstein:
    if j < 1:
        raise ValueError("derivative order must be at least 1")
    try:
        mn = min_norm(system, {"kind": "derivative", "order": j, "t": t}, opts)
    except ConstraintError:
        # the j-th derivative vanishes identically at t: every p^{(j)}(t) = 0
        return MarkovBernstein(math.inf, j, 0.0, None, None)
    return MarkovBernstein(mn.reciprocal, j, mn.value, mn.poly, mn.result)


def markov_bernstein_lacunary(powers: Sequence[int], j: int, opts: SolverOptions | None = None) -> MarkovBernstein:
    """Sharp C_j in ||p^{(j)}|| <= C_j ||p|| on [-1, 1] for span{t^m : m in powers}.

    Solves ||p|| -> min with p^{(j)}(-1) = 1; C_j is the reciprocal value.
    """
    powers = [int(m) for m in powers]
    if len(set(powers)) != len(powers) or any(m < 0 for m in powers):
        raise ParseError("powers must be distinct nonnegative integers")
    if max(powers) < j:
        return MarkovBernstein(math.inf, j, 0.0, None, None)
    system = FunctionSystem([Power(m) for m in sorted(powers)], Domain.interval(-1.0, 1.0))
    return _markov_bernstein(system, -1.0, j, opts)


def markov_bernstein_exponential(spectrum: SpectrumSpec, j: int, opts: SolverOptions | None = None) -> MarkovBernstein:
    """Sharp C_j on the half-line for the quasipolynomials of a stable spectrum.

    Solves ||p||_{C[0, inf)} -> min with p^{(j)}(0) = 1.
    """
    return _markov_bernstein(spectrum.system(0.0), 0.0, j, opts)


def spectrum_from_characteristic(char_coeffs: Sequence[float], tol: float = 1e-7) -> SpectrumSpec:
    """Spectrum of x^{(n)} = sum_k c_k x^{(k)} from c_0..c_{n-1}.

    Roots closer than ``tol`` are merged into one eigenvalue with a Jordan
    block of their multiplicity.
    """
    c = np.asarray(char_coeffs, dtype=float)
    if c.size == 0:
        raise ParseError("need at least one characteristic coefficient")
    roots = np.roots(np.concatenate([[1.0], -c[::-1]]))
    if np.any(roots.real >= 0):
        raise StabilityError(f"characteristic polynomial has roots {roots[roots.real >= 0]} outside the open left half-plane")
    upper = sorted((z for z in roots if z.imag >= -tol), key=lambda z: (z.real, z.imag))
    groups: list[list[complex]] = []
    for z in upper:
        if groups and abs(z - np.mean(groups[-1])) <= max(tol, 1e3 * tol * abs(z)):
            groups[-1].append(z)
        else:
            groups.append([z])
    eig = []
    for g in groups:
        z = np.mean(g)
        im = float(z.imag) if abs(z.imag) > tol else 0.0
        eig.append(Eigenvalue(float(z.real), im, len(g)))
    return SpectrumSpec(tuple(eig))


def ode_derivative_bound(char_coeffs: Sequence[float], opts: SolverOptions | None = None) -> MarkovBernstein:
    """max |x'(0)| over solutions of x^{(n)} = sum_k c_k x^{(k)} with |x(t)| <= 1 on [0, inf)."""
    return markov_bernstein_exponential(spectrum_from_characteristic(char_coeffs), 1, opts)


@dataclass
class StabilityInterval:
    M: float
    T: float
    m: float
    trace: list[tuple[float, tuple[float, ...]]] = field(default_factory=list)  # (T, values per spectrum)
    monotone: bool = True


def point_value(spectrum: SpectrumSpec, T: float, opts: SolverOptions | None = None) -> MinNorm:
    """min ||p||_{C[0, inf)} over the spectrum's quasipolynomials with p(T) = 1."""
    return min_norm(spectrum.system(0.0), {"kind": "point", "t": float(T)}, opts)


def min_stability_interval(
    spectra: Sequence[SpectrumSpec],
    m: float,
    tol: float = 1e-4,
    opts: SolverOptions | None = None,
    margin: float = 1e-9,
) -> StabilityInterval:
    """M = m + T with T the smallest point where every v_A(T) exceeds 1.

    v_A(T) is the minimal norm of p in P_A with p(T) = 1; it is never below 1.
    The test uses the certified lower bound of each v_A against 1 + ``margin``.
    Bisection runs on [0, 10 * slowest time constant] to absolute tolerance ``tol``.
    """
    if not spectra:
        raise ValueError("need at least one spectrum")
    opts = opts or SolverOptions(epsilon=1e-8)
    trace: list[tuple[float, tuple[float, ...]]] = []

    def values(T: float) -> tuple[float, ...]:
        vals = []
        for sp in spectra:
            mn = point_value(sp, T, opts)
            vals.append(mn.result.lower if mn.result is not None else mn.value)
        trace.append((T, tuple(vals)))
        return tuple(vals)

    def ok(T: float) -> bool:
        return all(v > 1.0 + margin for v in values(T))

    hi = 10.0 * max(sp.slowest_time_constant for sp in spectra)
    if not ok(hi):
        raise HorizonError(f"v(T) <= 1 at the end of the search bracket T = {hi:g}")
    lo = 0.0
    if ok(lo):
        hi = lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    # v_A should be nondecreasing along the bisection points
    pts = sorted(trace)
    monotone = True
    for (t1, v1), (t2, v2) in zip(pts, pts[1:]):
        if any(b < a - 1e-6 for a, b in zip(v1, v2)):
            monotone = False
    if not monotone:
        log.warning("v(T) is not monotone along the bisection points")
    return StabilityInterval(m + hi, hi, m, trace, monotone)


__all__ = [
    "Eigenvalue",
    "SpectrumSpec",
    "MinNorm",
    "MarkovBernstein",
    "StabilityInterval",
    "min_norm",
    "markov_bernstein_lacunary",
    "markov_bernstein_exponential",
    "spectrum_from_characteristic",
    "ode_derivative_bound",
    "point_value",
    "min_stability_interval",
]
