"""Linear constraints l_j(p) = b_j and the projection onto their annihilator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import qr

from .errors import CapabilityError, ConstraintError, DependentSystemError, ParseError
from .function_system import FunctionSystem, _independence_grid, _reject_unknown

KINDS = ("point", "derivative", "coeffs", "coeff_sum", "integral")
_FIELDS = {
    "point": {"kind", "t", "value"},
    "derivative": {"kind", "t", "order", "value"},
    "coeffs": {"kind", "weights", "value"},
    "coeff_sum": {"kind", "value"},
    "integral": {"kind", "value"},
}


@dataclass(frozen=True)
class LinearFunctional:
    """A functional l with l(p) = <vector, coeffs>; ``params`` keeps the description."""

    kind: str
    vector: np.ndarray
    params: dict = field(default_factory=dict)

    def __call__(self, coeffs: np.ndarray) -> float:
        return float(self.vector @ np.asarray(coeffs, dtype=float))


def _integral_vector(system: FunctionSystem) -> np.ndarray:
    dom = system.domain
    out = []
    for b in system.basis:
        v = b.integral(dom.a, dom.b)
        if v is None:
            if dom.is_halfline and not b.decays():
                raise ConstraintError(f"integral of {b!r} over the half-line diverges")
            v, _ = quad(lambda s, fn=b: float(fn(np.array([s]))[0]), dom.a, dom.b, epsabs=1e-10, epsrel=1e-10, limit=500)
        out.append(v)
    return np.array(out, dtype=float)


def build_functional(spec: dict, system: FunctionSystem) -> LinearFunctional:
    """Realize a constraint description as a coefficient-space vector.

    ``spec`` uses the problem-file keys (``value`` is ignored here).
    """
    kind = spec.get("kind")
    if kind not in KINDS:
        raise ParseError(f"unknown constraint kind {kind!r}")
    _reject_unknown(spec, _FIELDS[kind], f"{kind} constraint")
    n = system.n
    try:
        if kind == "point":
            vec = system.matrix([float(spec["t"])])[0]
            params = {"t": float(spec["t"])}
        elif kind == "derivative":
            order = int(spec["order"])
            t = float(spec["t"])
            if order > system.max_order:
                raise CapabilityError(f"derivative order {order} unsupported by the basis")
            vec = system.matrix([t], order)[0]
            params = {"t": t, "order": order}
        elif kind == "coeffs":
            vec = np.asarray(spec["weights"], dtype=float)
            if vec.shape != (n,):
                raise ParseError(f"coeffs constraint needs {n} weights")
            params = {"weights": vec.tolist()}
        elif kind == "coeff_sum":
            vec = np.ones(n)
            params = {}
        else:
            vec = _integral_vector(system)
            params = {}
    except KeyError as e:
        raise ParseError(f"{kind} constraint is missing field {e}") from None
    if not np.all(np.isfinite(vec)):
        raise ConstraintError(f"{kind} functional is not finite")
    return LinearFunctional(kind, np.asarray(vec, dtype=float), params)


class ConstraintSet:
    """r independent functionals with targets, plus an orthonormal basis of their annihilator.

    ``perp`` has orthonormal columns spanning L-perp (shape n x (n - r));
    projected coordinates of a vector ``a`` are ``perp.T @ a``.
    """

    def __init__(self, functionals: Sequence[LinearFunctional], targets: Sequence[float], n: int):
        self.functionals = tuple(functionals)
        self.targets = np.asarray(targets, dtype=float).reshape(-1)
        self.n = n
        r = len(self.functionals)
        if len(self.targets) != r:
            raise ConstraintError("one target value per functional is required")
        if r >= n:
            raise ConstraintError(f"{r} constraints leave no freedom in a {n}-dimensional space")
        if r == 0:
            self.matrix = np.zeros((0, n))
            self.perp = np.eye(n)
            return
        self.matrix = np.vstack([fn.vector for fn in self.functionals])
        q, rr, _ = qr(self.matrix.T, pivoting=True)
        diag = np.abs(np.diag(rr))
        if diag[-1] <= 1e-10 * max(diag[0], 1e-300):
            raise ConstraintError("constraint functionals are linearly dependent")
        self.perp = q[:, r:]

    @classmethod
    def empty(cls, n: int) -> "ConstraintSet":
        return cls([], [], n)

    @classmethod
    def from_specs(cls, specs: Sequence[dict], system: FunctionSystem) -> "ConstraintSet":
        fns = [build_functional(s, system) for s in specs]
        try:
            targets = [float(s["value"]) for s in specs]
        except KeyError:
            raise ParseError("every constraint needs a 'value'") from None
        cs = cls(fns, targets, system.n)
        cs.check_projected_basis(system)
        return cs

    @property
    def r(self) -> int:
        return len(self.functionals)

    @property
    def dim(self) -> int:
        return self.n - self.r

    @property
    def projector(self) -> np.ndarray:
        return self.perp @ self.perp.T

    def project(self, a: np.ndarray) -> np.ndarray:
        """L-perp coordinates of a vector (or of each row of a 2-D array)."""
        return np.asarray(a, dtype=float) @ self.perp

    def residuals(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(coeffs, dtype=float) - self.targets

    def check_projected_basis(self, system: FunctionSystem) -> None:
        """Projected moment vectors must span L-perp on the domain."""
        if self.r == 0:
            return
        u = system.matrix(_independence_grid(system.domain, system.n), check=False)
        sv = np.linalg.svd(u @ self.perp, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            _, _, piv = qr(u, pivoting=True)
            keep = sorted(piv[: self.dim].tolist())
            raise DependentSystemError(
                f"projected basis is dependent; a maximal independent subset is basis indices {keep}"
            )

    def to_specs(self) -> list[dict]:
        out = []
        for fn, b in zip(self.functionals, self.targets):
            d = {"kind": fn.kind, **fn.params, "value": float(b)}
            out.append(d)
        return out


def project_oriented(a: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    return cs.project(a)


def isclose_targets(cs: ConstraintSet, coeffs: np.ndarray) -> bool:
    return bool(np.all(np.abs(cs.residuals(coeffs)) <= 1e-8 * (1 + np.abs(cs.targets))))


__all__ = [
    "LinearFunctional",
    "ConstraintSet",
    "build_functional",
    "project_oriented",
    "isclose_targets",
]
