"""Basis functions, domains and polynomial evaluation.

A *polynomial* here is any linear combination of the basis functions of a
:class:`FunctionSystem`; it is stored as its coefficient vector.  All
evaluation routines are vectorised over ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf

from .errors import CapabilityError, DependentSystemError, DomainError, NonDecayingSystemError, ParseError

ArrayLike = Any
Target = Callable[[np.ndarray], np.ndarray]

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class Domain:
    """A closed interval ``[a, b]`` or the half-line ``[a, +inf)``."""

    kind: str
    a: float
    b: float = math.inf

    def __post_init__(self):
        if self.kind not in ("interval", "halfline"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if not math.isfinite(self.a):
            raise DomainError("left endpoint must be finite")
        if self.kind == "interval":
            if not math.isfinite(self.b) or not self.a < self.b:
                raise DomainError(f"bad interval [{self.a}, {self.b}]")
        else:
            object.__setattr__(self, "b", math.inf)

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        return cls("interval", float(a), float(b))

    @classmethod
    def halfline(cls, a: float = 0.0) -> "Domain":
        return cls("halfline", float(a))

    @property
    def is_halfline(self) -> bool:
        return self.kind == "halfline"

    @property
    def length(self) -> float:
        return self.b - self.a

    def check(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scale = _DOMAIN_SLACK * max(1.0, abs(self.a), abs(self.b) if math.isfinite(self.b) else 1.0)
        if np.any(t < self.a - scale) or np.any(t > self.b + scale) or np.any(np.isnan(t)):
            raise DomainError(f"point outside domain [{self.a}, {self.b}]")
        return t

    def to_dict(self) -> dict:
        if self.is_halfline:
            return {"kind": "halfline", "a": self.a}
        return {"kind": "interval", "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        try:
            kind = d["kind"]
            if kind == "halfline":
                _reject_unknown(d, {"kind", "a"}, "domain")
                return cls.halfline(d.get("a", 0.0))
            _reject_unknown(d, {"kind", "a", "b"}, "domain")
            return cls.interval(d["a"], d["b"])
        except KeyError as e:
            raise ParseError(f"domain is missing field {e}") from None


def _reject_unknown(d: dict, allowed: set, what: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ParseError(f"unknown fields in {what}: {sorted(extra)}")


# ---------------------------------------------------------------------------
# basis families


class BasisFunction:
    """One basis function; subclasses implement ``evaluate(t, order)``."""

    family: str = ""
    max_order: float = math.inf

    def __call__(self, t: ArrayLike, order: int = 0) -> np.ndarray:
        if order < 0 or order > self.max_order:
            raise CapabilityError(f"{self.family} supports derivatives up to order {self.max_order}, got {order}")
        return self.evaluate(np.asarray(t, dtype=float), int(order))

    def evaluate(self, t: np.ndarray, order: int) -> np.ndarray:
        raise NotImplementedError

    def decays(self) -> bool:
        """Whether the function tends to zero at +infinity."""
        return False

    def integral(self, a: float, b: float) -> float | None:
        """Closed-form integral over [a, b] (b may be inf), or None if unavailable."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_dict()})"


def _falling(s: int, i: int) -> int:
    out = 1
    for j in range(i):
        out *= s - j
    return out


class Power(BasisFunction):
    """The monomial t**m."""

    family = "power"

    def __init__(self, m: int):
        if int(m) != m or m < 0:
            raise ParseError(f"power exponent must be a nonnegative integer, got {m}")
        self.m = int(m)

    def evaluate(self, t, order):
        if order > self.m:
            return np.zeros_like(t)
        return _falling(self.m, order) * t ** (self.m - order)

    def integral(self, a, b):
        if not math.isfinite(b):
            return None
        k = self.m + 1
        return (b**k - a**k) / k

    def to_dict(self):
        return {"family": "power", "m": self.m}


class ExpTrig(BasisFunction):
    """t**s * exp(a t) * cos(b t) (``kind='cos'``) or the sine variant.

    Evaluated as the real or imaginary part of t**s * exp(z t), z = a + ib,
    which gives derivatives of every order in closed form.
    """

    family = "exp_trig"

    def __init__(self, a: float, b: float = 0.0, s: int = 0, kind: str = "cos"):
        if kind not in ("cos", "sin"):
            raise ParseError(f"exp_trig kind must be 'cos' or 'sin', got {kind!r}")
        if int(s) != s or s < 0:
            raise ParseError("exp_trig power s must be a nonnegative integer")
        self.a, self.b, self.s, self.kind = float(a), float(b), int(s), kind

    @property
    def z(self) -> complex:
        return complex(self.a, self.b)

    def evaluate(self, t, order):
        z = self.z
        ez = np.exp(z * t)
        acc = np.zeros(t.shape, dtype=complex)
        for i in range(min(order, self.s) + 1):
            acc += math.comb(order, i) * _falling(self.s, i) * t ** (self.s - i) * z ** (order - i)
        val = acc * ez
        return val.real if self.kind == "cos" else val.imag

    def decays(self):
        return self.a < 0

    def integral(self, a, b):
        if math.isfinite(b) or self.a >= 0 or a != 0.0:
            return None
        # int_0^inf t^s e^{zt} dt = s! / (-z)^(s+1)
        v = math.factorial(self.s) / (-self.z) ** (self.s + 1)
        return v.real if self.kind == "cos" else v.imag

    def to_dict(self):
        return {"family": "exp_trig", "a": self.a, "b": self.b, "s": self.s, "kind": self.kind}


class Gaussian(BasisFunction):
    """exp(-(t - z)**2 / sigma**2)."""

    family = "gaussian"

    def __init__(self, z: float, sigma: float):
        if sigma <= 0:
            raise ParseError("gaussian sigma must be positive")
        self.z, self.sigma = float(z), float(sigma)

    def evaluate(self, t, order):
        x = (t - self.z) / self.sigma
        base = np.exp(-x * x)
        if order == 0:
            return base
        # d^k/dx^k e^{-x^2} = (-1)^k H_k(x) e^{-x^2} (physicists' Hermite)
        c = np.zeros(order + 1)
        c[order] = 1.0
        h = np.polynomial.hermite.hermval(x, c)
        return (-1) ** order * h * base / self.sigma**order

    def decays(self):
        return True

    def integral(self, a, b):
        s, z = self.sigma, self.z
        hi = 1.0 if not math.isfinite(b) else erf((b - z) / s)
        return 0.5 * math.sqrt(math.pi) * s * (hi - erf((a - z) / s))

    def to_dict(self):
        return {"family": "gaussian", "z": self.z, "sigma": self.sigma}


class Cauchy(BasisFunction):
    """1 / (1 + (t - z)**2 / sigma**2)."""

    family = "cauchy"

    def __init__(self, z: float, sigma: float):
        if sigma <= 0:
            raise ParseError("cauchy sigma must be positive")
        self.z, self.sigma = float(z), float(sigma)

    def evaluate(self, t, order):
        x = (t - self.z) / self.sigma
        # 1/(1+x^2) = Im 1/(x - i); k-th derivative of 1/(x-c) is (-1)^k k!/(x-c)^(k+1)
        v = (-1) ** order * math.factorial(order) / (x - 1j) ** (order + 1)
        return v.imag / self.sigma**order

    def decays(self):
        return True

    def integral(self, a, b):
        s, z = self.sigma, self.z
        hi = math.pi / 2 if not math.isfinite(b) else math.atan((b - z) / s)
        return s * (hi - math.atan((a - z) / s))

    def to_dict(self):
        return {"family": "cauchy", "z": self.z, "sigma": self.sigma}


class Spline(BasisFunction):
    """Cubic interpolating spline with not-a-knot end conditions."""

    family = "spline"

    def __init__(self, knots: Sequence[float], values: Sequence[float]):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or len(knots) < 4:
            raise ParseError("spline needs matching knot/value arrays with at least 4 entries")
        if np.any(np.diff(knots) <= 0):
            raise ParseError("spline knots must be strictly increasing")
        self.knots, self.values = knots, values
        self._cs = CubicSpline(knots, values, bc_type="not-a-knot", extrapolate=True)

    def evaluate(self, t, order):
        if order > 3:
            return np.zeros_like(t)
        return self._cs(t, order)

    def integral(self, a, b):
        if not math.isfinite(b):
            return None
        return float(self._cs.integrate(a, b))

    def to_dict(self):
        return {"family": "spline", "knots": self.knots.tolist(), "values": self.values.tolist()}


class PhaseTrig(BasisFunction):
    """cos(scale * lam(t) * t) or sin(...), lam piecewise linear.

    Covers chirp-like components such as cos(4 pi lam(t) t).
    """

    family = "phase_trig"
    max_order = 2

    def __init__(self, scale: float, knots: Sequence[float], values: Sequence[float], kind: str = "cos"):
        if kind not in ("cos", "sin"):
            raise ParseError("phase_trig kind must be 'cos' or 'sin'")
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or len(knots) < 2 or np.any(np.diff(knots) <= 0):
            raise ParseError("phase_trig needs increasing knots and matching values")
        self.scale, self.knots, self.values, self.kind = float(scale), knots, values, kind

    def _lam(self, t):
        lam = np.interp(t, self.knots, self.values)
        slopes = np.diff(self.values) / np.diff(self.knots)
        idx = np.clip(np.searchsorted(self.knots, t, side="left") - 1, 0, len(slopes) - 1)
        return lam, slopes[idx]

    def evaluate(self, t, order):
        lam, dlam = self._lam(t)
        theta = self.scale * lam * t
        dtheta = self.scale * (dlam * t + lam)
        ddtheta = 2.0 * self.scale * dlam
        if self.kind == "cos":
            f0, f1 = np.cos(theta), -np.sin(theta)
        else:
            f0, f1 = np.sin(theta), np.cos(theta)
        if order == 0:
            return f0
        if order == 1:
            return f1 * dtheta
        return -f0 * dtheta**2 + f1 * ddtheta

    def to_dict(self):
        return {
            "family": "phase_trig",
            "scale": self.scale,
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "kind": self.kind,
        }


_FAMILIES: dict[str, tuple[type, set]] = {
    "power": (Power, {"m"}),
    "exp_trig": (ExpTrig, {"a", "b", "s", "kind"}),
    "gaussian": (Gaussian, {"z", "sigma"}),
    "cauchy": (Cauchy, {"z", "sigma"}),
    "spline": (Spline, {"knots", "values"}),
    "phase_trig": (PhaseTrig, {"scale", "knots", "values", "kind"}),
}


def basis_from_dict(d: dict) -> BasisFunction:
    if not isinstance(d, dict) or "family" not in d:
        raise ParseError(f"basis descriptor needs a 'family' field: {d!r}")
    family = d["family"]
    if family not in _FAMILIES:
        raise ParseError(f"unknown basis family {family!r}")
    cls, allowed = _FAMILIES[family]
    params = {k: v for k, v in d.items() if k != "family"}
    _reject_unknown(params, allowed, f"{family} descriptor")
    try:
        return cls(**params)
    except TypeError as e:
        raise ParseError(f"bad {family} descriptor: {e}") from None


# ---------------------------------------------------------------------------
# systems and polynomials


def _independence_grid(domain: Domain, n: int) -> np.ndarray:
    m = 10 * n
    if domain.is_halfline:
        return domain.a + np.linspace(0.0, 40.0, m)
    return np.linspace(domain.a, domain.b, m)


class FunctionSystem:
    """An ordered family of n linearly independent basis functions on a domain."""

    def __init__(self, basis: Sequence[BasisFunction], domain: Domain, check: bool = True):
        self.basis = tuple(basis)
        self.domain = domain
        if not self.basis:
            raise DependentSystemError("a function system needs at least one basis function")
        if check:
            self._check_independent()

    @property
    def n(self) -> int:
        return len(self.basis)

    @property
    def max_order(self) -> float:
        return min(b.max_order for b in self.basis)

    def _check_independent(self) -> None:
        u = self.matrix(_independence_grid(self.domain, self.n), check=False)
        if not np.all(np.isfinite(u)):
            raise DependentSystemError("basis functions are not finite on the check grid")
        sv = np.linalg.svd(u.T @ u, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] < 1e-10 * sv[0]:
            raise DependentSystemError(
                f"basis functions are linearly dependent (Gram singular values ratio {sv[-1] / max(sv[0], 1e-300):.3g})"
            )

    def matrix(self, t: ArrayLike, order: int = 0, check: bool = True) -> np.ndarray:
        """Rows are (derivatives of) moment vectors: shape (len(t), n)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if check:
            self.domain.check(t)
        return np.column_stack([b(t, order) for b in self.basis])

    def moment_vector(self, t: float) -> np.ndarray:
        return self.matrix([t])[0]

    def with_domain(self, domain: Domain) -> "FunctionSystem":
        return FunctionSystem(self.basis, domain, check=False)

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(), "basis": [b.to_dict() for b in self.basis]}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionSystem":
        if not isinstance(d, dict):
            raise ParseError("function system must be a JSON object")
        _reject_unknown(d, {"domain", "basis"}, "system")
        if "domain" not in d or "basis" not in d:
            raise ParseError("function system needs 'domain' and 'basis'")
        return cls([basis_from_dict(b) for b in d["basis"]], Domain.from_dict(d["domain"]))

    def __repr__(self) -> str:
        return f"FunctionSystem(n={self.n}, domain={self.domain})"


@dataclass
class Poly:
    """Coefficient vector over a function system."""

    coeffs: np.ndarray
    system: FunctionSystem = field(repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.system.n,):
            raise ValueError(f"expected {self.system.n} coefficients, got shape {self.coeffs.shape}")

    def __call__(self, t: ArrayLike) -> np.ndarray:
        return eval_poly(self, t)

    def derivative(self, t: ArrayLike, order: int = 1) -> np.ndarray:
        return eval_poly_derivative(self, t, order)


def moment_vector(system: FunctionSystem, t: float) -> np.ndarray:
    return system.moment_vector(t)


def eval_poly(p: Poly, t: ArrayLike) -> np.ndarray | float:
    scalar = np.ndim(t) == 0
    out = p.system.matrix(t) @ p.coeffs
    return float(out[0]) if scalar else out


def eval_poly_derivative(p: Poly, t: ArrayLike, order: int) -> np.ndarray | float:
    if order < 1:
        raise CapabilityError("derivative order must be at least 1")
    if order > p.system.max_order:
        raise CapabilityError(f"system supports derivatives up to order {p.system.max_order}")
    scalar = np.ndim(t) == 0
    out = p.system.matrix(t, order) @ p.coeffs
    return float(out[0]) if scalar else out


def _tail_level(system: FunctionSystem, f: Target | None, t: np.ndarray) -> np.ndarray:
    level = np.max(np.abs(system.matrix(t, check=False)), axis=1)
    if f is not None:
        level = np.maximum(level, np.abs(np.asarray(f(t), dtype=float)))
    return level


def truncate_halfline(
    system: FunctionSystem,
    f: Target | None = None,
    tail_tol: float = 1e-12,
    horizon: float = 1e5,
) -> Domain:
    """Compact interval [a, T] outside of which every basis function and f stay below ``tail_tol``.

    The search doubles a window until its second half is below the tolerance,
    then bisects the last crossing.
    """
    dom = system.domain
    if not dom.is_halfline:
        raise DomainError("truncate_halfline needs a half-line domain")
    a = dom.a
    width = 8.0
    while width <= horizon:
        npts = int(min(max(4000, 200 * width), 2_000_000))
        t = a + np.linspace(0.0, width, npts)
        over = np.nonzero(_tail_level(system, f, t) > tail_tol)[0]
        if over.size == 0:
            return Domain.interval(a, a + 1e-3 * width)
        last = over[-1]
        if last < npts // 2:
            lo, hi = t[last], t[last + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if _tail_level(system, f, np.array([mid]))[0] > tail_tol:
                    lo = mid
                else:
                    hi = mid
            return Domain.interval(a, hi)
        width *= 2.0
    raise NonDecayingSystemError(f"no decay below {tail_tol:g} within horizon {horizon:g}")
