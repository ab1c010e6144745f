"""Target functions described as small JSON expression trees.

Every node is an object with an ``op`` field:

    {"op": "const", "value": c}
    {"op": "t"}
    {"op": "add", "args": [e1, e2, ...]}
    {"op": "mul", "args": [e1, e2, ...]}
    {"op": "pow", "base": e, "exponent": k}
    {"op": "sin" | "cos" | "exp" | "abs", "arg": e}
    {"op": "poly", "coeffs": [c0, c1, ...]}           c0 + c1 t + ...
    {"op": "pwlinear", "knots": [...], "values": [...]}   linear interpolation in t
    {"op": "spline", "knots": [...], "values": [...]}     not-a-knot cubic through samples
    {"op": "basis", "basis": {"family": ...}}             one basis-family function of t

A bare number is shorthand for a constant.  ``to_dict`` emits the canonical
form, and parsing it again gives an equal tree.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import ParseError
from .function_system import Spline, _reject_unknown, basis_from_dict

_UNARY = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}


class Expr:
    op: str = ""

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.evaluate(t), dtype=float), t.shape).astype(float)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expr) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(repr(self.to_dict()))

    def __repr__(self) -> str:
        return f"Expr({self.to_dict()})"


class Const(Expr):
    op = "const"

    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, t):
        return np.full(t.shape, self.value)

    def to_dict(self):
        return {"op": "const", "value": self.value}


class Var(Expr):
    op = "t"

    def evaluate(self, t):
        return t

    def to_dict(self):
        return {"op": "t"}


class Nary(Expr):
    def __init__(self, op: str, args: list[Expr]):
        if not args:
            raise ParseError(f"{op} needs at least one argument")
        self.op, self.args = op, list(args)

    def evaluate(self, t):
        out = self.args[0].evaluate(t)
        for a in self.args[1:]:
            out = out + a.evaluate(t) if self.op == "add" else out * a.evaluate(t)
        return out

    def to_dict(self):
        return {"op": self.op, "args": [a.to_dict() for a in self.args]}


class Pow(Expr):
    op = "pow"

    def __init__(self, base: Expr, exponent: float):
        self.base, self.exponent = base, float(exponent)

    def evaluate(self, t):
        return self.base.evaluate(t) ** self.exponent

    def to_dict(self):
        return {"op": "pow", "base": self.base.to_dict(), "exponent": self.exponent}


class Unary(Expr):
    def __init__(self, op: str, arg: Expr):
        self.op, self.arg = op, arg

    def evaluate(self, t):
        return _UNARY[self.op](self.arg.evaluate(t))

    def to_dict(self):
        return {"op": self.op, "arg": self.arg.to_dict()}


class PolyExpr(Expr):
    op = "poly"

    def __init__(self, coeffs: list[float]):
        if not len(coeffs):
            raise ParseError("poly needs at least one coefficient")
        self.coeffs = [float(c) for c in coeffs]

    def evaluate(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def to_dict(self):
        return {"op": "poly", "coeffs": list(self.coeffs)}


class Tabulated(Expr):
    def __init__(self, op: str, knots: list[float], values: list[float]):
        k = np.asarray(knots, dtype=float)
        v = np.asarray(values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or len(k) < 2 or np.any(np.diff(k) <= 0):
            raise ParseError(f"{op} needs strictly increasing knots with matching values")
        self.op, self.knots, self.values = op, k, v
        self._spline = Spline(k, v) if op == "spline" else None

    def evaluate(self, t):
        if self._spline is not None:
            return self._spline(t)
        return np.interp(t, self.knots, self.values)

    def to_dict(self):
        return {"op": self.op, "knots": self.knots.tolist(), "values": self.values.tolist()}


class BasisExpr(Expr):
    op = "basis"

    def __init__(self, basis: dict):
        self.fn = basis_from_dict(basis)

    def evaluate(self, t):
        return self.fn(t)

    def to_dict(self):
        return {"op": "basis", "basis": self.fn.to_dict()}


_FIELDS = {
    "const": {"value"},
    "t": set(),
    "add": {"args"},
    "mul": {"args"},
    "pow": {"base", "exponent"},
    "poly": {"coeffs"},
    "pwlinear": {"knots", "values"},
    "spline": {"knots", "values"},
    "basis": {"basis"},
    **{k: {"arg"} for k in _UNARY},
}


def parse_target(d: Any) -> Expr:
    """Build an expression from its JSON form (or a number)."""
    if isinstance(d, bool):
        raise ParseError("booleans are not targets")
    if isinstance(d, (int, float)):
        return Const(d)
    if not isinstance(d, dict) or "op" not in d:
        raise ParseError(f"target node needs an 'op' field: {d!r}")
    op = d["op"]
    if op not in _FIELDS:
        raise ParseError(f"unknown target op {op!r}")
    _reject_unknown(d, _FIELDS[op] | {"op"}, f"{op} node")
    missing = _FIELDS[op] - set(d)
    if missing:
        raise ParseError(f"{op} node is missing {sorted(missing)}")
    try:
        if op == "const":
            return Const(d["value"])
        if op == "t":
            return Var()
        if op in ("add", "mul"):
            if not isinstance(d["args"], list):
                raise ParseError(f"{op} args must be a list")
            return Nary(op, [parse_target(a) for a in d["args"]])
        if op == "pow":
            return Pow(parse_target(d["base"]), d["exponent"])
        if op in _UNARY:
            return Unary(op, parse_target(d["arg"]))
        if op == "poly":
            return PolyExpr(d["coeffs"])
        if op in ("pwlinear", "spline"):
            return Tabulated(op, d["knots"], d["values"])
        return BasisExpr(d["basis"])
    except (TypeError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"bad {op} node: {e}") from None


def emit_target(e: Expr) -> dict:
    return e.to_dict()


__all__ = ["Expr", "parse_target", "emit_target"]
