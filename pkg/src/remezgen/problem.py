"""Problem files, result documents and CSV exports.

A problem file is a JSON object

    {"system": {"domain": {...}, "basis": [...]},
     "target": <expression>,
     "constraints": [{"kind": "point", "t": 6.4, "value": 2.0}, ...],
     "options": {"epsilon": 1e-6, ...}}

where ``constraints`` and ``options`` are optional.  Floats in every emitted
document are written with 17 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np

from .constraints import ConstraintSet
from .errors import ParseError
from .function_system import FunctionSystem, _reject_unknown
from .remez import ApproxResult, SolverOptions, solve_constrained
from .targets import Expr, parse_target


@dataclass
class ProblemSpec:
    system: FunctionSystem
    target: Expr
    constraints: list[dict] = field(default_factory=list)
    options: SolverOptions = field(default_factory=SolverOptions)

    @classmethod
    def from_dict(cls, d: Any) -> "ProblemSpec":
        if not isinstance(d, dict):
            raise ParseError("a problem must be a JSON object")
        _reject_unknown(d, {"system", "target", "constraints", "options"}, "problem")
        if "system" not in d or "target" not in d:
            raise ParseError("a problem needs 'system' and 'target'")
        system = FunctionSystem.from_dict(d["system"])
        target = parse_target(d["target"])
        constraints = d.get("constraints", [])
        if not isinstance(constraints, list):
            raise ParseError("'constraints' must be a list")
        opts = d.get("options", {})
        if not isinstance(opts, dict):
            raise ParseError("'options' must be an object")
        try:
            options = SolverOptions.from_dict(opts)
        except (TypeError, ValueError) as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"bad solver options: {e}") from None
        spec = cls(system, target, [dict(c) for c in constraints], options)
        spec.constraint_set()  # validate early
        return spec

    def to_dict(self) -> dict:
        return {
            "system": self.system.to_dict(),
            "target": self.target.to_dict(),
            "constraints": [dict(c) for c in self.constraints],
            "options": self.options.to_dict(),
        }

    def constraint_set(self) -> ConstraintSet:
        if not self.constraints:
            return ConstraintSet.empty(self.system.n)
        return ConstraintSet.from_specs(self.constraints, self.system)

    def solve(self, options: SolverOptions | None = None) -> ApproxResult:
        return solve_constrained(self.system, self.target, self.constraint_set(), options or self.options)


def parse_problem(text: str) -> ProblemSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    return ProblemSpec.from_dict(data)


def load_problem(path: str | Path) -> ProblemSpec:
    return parse_problem(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = f"{x:.17g}"
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + ("" if indent else " ")
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


# ---------------------------------------------------------------------------
# results


def result_to_dict(res: ApproxResult) -> dict:
    return {
        "coeffs": [float(c) for c in res.coeffs],
        "b": float(res.lower),
        "B": float(res.upper),
        "distance": float(res.distance),
        "alternance": [{"t": a.t, "sign": a.sign, "weight": a.weight} for a in res.alternance_points()],
        "nodes": [
            {"t": float(t), "sign": float(s), "weight": float(w)}
            for t, s, w in zip(res.nodes.points, res.nodes.signs, res.alpha)
        ],
        "iterations": int(res.iterations),
        "converged": bool(res.converged),
        "status": res.status,
        "mode_history": res.mode_history,
        "certificate": res.certificate.to_dict(),
        "tail_sup": res.tail_sup,
    }


def warm_start(options: SolverOptions, result: dict) -> SolverOptions:
    """Options that start from the node set stored in a result document."""
    try:
        pts = [float(n["t"]) for n in result["nodes"]]
    except (KeyError, TypeError):
        raise ParseError("warm start needs a result document with 'nodes'") from None
    return replace(options, init=pts)


def write_trace_csv(res: ApproxResult, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "b", "B", "r", "alpha0", "mode"])
    for row in res.trace:
        w.writerow([row.k, _fmt(row.b), _fmt(row.B), _fmt(row.r), "" if row.alpha0 is None else _fmt(row.alpha0), row.mode])


def write_gap_csv(res: ApproxResult, out: TextIO) -> None:
    """log10(B_k - b_k) per iteration."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "log10_gap"])
    for row in res.trace:
        gap = row.B - row.b
        w.writerow([row.k, _fmt(math.log10(gap)) if gap > 0 else "-Infinity"])


def sample_points(res: ApproxResult, count: int) -> np.ndarray:
    dom = res.domain
    return np.linspace(dom.a, dom.b, count)


def write_samples_csv(res: ApproxResult, count: int, out: TextIO) -> None:
    """Rows (t, f, p, f - p) on an even grid of the (truncated) domain."""
    if res.target is None:
        raise ValueError("result carries no target function")
    t = sample_points(res, count)
    fv = res.target(t)
    pv = res.poly.system.matrix(t, check=False) @ res.coeffs
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "f", "p", "f_minus_p"])
    for row in zip(t, fv, pv, fv - pv):
        w.writerow([_fmt(float(x)) for x in row])


def to_csv_text(writer, *args) -> str:
    buf = io.StringIO()
    writer(*args, buf)
    return buf.getvalue()


def write_table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_fmt(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


__all__ = [
    "ProblemSpec",
    "parse_problem",
    "load_problem",
    "dumps",
    "result_to_dict",
    "warm_start",
    "write_trace_csv",
    "write_gap_csv",
    "write_samples_csv",
    "write_table_csv",
    "to_csv_text",
]
