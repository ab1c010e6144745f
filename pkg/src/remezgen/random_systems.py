"""Random cubic-spline function systems and degeneracy statistics over them."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .constraints import ConstraintSet
from .errors import DependentSystemError, RemezError
from .function_system import Domain, FunctionSystem, Spline
from .remez import SolverOptions, solve, solve_constrained

log = logging.getLogger(__name__)

PROBLEMS = ("constrained", "abs", "random")
CSV_COLUMNS = (
    "problem",
    "m",
    "n",
    "trials",
    "nondegenerate_share",
    "nondegenerate_iterations",
    "nondegenerate_seconds",
    "degenerate_share",
    "degenerate_iterations",
    "degenerate_seconds",
    "failures",
)


def random_spline(rng: np.random.Generator, m: int) -> Spline:
    """Not-a-knot cubic spline through m uniform random points of [-1, 1]^2."""
    if m < 4:
        raise ValueError("a not-a-knot cubic spline needs at least 4 knots")
    while True:
        knots = np.sort(rng.uniform(-1.0, 1.0, m))
        if np.all(np.diff(knots) > 1e-9):
            break
    return Spline(knots, rng.uniform(-1.0, 1.0, m))


def random_spline_system(m: int, n: int, seed: int, retries: int = 20) -> FunctionSystem:
    """n independent random splines on [-1, 1], each with its own m knots.

    Dependent draws are discarded and redrawn from the same stream.
    """
    rng = np.random.default_rng(seed)
    for _ in range(retries + 1):
        basis = [random_spline(rng, m) for _ in range(n)]
        try:
            return FunctionSystem(basis, Domain.interval(-1.0, 1.0))
        except DependentSystemError:
            continue
    raise DependentSystemError(f"no independent spline system after {retries} redraws (m={m}, n={n}, seed={seed})")


@dataclass(frozen=True)
class StatsConfig:
    m: int
    n: int
    problem: str = "constrained"
    trials: int = 100
    seed: int = 0
    delta: float = 0.05
    epsilon: float = 1e-6
    max_iters: int = 300

    def __post_init__(self):
        if self.m < 4:
            raise ValueError("m must be at least 4")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")

    def trial_seeds(self) -> list[int]:
        children = np.random.SeedSequence(self.seed).spawn(self.trials)
        return [int(c.generate_state(1)[0]) for c in children]


@dataclass
class TrialOutcome:
    seed: int
    degenerate: bool
    iterations: int
    seconds: float
    converged: bool
    min_q: float | None
    error: str | None = None


@dataclass
class StatsRow:
    config: StatsConfig
    nondegenerate_share: float
    nondegenerate_iterations: float
    nondegenerate_seconds: float
    degenerate_share: float
    degenerate_iterations: float
    degenerate_seconds: float
    failures: int
    outcomes: list[TrialOutcome] = field(default_factory=list)

    def as_csv_row(self) -> dict:
        c = self.config
        return {
            "problem": c.problem,
            "m": c.m,
            "n": c.n,
            "trials": c.trials,
            "nondegenerate_share": self.nondegenerate_share,
            "nondegenerate_iterations": self.nondegenerate_iterations,
            "nondegenerate_seconds": self.nondegenerate_seconds,
            "degenerate_share": self.degenerate_share,
            "degenerate_iterations": self.degenerate_iterations,
            "degenerate_seconds": self.degenerate_seconds,
            "failures": self.failures,
        }


def run_trial(cfg: StatsConfig, seed: int) -> TrialOutcome:
    """One random system; degenerate when some step has min |q_{s j}(t0)| < delta (unit-norm q)."""
    rng = np.random.default_rng(seed)
    system = random_spline_system(cfg.m, cfg.n, int(rng.integers(2**63)))
    opts = SolverOptions(epsilon=cfg.epsilon, max_iters=cfg.max_iters, delta=cfg.delta, seed=int(rng.integers(2**31)))
    start = time.perf_counter()
    try:
        if cfg.problem == "constrained":
            cs = ConstraintSet.from_specs([{"kind": "coeff_sum", "value": 1.0}], system)
            res = solve_constrained(system, 0.0, cs, opts)
        elif cfg.problem == "abs":
            res = solve(system, np.abs, opts)
        else:
            target = random_spline(rng, cfg.m)
            res = solve(system, target, opts)
    except RemezError as e:
        return TrialOutcome(seed, False, 0, time.perf_counter() - start, False, None, f"{type(e).__name__}: {e}")
    seconds = time.perf_counter() - start
    qs = [row.qmin for row in res.trace if row.qmin is not None]
    qmin = min(qs) if qs else None
    degenerate = qmin is not None and qmin < cfg.delta
    return TrialOutcome(seed, degenerate, res.iterations, seconds, res.converged, qmin)


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else float("nan")


def degeneracy_stats(cfg: StatsConfig) -> StatsRow:
    """Run ``cfg.trials`` random systems; failures are counted, never raised."""
    outcomes = [run_trial(cfg, s) for s in cfg.trial_seeds()]
    ok = [o for o in outcomes if o.error is None]
    deg = [o for o in ok if o.degenerate]
    non = [o for o in ok if not o.degenerate]
    total = max(len(ok), 1)
    for o in outcomes:
        if o.error is not None:
            log.info("trial %d failed: %s", o.seed, o.error)
    return StatsRow(
        cfg,
        len(non) / total,
        _mean([o.iterations for o in non]),
        _mean([o.seconds for o in non]),
        len(deg) / total,
        _mean([o.iterations for o in deg]),
        _mean([o.seconds for o in deg]),
        len(outcomes) - len(ok),
        outcomes,
    )


def write_stats_csv(rows: Sequence[StatsRow], out: TextIO) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.as_csv_row().items()})


def stats_csv(rows: Sequence[StatsRow]) -> str:
    buf = io.StringIO()
    write_stats_csv(rows, buf)
    return buf.getvalue()


__all__ = [
    "StatsConfig",
    "StatsRow",
    "TrialOutcome",
    "random_spline",
    "random_spline_system",
    "run_trial",
    "degeneracy_stats",
    "write_stats_csv",
    "stats_csv",
    "CSV_COLUMNS",
]
