from pathlib import Path

import numpy as np
import pytest

from remezgen import Domain, FunctionSystem, Gaussian, Power

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def powers(ms, a=-1.0, b=1.0) -> FunctionSystem:
    return FunctionSystem([Power(m) for m in ms], Domain.interval(a, b))


def gaussians() -> FunctionSystem:
    return FunctionSystem([Gaussian(z, 3.0) for z in (1.0, 5.0, 7.0)], Domain.interval(0.0, 8.0))


def gaussian_target(t):
    t = np.asarray(t, dtype=float)
    return 0.1 * (t - 5) ** 2 + 0.5 * t - 2 + np.sin(0.4 * t**2 * np.cos(0.5 * t))


@pytest.fixture
def problems_dir() -> Path:
    return PROBLEMS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
