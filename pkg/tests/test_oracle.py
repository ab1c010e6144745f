import numpy as np
import pytest
from scipy.optimize import linprog

from remezgen import ConstraintSet, SolverOptions, solve, solve_constrained
from remezgen.errors import LPError
from remezgen.oracle import DenseSimplex, grid_chebyshev, grid_chebyshev_lp, linprog_standard

from conftest import gaussian_target, gaussians, powers


def test_square_on_three_points():
    coeffs, d = grid_chebyshev(powers([0, 1]), lambda t: np.asarray(t) ** 2, [-1.0, 0.0, 1.0])
    assert d == pytest.approx(0.5, abs=1e-14)
    assert np.allclose(coeffs, [0.5, 0.0], atol=1e-14)


def test_target_in_span():
    s = powers([0, 1, 2])
    _, d = grid_chebyshev(s, lambda t: 2 - np.asarray(t) ** 2, np.linspace(-1, 1, 11))
    assert d == pytest.approx(0.0, abs=1e-13)


def test_quartic_alternance_grid():
    f = lambda t: np.asarray(t) ** 4 + np.asarray(t) ** 3 - 0.25
    sol = grid_chebyshev_lp(powers([2, 1]), f, [-1.0, 0.5, 1.0])
    assert sol.value == pytest.approx(0.5, abs=1e-14)
    assert np.allclose(sol.coeffs, [0.75, 0.5], atol=1e-14)
    assert np.array_equal(sol.signs, [1, 1, -1])
    assert sol.weights.sum() == pytest.approx(1.0)


def test_dense_simplex_against_reference():
    rng = np.random.default_rng(11)
    for _ in range(25):
        m, n = 3, 7
        A = rng.normal(size=(m, n))
        x0 = rng.uniform(0, 1, n)
        b = A @ x0
        sign = np.where(b < 0, -1.0, 1.0)
        A, b = A * sign[:, None], b * sign
        c = rng.uniform(0.1, 2.0, n)
        ours = linprog_standard(c, A, b)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
        assert ours.value == pytest.approx(ref.fun, rel=1e-9, abs=1e-12)
        assert np.allclose(A @ ours.x, b, atol=1e-10)
        # strong duality through the multipliers
        assert ours.duals @ b == pytest.approx(ours.value, rel=1e-9, abs=1e-12)


def test_dense_simplex_degenerate_cycling_example():
    # Beale's example cycles under the largest-coefficient rule; Bland's rule terminates
    c = np.array([-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0])
    A = np.array(
        [
            [0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            [0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ]
    )
    res = DenseSimplex(c, A, np.array([0.0, 0.0, 1.0]), max_pivots=1000).solve()
    assert res.value == pytest.approx(-0.05)


def test_dense_simplex_failures():
    with pytest.raises(LPError):
        linprog_standard(np.array([1.0, 1.0]), np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))
    with pytest.raises(LPError):
        linprog_standard(np.array([-1.0, 0.0]), np.array([[1.0, -1.0]]), np.array([1.0]))
    with pytest.raises(LPError):
        DenseSimplex(np.ones(1), np.ones((1, 1)), np.array([-1.0]))


def test_grid_too_small():
    with pytest.raises(LPError):
        grid_chebyshev(powers([0, 1, 2]), lambda t: t, [0.0, 0.5, 1.0])


def test_lower_bound_and_refinement():
    s = gaussians()
    res = solve(s, gaussian_target)
    coarse = np.linspace(0, 8, 41)
    fine = np.linspace(0, 8, 161)  # contains the coarse grid
    _, d1 = grid_chebyshev(s, gaussian_target, coarse)
    _, d2 = grid_chebyshev(s, gaussian_target, fine)
    assert d1 <= d2 + 1e-12
    assert d2 <= res.upper + 1e-12


def test_constrained_grid_matches_solver():
    s = gaussians()
    cs = ConstraintSet.from_specs([{"kind": "point", "t": 6.4, "value": 2.0}], s)
    res = solve_constrained(s, gaussian_target, cs)
    sol = grid_chebyshev_lp(s, gaussian_target, np.linspace(0, 8, 2001), cs)
    assert sol.coeffs @ cs.matrix[0] == pytest.approx(2.0, abs=1e-10)
    assert abs(sol.value - res.distance) <= 1e-4
    assert sol.value <= res.upper + 1e-12
