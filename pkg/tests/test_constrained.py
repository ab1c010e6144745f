import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from remezgen import (
    ConstraintSet,
    Domain,
    ExpTrig,
    FunctionSystem,
    Gaussian,
    PhaseTrig,
    Power,
    SolverOptions,
    build_functional,
    project_oriented,
    solve,
    solve_constrained,
)
from remezgen.errors import CapabilityError, ConstraintError, DependentSystemError, ParseError
from remezgen.remez import initialize, iterate_once

from conftest import gaussian_target, gaussians, powers

S016 = powers([0, 1, 6])


def test_point_functional():
    assert np.allclose(build_functional({"kind": "point", "t": 1.0}, S016).vector, [1, 1, 1])


def test_derivative_functional():
    assert np.allclose(build_functional({"kind": "derivative", "order": 1, "t": -1.0}, S016).vector, [0, 1, -6])


def test_coeff_sum_functional():
    assert np.array_equal(build_functional({"kind": "coeff_sum"}, powers([0, 1, 2, 3, 4])).vector, np.ones(5))


def test_integral_functional():
    s = FunctionSystem([Gaussian(1.0, 3.0), Power(2)], Domain.interval(0.0, 8.0))
    vec = build_functional({"kind": "integral"}, s).vector
    assert vec[0] == pytest.approx(0.5 * math.sqrt(math.pi) * 3 * (math.erf(7 / 3) + math.erf(1 / 3)), abs=1e-12)
    assert vec[1] == pytest.approx(512 / 3, abs=1e-10)
    h = FunctionSystem([ExpTrig(-0.5, 1.0, 0, "cos"), ExpTrig(-0.5, 1.0, 0, "sin")], Domain.halfline())
    # int_0^inf e^{-t/2} (cos t, sin t) dt = (a, b) / (a^2 + b^2) with a = 1/2, b = 1
    assert np.allclose(build_functional({"kind": "integral"}, h).vector, [0.4, 0.8], atol=1e-14)


def test_integral_without_closed_form_uses_quadrature():
    s = FunctionSystem([PhaseTrig(1.0, [0, 1], [1, 2]), Power(0)], Domain.interval(0.0, 1.0))
    vec = build_functional({"kind": "integral"}, s).vector
    t = np.linspace(0, 1, 200001)
    ref = trapezoid(np.cos((1 + t) * t), t)
    assert vec[0] == pytest.approx(ref, abs=1e-8)


def test_functional_errors():
    with pytest.raises(ParseError):
        build_functional({"kind": "moment"}, S016)
    with pytest.raises(ParseError):
        build_functional({"kind": "point", "t": 0.0, "where": 1}, S016)
    chirp = FunctionSystem([PhaseTrig(1.0, [0, 1], [1, 2]), Power(0)], Domain.interval(0.0, 1.0))
    with pytest.raises(CapabilityError):
        build_functional({"kind": "derivative", "order": 3, "t": 0.5}, chirp)
    grow = FunctionSystem([ExpTrig(0.0, 1.0, 0, "cos"), ExpTrig(-1.0)], Domain.halfline())
    with pytest.raises(ConstraintError):
        build_functional({"kind": "integral"}, grow)


def test_constraint_set_validation():
    with pytest.raises(ConstraintError):
        ConstraintSet.from_specs([{"kind": "point", "t": 0.0, "value": 1}, {"kind": "point", "t": 0.0, "value": 2}], S016)
    s2 = powers([0, 1])
    with pytest.raises(ConstraintError):
        ConstraintSet.from_specs([{"kind": "point", "t": 0.0, "value": 1}, {"kind": "point", "t": 1.0, "value": 2}], s2)
    with pytest.raises(ParseError):
        ConstraintSet.from_specs([{"kind": "point", "t": 0.0}], S016)


def test_dependent_projection_names_subset():
    # only reachable for a dependent system: {t, t, 1} with the constant pinned leaves (t, t)
    s = FunctionSystem([Power(1), Power(1), Power(0)], Domain.interval(-1.0, 1.0), check=False)
    with pytest.raises(DependentSystemError) as exc:
        ConstraintSet.from_specs([{"kind": "coeffs", "weights": [0, 0, 1], "value": 1.0}], s)
    assert "independent subset" in str(exc.value)


def test_projector_properties():
    s = powers([0, 1, 2, 3, 4])
    cs = ConstraintSet.from_specs(
        [{"kind": "point", "t": 0.3, "value": 1}, {"kind": "derivative", "order": 1, "t": -0.2, "value": 0}], s
    )
    P = cs.projector
    assert np.max(np.abs(P @ P - P)) <= 1e-10
    assert np.max(np.abs(P - P.T)) <= 1e-10
    assert cs.dim == 3
    ell = cs.matrix[0]
    assert np.max(np.abs(project_oriented(ell, cs))) <= 1e-14
    a = P @ np.arange(5.0)
    assert np.linalg.norm(project_oriented(a, cs)) == pytest.approx(np.linalg.norm(a))


def test_constant_term_functional_reduces_to_monomials():
    s = powers([0, 1, 2, 3, 4])
    cs = ConstraintSet.from_specs([{"kind": "coeffs", "weights": [1, 0, 0, 0, 0], "value": -1.0}], s)
    t = np.linspace(-1, 1, 7)
    u = s.matrix(t)
    proj = project_oriented(u, cs)
    # the projection drops the constant coordinate and is an isometry on the rest
    assert np.allclose(proj @ proj.T, u[:, 1:] @ u[:, 1:].T, atol=1e-14)


def test_residuals_hold_at_every_iterate():
    s = gaussians()
    cs = ConstraintSet.from_specs(
        [{"kind": "point", "t": 6.4, "value": 2.0}, {"kind": "derivative", "order": 1, "t": 6.4, "value": 4.47}], s
    )
    state, prob = initialize(s, gaussian_target, SolverOptions(), cs)
    for _ in range(6):
        res = cs.residuals(state.poly.coeffs)
        assert np.all(np.abs(res) <= 1e-8 * (1 + np.abs(cs.targets)))
        if state.gap < 1e-6:
            break
        iterate_once(state, prob)


def test_no_constraints_matches_unconstrained_solver():
    s = gaussians()
    a = solve(s, gaussian_target)
    b = solve_constrained(s, gaussian_target, ConstraintSet.empty(3))
    assert np.array_equal(a.coeffs, b.coeffs)
    assert a.upper == b.upper and a.lower == b.lower and a.iterations == b.iterations


def test_constant_term_constraint_solution():
    s = powers([0, 1, 2, 3, 4])
    cs = ConstraintSet.from_specs([{"kind": "coeffs", "weights": [1, 0, 0, 0, 0], "value": -1.0}], s)
    res = solve_constrained(s, 0.0, cs)
    assert res.converged and res.certificate.passed
    assert res.distance == pytest.approx(1.0, abs=1e-6)
    assert res.poly(0.0) == pytest.approx(-1.0, abs=1e-8)
