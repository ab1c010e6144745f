import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remezgen import (
    Cauchy,
    Domain,
    ExpTrig,
    FunctionSystem,
    Gaussian,
    PhaseTrig,
    Poly,
    Power,
    Spline,
    eval_poly,
    eval_poly_derivative,
    moment_vector,
    truncate_halfline,
)
from remezgen.errors import CapabilityError, DependentSystemError, DomainError, NonDecayingSystemError, ParseError

from conftest import gaussians, powers

FOUR_PI = 4 * math.pi


def chirp_system():
    return FunctionSystem(
        [PhaseTrig(FOUR_PI, [0, 0.5, 1], [4, 20, 4], "cos"), ExpTrig(0.0, FOUR_PI, 0, "sin")],
        Domain.interval(0.0, 1.0),
    )


def test_moment_vector_examples():
    assert np.array_equal(moment_vector(powers([1, 2]), 0.0), [0.0, 0.0])
    assert np.allclose(moment_vector(powers([0, 1, 6]), 1.0), [1, 1, 1])
    assert np.allclose(moment_vector(gaussians(), 1.0), [1, math.exp(-16 / 9), math.exp(-4)], rtol=1e-15)


def test_moment_vector_outside_domain():
    with pytest.raises(DomainError):
        moment_vector(powers([1, 2]), 1.5)


def test_eval_poly_examples():
    assert eval_poly(Poly([0.75, 0.5], powers([2, 1])), 1.0) == pytest.approx(1.25, abs=1e-15)
    assert eval_poly(Poly([0.0, 0.0], powers([2, 1])), 0.3) == 0.0
    assert eval_poly(Poly([1.0, 2.0], chirp_system()), 0.0) == pytest.approx(1.0, abs=1e-15)


def test_eval_poly_derivative_examples():
    s = powers([0, 1, 6])
    assert eval_poly_derivative(Poly([1, 0, 0], s), 0.3, 1) == 0.0
    assert eval_poly_derivative(Poly([0, 1, 0], s), -1.0, 1) == pytest.approx(1.0)
    assert eval_poly_derivative(Poly([0, 0, 1], s), -1.0, 2) == pytest.approx(30.0)


def test_derivative_order_beyond_capability():
    s = chirp_system()
    assert np.isfinite(eval_poly_derivative(Poly([1.0, 0.0], s), 0.2, 2))
    with pytest.raises(CapabilityError):
        eval_poly_derivative(Poly([1.0, 0.0], s), 0.2, 3)


def test_truncation_single_exponential():
    s = FunctionSystem([ExpTrig(-1.0)], Domain.halfline())
    dom = truncate_halfline(s, lambda t: np.zeros_like(t), 1e-12)
    assert dom.b == pytest.approx(-math.log(1e-12), abs=1e-6)


def test_truncation_slow_exponentials():
    basis = [ExpTrig(-0.1, 0.2, 0, "cos"), ExpTrig(-0.1, 0.2, 0, "sin"), ExpTrig(-0.9, 1.0, 0, "cos")]
    dom = truncate_halfline(FunctionSystem(basis, Domain.halfline()), None, 1e-12)
    # e^{-0.1 t} reaches 1e-12 at 276.3; the trig factor only moves the last crossing earlier
    assert 230 < dom.b <= -math.log(1e-12) / 0.1 + 1e-6


def test_truncation_needs_halfline():
    with pytest.raises(DomainError):
        truncate_halfline(powers([0, 1]), None)


def test_truncation_non_decaying():
    s = FunctionSystem([Cauchy(0.0, 1.0), ExpTrig(0.0, 1.0, 0, "cos")], Domain.halfline())
    with pytest.raises(NonDecayingSystemError):
        truncate_halfline(s, None, 1e-12, horizon=200)


def test_dependent_basis_rejected():
    with pytest.raises(DependentSystemError):
        FunctionSystem([Power(1), Power(1)], Domain.interval(-1, 1))


def test_unknown_family_and_fields():
    with pytest.raises(ParseError):
        FunctionSystem.from_dict({"domain": {"kind": "interval", "a": 0, "b": 1}, "basis": [{"family": "bessel"}]})
    with pytest.raises(ParseError):
        FunctionSystem.from_dict({"domain": {"kind": "interval", "a": 0, "b": 1}, "basis": [{"family": "power", "m": 1, "x": 2}]})


def test_system_dict_round_trip():
    s = FunctionSystem(
        [Power(2), ExpTrig(-0.5, 0.4, 1, "sin"), Gaussian(1.0, 2.0), Cauchy(0.5, 0.3), Spline([0, 1, 2, 3], [1, -1, 2, 0])],
        Domain.interval(0.0, 3.0),
    )
    back = FunctionSystem.from_dict(s.to_dict())
    assert back.to_dict() == s.to_dict()
    t = np.linspace(0, 3, 17)
    assert np.array_equal(back.matrix(t), s.matrix(t))


def test_spline_reproduces_knot_values():
    rng = np.random.default_rng(3)
    knots = np.sort(rng.uniform(-1, 1, 9))
    values = rng.uniform(-1, 1, 9)
    sp = Spline(knots, values)
    assert np.max(np.abs(sp(knots) - values)) <= 1e-10


def test_spline_not_a_knot():
    # the third derivative is continuous across the second and second-to-last knots
    knots = np.array([0.0, 0.3, 0.7, 1.2, 1.6, 2.0])
    sp = Spline(knots, np.sin(3 * knots))
    eps = 1e-9
    for k in (knots[1], knots[-2]):
        assert sp(np.array([k - eps]), 3)[0] == pytest.approx(sp(np.array([k + eps]), 3)[0], rel=1e-6)


def test_closed_form_integrals():
    from scipy.integrate import quad

    for b in (Gaussian(1.0, 3.0), Cauchy(0.5, 0.7), Power(3)):
        ref, _ = quad(lambda s: float(b(np.array([s]))[0]), 0.0, 2.5, epsabs=1e-13)
        assert b.integral(0.0, 2.5) == pytest.approx(ref, abs=1e-10)
    for e in (ExpTrig(-0.3, 0.7, 0, "sin"), ExpTrig(-0.3, 0.7, 1, "cos"), ExpTrig(-0.5, 0.0, 2, "cos"), Gaussian(1.0, 3.0)):
        ref, _ = quad(lambda s: float(e(np.array([s]))[0]), 0.0, np.inf, epsabs=1e-13, limit=200)
        assert e.integral(0.0, math.inf) == pytest.approx(ref, abs=1e-9)


SYSTEMS = {
    "powers": (powers([0, 1, 3, 6]), -1.0, 1.0),
    "gaussians": (gaussians(), 0.0, 8.0),
    "exptrig": (FunctionSystem([ExpTrig(-0.5, 1.3, 1, "cos"), ExpTrig(-0.5, 1.3, 0, "sin"), ExpTrig(-2.0)], Domain.interval(0, 6)), 0.0, 6.0),
    "cauchy": (FunctionSystem([Cauchy(0.0, 1.0), Cauchy(1.0, 0.5)], Domain.interval(-2, 2)), -2.0, 2.0),
}


@settings(max_examples=60, deadline=None)
@given(
    name=st.sampled_from(sorted(SYSTEMS)),
    frac=st.floats(0.01, 0.99),
    seed=st.integers(0, 2**32 - 1),
)
def test_eval_matches_inner_product(name, frac, seed):
    s, a, b = SYSTEMS[name]
    t = a + frac * (b - a)
    c = np.random.default_rng(seed).normal(size=s.n)
    assert eval_poly(Poly(c, s), t) == pytest.approx(float(c @ moment_vector(s, t)), rel=1e-14, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(
    name=st.sampled_from(sorted(SYSTEMS)),
    frac=st.floats(0.05, 0.95),
    order=st.integers(1, 2),
    seed=st.integers(0, 2**32 - 1),
)
def test_derivative_matches_central_differences(name, frac, order, seed):
    s, a, b = SYSTEMS[name]
    t = a + frac * (b - a)
    p = Poly(np.random.default_rng(seed).normal(size=s.n), s)
    h = 1e-3 * (b - a)
    lower = eval_poly_derivative(p, t, order - 1) if order > 1 else eval_poly(p, t)
    plus = eval_poly_derivative(p, t + h, order - 1) if order > 1 else eval_poly(p, t + h)
    minus = eval_poly_derivative(p, t - h, order - 1) if order > 1 else eval_poly(p, t - h)
    fd = (plus - minus) / (2 * h)
    scale = max(1.0, abs(lower), abs(fd))
    assert eval_poly_derivative(p, t, order) == pytest.approx(fd, abs=1e-4 * scale * (1 + (b - a) ** 2))
