import math

import numpy as np
import pytest

from remezgen import ConstraintSet, Domain, ExpTrig, FunctionSystem, SpectrumSpec
from remezgen.applications import (
    markov_bernstein_exponential,
    markov_bernstein_lacunary,
    min_stability_interval,
    ode_derivative_bound,
    point_value,
    spectrum_from_characteristic,
)
from remezgen.errors import ParseError, StabilityError
from remezgen.oracle import grid_chebyshev_lp


def test_lacunary_sparse_powers():
    c1 = markov_bernstein_lacunary([0, 1, 6], 1)
    assert c1.constant == pytest.approx(12.0, rel=1e-3)
    assert c1.constant * c1.norm == pytest.approx(1.0, abs=1e-15)
    assert c1.result.certificate.passed
    assert c1.poly.derivative(-1.0, 1) == pytest.approx(1.0, abs=1e-8)


def test_lacunary_order_above_degree():
    assert math.isinf(markov_bernstein_lacunary([0, 1], 2).constant)


def test_lacunary_rejects_repeated_powers():
    with pytest.raises(ParseError):
        markov_bernstein_lacunary([0, 1, 1], 1)


def test_single_exponential_constant():
    mb = markov_bernstein_exponential(SpectrumSpec.from_list([{"re": -1.0}]), 1)
    assert mb.constant == pytest.approx(1.0, abs=1e-9)


def test_spectrum_parsing():
    sp = SpectrumSpec.from_list([{"re": -1, "im": -2, "jordan": 2}])
    assert sp.eigenvalues[0].im == 2.0
    # t^s e^{-t} (cos 2t, sin 2t) for s = 0, 1
    assert len(sp.basis()) == 4
    assert SpectrumSpec.from_list(sp.to_list()) == sp
    with pytest.raises(ParseError):
        SpectrumSpec.from_list([{"re": -1, "mult": 2}])
    with pytest.raises(ParseError):
        SpectrumSpec.from_list([])
    with pytest.raises(StabilityError):
        SpectrumSpec.from_list([{"re": 0.0, "im": 1.0}])


def test_characteristic_roots():
    sp = spectrum_from_characteristic([-2.0, -2.0])  # x'' = -2x' - 2x
    assert len(sp.eigenvalues) == 1
    z = sp.eigenvalues[0]
    assert (z.re, z.im, z.jordan) == pytest.approx((-1.0, 1.0, 1))
    sp = spectrum_from_characteristic([-1.0, -2.0])  # double root -1
    assert sp.eigenvalues[0].jordan == 2 and sp.eigenvalues[0].re == pytest.approx(-1.0)
    with pytest.raises(StabilityError):
        spectrum_from_characteristic([1.0, 0.0])  # x'' = x


def test_first_order_ode_bound():
    assert ode_derivative_bound([-1.0]).constant == pytest.approx(1.0, abs=1e-9)


def test_damped_oscillator_bound_against_grid_lp():
    bound = ode_derivative_bound([-2.0, -2.0])
    system = FunctionSystem([ExpTrig(-1.0, 1.0, 0, "cos"), ExpTrig(-1.0, 1.0, 0, "sin")], Domain.halfline())
    direct = markov_bernstein_exponential(SpectrumSpec.from_list([{"re": -1.0, "im": 1.0}]), 1)
    assert bound.constant == pytest.approx(direct.constant, rel=1e-12)
    grid_sys = system.with_domain(Domain.interval(0.0, 20.0))
    cs = ConstraintSet.from_specs([{"kind": "derivative", "order": 1, "t": 0.0, "value": 1.0}], grid_sys)
    sol = grid_chebyshev_lp(grid_sys, lambda t: np.zeros_like(t), np.linspace(0, 20, 4001), cs)
    # the grid minimum is a lower bound for the norm, so its reciprocal bounds C from above
    assert 1.0 / sol.value >= bound.constant - 1e-9
    assert 1.0 / sol.value == pytest.approx(bound.constant, rel=1e-4)


def test_point_value_single_exponential():
    sp = SpectrumSpec.from_list([{"re": -1.0}])
    # p(T) = 1 forces p = e^{T - t}, whose norm is e^T
    for T in (0.0, 0.5, 2.0):
        assert point_value(sp, T).value == pytest.approx(math.exp(T), rel=1e-9)


def test_dwell_single_exponential():
    out = min_stability_interval([SpectrumSpec.from_list([{"re": -1.0}])], m=0.5)
    assert out.T <= 1e-4 and out.M == pytest.approx(0.5, abs=1e-4)


def test_dwell_needs_spectra():
    with pytest.raises(ValueError):
        min_stability_interval([], m=1.0)


def test_dwell_oscillatory_pair():
    sp = SpectrumSpec.from_list([{"re": -1.0, "im": 1.0}])
    out = min_stability_interval([sp], m=0.0, tol=1e-3)
    assert out.monotone
    assert 0.5 < out.T < 2.0
    # v(T) crosses 1 at T: below just before, above just after (grid LP cross-check)
    for T, above in ((out.T - 0.01, False), (out.T + 0.01, True)):
        grid_sys = sp.system().with_domain(Domain.interval(0.0, 25.0))
        cs = ConstraintSet.from_specs([{"kind": "point", "t": T, "value": 1.0}], grid_sys)
        v = grid_chebyshev_lp(grid_sys, lambda t: np.zeros_like(t), np.linspace(0, 25, 5001), cs).value
        assert (v > 1.0 + 1e-9) == above
