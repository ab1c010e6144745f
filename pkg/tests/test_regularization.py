import math
from types import SimpleNamespace

import numpy as np
import pytest

from remezgen import ConstraintSet, Poly, SolverOptions
from remezgen.regularization import (
    DegenerateNullspaceError,
    all_vanishing,
    facet_separation,
    g_function,
    g_objective,
    select_regularized_point,
    vanishing_polynomial,
)
from remezgen.remez import PLAIN, REGULARIZED, mode_controller
from remezgen.search import Sampler, global_max_abs_error
from remezgen.simplex import exchange_vertex, signed_null, subset_conditions

from conftest import gaussian_target, gaussians, powers

SQ = powers([0, 1, 2])


def test_vanishing_quadratic_example():
    q = vanishing_polynomial(SQ, [-1.0, 0.0, 0.5, 1.0], 1, 2)
    # zeros at -1 and 1: q is proportional to t^2 - 1, sign fixed by the first coefficient
    assert np.allclose(q.coeffs, np.array([1.0, 0.0, -1.0]) / math.sqrt(2), atol=1e-15)
    assert q.pair == (1, 2)


def test_distance_identity_example():
    q = vanishing_polynomial(SQ, [-1.0, 0.0, 0.5, 1.0], 1, 2)
    u0 = SQ.matrix([0.0])[0]
    h = SQ.matrix([-1.0, 1.0]).T
    proj = h @ np.linalg.lstsq(h, u0, rcond=None)[0]
    assert np.linalg.norm(u0 - proj) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert abs(q(u0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_duplicated_zero_is_degenerate():
    with pytest.raises(DegenerateNullspaceError):
        vanishing_polynomial(SQ, [-1.0, 0.3, 0.5, 0.3], 0, 2)


def test_vanishing_invariants_with_constraint():
    s = powers([0, 1, 2, 3])
    cs = ConstraintSet.from_specs([{"kind": "point", "t": 0.2, "value": 1.0}], s)
    pts = np.array([-0.8, -0.1, 0.4, 0.9])
    for q in all_vanishing(s, pts, cs):
        assert np.linalg.norm(q.coeffs) == pytest.approx(1.0, abs=1e-14)
        others = [i for i in range(len(pts)) if i not in q.pair]
        assert np.max(np.abs(s.matrix(pts[others]) @ q.coeffs)) <= 1e-9
        assert abs(cs.matrix @ q.coeffs)[0] <= 1e-9


def test_g_examples():
    one = powers([1])
    qs = all_vanishing(one, [-0.5, 0.5])  # single pair, no zeros: q(t) = t
    assert g_objective(1.0, qs, one) == pytest.approx(1.0)
    pts = [-1.0, 0.0, 0.5, 1.0]
    qs = all_vanishing(SQ, pts)
    # t = 0 lies in the zero set of every q not containing node 1 -> infinite
    assert math.isinf(g_objective(0.0, qs, SQ))
    assert np.isfinite(g_function(qs, SQ)(np.array([0.25]))[0])


def test_mode_controller_rules():
    opts = SolverOptions()
    calm = SimpleNamespace(stall=0)
    assert mode_controller(calm, 0.8, opts) == PLAIN
    assert mode_controller(calm, 0.01, opts) == REGULARIZED
    assert mode_controller(SimpleNamespace(stall=3), 0.8, opts) == REGULARIZED
    assert mode_controller(calm, 0.01, SolverOptions(regularize="never")) == PLAIN
    assert mode_controller(calm, 0.8, SolverOptions(regularize="always")) == REGULARIZED


def test_facet_separation_of_existing_vertex():
    pts = [0.5, 3.0, 5.5, 7.5]
    s = gaussians()
    sep = facet_separation(s, pts, 1, pts[1])
    assert sep.ratio == pytest.approx(1.0)
    sep = facet_separation(s, pts, 1, pts[2])
    assert sep.raw == pytest.approx(0.0, abs=1e-12) and sep.ratio == pytest.approx(0.0, abs=1e-9)


def test_regularized_exchange_is_nondegenerate():
    s = gaussians()
    pts = np.array([0.5, 3.0, 5.5, 7.5])
    sigma, alpha = signed_null(s.matrix(pts))
    from remezgen.simplex import NodeSet, solve_level_system

    nodes = NodeSet(pts, sigma, s.matrix(pts) * sigma[:, None])
    p, d, nodes = solve_level_system(nodes, gaussian_target, s)
    sampler = Sampler(s, gaussian_target, s.domain)
    t0, r, _ = global_max_abs_error(p, gaussian_target, s.domain, sampler=sampler)
    choice = select_regularized_point(p, gaussian_target, nodes.points, r, d, 0.5, sampler, t0)
    assert not choice.fallback and np.isfinite(choice.g)
    assert choice.error >= 0.5 * r + 0.5 * d - 1e-9
    a0 = s.matrix([choice.t])[0] * choice.sign
    ex = exchange_vertex(nodes, alpha, a0, choice.t, choice.sign)
    assert np.max(subset_conditions(ex.nodes.oriented)) < 1e12
