import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carnot_spheres import algebra as alg
from carnot_spheres import control as ctl
from carnot_spheres import norms


H = alg.heisenberg()


def arc_endpoint_by_integration(phi, m=4000):
    """Unit-speed arc turning by ``phi`` over unit time, integrated as a polygon."""
    t = (np.arange(m) + 0.5) / m
    a = phi * t
    u = np.column_stack([np.cos(a), np.sin(a)])
    return ctl.endpoint(H, u)


@pytest.mark.parametrize("phi", [0.3, 1.0, 2.5, 4.0, 6.0])
def test_cc_norm_on_shooting_family(phi):
    end = arc_endpoint_by_integration(phi)
    # shooting family in closed form: chord 2 sin(phi/2)/phi, height (phi - sin phi)/(2 phi^2)
    chord = 2 * np.sin(phi / 2) / phi
    z = (phi - np.sin(phi)) / (2 * phi**2)
    assert np.hypot(end[0], end[1]) == pytest.approx(chord, abs=1e-6)
    assert end[2] == pytest.approx(z, abs=1e-6)
    assert norms.heisenberg_cc_norm(end) == pytest.approx(1.0, abs=1e-5)


def test_cc_norm_center_axis():
    z = np.array([1 / (4 * np.pi), 1.0, 0.01])
    pts = np.column_stack([np.zeros(3), np.zeros(3), z])
    np.testing.assert_allclose(norms.heisenberg_cc_norm(pts), np.sqrt(4 * np.pi * z), rtol=1e-12)
    # full circle of unit length encloses area 1/(4 pi)
    end = arc_endpoint_by_integration(2 * np.pi)
    assert end[2] == pytest.approx(1 / (4 * np.pi), abs=1e-7)


def test_cc_norm_horizontal_is_euclidean():
    pts = np.array([[3.0, 4.0, 0.0], [0.0, -2.0, 0.0]])
    np.testing.assert_allclose(norms.heisenberg_cc_norm(pts), [5.0, 2.0])


@pytest.mark.parametrize("make", [norms.koranyi_gauge, norms.heisenberg_cc_gauge,
                                  lambda: norms.box_quasi_norm_gauge(H)])
def test_heisenberg_gauges_are_homogeneous(make):
    g = make()
    p = np.random.default_rng(0).normal(size=(100, 3))
    for lam in (0.01, 0.5, 3.0, 100.0):
        np.testing.assert_allclose(g(alg.dilate(H, lam, p)), lam * g(p), rtol=1e-9)


def test_axioms_koranyi_and_cc():
    for g in (norms.koranyi_gauge(), norms.heisenberg_cc_gauge()):
        rep = norms.verify_norm_axioms(H, g, 4000, seed=3)
        assert rep["passed"], rep


def test_euclidean_norm_not_homogeneous_on_heisenberg():
    rep = norms.verify_norm_axioms(H, norms.euclidean_gauge(), 4000, seed=3)
    hom = next(c for c in rep["checks"] if c["check"] == "homogeneous")
    assert not hom["passed"] and "witness" in hom


def test_box_quasi_norm_triangle_on_heisenberg():
    # |z + z' + w/2| <= a^2 + b^2 + ab/2 <= (a + b)^2, so the box gauge is a norm here
    rep = norms.verify_norm_axioms(H, norms.box_quasi_norm_gauge(H), 4000, seed=3)
    assert rep["passed"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_koranyi_triangle_property(vals):
    g = norms.koranyi_gauge()
    p, q = np.array(vals).reshape(2, 3)
    assert g(alg.bch_product(H, p, q)) <= g(p) + g(q) + 1e-9


def test_equivalence_constants_symmetric():
    a, b = norms.koranyi_gauge(), norms.heisenberg_cc_gauge()
    ab = norms.equivalence_constants(H, a, b, 3000, seed=1)
    ba = norms.equivalence_constants(H, b, a, 3000, seed=1)
    assert 1.0 <= ab["C"] < 3 and 1.0 <= ba["C"] < 3


def test_holder_bounds_finite():
    rep = norms.holder_bound_check(H, norms.heisenberg_cc_gauge(), 1, 2, 3000, seed=2)
    assert rep["finite"] and rep["C"] < 20
    with pytest.raises(ValueError):
        norms.holder_bound_check(H, norms.heisenberg_cc_gauge(), 1, 1.5, 10)


def test_gauge_from_ball_matches_closed_form():
    g = norms.koranyi_gauge()
    ball = norms.gauge_ball(H, g, bounding_radius=1.0, interior_radius=0.4)
    p = np.random.default_rng(4).normal(size=(50, 3))
    np.testing.assert_allclose(norms.gauge_from_ball(H, ball, p), g(p), rtol=1e-9)
    assert norms.gauge_from_ball(H, ball, np.zeros(3)) == 0.0


def test_project_to_boundary():
    ball = norms.euclidean_ball_candidate(H, 1.0)
    p = np.array([[0.1, 0.2, 0.3], [2.0, 0.0, 5.0]])
    q = norms.project_to_boundary(H, ball, p)
    np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-9)


def test_verify_euclidean_balls():
    ok = norms.verify_ball_conditions(H, norms.euclidean_ball_candidate(H, 1.0), 3000, seed=0)
    assert ok["passed"]
    assert ok["checks"][-1]["triples"] == 3000 * 21
    bad = norms.verify_ball_conditions(H, norms.euclidean_ball_candidate(H, 8.0), 3000, seed=0)
    comb = bad["checks"][-1]
    assert not comb["passed"]
    w = comb["witness"]
    pt = norms.combination_points(H, np.array(w["p"]), np.array(w["q"]), np.array(w["t"]))
    assert np.linalg.norm(pt) > 8.0


def test_verification_independent_of_workers():
    ball = norms.euclidean_ball_candidate(H, 8.0)
    a = norms.verify_ball_conditions(H, ball, 9000, seed=5, workers=1)
    b = norms.verify_ball_conditions(H, ball, 9000, seed=5, workers=3)
    assert a == b


def test_non_ball_rejected():
    # not symmetric
    shifted = norms.BallSpec(3, lambda p: 1 - np.linalg.norm(p - 0.5, axis=-1), 2.0, 2.0, 0.1)
    rep = norms.verify_ball_conditions(H, shifted, 2000, seed=0, which=("symmetric", "interior"))
    assert not rep["passed"]


def test_euclidean_threshold():
    rep = norms.euclidean_radius_threshold(H, [1, 2, 4, 8], 3000, seed=0)
    assert rep["threshold"] == 4.0


def test_product_gauge():
    g = norms.product_gauge(norms.heisenberg_cc_gauge(), 3)
    assert g(np.array([3.0, 0.0, 0.0, 4.0])) == pytest.approx(5.0)
