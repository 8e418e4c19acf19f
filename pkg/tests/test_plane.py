import dataclasses

import numpy as np
import pytest

from carnot_spheres import algebra as alg
from carnot_spheres import norms
from carnot_spheres import plane

P22 = alg.builtin("plane22")


def test_combination_curve_in_22_grading():
    p, q = np.array([-1.0, 2.25]), np.array([1.0, 2.25])
    # weights (2, 2): delta_t scales by t^2, the group is abelian
    np.testing.assert_allclose(plane.combination_curve(p, q, 0.5), [0.0, 1.125])
    np.testing.assert_allclose(norms.combination_points(P22, p, q, np.array(0.5)), [0.0, 1.125])


def test_y125_witness_by_hand():
    w = plane.y_region_witness(1.25)
    assert w["p"] == [-1.0, 2.25] and w["q"] == [1.0, 2.25] and w["t"] == 0.5
    # Y_1.25 at x = 0 reaches height 1; the combination sits at 1.125
    assert w["point"] == pytest.approx([0.0, 1.125])
    assert not w["inside"]
    assert w["margin"] == pytest.approx(-0.125)


def test_worst_height_matches_dense_scan():
    C = 1.25
    p = np.array([-1.0, 1 + C])
    q = np.array([1.0, 1 + C])
    t = np.linspace(0, 1, 200001)
    pts = plane.combination_curve(p, q, t)
    at_axis = pts[np.argmin(np.abs(pts[:, 0]))]
    assert at_axis[1] == pytest.approx(plane.worst_combination_height(C, 1.0, 1.0), abs=1e-5)


def test_y_region_window():
    assert plane.y_c(1.0).in_window and not plane.y_c(1.25).in_window
    inside, ok = plane.y_region_contains(1.0, 1.0, 1.0, 1.0, np.array([[0.25, 1.4], [0.25, 1.6]]))
    assert list(inside) == [True, False] and ok


def test_y1_passes_and_y125_fails():
    r1 = norms.verify_ball_conditions(P22, plane.y_c(1.0).ball(), 50_000, seed=0, which=("combination",))
    assert r1["passed"]
    r2 = norms.verify_ball_conditions(P22, plane.y_c(1.25).ball(), 50_000, seed=0, which=("combination",))
    assert not r2["passed"]


def test_linear_image_keeps_condition():
    A = np.array([[2.0, 0.5], [0.0, 1.0]])
    img = plane.linear_image_ball(plane.y_c(1.0).ball(), A)
    assert norms.verify_ball_conditions(P22, img, 20_000, seed=1, which=("combination",))["passed"]


def test_holder_certificate_dominates_random_pairs():
    f = plane.NormalizedProfile()
    L = f.certified_L()
    rng = np.random.default_rng(7)
    a = rng.uniform(0, 2 * np.pi, 200_000)
    b = a + np.exp(rng.uniform(np.log(1e-7), np.log(np.pi), a.size))
    q = np.abs(f(a) - f(b)) / np.sqrt(b - a)
    assert q.max() <= L
    # and the analytic bound is an upper bound for the raw series
    W = lambda t: plane.weierstrass_half_holder(t, 24)
    assert plane.holder_half_certificate(W, 12) <= plane.holder_half_bound(24)


def test_normalized_range():
    f = plane.NormalizedProfile(1.0, 1.2)
    t = np.linspace(0, 2 * np.pi, 10001)
    v = f(t)
    assert v.min() >= 1.0 - 1e-12 and v.max() <= 1.2 + 1e-12
    assert f(0.0) == pytest.approx(1.2)  # all cosines equal 1


def test_default_params_consistent():
    prm = plane.FractalBallParams.default()
    assert prm.violations() == []
    lo = prm.L * np.sqrt(2 / prm.m)
    hi = prm.m / np.sqrt(2 * prm.M * prm.theta0)
    assert lo < prm.C < hi
    assert plane.FractalBallParams.from_dict(prm.to_dict()).to_dict() == prm.to_dict()


def test_bad_params_rejected():
    prm = plane.FractalBallParams.default()
    bad = dataclasses.replace(prm, C=10.0)
    assert any("window" in v for v in bad.violations())
    with pytest.raises(plane.ParameterError):
        plane.build_fractal_ball(bad)


def test_fractal_ball_contains_arc_on_boundary():
    prm = plane.FractalBallParams.default()
    ball = plane.build_fractal_ball(prm)
    g = norms.ball_gauge(P22, ball)
    np.testing.assert_allclose(g(plane.arc_point(prm.f, prm.s_grid)), 1.0, atol=1e-6)
    ts = plane.arc_samples(prm, 2000)
    assert ball.margin(plane.arc_point(prm.f, ts)).min() >= -1e-9


def test_fractal_ball_verifies():
    ball = plane.build_fractal_ball(plane.FractalBallParams.default())
    assert norms.verify_ball_conditions(P22, ball, 5000, seed=3)["passed"]


def test_constant_profile_gives_smooth_ball():
    prm = plane.FractalBallParams.default(constant=True)
    assert prm.L == 0 and prm.violations() == []


def test_remark_gauge_closed_form():
    ball = plane.remark_ball()
    g = norms.ball_gauge(P22, ball)
    x = np.linspace(-0.2, 0.2, 41)
    pts = np.column_stack([x, np.ones_like(x)])
    np.testing.assert_allclose(g(pts), plane.remark_gauge_near_top(x), atol=1e-9)


def test_remark_ball_is_a_ball_and_lipschitz_domain():
    rep = norms.verify_ball_conditions(P22, plane.remark_ball(), 5000, seed=0)
    assert rep["passed"]
    assert plane.tilted_graph_lipschitz() == pytest.approx(1.0, abs=0.05)


def test_triangle_membership():
    a, b, c = np.array([0, 0.0]), np.array([1, 0.0]), np.array([0, 1.0])
    assert plane.in_triangle(np.array([0.2, 0.2]), a, b, c)
    assert not plane.in_triangle(np.array([0.8, 0.8]), a, b, c)
    # degenerate: collinear vertices
    assert plane.in_triangle(np.array([0.5, 0.0]), a, b, 2 * b)
