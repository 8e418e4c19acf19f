import numpy as np
import pytest

from carnot_spheres import algebra as alg
from carnot_spheres import heisenberg as heis
from carnot_spheres import norms

H = alg.heisenberg()
DISC = heis.ConvexDomain.disc()


def test_omega_is_area_form():
    assert heis.omega([1, 0], [0, 1]) == 1.0
    assert heis.omega([0, 1], [1, 0]) == -1.0
    # sup over the unit disc is attained by orthogonal unit vectors
    assert heis.sup_omega(DISC) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("profile,A,b", [
    # A = -2 L diam - 4 sup|g|, b = sup omega / 4 - A / 2 (hand-computed)
    (heis.zero_profile(), 0.0, 0.25),
    (heis.abs_x_profile(DISC), -8.0, 4.25),
    (heis.constant_profile(2.0), -8.0, 4.25),
])
def test_constants(profile, A, b):
    assert heis.compute_A(profile, DISC) == pytest.approx(A)
    assert heis.compute_offset(profile, DISC) == pytest.approx(b)


def test_domain_geometry():
    sq = heis.ConvexDomain.polygon([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    assert sq.diameter == pytest.approx(2 * np.sqrt(2))
    assert sq.inradius == pytest.approx(1.0)
    assert sq.contains([0.5, -0.99]) and not sq.contains([1.01, 0.0])
    assert sq.gauge([0.5, 0.0]) == pytest.approx(0.5)
    back = heis.ConvexDomain.from_dict(sq.to_dict())
    assert back.diameter == pytest.approx(sq.diameter)


def test_condition_62_witness_without_offset():
    # f = 0: margin is -t(1-t) omega(v, w) / 2, minimal -1/8 at orthogonal boundary points, t = 1/2
    rep = heis.verify_condition_62(heis.zero_profile(), DISC, 200, 21)
    assert not rep["passed"]
    assert rep["min_margin"] == pytest.approx(-0.125, abs=1e-12)
    w = rep["witness"]
    assert w["t"] == 0.5
    assert heis.omega(w["v"], w["w"]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name", sorted(heis.NAMED_PROFILES))
def test_offset_profiles_satisfy_condition(name):
    g = heis.NAMED_PROFILES[name](DISC)
    b = heis.compute_offset(g, DISC)
    rep = heis.verify_condition_62(g.shifted(b), DISC, 120, 21)
    assert rep["min_margin"] >= -1e-9


@pytest.mark.parametrize("name", sorted(heis.NAMED_PROFILES))
def test_built_balls_verify(name):
    g = heis.NAMED_PROFILES[name](DISC)
    ball = heis.build_ball(g, DISC)
    assert norms.verify_ball_conditions(H, ball, 5000, seed=1)["passed"]


def test_small_offset_breaks_ball():
    g = heis.zero_profile()
    ball = heis.build_ball(g, DISC, b=0.05)
    rep = norms.verify_ball_conditions(H, ball, 20_000, seed=0, which=("combination",))
    assert not rep["passed"]


def test_round_trip_random_profile():
    g = heis.random_lipschitz_profile(DISC, 0.3, seed=2)
    ball = heis.build_ball(g, DISC)
    b = ball.meta["b"]
    pts = DISC.grid(21, 0.9)
    z = heis.extract_profile(ball, pts)["z"]
    np.testing.assert_allclose(z, g(pts) + b, atol=1e-6)


def test_extract_outside_projection_rejected():
    ball = heis.build_ball(heis.zero_profile(), DISC)
    with pytest.raises(ValueError):
        heis.extract_profile(ball, np.array([[1.5, 0.0]]))


def test_star_and_vertical_segments():
    ball = heis.build_ball(heis.abs_x_profile(DISC), DISC)
    assert heis.star_shape_check(ball, 3000, seed=0, spec=H)["passed"]
    assert heis.vertical_segment_check(ball, 3000, seed=0, spec=H)["passed"]


def test_lipschitz_quotients_bounded_by_profile():
    ball = heis.build_ball(heis.abs_x_profile(DISC), DISC)
    q = heis.profile_lipschitz_quotients(ball, DISC)
    assert q <= 1.0 + 1e-6


def test_polygon_domain_builds():
    hexagon = heis.ConvexDomain.polygon([[np.cos(a), np.sin(a)] for a in np.arange(6) * np.pi / 3])
    g = heis.abs_x_profile(hexagon)
    ball = heis.build_ball(g, hexagon)
    assert norms.verify_ball_conditions(H, ball, 3000, seed=2)["passed"]


def test_ball_serialization_round_trip():
    ball = heis.build_ball(heis.abs_x_profile(DISC), DISC)
    data = heis.ball_to_dict(ball)
    again = heis.ball_from_dict(data)
    pts = np.random.default_rng(0).uniform(-1.5, 1.5, size=(500, 3))
    np.testing.assert_array_equal(ball.contains(pts), again.contains(pts))
    assert np.asarray(data["f_grid"]["values"]).shape == (41, 41)


def test_grid_profile_lipschitz_certificate():
    xs = np.linspace(-1, 1, 21)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    g = heis.grid_profile(xs, xs, 2 * X - Y)
    assert g.lipschitz >= np.hypot(2, 1)
    assert g(np.array([[0.5, 0.25]]))[0] == pytest.approx(0.75)
