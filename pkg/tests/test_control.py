import numpy as np
import pytest
from scipy.integrate import solve_ivp

from carnot_spheres import algebra as alg
from carnot_spheres import control as ctl

H = alg.heisenberg()
HR = alg.heisenberg_times_line()
E = alg.engel()


def endpoint_by_scipy(spec, u):
    """Independent integration of p' = dL_p(u_j) with an adaptive solver."""
    m = len(u)
    v1 = spec.first_layer

    def rhs(t, p):
        j = min(int(t * m), m - 1)
        dl, _ = alg.translation_jacobians(spec, p)
        return dl[:, v1] @ u[j]

    p = np.zeros(spec.dim)
    for j in range(m):
        sol = solve_ivp(rhs, (j / m, (j + 1) / m), p, rtol=1e-12, atol=1e-13, method="DOP853")
        p = sol.y[:, -1]
    return p


@pytest.mark.parametrize("name", ["heisenberg", "engel", "engel_times_line"])
def test_endpoint_matches_adaptive_solver(name):
    spec = alg.builtin(name)
    u = np.random.default_rng(2).normal(size=(5, len(spec.first_layer)))
    np.testing.assert_allclose(ctl.endpoint(spec, u), endpoint_by_scipy(spec, u), atol=1e-9)


def test_endpoint_batched_and_rk4():
    u = np.random.default_rng(0).normal(size=(7, 4, 2))
    batch = ctl.endpoint(E, u)
    assert batch.shape == (7, 4)
    np.testing.assert_allclose(batch[3], ctl.endpoint(E, u[3]))
    np.testing.assert_allclose(ctl.endpoint_ode(E, u, steps=200), batch, atol=1e-9)


def test_endpoint_left_invariance():
    u = np.random.default_rng(1).normal(size=(6, 2))
    o = np.array([0.3, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(ctl.endpoint(E, u, o), alg.bch_product(E, o, ctl.endpoint(E, u)), atol=1e-12)


@pytest.mark.parametrize("method", ["augmented", "closed"])
def test_jacobian_vs_finite_differences(method):
    for spec in (H, E, HR):
        u = np.random.default_rng(4).normal(size=(5, len(spec.first_layer)))
        j = ctl.endpoint_jacobian(spec, u, method=method).blocks
        f = ctl.fd_jacobian(spec, u).blocks
        assert np.max(np.abs(j - f)) / np.max(np.abs(f)) < 1e-7


def test_jacobian_rank():
    assert ctl.endpoint_jacobian(H, [[1.0, 0.0]]).rank == 2
    u = np.random.default_rng(3).normal(size=(20, 2))
    assert ctl.endpoint_jacobian(H, u).rank == 3


def brute_tau(blocks, norm, n=100_000, seed=0):
    """Two-level search: global random directions, then a cap around the best one."""
    rng = np.random.default_rng(seed)
    dim = blocks.shape[1]
    d = rng.normal(size=(n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    vals = ctl.support_sum(blocks, norm, d)
    best = d[np.argmin(vals)]
    local = best + 0.02 * rng.normal(size=(n, dim))
    local /= np.linalg.norm(local, axis=1, keepdims=True)
    return min(vals.min(), ctl.support_sum(blocks, norm, local).min())


@pytest.mark.parametrize("norm", ["euclidean", "l1", "linf"])
def test_tau_matches_brute_force(norm):
    u = np.random.default_rng(11).normal(size=(6, 2))
    blocks = ctl.endpoint_jacobian(H, u).blocks
    nm = ctl.V1Norm(norm)
    t = ctl.minimal_stretching(blocks, nm)
    b = brute_tau(blocks, nm)
    # the optimizer may only improve on sampling, never by much
    assert t <= b + 1e-9
    assert t >= b - 2e-3 * b


def test_tau_identity_blocks():
    # L = identity on R^2 with m = 1: image of the l-inf unit ball is the square, inradius 1
    blocks = np.eye(2)[None]
    assert ctl.minimal_stretching(blocks, "linf") == pytest.approx(1.0)
    assert ctl.minimal_stretching(blocks, "euclidean") == pytest.approx(1.0)
    assert ctl.minimal_stretching(blocks, "euclidean", target=2.0) == pytest.approx(2.0)


def test_tau_constant_heisenberg_controls():
    # constant horizontal line in H is regular once m > 1
    assert ctl.tau(H, ctl.ControlSignal.constant([1.0, 0.0], 16)) > 0.1
    assert ctl.tau(HR, ctl.ControlSignal.constant([0.0, 0.0, 1.0], 16)) <= 1e-12


def test_tau_too_many_dimensions():
    with pytest.raises(ctl.UnsupportedDimension):
        ctl.minimal_stretching(np.zeros((2, 5, 2)))


def test_scan_flags_vertical_class_only():
    rep = ctl.singular_scan(HR, m=8, count=40)
    assert [c["label"] for c in rep["classes"]] == ["S"]
    assert rep["min_unflagged_tau"] > 1e-3


def test_polygon_norm_duality():
    hexagon = [(np.cos(a), np.sin(a)) for a in np.arange(6) * np.pi / 3]
    nm = ctl.V1Norm("polygon", tuple(hexagon))
    for v in hexagon:
        assert nm(np.array(v)) == pytest.approx(1.0)
    d = np.random.default_rng(0).normal(size=(50, 2))
    u = np.random.default_rng(1).normal(size=(50, 2))
    # Hölder inequality for a norm and its dual
    assert np.all(np.sum(u * d, axis=1) <= nm(u) * nm.dual(d) + 1e-12)


def test_control_signal_round_trip():
    c = ctl.ControlSignal(np.ones((3, 2)), ctl.V1Norm("l1"))
    back = ctl.ControlSignal.from_dict(c.to_dict())
    np.testing.assert_array_equal(back.values, c.values)
    assert back.norm == c.norm and c.energy == 2.0
    with pytest.raises(ValueError):
        ctl.ControlSignal([[np.nan, 0.0]])


def test_refine_control_keeps_endpoint():
    u = ctl.ControlSignal(np.random.default_rng(0).normal(size=(4, 2)))
    r = ctl.refine_control(u)
    assert r.m == 8
    np.testing.assert_allclose(ctl.endpoint(E, r.values), ctl.endpoint(E, u.values), atol=1e-12)


def test_circle_control_encloses_expected_area():
    c = ctl.heisenberg_circle_control(512)
    end = ctl.endpoint(H, c.values)
    np.testing.assert_allclose(end, [0, 0, 1 / (4 * np.pi)], atol=1e-5)


def test_geodesic_horizontal_line():
    sol = ctl.geodesic_solve(H, "euclidean", [1.0, 0.0, 0.0], m=8, restarts=2, seed=0)
    assert sol.converged and sol.value == pytest.approx(1.0, abs=1e-6)


def test_geodesic_l1_diagonal():
    sol = ctl.geodesic_solve(H, "l1", [1.0, 1.0, 0.0], m=8, restarts=3, seed=0)
    assert sol.converged and sol.value == pytest.approx(2.0, abs=1e-3)
    assert sol.endpoint_error < 1e-8


def test_d0_squared_probe():
    from carnot_spheres import norms
    rep = ctl.d0_squared_lipschitz_probe(H, norms.heisenberg_cc_gauge(), n_pairs=1000, seed=0)
    assert rep["bounded"] and rep["d0_center_growing"]
    with pytest.raises(ValueError):
        ctl.d0_squared_lipschitz_probe(E, norms.heisenberg_cc_gauge())
