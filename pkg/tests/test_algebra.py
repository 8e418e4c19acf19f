"""Group law, dilations and Jacobians against independent constructions."""
from fractions import Fraction
from itertools import product as iproduct
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from carnot_spheres import algebra as alg


def filiform4():
    # step 4, so the degree-4 Dynkin term is exercised
    return alg.GradedAlgebra((1, 1, 2, 3, 4), ((0, 1, 2, 1.0), (0, 2, 3, 1.0), (0, 3, 4, 1.0)))


# --- Dynkin oracle --------------------------------------------------------
# log(exp X exp Y) in the free associative algebra with exact rationals,
# truncated at degree 4, then projected to Lie elements by the
# Dynkin-Specht-Wever map  w -> [w1,[w2,...,wn]] / n.

DEG = 4


def _mul(a, b):
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) <= DEG:
                out[wa + wb] = out.get(wa + wb, 0) + ca * cb
    return out


def _exp_series(letter):
    return {(letter,) * k: Fraction(1, factorial(k)) for k in range(DEG + 1)}


def dynkin_coefficients():
    z = _mul(_exp_series("X"), _exp_series("Y"))
    z.pop((), None)
    log, power = {}, {(): Fraction(1)}
    for k in range(1, DEG + 1):
        power = _mul(power, z)
        for w, c in power.items():
            log[w] = log.get(w, 0) + Fraction((-1) ** (k + 1), k) * c
    return {w: c for w, c in log.items() if c}


COEFFS = dynkin_coefficients()


def dynkin_product(spec, p, q):
    val = {"X": np.asarray(p, float), "Y": np.asarray(q, float)}
    out = np.zeros(spec.dim)
    for w, c in COEFFS.items():
        v = val[w[-1]]
        for letter in reversed(w[:-1]):
            v = alg.bracket(spec, val[letter], v)
        out = out + float(c) / len(w) * v
    return out


def test_dynkin_series_low_order():
    assert COEFFS[("X",)] == 1 and COEFFS[("Y",)] == 1
    assert COEFFS[("X", "Y")] == Fraction(1, 2)


@pytest.mark.parametrize("name", sorted(alg.BUILTINS) + ["filiform4"])
def test_product_matches_dynkin_oracle(name):
    spec = filiform4() if name == "filiform4" else alg.builtin(name)
    rng = np.random.default_rng(1)
    for _ in range(30):
        p, q = rng.normal(size=(2, spec.dim))
        np.testing.assert_allclose(alg.bch_product(spec, p, q), dynkin_product(spec, p, q),
                                   rtol=1e-12, atol=1e-12)


def test_heisenberg_law_closed_form():
    H = alg.heisenberg()
    p, q = np.array([1.0, 2.0, 3.0]), np.array([-0.5, 4.0, 1.0])
    expect = p + q + 0.5 * np.array([0, 0, p[0] * q[1] - p[1] * q[0]])
    np.testing.assert_allclose(alg.bch_product(H, p, q), expect)


@pytest.mark.parametrize("name", sorted(alg.BUILTINS))
def test_validated_builtins(name):
    assert alg.validate_algebra(alg.builtin(name)) == []


def test_grading_violation_reported():
    bad = alg.GradedAlgebra.from_dict({"weights": [1, 1, 1], "brackets": [[0, 1, 2, 1.0]]})
    report = alg.validate_algebra(bad)
    assert report[0]["identity"] == "grading"
    assert report[0]["indices"] == [0, 1, 2]


def test_jacobi_violation_reported():
    # graded, but [e2,[e0,e1]] = e4 is not balanced by the other two terms
    spec = alg.GradedAlgebra((1, 1, 1, 2, 3), ((0, 1, 3, 1.0), (2, 3, 4, 1.0)))
    report = alg.validate_algebra(spec)
    assert [r["identity"] for r in report] == ["jacobi"]
    assert report[0]["indices"] == [0, 1, 2]


def test_unknown_fields_rejected():
    with pytest.raises(alg.AlgebraError):
        alg.GradedAlgebra.from_dict({"weights": [1, 1], "color": "red"})
    with pytest.raises(alg.AlgebraError):
        alg.GradedAlgebra((1, 1), ((0, 0, 1, 1.0),))


def test_json_round_trip():
    E = alg.engel()
    back = alg.GradedAlgebra.from_json(E.to_json())
    assert back.weights == E.weights
    np.testing.assert_array_equal(back.structure, E.structure)


def test_rational_weights():
    spec = alg.abelian_plane(Fraction(1, 2), 1)
    assert spec.weights == (Fraction(1, 2), Fraction(1))
    np.testing.assert_allclose(alg.dilate(spec, 4.0, [1.0, 1.0]), [2.0, 4.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=12, max_size=12), st.floats(0.05, 20))
def test_dilation_is_automorphism(vals, lam):
    E = alg.engel()
    p, q, r = np.array(vals).reshape(3, 4)
    lhs = alg.dilate(E, lam, alg.bch_product(E, p, q))
    rhs = alg.bch_product(E, alg.dilate(E, lam, p), alg.dilate(E, lam, q))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(alg.bch_product(E, alg.bch_product(E, p, q), r),
                               alg.bch_product(E, p, alg.bch_product(E, q, r)), atol=1e-9)


def test_inverse_and_identity():
    spec = alg.builtin("engel_times_line")
    p = np.random.default_rng(3).normal(size=5)
    np.testing.assert_allclose(alg.bch_product(spec, p, alg.inverse(spec, p)), 0, atol=1e-14)
    np.testing.assert_allclose(alg.bch_product(spec, np.zeros(5), p), p)


def test_dilate_broadcasts_per_point():
    H = alg.heisenberg()
    pts = np.array([[1.0, 1.0, 1.0], [2.0, 0.0, 4.0]])
    out = alg.dilate(H, np.array([2.0, 0.5]), pts)
    np.testing.assert_allclose(out, [[2, 2, 4], [1, 0, 1]])
    with pytest.raises(alg.AlgebraError):
        alg.dilate(H, 0.0, pts)


@pytest.mark.parametrize("name", ["heisenberg", "engel", "engel_times_line"])
def test_translation_jacobians_vs_finite_differences(name):
    spec = alg.builtin(name)
    p = np.random.default_rng(5).normal(size=spec.dim)
    dl, dr = alg.translation_jacobians(spec, p)
    h = 1e-6
    fl = np.empty((spec.dim, spec.dim))
    fr = np.empty_like(fl)
    for k in range(spec.dim):
        e = np.zeros(spec.dim)
        e[k] = h
        fl[:, k] = (alg.bch_product(spec, p, e) - alg.bch_product(spec, p, -e)) / (2 * h)
        fr[:, k] = (alg.bch_product(spec, e, p) - alg.bch_product(spec, -e, p)) / (2 * h)
    np.testing.assert_allclose(dl, fl, atol=1e-8)
    np.testing.assert_allclose(dr, fr, atol=1e-8)
    np.testing.assert_allclose(alg.left_jacobian_inverse(spec, p) @ dl, np.eye(spec.dim), atol=1e-12)


def test_adjoint_matches_matrix_exponential():
    E = alg.engel()
    p = np.array([0.3, -1.2, 0.7, 2.0])
    np.testing.assert_allclose(alg.adjoint_exp(E, p), expm(alg.ad_matrix(E, p)), atol=1e-12)


def test_condition_14_heisenberg():
    H = alg.heisenberg()
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(200, 3))
    rep = alg.condition_14_check(H, pts)
    assert np.all(rep["holds"])
    assert not alg.condition_14_check(H, np.zeros(3))["holds"]
    # the center direction alone: dL, dR span V_1 only, delta_bar adds Z
    assert alg.condition_14_check(H, np.array([0.0, 0.0, 1.0]))["holds"]


def test_condition_14_normalized_is_scale_free():
    H = alg.heisenberg()
    p = np.array([0.3, -0.2, 0.9])
    a = alg.condition_14_check(H, p, normalize=True)["smallest_singular_value"]
    b = alg.condition_14_check(H, alg.dilate(H, 37.0, p), normalize=True)["smallest_singular_value"]
    assert a == pytest.approx(b, rel=1e-9)


def test_necessary_checks_engel():
    E = alg.engel()
    # V_1 + [X, V_1] misses the third layer
    assert not alg.first_layer_necessary_check(E, [1.0, 0.0])
    H = alg.heisenberg()
    assert alg.first_layer_necessary_check(H, [1.0, 0.0])
    assert not alg.first_layer_necessary_check(H, [0.0, 0.0])
    assert alg.top_layer_necessary_check(H, [1.0])
    assert not alg.top_layer_necessary_check(E, [1.0])


def test_condition_14_implies_first_layer_check():
    for name in ("heisenberg", "engel"):
        spec = alg.builtin(name)
        for x in iproduct([-1.0, 0.0, 2.0], repeat=2):
            if not any(x):
                continue
            p = spec.embed_first_layer(x)
            if alg.condition_14_check(spec, p)["holds"]:
                assert alg.first_layer_necessary_check(spec, x)


def test_step_too_high_rejected():
    spec = alg.GradedAlgebra((1, 1, 2, 3, 4, 5),
                             ((0, 1, 2, 1.0), (0, 2, 3, 1.0), (0, 3, 4, 1.0), (0, 4, 5, 1.0)))
    with pytest.raises(alg.AlgebraError):
        alg.bch_product(spec, np.ones(6), np.ones(6))
