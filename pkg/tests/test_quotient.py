import numpy as np
import pytest

from conftest import cgauss, random_points
from muquotient.errors import PoleAtW, SizeTooSmall
from muquotient.mu import in_omega, mu_eval
from muquotient.numerics import ComplexPoly
from muquotient.quotient import (
    QuotientPoint,
    char1_slack_batch,
    char2_reduce,
    costara_reduce,
    genericity,
    membership_char1,
    membership_char1_batch,
    membership_char2,
    membership_reference,
    membership_scan,
    membership_sympd_point,
    p_polys,
    pi_n,
    pi_n_batch,
    psi_at,
    psi_reduced,
    realize,
    realize_batch,
    sympd_slice,
)
from muquotient.verdict import Verdict


def point(x, y):
    return QuotientPoint.of(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))


def in_sympd(s, margin=1e-9):
    return membership_sympd_point(s, margin).inside


# -- projection ------------------------------------------------------------------


def test_pi_of_zero():
    q = pi_n(np.zeros((3, 3)))
    assert np.all(q.x == 0) and np.all(q.y == 0)


def test_pi_2x2(rng):
    a, b, c, d = cgauss(rng, 4)
    q = pi_n([[a, b], [c, d]])
    assert np.allclose(q.x, [a, a * d - b * c]) and np.allclose(q.y, [d])


def test_pi_diag3():
    a, b, c = 2.0, 3.0, 5.0
    q = pi_n(np.diag([a, b, c]))
    assert np.allclose(q.x, [a, a * (b + c), a * b * c])
    assert np.allclose(q.y, [b + c, b * c])


def test_point_validation():
    with pytest.raises(SizeTooSmall):
        QuotientPoint(1, [0.0], [])
    with pytest.raises(ValueError):
        QuotientPoint(3, [0, 0, 0], [0])


# -- realization -----------------------------------------------------------------


def test_realize_n2(rng):
    x1, x2, y1 = cgauss(rng, 3)
    B = realize(point([x1, x2], [y1]))
    assert np.allclose(B, [[x1, x1 * y1 - x2], [1, y1]])


def test_realize_origin():
    assert np.array_equal(realize(QuotientPoint.zero(2)), [[0, 0], [1, 0]])


def test_realize_n3_first_row(rng):
    x1, x2, x3, y1, y2 = cgauss(rng, 5)
    p = p_polys(point([x1, x2, x3], [y1, y2]))
    p1 = x1 * y1 - x2
    assert np.allclose(p, [p1, x3 - x1 * y2 + p1 * y1])


def test_p_polys_examples(rng):
    x1, x2, y1 = cgauss(rng, 3)
    assert np.allclose(p_polys(point([x1, x2], [y1])), [x1 * y1 - x2])
    assert np.all(p_polys(QuotientPoint.zero(5)) == 0)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_realize_round_trip(rng, n):
    X, Y = cgauss(rng, 100, n), cgauss(rng, 100, n - 1)
    X2, Y2 = pi_n_batch(realize_batch(X, Y))
    assert np.abs(X2 - X).max() <= 1e-10 and np.abs(Y2 - Y).max() <= 1e-10


def test_realization_is_generic(rng):
    for n in (2, 3, 4, 5):
        q = point(cgauss(rng, n), cgauss(rng, n - 1))
        rep = genericity(realize(q))
        assert rep.generic and abs(rep.theta_value - 1) < 1e-12


# -- reduced rational function ------------------------------------------------------


def test_psi_reduced_zero():
    red = psi_reduced(QuotientPoint.zero(3))
    assert red.num.is_zero and np.allclose(red.den.coeffs, [1])


def test_psi_reduced_full_cancellation():
    red = psi_reduced(point([1, 1], [1]))
    assert np.allclose(red.num.coeffs, [1]) and np.allclose(red.den.coeffs, [1])
    assert len(red.cancelled) == 1 and abs(red.cancelled[0] - 1) < 1e-12


def test_psi_reduced_without_common_roots(rng):
    for _ in range(10):
        q = point(cgauss(rng, 4), cgauss(rng, 3))
        red = psi_reduced(q)
        assert red.cancelled == () and abs(red.resultant) > 1e-6
        z = complex(*rng.standard_normal(2)) * 0.3
        P = ComplexPoly(q.x * (-1.0) ** np.arange(4))
        Q = ComplexPoly(np.concatenate([[1], q.y * (-1.0) ** np.arange(1, 4)]))
        assert red(z) == pytest.approx(P(z) / Q(z), rel=1e-9)


def test_psi_at_examples(rng):
    assert psi_at(QuotientPoint.zero(3), 0.3 + 0.1j) == 0
    x1, x2, y1 = cgauss(rng, 3)
    assert psi_at(point([x1, x2], [y1]), 0) == pytest.approx(x1)


def test_psi_bounded_on_disc_for_inside_points(rng):
    X, Y = random_points(rng, 3, 40)
    z = 0.999 * np.exp(2j * np.pi * rng.random(50)) * np.sqrt(rng.random(50))
    for x, y in zip(X, Y):
        q = QuotientPoint.of(x, y)
        if membership_char1(q).inside:
            assert max(abs(psi_at(q, zk)) for zk in z) < 1


# -- char1 -----------------------------------------------------------------------


def test_char1_origin_inside():
    assert membership_char1(QuotientPoint.zero(2)).verdict is Verdict.INSIDE


def test_char1_denominator_root_outside():
    v = membership_char1(point([0, 0], [2]))
    assert v.verdict is Verdict.OUTSIDE
    assert v.certificate["reason"].startswith("denominator root")
    assert abs(v.certificate["z"] - 0.5) < 1e-12


def test_char1_cancelled_root_certificate():
    # P = Q = 1 - 2z share the root 1/2 inside the disc
    v = membership_char1(point([1, 2], [2]))
    assert v.outside and v.certificate["reason"].startswith("cancelled common root")
    assert len(v.certificate["cancelled"]) == 1


def test_char1_boundary_certificate_lies_on_zero_set():
    # |P/Q| = 2 on the circle while Q has no roots in the disc
    v = membership_char1(point([2, 0, 0], [0, 0]))
    assert v.outside and v.certificate["reason"].startswith("boundary")
    assert v.certificate["pencil_residual"] < 1e-12
    assert abs(v.certificate["z"]) == pytest.approx(1) and abs(v.certificate["w"]) <= 1


def test_char1_forward_from_matrices(rng):
    for _ in range(20):
        R = 0.3 * cgauss(rng, 2, 2)
        if mu_eval(R).value < 1 - 1e-3:
            assert membership_char1(pi_n(R)).inside


def test_moebius_base_matches_circle_engine(rng):
    X, Y = random_points(rng, 2, 300)
    exact = char1_slack_batch(X, Y, exact_base=True)
    engine = char1_slack_batch(X, Y, exact_base=False)
    assert np.allclose(exact["root_slack"], engine["root_slack"], atol=1e-10)
    live = engine["root_slack"] > -0.5
    assert np.allclose(exact["boundary_slack"][live], engine["boundary_slack"][live], atol=1e-9)


def test_char1_batch_matches_single(rng):
    X, Y = random_points(rng, 4, 10)
    batch = membership_char1_batch(X, Y)
    for v, x, y in zip(batch, X, Y):
        assert v.verdict is membership_char1(QuotientPoint.of(x, y)).verdict


def test_openness_under_small_perturbations(rng):
    X, Y = random_points(rng, 3, 30, spread=(0.3, 0.8))
    for x, y in zip(X, Y):
        q = QuotientPoint.of(x, y)
        v = membership_char1(q)
        if v.inside and v.margin >= 1e-2:
            dx, dy = 1e-4 * cgauss(rng, 100, 3) / np.sqrt(2), 1e-4 * cgauss(rng, 100, 2) / np.sqrt(2)
            assert all(v2.inside for v2 in membership_char1_batch(x + dx, y + dy))


def test_projection_of_scaled_inside_matrix_stays_inside(rng):
    for _ in range(10):
        A = cgauss(rng, 3, 3)
        A = 0.9 * A / mu_eval(A).value
        assert in_omega(A).inside
        for t in (0.1, 0.5, 1.0):
            assert membership_char1(pi_n(t * A)).inside


# -- symmetrized polydisc -----------------------------------------------------------


def test_sympd_examples():
    assert membership_sympd_point([0, 0, 0]).inside
    assert membership_sympd_point([0.5]).inside and membership_sympd_point([1.5]).outside
    assert membership_sympd_point([2, 0.99]).outside


def test_costara_examples(rng):
    assert np.all(costara_reduce([0, 0, 0], 0.3 + 0.4j) == 0)
    s = cgauss(rng, 4)
    assert np.allclose(costara_reduce(s, 0), (4 - np.arange(1, 4)) * s[:3] / 4)
    s1, s2 = cgauss(rng, 2)
    z = 0.3 - 0.2j
    assert costara_reduce([s1, s2], z)[0] == pytest.approx((s1 - 2 * z * s2) / (2 - z * s1))


def test_costara_reduction_preserves_membership(rng):
    for _ in range(20):
        roots = 0.95 * np.sqrt(rng.random(3)) * np.exp(2j * np.pi * rng.random(3))
        s = np.array([np.sum(roots), roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2], np.prod(roots)])
        assert in_sympd(s)
        for z in np.exp(2j * np.pi * np.arange(16) / 16):
            assert in_sympd(costara_reduce(s, z))


def test_sympd_slice_examples(rng):
    q = point(cgauss(rng, 3), cgauss(rng, 2))
    assert np.allclose(sympd_slice(q, 0), q.y)
    assert np.all(sympd_slice(QuotientPoint.zero(4), 0.5j) == 0)
    with pytest.raises(PoleAtW):
        sympd_slice(point([2, 0], [0]), 0.5)


def test_slice_of_inside_point_is_inside(rng):
    X, Y = random_points(rng, 4, 40, spread=(0.3, 0.95))
    w = np.exp(2j * np.pi * np.arange(64) / 64)
    for x, y in zip(X, Y):
        q = QuotientPoint.of(x, y)
        if membership_char1(q).inside:
            assert all(in_sympd(sympd_slice(q, wk)) for wk in w)


# -- char2 -----------------------------------------------------------------------


def test_char2_reduce_examples(rng):
    q = point(cgauss(rng, 4), cgauss(rng, 3))
    r = char2_reduce(q, 0)
    assert np.allclose(r.x, (4 - np.arange(1, 4)) * q.x[:3] / 3)
    assert np.allclose(r.y, (3 - np.arange(1, 3)) * q.y[:2] / 3)
    assert np.all(char2_reduce(QuotientPoint.zero(3), 0.7).x == 0)
    q3 = point(cgauss(rng, 3), cgauss(rng, 2))
    xi = 0.4 + 0.3j
    assert char2_reduce(q3, xi).y[0] == pytest.approx((q3.y[0] - 2 * xi * q3.y[1]) / (2 - xi * q3.y[0]))


def test_char2_examples(rng):
    assert membership_char2(QuotientPoint.zero(3), xi_samples=8).inside
    for _ in range(10):
        R = cgauss(rng, 3, 3)
        R = 0.2 * R if mu_eval(0.2 * R).value < 1 else 0.2 * R / mu_eval(R).value
        v = membership_char2(pi_n(R))
        assert v.inside and v.certificate["sampled"]


def test_char2_outside_has_chain(rng):
    for _ in range(10):
        R = cgauss(rng, 3, 3)
        q = pi_n(0.5 * R / mu_eval(R).value)
        q3 = point(3 * q.x, 3 * q.y)
        if membership_char1(q3).outside:
            v = membership_char2(q3)
            assert v.outside and len(v.certificate["xi_chain"]) >= 1


def test_char2_needs_n3():
    with pytest.raises(SizeTooSmall):
        membership_char2(QuotientPoint.zero(2))


# -- reference and scan ------------------------------------------------------------


def test_reference_origin_inside():
    v = membership_reference(QuotientPoint.zero(3))
    assert v.inside and v.certificate["mu"] == 0


def test_reference_and_scan_agree_with_char1(rng):
    for n in (2, 3):
        X, Y = random_points(rng, n, 30)
        for x, y in zip(X, Y):
            q = QuotientPoint.of(x, y)
            v = membership_char1(q)
            if v.margin <= 1e-3 or v.verdict is Verdict.BOUNDARY:
                continue
            assert membership_reference(q).verdict is v.verdict
            assert membership_scan(q).verdict is v.verdict


# -- genericity --------------------------------------------------------------------


def test_genericity_examples():
    rep = genericity(np.array([[0, 0], [1, 0]]))
    assert rep.generic and rep.theta_value == 1
    rep = genericity(np.zeros((3, 3)))
    assert not rep.generic and rep.theta_value == 0


def test_genericity_random(rng):
    A = cgauss(rng, 1000, 4, 4)
    assert sum(genericity(a, rng).generic for a in A) >= 999
