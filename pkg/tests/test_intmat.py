import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from reinhardt.errors import ComplexSpectrum, NonUnimodular
from reinhardt.intmat import (
    IDENTITY, MINUS_IDENTITY, MatKind, Mat2Z, classify, dloussky, eigensystem, fixed_point, orbit,
    orbit_hyperbolic_closed, orbit_parabolic_closed, parabolic_normal_form,
)
from reinhardt.surd import QuadraticSurd, solve_basis, vadd, vscale

GOLDEN = QuadraticSurd(Fraction(3, 2), Fraction(1, 2), 5)


def unimodular_matrices(bound):
    rng = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if abs(a * d - b * c) == 1:
            yield Mat2Z(a, b, c, d)


def brute_force_kind(A: Mat2Z) -> MatKind:
    """Independent tag from matrix powers and the discriminant sign."""
    powers = [IDENTITY]
    for _ in range(12):
        powers.append(powers[-1] @ A)
    order = next((m for m in range(1, 13) if powers[m] == IDENTITY), None)
    det, tr = A.det, A.trace
    if order == 1:
        return MatKind.IDENTITY
    if A == MINUS_IDENTITY:
        return MatKind.MINUS_IDENTITY
    if order is not None:
        return MatKind.REFLECTION if det == -1 else MatKind.ELLIPTIC
    disc = tr * tr - 4 * det
    if disc == 0:
        return MatKind.PARABOLIC_UNIPOTENT if tr > 0 else MatKind.PARABOLIC_MINUS
    # both eigenvalues positive iff det > 0 and tr > 0
    return MatKind.HYPERBOLIC if det == 1 and tr > 0 else MatKind.HYPERBOLIC_NEGATIVE


def test_det_examples():
    assert Mat2Z(2, 1, 1, 1).det == 1
    assert IDENTITY.det == 1
    assert Mat2Z(0, 1, 1, 0).det == -1


def test_classify_examples():
    assert classify(IDENTITY).kind is MatKind.IDENTITY
    hyp = classify(Mat2Z(2, 1, 1, 1))
    assert hyp.kind is MatKind.HYPERBOLIC and hyp.lam == GOLDEN
    assert classify(Mat2Z(1, 0, 3, 1)).kind is MatKind.PARABOLIC_UNIPOTENT
    rot = Mat2Z(0, -1, 1, 0)
    ell = classify(rot)
    assert ell.kind is MatKind.ELLIPTIC and ell.order == 4
    assert rot ** 2 == MINUS_IDENTITY


def test_classify_rejects_non_unimodular():
    with pytest.raises(NonUnimodular):
        classify(Mat2Z(2, 0, 0, 1))


def test_exhaustive_against_power_oracle():
    for A in unimodular_matrices(4):
        assert classify(A).kind is brute_force_kind(A), A


@pytest.mark.parametrize("tr,power,target", [(0, 2, MINUS_IDENTITY), (1, 3, MINUS_IDENTITY), (-1, 3, IDENTITY)])
def test_elliptic_powers(tr, power, target):
    for A in unimodular_matrices(5):
        if A.det == 1 and A.trace == tr:
            assert A ** power == target
            cls = classify(A)
            assert cls.order is not None and A ** cls.order == IDENTITY


def test_trace_minus_one_never_reaches_minus_identity():
    A = Mat2Z(0, -1, 1, -1)
    assert all(A ** j != MINUS_IDENTITY for j in range(1, 7))
    assert classify(A).minus_identity_power is None


def test_eigensystem_hyperbolic():
    A = Mat2Z(2, 1, 1, 1)
    es = eigensystem(A)
    lam, mu = es.eigenvalues
    assert lam == GOLDEN and lam * mu == 1 and lam + mu == 3
    v = es.vectors[0]
    assert v[1] == QuadraticSurd(Fraction(-1, 2), Fraction(1, 2), 5)
    for val, vec in zip(es.eigenvalues, es.vectors):
        assert A.apply(vec) == vscale(val, vec)


def test_remark_family_at_k2():
    k = 2
    assert Mat2Z(k, 1, k - 1, 1) == Mat2Z(2, 1, 1, 1)


def test_eigensystem_jordan():
    es = eigensystem(Mat2Z(1, 1, 0, 1))
    v, w = es.vectors
    assert es.jordan and w == (1, 0) and v == (0, 1)
    A = Mat2Z(1, 1, 0, 1)
    assert A.apply(w) == w and A.apply(v) == vadd(v, w)


def test_eigensystem_complex_spectrum():
    with pytest.raises(ComplexSpectrum):
        eigensystem(Mat2Z(0, -1, 1, 0))


def test_fixed_point_examples():
    A = Mat2Z(2, 1, 1, 1)
    x0 = fixed_point(A, (1, 0))
    assert x0 == (0, -1)
    assert vadd(A.apply(x0), (1, 0)) == x0
    assert fixed_point(IDENTITY, (1, 0)) is None
    assert fixed_point(IDENTITY, (0, 0)) == (0, 0)


def test_dloussky_examples():
    assert dloussky([]) == IDENTITY
    m = dloussky([1, 1])
    assert m == Mat2Z(1, 1, 1, 2) and classify(m).kind is MatKind.HYPERBOLIC
    flagged = dloussky([2, 1])
    assert flagged == Mat2Z(1, 1, 1, 3) and flagged.det == 2 and not flagged.unimodular


def test_orbit_hyperbolic_example():
    A = Mat2Z(2, 1, 1, 1)
    es = eigensystem(A)
    v, w = es.vectors
    x = vadd(v, w)
    assert orbit(A, (0, 0), x, 0) == x
    assert orbit(A, (0, 0), x, 3) == orbit_hyperbolic_closed(GOLDEN, v, w, 1, 1, 3)


def test_orbit_parabolic_example():
    A = Mat2Z(1, 0, 2, 1)
    es = eigensystem(A)
    v, w = es.vectors
    beta2, a1, a2 = Fraction(3, 2), Fraction(1, 3), Fraction(-2)
    x = vadd(vscale(a1, w), vscale(a2, v))
    b = vscale(beta2, v)
    expected = vadd(vadd(x, vscale(2, vadd(vscale(a2, w), vscale(beta2, v)))), vscale(beta2, w))
    assert orbit(A, b, x, 2) == expected
    assert orbit_parabolic_closed(w, v, beta2, a1, a2, 2) == expected


@given(st.integers(1, 6), st.fractions(-5, 5, max_denominator=7), st.fractions(-5, 5, max_denominator=7),
       st.fractions(-5, 5, max_denominator=7), st.integers(0, 60))
def test_parabolic_closed_form_property(k, beta2, a1, a2, n):
    A = Mat2Z(1, 0, k, 1)
    v, w = eigensystem(A).vectors
    x = vadd(vscale(a1, w), vscale(a2, v))
    assert orbit(A, vscale(beta2, v), x, n) == orbit_parabolic_closed(w, v, beta2, a1, a2, n)


@given(st.integers(-20, 20), st.integers(0, 40))
def test_orbit_iteration_consistency(seed, k):
    r = random.Random(seed)
    A = Mat2Z(2, 1, 1, 1) if seed % 2 else Mat2Z(3, 2, 1, 1)
    b = (Fraction(r.randint(-5, 5), r.randint(1, 5)), Fraction(r.randint(-5, 5), r.randint(1, 5)))
    x = (Fraction(r.randint(-5, 5)), Fraction(r.randint(-5, 5), 3))
    assert orbit(A, b, x, k + 1) == vadd(A.apply(orbit(A, b, x, k)), b)


def test_parabolic_normal_form():
    A = Mat2Z(1, 0, 3, 1)
    b = (Fraction(2), Fraction(5))
    x0, beta1, beta2 = parabolic_normal_form(A, b)
    v, w = eigensystem(A).vectors
    assert vadd(A.apply(x0), b) == vadd(x0, vscale(beta2, v))
    assert solve_basis(w, v, b) == (beta1, beta2)
