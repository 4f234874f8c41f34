import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from _util import bundled
from reinhardt.autgroup import (
    AffineMap2, AlgAut, AutKind, ParabolicCase, classify_aut_structure, induced_affine, model_generators,
    noncompactness_witness, parabolic_form_check, parabolic_reflection, preservation_report, preserves,
)
from reinhardt.convexlog import (
    HyperbolicModel, ParabolicModel, PhiAOverT, PhiZero, PsiCanonical, apply_monomial, recession_cone,
)
from reinhardt.errors import FormViolation, NotHyperbolicDomain
from reinhardt.intmat import IDENTITY, Mat2Z, classify
from reinhardt.surd import vscale

CL = Mat2Z(2, 1, 1, 1)
T0_MODELS = ["coeure_loeb", "coeure_loeb_minus", "hyperbolic_3121", "coeure_loeb_wedge", "parabolic_k1",
             "parabolic_k2", "parabolic_k3", "polyhedral_triangle"]


def canonical_parabolic(k, beta2=-1):
    return ParabolicModel(matrix=Mat2Z(1, 0, k, 1), psi=PsiCanonical(beta2=Fraction(beta2)))


def test_induced_affine_examples():
    shear = induced_affine(AlgAut(Mat2Z(1, 1, 0, 1)))
    assert shear.matrix == Mat2Z(1, 1, 0, 1) and shear.shift == (0, 0)
    scale = induced_affine(AlgAut(IDENTITY, (2, 1)))
    assert scale.matrix == IDENTITY and scale.shift[0] == pytest.approx(math.log(2)) and scale.shift[1] == 0
    for sign, alpha in [(1, 3), (-1, -2)]:
        aut = AlgAut(Mat2Z(sign, 0, alpha, 1), (0.5, 2j))
        assert induced_affine(aut).matrix == Mat2Z(sign, 0, alpha, 1)


def test_alg_aut_acts_on_moduli():
    aut = AlgAut(Mat2Z(2, 1, 1, 1), (2, 3j))
    z = (0.3 + 0.4j, -1.2 + 0.1j)
    x = (math.log(abs(z[0])), math.log(abs(z[1])))
    image = aut(z)
    expected = induced_affine(aut)(x)
    assert math.log(abs(image[0])) == pytest.approx(expected[0], abs=1e-12)
    assert math.log(abs(image[1])) == pytest.approx(expected[1], abs=1e-12)


def test_preserves_examples():
    hyp = HyperbolicModel(matrix=CL, phi=PhiAOverT(a=Fraction(2)))
    assert preservation_report(hyp, AffineMap2(CL)).verified == "exact"
    assert preserves(hyp, AffineMap2(CL))
    para = canonical_parabolic(2, Fraction(3, 2))
    assert preserves(para, AffineMap2(para.matrix, vscale(para.beta2, para.v)))
    flat = HyperbolicModel(matrix=CL, phi=PhiZero())
    assert not preserves(flat, AffineMap2(IDENTITY, flat.w))


def test_classify_structure_examples():
    hyp = classify_aut_structure(HyperbolicModel(matrix=CL, phi=PhiZero()))
    assert hyp.kind is AutKind.HYPERBOLIC and hyp.lam == classify(CL).lam
    para = classify_aut_structure(canonical_parabolic(3))
    assert para.kind is AutKind.PARABOLIC and para.w == (0, 1) and para.v == (Fraction(1, 3), 0)
    assert classify_aut_structure(bundled("polyhedral_triangle")).kind is AutKind.COMPACT


def test_structure_needs_hyperbolic_domain():
    with pytest.raises(NotHyperbolicDomain):
        from reinhardt.convexlog import Polyhedral
        classify_aut_structure(Polyhedral(halfplanes=(((0, -1), 0),)))


def test_bounded_orbit_oracle_for_triangle():
    model = bundled("polyhedral_triangle")
    x = model.interior_point()
    rng = range(-3, 4)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        A = Mat2Z(a, b, c, d)
        if not A.unimodular or A == IDENTITY:
            continue
        # a bounded convex set has only finite-order affine symmetries
        if preserves(model, AffineMap2(A, (0, 0))):
            assert classify(A).finite_order


@pytest.mark.parametrize("name", [n for n in T0_MODELS if n != "polyhedral_triangle"])
def test_witness_diverges(name):
    model = bundled(name)
    wit = noncompactness_witness(model)
    assert wit is not None
    norms = wit.norms_sq
    assert all(b > a for a, b in zip(norms[wit.k0:], norms[wit.k0 + 1:]))
    assert norms[-1] > 1e6


def test_witness_growth_rates():
    hyp = noncompactness_witness(bundled("coeure_loeb"))
    lam = float(classify(CL).lam)
    assert hyp.norms_sq[41] / hyp.norms_sq[40] == pytest.approx(lam ** 2, rel=1e-9)
    para = noncompactness_witness(canonical_parabolic(1))
    k = 60
    # quadratic growth: |x_k| ~ k^2 |beta2| |w| / 2
    assert math.sqrt(para.norms_sq[k]) / (k * k / 2) == pytest.approx(1.0, rel=0.1)
    assert noncompactness_witness(bundled("polyhedral_triangle")) is None


@pytest.mark.parametrize("k", [1, 2, 3])
def test_group_closure_parabolic(k):
    model = canonical_parabolic(k)
    gens = model_generators(model)
    assert len(gens) == 2
    maps = [AffineMap2(IDENTITY)] + gens + [g.inverse() for g in gens]
    for f, g in itertools.product(maps, maps):
        composed = f.compose(g)
        assert preserves(model, composed)
        assert recession_cone(model).transform(composed.matrix) == recession_cone(model)
        form = parabolic_form_check(model, composed, n_samples=100)
        assert form.residual == 0.0


def test_group_closure_hyperbolic():
    model = bundled("hyperbolic_3121")
    (gen,) = model_generators(model)
    for k in range(-3, 4):
        assert preserves(model, gen.power(k))


def test_parabolic_trichotomy():
    model = canonical_parabolic(2, -2)
    unip = AffineMap2(model.matrix, vscale(model.beta2, model.v))
    assert parabolic_form_check(model, unip).case is ParabolicCase.UNIPOTENT
    assert parabolic_form_check(model, AffineMap2(IDENTITY)).case is ParabolicCase.IDENTITY
    refl = parabolic_reflection(model)
    assert parabolic_form_check(model, refl).case is ParabolicCase.REFLECTION
    with pytest.raises(FormViolation):
        parabolic_form_check(model, AffineMap2(Mat2Z(0, 1, 1, 0)))


@pytest.mark.parametrize("k", [1, 2])
def test_reflection_found_by_brute_force(k):
    model = canonical_parabolic(k)
    shift = vscale(model.beta2, model.v)
    found = []
    rng = range(-6, 7)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        R = Mat2Z(a, b, c, d)
        if R.det != -1 or R @ R != IDENTITY:
            continue
        if preserves(model, AffineMap2(R, shift), n_samples=2000):
            found.append(R)
    assert found == [parabolic_reflection(model).matrix]


@pytest.mark.parametrize("name", T0_MODELS)
def test_structure_tag_invariant_under_conjugation(name):
    model = bundled(name)
    tag = classify_aut_structure(model).kind
    rng = np.random.default_rng(17)
    mats = [Mat2Z(1, 1, 0, 1), Mat2Z(0, 1, 1, 0), Mat2Z(2, 1, 1, 1), -IDENTITY, Mat2Z(1, 0, -2, 1)]
    for A in mats:
        shift = (Fraction(int(rng.integers(-3, 4)), 2), Fraction(int(rng.integers(-3, 4))))
        image = apply_monomial(model, A, shift)
        assert classify_aut_structure(image).kind is tag
