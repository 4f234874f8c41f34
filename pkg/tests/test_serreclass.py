import copy
import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from _util import GOLDEN_NAMES, all_bundled, bundled, random_equivalences
from reinhardt import classify_serre, find_hyperbolic_matrix, verify_certificate
from reinhardt.convexlog import Cone2, HyperbolicModel, ParabolicModel, PhiZero, PsiCanonical, Polyhedral
from reinhardt.errors import CertificateMismatch, NotHyperbolicDomain
from reinhardt.intmat import MatKind, Mat2Z, classify, eigensystem
from reinhardt.serreclass import CaseLabel, Verdict, phi_residuals
from reinhardt.surd import QuadraticSurd

EXPECTED = {
    "coeure_loeb": CaseLabel.T0_HYPERBOLIC,
    "coeure_loeb_minus": CaseLabel.T0_HYPERBOLIC,
    "coeure_loeb_wedge": CaseLabel.T0_HYPERBOLIC,
    "hyperbolic_3121": CaseLabel.T0_HYPERBOLIC,
    "model4": CaseLabel.T1_MODEL4,
    "model5": CaseLabel.T1_MODEL5,
    "model6": CaseLabel.T1_MODEL6,
    "parabolic_k1": CaseLabel.T0_PARABOLIC,
    "parabolic_k2": CaseLabel.T0_PARABOLIC,
    "parabolic_k3": CaseLabel.T0_PARABOLIC,
    "bounded_origin": CaseLabel.T2,
    "polyhedral_triangle": CaseLabel.T0_COMPACT,
    "polyhedral_t1": CaseLabel.T1_COMPACT,
}


@pytest.fixture(scope="module")
def verdicts():
    return {name: classify_serre(model) for name, model in all_bundled().items()}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_bundled_labels(name, verdicts):
    verdict = verdicts[name]
    assert verdict.case_label is EXPECTED[name]
    assert verdict.member == (EXPECTED[name] is not CaseLabel.T0_HYPERBOLIC)


def test_all_labels_reachable(verdicts):
    assert {v.case_label for v in verdicts.values()} == set(CaseLabel)


def test_member_iff_not_hyperbolic():
    with pytest.raises(AssertionError):
        Verdict(True, CaseLabel.T0_HYPERBOLIC, {})
    with pytest.raises(AssertionError):
        Verdict(False, CaseLabel.T2, {})


def test_spec_examples():
    cl = classify_serre(HyperbolicModel(matrix=Mat2Z(2, 1, 1, 1), phi=PhiZero()))
    assert not cl.member and cl.certificate["A"] == [[2, 1], [1, 1]]
    para = classify_serre(ParabolicModel(matrix=Mat2Z(1, 0, 2, 1), psi=PsiCanonical(beta2=Fraction(-1))))
    assert para.member and para.case_label is CaseLabel.T0_PARABOLIC
    m4 = classify_serre(bundled("model4"))
    assert m4.certificate["function"] == "U4" and m4.certificate["stehle"]["passed"]


def test_not_hyperbolic_rejected():
    with pytest.raises(NotHyperbolicDomain):
        classify_serre(Polyhedral(halfplanes=(((0, -1), 0),)))


def brute_force_hyperbolic(cone: Cone2, bound: int):
    """Oracle: every matrix with entries up to ``bound``, smallest trace, ties to the greatest entries."""
    rays = [d.vec for d in cone.dirs]
    best = None
    rng = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        A = Mat2Z(a, b, c, d)
        if A.det != 1 or A.trace < 3:
            continue
        es = eigensystem(A)
        dirs = {es.directions[0].line(), es.directions[1].line()}
        if {Cone2.ray(r).dirs[0].line() for r in rays} != dirs:
            continue
        # each ray must be an eigendirection; order by (trace, entries reversed)
        key = (A.trace, tuple(-x for x in (a, b, c, d)))
        if best is None or key < best[0]:
            best = (key, A)
    return None if best is None else best[1]


@pytest.mark.parametrize("rows", [[[2, 1], [1, 1]], [[3, 1], [2, 1]], [[1, 1], [1, 2]], [[5, 2], [2, 1]]])
def test_find_matrix_matches_brute_force(rows):
    A = Mat2Z.from_rows(rows)
    v, w = eigensystem(A).vectors
    cone = Cone2.wedge(v, w)
    found = find_hyperbolic_matrix(cone, entry_bound=5)
    assert found == brute_force_hyperbolic(cone, 5)
    assert classify(found).kind is MatKind.HYPERBOLIC
    assert cone.transform(found) == cone


def test_find_matrix_examples():
    v, w = eigensystem(Mat2Z(2, 1, 1, 1)).vectors
    assert find_hyperbolic_matrix(Cone2.wedge(v, w)) == Mat2Z(2, 1, 1, 1)
    assert find_hyperbolic_matrix(Cone2.wedge((1, 0), (0, 1)), entry_bound=50) is None
    assert find_hyperbolic_matrix(Cone2.ray((1, 0))) is None


def test_phi_residuals_exact():
    lam = classify(Mat2Z(2, 1, 1, 1)).lam
    res = phi_residuals(PhiZero(), lam)
    assert res["exact"] and res["max_residual"] == 0.0 and res["passed"]


@pytest.mark.parametrize("name", ["coeure_loeb", "hyperbolic_3121", "model6", "polyhedral_triangle"])
def test_verify_certificate(name, verdicts):
    report = verify_certificate(verdicts[name], bundled(name))
    assert report.passed
    if name == "coeure_loeb":
        assert report.residuals["phi"]["max_residual"] == 0.0
    if name == "model6":
        assert report.residuals["utilde_invariance"] <= 1e-10


def test_tampered_lambda(verdicts):
    verdict = copy.deepcopy(verdicts["coeure_loeb"])
    verdict.certificate["lambda"] = "1"
    with pytest.raises(CertificateMismatch):
        verify_certificate(verdict, bundled("coeure_loeb"))


def test_tampered_label(verdicts):
    verdict = copy.deepcopy(verdicts["model4"])
    verdict.case_label = CaseLabel.T1_MODEL5
    with pytest.raises(CertificateMismatch):
        verify_certificate(verdict, bundled("model4"))


def test_tampered_matrix(verdicts):
    verdict = copy.deepcopy(verdicts["coeure_loeb"])
    verdict.certificate["A"] = [[3, 1], [2, 1]]
    with pytest.raises(CertificateMismatch):
        verify_certificate(verdict, bundled("coeure_loeb"))


@pytest.mark.parametrize("name", ["coeure_loeb", "model5", "parabolic_k2"])
def test_deterministic_json(name):
    model = bundled(name)
    first = json.dumps(classify_serre(model).to_json(), sort_keys=True)
    second = json.dumps(classify_serre(model).to_json(), sort_keys=True)
    assert first == second


@pytest.mark.parametrize("name", GOLDEN_NAMES)
def test_equivalence_invariance_sample(name, verdicts):
    model = bundled(name)
    base = verdicts[name]
    for _, _, image in random_equivalences(model, np.random.default_rng(99), count=4):
        verdict = classify_serre(image)
        assert (verdict.member, verdict.case_label) == (base.member, base.case_label)
