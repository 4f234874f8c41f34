"""Decide membership in the class of domains for which every holomorphic
bundle with Stein base and this fiber is Stein.

For hyperbolic pseudoconvex Reinhardt domains in C^2 the answer depends on
``t`` (the number of coordinate axes the domain meets) and, when ``t = 0``,
on the structure of the monomial automorphism group.  Only the hyperbolic
type fails.  Every verdict carries a certificate that can be re-checked.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .autgroup import AutKind, classify_aut_structure
from .convexlog import (
    Cone2,
    HyperbolicModel,
    LogDomainModel,
    Model4,
    Model5,
    Model6,
    PhiTable,
    PhiZero,
    Polyhedral,
    axis_count,
    is_hyperbolic_domain,
    recognize_strip,
)
from .errors import CertificateMismatch, InconsistentAxisFlags, NotHyperbolicDomain, UnsupportedModel
from .intmat import Mat2Z, MatKind, classify
from .surd import QuadraticSurd, cross, format_scalar, simplify, vscale
from . import stehle


class CaseLabel(str, enum.Enum):
    T2 = "T2"
    T1_COMPACT = "T1Compact"
    T1_MODEL4 = "T1Model4"
    T1_MODEL5 = "T1Model5"
    T1_MODEL6 = "T1Model6"
    T0_COMPACT = "T0Compact"
    T0_PARABOLIC = "T0Parabolic"
    T0_HYPERBOLIC = "T0Hyperbolic"


PROVENANCE = {
    "hyperbolic_domain": "pseudoconvex Reinhardt domain with line-free recession cone of the logarithmic image",
    "t2": "a hyperbolic Reinhardt domain meeting both axes is Caratheodory complete, hence a member",
    "compact": "a Reinhardt domain whose automorphism group is compact is a member",
    "t1_models": "a hyperbolic domain meeting one axis has compact automorphism group or is algebraically "
    "equivalent to one of the three one-axis models",
    "stehle": "Stehle criterion: a psh exhaustion u with u o F - u bounded above for every automorphism F "
    "implies membership",
    "t0_types": "a hyperbolic domain missing both axes with noncompact automorphism group is of parabolic "
    "or hyperbolic type",
    "parabolic_member": "parabolic-type domains are members (Stehle criterion on the closure across z2 = 0)",
    "hyperbolic_nonmember": "hyperbolic-type domains are not members (Coeure-Loeb type bundle is not Stein)",
}


@dataclass
class HyperbolicCertificate:
    matrix: Mat2Z
    lam: QuadraticSurd
    v: tuple
    w: tuple
    t_sign: int
    phi: Dict[str, Any]
    residuals: Dict[str, Any]

    def to_json(self):
        return {
            "kind": "hyperbolic_matrix",
            "A": self.matrix.rows(),
            "lambda": str(self.lam),
            "lambda_float": float(self.lam),
            "v": [format_scalar(c) for c in self.v],
            "w": [format_scalar(c) for c in self.w],
            "t_sign": "+" if self.t_sign > 0 else "-",
            "phi": self.phi,
            "phi_residuals": self.residuals,
        }


@dataclass
class Verdict:
    member: bool
    case_label: CaseLabel
    certificate: Dict[str, Any]
    provenance: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.member == (self.case_label is CaseLabel.T0_HYPERBOLIC):
            raise AssertionError("only the hyperbolic type is a non-member")

    def to_json(self):
        return {
            "member": self.member,
            "case_label": self.case_label.value,
            "certificate": self.certificate,
            "provenance": list(self.provenance),
        }


# ---------------------------------------------------------------------------
# functional-equation residuals for phi


def phi_residuals(phi, lam: QuadraticSurd, n: int = 1000, seed: int = 0) -> Dict[str, Any]:
    """Check ``phi(lam^k t) lam^k = phi(t)`` on ``n`` random reductions.

    Rational ``t`` and the exact families are checked in surd arithmetic
    (residuals must vanish); tables are checked in floating point.
    """
    rng = random.Random(seed)
    worst = 0.0
    exact = not isinstance(phi, PhiTable)
    lam_f = float(lam)
    for _ in range(n):
        k = rng.randint(-6, 6)
        t = Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6))
        if exact:
            scale = lam**k
            lhs = phi.value(t * scale) if not isinstance(phi, PhiZero) else Fraction(0)
            diff = simplify(lhs * scale - phi.value(t))
            if diff != 0:
                worst = max(worst, abs(float(diff)))
        else:
            tf = float(t)
            lhs = phi.value(tf * lam_f**k) * lam_f**k
            rhs = phi.value(tf)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return {"samples": n, "max_residual": worst, "exact": exact, "passed": worst == 0.0 if exact else worst <= 1e-12}


# ---------------------------------------------------------------------------
# the matrix search


def _eigen_ray(A: Mat2Z, d) -> bool:
    return cross(A.apply(d), d) == 0


def find_hyperbolic_matrix(cone: Cone2, entry_bound: int = 50) -> Optional[Mat2Z]:
    """Smallest-trace ``A`` with ``det A = 1``, ``tr A >= 3`` fixing both rays of the wedge.

    Entries are bounded by ``entry_bound``; among matrices of the minimal
    trace the lexicographically greatest entry tuple wins (so a matrix is
    preferred to its inverse when its first entry is larger).  ``None`` means
    none was found up to the bound; for rational rays none exists at all,
    since a hyperbolic integer matrix has irrational eigendirections.
    """
    if cone.kind != "wedge":
        return None
    d1, d2 = (d.vec for d in cone.dirs)
    f1 = (float(d1[0]), float(d1[1]))
    f2 = (float(d2[0]), float(d2[1]))
    n1 = math.hypot(*f1)
    n2 = math.hypot(*f2)
    B = entry_bound
    for trace in range(3, 2 * B + 1):
        found = []
        for a in range(max(-B, trace - B), min(B, trace + B) + 1):
            d = trace - a
            bc = a * d - 1
            for b in _divisors(bc, B):
                c = bc // b
                if abs(c) > B:
                    continue
                # cheap float filter, then exact comparison
                if abs((a * f1[0] + b * f1[1]) * f1[1] - (c * f1[0] + d * f1[1]) * f1[0]) > 1e-9 * (1 + B) * n1 * n1:
                    continue
                if abs((a * f2[0] + b * f2[1]) * f2[1] - (c * f2[0] + d * f2[1]) * f2[0]) > 1e-9 * (1 + B) * n2 * n2:
                    continue
                A = Mat2Z(a, b, c, d)
                if _eigen_ray(A, d1) and _eigen_ray(A, d2):
                    found.append(A)
        if found:
            return max(found, key=lambda m: (m.a, m.b, m.c, m.d))
    return None


def _divisors(n: int, bound: int):
    """Signed divisors ``b`` of ``n != 0`` with ``|b| <= bound``."""
    if n == 0:
        return range(-bound, bound + 1)
    m = abs(n)
    out = []
    for q in range(1, min(bound, m) + 1):
        if m % q == 0:
            out.extend((q, -q))
    return out


# ---------------------------------------------------------------------------
# classification


QUICK_SUITE = {"grid_n": 8, "sizes": (10**2, 10**3, 10**4), "n_auts": 4}


def _stehle_certificate(fn: stehle.ExhaustionFn, seed: int, quick: bool = True, note=None):
    opts = QUICK_SUITE if quick else {}
    report = stehle.run_suite(fn, seed=seed, **opts)
    cert = {
        "kind": "exhaustion_function",
        "function": fn.name,
        "params": {k: _param_json(v) for k, v in fn.params.items()},
        "stehle": report.to_json(),
    }
    if note:
        cert["note"] = note
    return cert


def _param_json(v):
    if isinstance(v, (Fraction, QuadraticSurd, int)):
        return format_scalar(v)
    return v


def _axiom(reason: str) -> Dict[str, Any]:
    return {"kind": "axiom", "reason": reason}


def _frame_note(model) -> Optional[Dict[str, Any]]:
    frame = getattr(model, "frame", None)
    if frame is None:
        return None
    return {"text": "the function lives on the base model, mapped by the frame", "frame": frame.to_json()}


def classify_serre(model: LogDomainModel, entry_bound: int = 50, seed: int = stehle.DEFAULT_SEED,
                   stehle_check: bool = True) -> Verdict:
    """Membership verdict with certificate.

    ``stehle_check=False`` skips the numerical suite for member cases and
    only names the exhaustion function (useful for bulk invariance checks).
    """
    if not is_hyperbolic_domain(model):
        raise NotHyperbolicDomain("the logarithmic image contains an affine line")
    try:
        t = axis_count(model)
    except InconsistentAxisFlags as exc:
        raise UnsupportedModel(str(exc)) from exc
    prov = [PROVENANCE["hyperbolic_domain"]]

    def member_fn(label, fn, extra_prov, note=None):
        if stehle_check:
            cert = _stehle_certificate(fn, seed, note=note)
        else:
            cert = {"kind": "exhaustion_function", "function": fn.name,
                    "params": {k: _param_json(v) for k, v in fn.params.items()}}
            if note:
                cert["note"] = note
        return Verdict(True, label, cert, prov + extra_prov)

    if t == 2:
        return Verdict(True, CaseLabel.T2, _axiom(PROVENANCE["t2"]), prov + [PROVENANCE["t2"]])
    if t == 1:
        t1 = [PROVENANCE["t1_models"], PROVENANCE["stehle"]]
        if isinstance(model, Model4):
            return member_fn(CaseLabel.T1_MODEL4, stehle.u4(model.r), t1, _frame_note(model))
        if isinstance(model, Model5):
            return member_fn(CaseLabel.T1_MODEL5, stehle.u5(model.p), t1, _frame_note(model))
        if isinstance(model, Model6):
            return member_fn(CaseLabel.T1_MODEL6, stehle.u6(), t1, _frame_note(model))
        if isinstance(model, Polyhedral):
            r = recognize_strip(model)
            if r is not None:
                return member_fn(CaseLabel.T1_MODEL4, stehle.u4(r), t1,
                                 {"text": "logarithmic image is an admissible image of the disc times annulus strip"})
            return Verdict(True, CaseLabel.T1_COMPACT, _axiom(PROVENANCE["compact"]),
                           prov + [PROVENANCE["t1_models"], PROVENANCE["compact"]])
        raise UnsupportedModel(f"no one-axis rule for {type(model).__name__}")

    structure = classify_aut_structure(model, entry_bound)
    t0 = prov + [PROVENANCE["t0_types"]]
    if structure.kind is AutKind.COMPACT:
        cert = _axiom(PROVENANCE["compact"])
        cert["matrix_search"] = f"no hyperbolic matrix found up to entry bound {entry_bound}"
        return Verdict(True, CaseLabel.T0_COMPACT, cert, t0 + [PROVENANCE["compact"]])
    if structure.kind is AutKind.PARABOLIC:
        fn = stehle.u_parabolic(model)
        v = member_fn(CaseLabel.T0_PARABOLIC, fn, [PROVENANCE["parabolic_member"], PROVENANCE["stehle"]])
        v.provenance = t0 + v.provenance[1:]
        v.certificate["structure"] = structure.to_json()
        return v
    phi = model.phi if isinstance(model, HyperbolicModel) else PhiZero()
    cert = HyperbolicCertificate(
        structure.matrix,
        structure.lam,
        structure.v,
        structure.w,
        structure.t_sign,
        phi.to_json(),
        phi_residuals(phi, structure.lam),
    )
    out = cert.to_json()
    out["generator"] = structure.generator.to_json()
    return Verdict(False, CaseLabel.T0_HYPERBOLIC, out, t0 + [PROVENANCE["hyperbolic_nonmember"]])


# ---------------------------------------------------------------------------
# certificate verification


@dataclass
class VerificationReport:
    passed: bool
    case_label: str
    residuals: Dict[str, Any]

    def to_json(self):
        return {"passed": self.passed, "case_label": self.case_label, "residuals": self.residuals}


def verify_certificate(verdict: Verdict, model: LogDomainModel, seed: int = stehle.DEFAULT_SEED) -> VerificationReport:
    """Recheck a verdict independently of how it was produced."""
    fresh = classify_serre(model, stehle_check=False)
    if fresh.case_label is not verdict.case_label or fresh.member != verdict.member:
        raise CertificateMismatch(f"verdict says {verdict.case_label.value}, model gives {fresh.case_label.value}")
    cert = verdict.certificate
    if verdict.case_label is CaseLabel.T0_HYPERBOLIC:
        return _verify_hyperbolic(cert, model)
    if cert.get("kind") == "axiom":
        return VerificationReport(True, verdict.case_label.value, {"axiom": cert["reason"]})
    fn = _function_for(verdict, model)
    report = stehle.run_suite(fn, seed=seed)
    residuals: Dict[str, Any] = {"stehle": report.to_json()}
    ok = report.passed
    if verdict.case_label is CaseLabel.T1_MODEL6:
        import numpy as np

        rng = np.random.default_rng(seed)
        z1, z2 = stehle.model6_closure().sample(rng, 10**4)
        worst = 0.0
        for aut in stehle.random_family(stehle.utilde6(), rng, 10):
            worst = max(worst, stehle.invariance_residual(aut, z1, z2))
        residuals["utilde_invariance"] = worst
        ok = ok and worst <= 1e-10
    return VerificationReport(ok, verdict.case_label.value, residuals)


def _function_for(verdict: Verdict, model: LogDomainModel) -> stehle.ExhaustionFn:
    name = verdict.certificate.get("function")
    if verdict.case_label is CaseLabel.T0_PARABOLIC:
        if name != "UParabolic":
            raise CertificateMismatch("parabolic verdict must carry UParabolic")
        return stehle.u_parabolic(model)
    if verdict.case_label is CaseLabel.T1_MODEL4:
        r = model.r if isinstance(model, Model4) else recognize_strip(model)
        if name != "U4":
            raise CertificateMismatch("model (4) verdict must carry U4")
        return stehle.u4(r)
    if verdict.case_label is CaseLabel.T1_MODEL5:
        if name != "U5":
            raise CertificateMismatch("model (5) verdict must carry U5")
        return stehle.u5(model.p)
    if verdict.case_label is CaseLabel.T1_MODEL6:
        if name != "U6":
            raise CertificateMismatch("model (6) verdict must carry U6")
        return stehle.u6()
    raise CertificateMismatch(f"no exhaustion function for {verdict.case_label.value}")


def _verify_hyperbolic(cert: Dict[str, Any], model: LogDomainModel) -> VerificationReport:
    A = Mat2Z.from_rows(cert["A"])
    if A.det != 1:
        raise CertificateMismatch(f"det A = {A.det}, expected 1")
    if A.trace < 3:
        raise CertificateMismatch(f"trace A = {A.trace}, expected at least 3")
    lam = QuadraticSurd.parse(cert["lambda"]) if isinstance(cert["lambda"], str) else cert["lambda"]
    if not lam > 1:
        raise CertificateMismatch(f"lambda = {lam} is not greater than 1")
    if classify(A).kind is not MatKind.HYPERBOLIC or classify(A).lam != lam:
        raise CertificateMismatch("lambda is not the large eigenvalue of A")
    v = tuple(QuadraticSurd.parse(c) if isinstance(c, str) else c for c in cert["v"])
    w = tuple(QuadraticSurd.parse(c) if isinstance(c, str) else c for c in cert["w"])
    v = tuple(simplify(c) for c in v)
    w = tuple(simplify(c) for c in w)
    if A.apply(v) != vscale(lam, v):
        raise CertificateMismatch("v is not an eigenvector for lambda")
    if A.apply(w) != vscale(lam.inverse(), w):
        raise CertificateMismatch("w is not an eigenvector for 1/lambda")
    t_sign = 1 if cert["t_sign"] == "+" else -1
    if Cone2.wedge(vscale(t_sign, v), w) != model.cone():
        raise CertificateMismatch("eigendirections do not span the recession cone")
    phi = model.phi if isinstance(model, HyperbolicModel) else PhiZero()
    res = phi_residuals(phi, lam)
    if not res["passed"]:
        raise CertificateMismatch(f"phi functional equation fails: {res['max_residual']}")
    return VerificationReport(True, CaseLabel.T0_HYPERBOLIC.value, {"phi": res, "eigen": 0})
