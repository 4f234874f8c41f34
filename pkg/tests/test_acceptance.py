"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from _util import GOLDEN_NAMES, all_bundled, bundled, random_equivalences
from conftest import ACCEPTANCE_LINES
from reinhardt import coeureloeb as cl
from reinhardt import stehle
from reinhardt.convexlog import PhiAOverT, PhiTable, PhiZero, PsiCanonical, PsiTable, phi_eval, psi_eval
from reinhardt.errors import ResolutionTooLow
from reinhardt.intmat import (
    IDENTITY, MINUS_IDENTITY, MatKind, Mat2Z, classify, eigensystem, orbit, orbit_hyperbolic_closed,
    orbit_parabolic_closed,
)
from reinhardt.serreclass import CaseLabel, classify_serre, find_hyperbolic_matrix
from reinhardt.convexlog import Cone2
from reinhardt.surd import QuadraticSurd, vadd, vscale, vsub


def verdict_line(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# 1 -------------------------------------------------------------------------

GOLDEN_EXPECTED = {
    "coeure_loeb": (False, CaseLabel.T0_HYPERBOLIC),
    "model4": (True, CaseLabel.T1_MODEL4),
    "model5": (True, CaseLabel.T1_MODEL5),
    "model6": (True, CaseLabel.T1_MODEL6),
    "parabolic_k1": (True, CaseLabel.T0_PARABOLIC),
    "parabolic_k2": (True, CaseLabel.T0_PARABOLIC),
    "parabolic_k3": (True, CaseLabel.T0_PARABOLIC),
    "bounded_origin": (True, CaseLabel.T2),
}


def test_criterion_1_classification_goldens():
    models = {name: bundled(name) for name in GOLDEN_NAMES}
    start = time.perf_counter()
    got = {name: classify_serre(model) for name, model in models.items()}
    elapsed = time.perf_counter() - start
    hits = sum((v.member, v.case_label) == GOLDEN_EXPECTED[n] for n, v in got.items())
    ok = hits == 8 and elapsed < 5.0
    verdict_line(1, "classification goldens", ok, f"{hits}/8 exact, {elapsed:.2f} s")


# 2 -------------------------------------------------------------------------

def oracle_kind(A: Mat2Z):
    """Tag from matrix powers up to 12 and the closed-form eigenvalues."""
    powers = [IDENTITY]
    for _ in range(12):
        powers.append(powers[-1] @ A)
    order = next((m for m in range(1, 13) if powers[m] == IDENTITY), None)
    det, tr = A.det, A.trace
    disc = tr * tr - 4 * det
    lam = None
    if disc > 0:
        r = QuadraticSurd.sqrt(disc)
        roots = ((QuadraticSurd(tr) + r) * Fraction(1, 2), (QuadraticSurd(tr) - r) * Fraction(1, 2))
        lam = max(roots, key=abs)
    if order == 1:
        return MatKind.IDENTITY, order, None
    if A == MINUS_IDENTITY:
        return MatKind.MINUS_IDENTITY, order, None
    if order is not None:
        return (MatKind.REFLECTION if det == -1 else MatKind.ELLIPTIC), order, None
    if disc == 0:
        return (MatKind.PARABOLIC_UNIPOTENT if tr > 0 else MatKind.PARABOLIC_MINUS), None, None
    return (MatKind.HYPERBOLIC if det == 1 and tr > 0 else MatKind.HYPERBOLIC_NEGATIVE), None, lam


def test_criterion_2_exact_spectral_suite():
    total = agree = 0
    rng = range(-10, 11)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if abs(a * d - b * c) != 1:
            continue
        A = Mat2Z(a, b, c, d)
        total += 1
        got = classify(A)
        kind, order, lam = oracle_kind(A)
        ok = got.kind is kind and got.order == order
        if lam is not None:
            ok = ok and got.lam == lam and got.lam + A.det / got.lam == A.trace
        agree += ok
    verdict_line(2, "exact spectral suite", agree == total, f"{agree}/{total} matrices agree")


# 3 -------------------------------------------------------------------------

def random_conjugator(r: random.Random) -> Mat2Z:
    while True:
        P = Mat2Z(*(r.randint(-3, 3) for _ in range(4)))
        if P.det == 1:
            return P


def rand_q(r: random.Random) -> Fraction:
    return Fraction(r.randint(-9, 9), r.randint(1, 6))


def test_criterion_3_orbit_formulas():
    r = random.Random(0xC0EFFEE)
    worst_nonzero = 0
    checked = 0
    for _ in range(50):
        # unipotent A = P [[1,0],[1,1]] P^-1 with b of the form beta2 v
        P = random_conjugator(r)
        A = P @ Mat2Z(1, 0, r.randint(1, 3), 1) @ P.inverse()
        v, w = eigensystem(A).vectors
        beta2, a1, a2 = rand_q(r), rand_q(r), rand_q(r)
        x = vadd(vscale(a1, w), vscale(a2, v))
        b = vscale(beta2, v)
        y = x
        for k in range(61):
            if y != orbit_parabolic_closed(w, v, beta2, a1, a2, k) or y != orbit(A, b, x, k):
                worst_nonzero += 1
            y = vadd(A.apply(y), b)
            checked += 1
        # hyperbolic A with b = 0, x = t v + s w
        k = r.randint(2, 6)
        H = P @ Mat2Z(k, 1, k - 1, 1) @ P.inverse()
        es = eigensystem(H)
        lam = es.eigenvalues[0]
        hv, hw = es.vectors
        t, s = rand_q(r), rand_q(r)
        x = vadd(vscale(t, hv), vscale(s, hw))
        y = x
        for k in range(61):
            if vsub(y, orbit_hyperbolic_closed(lam, hv, hw, t, s, k)) != (0, 0):
                worst_nonzero += 1
            y = H.apply(y)
            checked += 1
    verdict_line(3, "orbit closed forms", worst_nonzero == 0,
                 f"{checked} exact comparisons, {worst_nonzero} nonzero residuals")


# 4 -------------------------------------------------------------------------

def test_criterion_4_functional_equations():
    r = random.Random(4)
    lam = classify(Mat2Z(2, 1, 1, 1)).lam
    lam_f = float(lam)
    exact_bad = 0
    for phi in (PhiZero(), PhiAOverT(a=Fraction(3, 2))):
        for _ in range(1000):
            t = Fraction(r.randint(1, 10 ** 4), r.randint(1, 10 ** 4))
            k = r.randint(-5, 5)
            exact_bad += phi_eval(phi, t * lam ** k) != phi_eval(phi, t) / lam ** k
    for beta2 in (Fraction(-1), Fraction(2), Fraction(-3, 4)):
        psi = PsiCanonical(beta2=beta2)
        for _ in range(1000):
            t = Fraction(r.randint(-10 ** 4, 10 ** 4), r.randint(1, 100))
            exact_bad += psi_eval(psi, t + beta2) != psi_eval(psi, t) + t
    phi_t = PhiTable.sampled(lam_f, lambda t: (1.0 + 0.02 * math.sin(2 * math.pi * math.log(t) / math.log(lam_f))) / t)
    psi_t = PsiTable.sampled(-1.5, lambda t: t * (t + 1.5) / (-3.0) + 0.01 * math.sin(2 * math.pi * t / 1.5))
    table_worst = 0.0
    for _ in range(1000):
        t = r.uniform(0.01, 100)
        base = phi_eval(phi_t, t)
        table_worst = max(table_worst, abs(phi_eval(phi_t, lam_f * t) * lam_f - base) / max(1.0, base))
        s = r.uniform(-50, 50)
        ref = psi_eval(psi_t, s) + s
        table_worst = max(table_worst, abs(psi_eval(psi_t, s - 1.5) - ref) / max(1.0, abs(ref)))
    ok = exact_bad == 0 and table_worst <= 1e-12
    verdict_line(4, "functional equations", ok,
                 f"exact failures {exact_bad} of 5000, table residual {table_worst:.2e}")


# 5 -------------------------------------------------------------------------

def test_criterion_5_utilde_invariance():
    start = time.perf_counter()
    rng = np.random.default_rng(stehle.DEFAULT_SEED)
    z1, z2 = stehle.model6_closure().sample(rng, 10 ** 4)
    worst = 0.0
    for _ in range(10):
        alpha = np.exp(1j * rng.uniform(0, 2 * np.pi))
        gamma = np.exp(1j * rng.uniform(0, 2 * np.pi))
        beta = complex(rng.normal(), rng.normal())
        worst = max(worst, stehle.invariance_residual(stehle.model6_automorphism(alpha, beta, gamma), z1, z2))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 10.0 and z1.size >= 10 ** 4
    verdict_line(5, "utilde invariance", ok, f"max residual {worst:.2e} on {z1.size} points, {elapsed:.2f} s")


# 6 -------------------------------------------------------------------------

def test_criterion_6_stehle_suites():
    start = time.perf_counter()
    fns = [stehle.u4(Fraction(1, 4)), stehle.u5(1), stehle.u6(), stehle.u_parabolic(bundled("parabolic_k1"))]
    parts = []
    all_ok = True
    for fn in fns:
        rep = stehle.run_suite(fn)
        finite = all(math.isfinite(s) for b in rep.bounded for s in b.sups)
        ok = rep.psh.min_levi >= -1e-6 and rep.exhaustion.passed and finite and all(b.stable for b in rep.bounded)
        all_ok &= ok
        parts.append(f"{fn.name} {'ok' if ok else 'bad'} psh {rep.psh.min_levi:.1e}")
    control = stehle.run_suite(stehle.neg_square_control(), exhaustion=False)
    control_fails = not control.passed
    elapsed = time.perf_counter() - start
    ok = all_ok and control_fails and elapsed < 60.0
    parts.append(f"control {'fails' if control_fails else 'PASSES'} psh {control.psh.min_levi:.2f}")
    verdict_line(6, "Stehle suites", ok, ", ".join(parts) + f", {elapsed:.1f} s")


# 7 -------------------------------------------------------------------------

def harness_at_fixed_resolution(params, R_list, N):
    """Criterion 7 exactly as stated: fixed N for every R, all checks, no resolution escape hatch."""
    problems = []
    centre = []
    for R in R_list:
        try:
            g, h = cl.solve_gh(params, R, N)
        except ResolutionTooLow as exc:
            problems.append(f"R={R}: {exc}")
            g, h = cl.solve_gh(params, R, N, check=False)
        centre.append(params.sign * g.at_center().imag)
        scan = cl.membership_scan(params, R, g, h, raise_on_violation=False)
        if not scan.passed:
            problems.append(f"R={R}: membership margin {scan.min_margin:.2e}")
        red = cl.reduction_check(params, R, g, h, raise_on_violation=False)
        if red.fraction_in < 1.0:
            problems.append(f"R={R}: reduction {red.fraction_in:.2%} in interval")
        agree = cl.two_method_check(params, R, g, h)
        if max(agree["max_diff_g"], agree["max_diff_h"]) > 1e-8:
            problems.append(f"R={R}: two-method diff {max(agree['max_diff_g'], agree['max_diff_h']):.1e}")
    if not all(b > a for a, b in zip(centre, centre[1:])):
        problems.append("centre values not strictly increasing")
    if not centre[-1] > 10:
        problems.append(f"|Im g(0)| = {centre[-1]:.4f} at R={R_list[-1]} does not exceed 10")
    return problems, centre


def test_criterion_7_counterexample_harness():
    start = time.perf_counter()
    R_list = (1.5, 1.1, 1.01, 1.001)
    problems = []
    centres = {}
    for sign in (1, -1):
        params = cl.CLParams.from_model(bundled("coeure_loeb"), sign=sign)
        probs, centre = harness_at_fixed_resolution(params, R_list, 4096)
        problems += [f"sign {sign:+d}: {p}" for p in probs]
        centres[sign] = centre
    elapsed = time.perf_counter() - start
    if elapsed >= 120:
        problems.append(f"runtime {elapsed:.0f} s")
    values = " / ".join(f"{'+' if s > 0 else '-'}: {', '.join(f'{c:.4f}' for c in centres[s])}" for s in (1, -1))
    detail = (f"sign*Im g(0) {values}; {elapsed:.1f} s; {len(problems)} problems; "
              + ("; ".join(problems[:4]) if problems else "all checks pass"))
    verdict_line(7, "counterexample harness at N=4096", not problems, detail)


# 8 -------------------------------------------------------------------------

def test_criterion_8_equivalence_invariance():
    rng = np.random.default_rng(8)
    total = same = 0
    for name, model in all_bundled().items():
        base = classify_serre(model)
        for _, _, image in random_equivalences(model, rng, count=20):
            verdict = classify_serre(image)
            total += 1
            same += (verdict.member, verdict.case_label) == (base.member, base.case_label)
    verdict_line(8, "equivalence invariance", same == total, f"{same}/{total} verdicts unchanged")


# 9 -------------------------------------------------------------------------

def test_criterion_9_hyperbolic_matrix_search():
    start = time.perf_counter()
    v, w = eigensystem(Mat2Z(2, 1, 1, 1)).vectors
    found = find_hyperbolic_matrix(Cone2.wedge(v, w), entry_bound=50)
    none = find_hyperbolic_matrix(Cone2.wedge((1, 0), (0, 1)), entry_bound=50)
    elapsed = time.perf_counter() - start
    ok = found == Mat2Z(2, 1, 1, 1) and none is None and elapsed < 5.0
    verdict_line(9, "hyperbolic-matrix search", ok, f"found {found}, rational wedge -> {none}, {elapsed:.3f} s")
