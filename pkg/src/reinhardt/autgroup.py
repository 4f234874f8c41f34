"""Monomial automorphisms and the structure of their group on model domains."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .convexlog import (
    BoundedOrigin,
    HyperbolicModel,
    LogDomainModel,
    ParabolicModel,
    PhiAOverT,
    PhiZero,
    Polyhedral,
    PsiCanonical,
    _Framed,
    axis_count,
    irredundant,
    is_hyperbolic_domain,
)
from .errors import FormViolation, NotHyperbolicDomain, UnsupportedModel
from .intmat import IDENTITY, MatKind, Mat2Z, classify, eigensystem
from .surd import (
    QuadraticSurd,
    Scalar,
    Vec,
    cross,
    dot,
    format_scalar,
    is_exact,
    parse_scalar,
    sgn,
    simplify,
    solve_basis,
    vadd,
    vec_exact,
    vec_float,
    vscale,
    vsub,
)

DEFAULT_SEED = 0xC0EFFEE
NUMERIC_TOL = 1e-12


@dataclass(frozen=True)
class AffineMap2:
    """``x -> matrix @ x + shift`` on the logarithmic image."""

    matrix: Mat2Z
    shift: Vec = (Fraction(0), Fraction(0))

    def __post_init__(self):
        self.matrix.require_unimodular()
        object.__setattr__(self, "shift", (simplify(self.shift[0]), simplify(self.shift[1])))

    @property
    def exact(self) -> bool:
        return vec_exact(self.shift)

    def __call__(self, x: Vec) -> Vec:
        if self.exact and vec_exact(x):
            return vadd(self.matrix.apply(x), self.shift)
        A, b = self.matrix, vec_float(self.shift)
        x = vec_float(x)
        return (A.a * x[0] + A.b * x[1] + b[0], A.c * x[0] + A.d * x[1] + b[1])

    def compose(self, other: "AffineMap2") -> "AffineMap2":
        """``self o other``."""
        return AffineMap2(self.matrix @ other.matrix, self(other.shift))

    def inverse(self) -> "AffineMap2":
        Ainv = self.matrix.inverse()
        neg = vscale(-1, self.shift) if self.exact else (-float(self.shift[0]), -float(self.shift[1]))
        return AffineMap2(Ainv, AffineMap2(Ainv)(neg))

    def power(self, k: int) -> "AffineMap2":
        base = self if k >= 0 else self.inverse()
        out = AffineMap2(IDENTITY)
        for _ in range(abs(k)):
            out = base.compose(out)
        return out

    @classmethod
    def about(cls, A: Mat2Z, center: Vec, extra: Vec = (0, 0)) -> "AffineMap2":
        """``x -> A (x - center) + center + extra``."""
        if vec_exact(center) and vec_exact(extra):
            shift = vadd(vsub(center, A.apply(center)), extra)
        else:
            c, e = vec_float(center), vec_float(extra)
            Ac = (A.a * c[0] + A.b * c[1], A.c * c[0] + A.d * c[1])
            shift = (c[0] - Ac[0] + e[0], c[1] - Ac[1] + e[1])
        return cls(A, shift)

    def to_json(self):
        return {"matrix": self.matrix.rows(), "btilde": [format_scalar(c) for c in self.shift]}


@dataclass(frozen=True)
class AlgAut:
    """``z -> (b1 z^{A^1}, b2 z^{A^2})`` with rows ``A^j`` of a unimodular matrix."""

    matrix: Mat2Z
    b: Tuple[complex, complex] = (1 + 0j, 1 + 0j)

    def __post_init__(self):
        self.matrix.require_unimodular()
        b = (complex(self.b[0]), complex(self.b[1]))
        if b[0] == 0 or b[1] == 0:
            raise ValueError("coefficients b must be nonzero")
        object.__setattr__(self, "b", b)

    @property
    def btilde(self) -> Vec:
        return tuple(Fraction(0) if abs(bj) == 1 else math.log(abs(bj)) for bj in self.b)

    def __call__(self, z: Sequence[complex]) -> Tuple[complex, complex]:
        A = self.matrix
        z1, z2 = complex(z[0]), complex(z[1])
        return (
            self.b[0] * z1 ** A.a * z2 ** A.b,
            self.b[1] * z1 ** A.c * z2 ** A.d,
        )

    def to_json(self):
        return {
            "matrix": self.matrix.rows(),
            "b": [{"re": bj.real, "im": bj.imag} for bj in self.b],
        }


def induced_affine(aut: AlgAut) -> AffineMap2:
    return AffineMap2(aut.matrix, aut.btilde)


def affine_from_json(data: dict) -> AffineMap2:
    """Accepts either complex coefficients ``b`` or exact ``btilde``."""
    A = Mat2Z.from_rows(data["matrix"])
    if "btilde" in data:
        return AffineMap2(A, tuple(parse_scalar(c) for c in data["btilde"]))
    b = tuple(complex(e["re"], e["im"]) for e in data.get("b", [{"re": 1, "im": 0}] * 2))
    return induced_affine(AlgAut(A, b))


# ---------------------------------------------------------------------------
# preservation


@dataclass(frozen=True)
class PreservationReport:
    preserved: bool
    verified: str  # "exact", "numeric" or "sampled"
    detail: str = ""
    samples: int = 0

    def to_json(self):
        return {"preserved": self.preserved, "verified": self.verified, "detail": self.detail, "samples": self.samples}


def _ts_affine(model, affine: AffineMap2):
    """The map in ``(t, s)`` coordinates: ``(t, s) -> Q (t, s) + e``."""
    v, w, x0 = model.v, model.w, model.offset
    A = affine.matrix
    exact = affine.exact and vec_exact(x0)
    if exact:
        q0 = solve_basis(v, w, A.apply(v))
        q1 = solve_basis(v, w, A.apply(w))
        e = solve_basis(v, w, vsub(affine(x0), x0))
    else:
        from .convexlog import _solve_float

        q0 = _solve_float(v, w, A.apply(v))
        q1 = _solve_float(v, w, A.apply(w))
        ax = affine(x0)
        e = _solve_float(v, w, (float(ax[0]) - float(x0[0]), float(ax[1]) - float(x0[1])))
    # Q = [[p, q], [r, u]]
    return (q0[0], q1[0], q0[1], q1[1]), e, exact


def _zero(x, exact: bool) -> bool:
    return x == 0 if exact else abs(float(x)) <= NUMERIC_TOL


def _hyperbolic_exact(model: HyperbolicModel, affine: AffineMap2) -> Optional[PreservationReport]:
    if not isinstance(model.phi, (PhiZero, PhiAOverT)):
        return None
    (p, q, r, u), (e, f), exact = _ts_affine(model, affine)
    label = "exact" if exact else "numeric"
    if not (_zero(e, exact) and _zero(f, exact)):
        return PreservationReport(False, label, "apex is moved")
    sigma = model.t_sign
    need_unit = isinstance(model.phi, PhiAOverT) and model.phi.a > 0
    if _zero(q, exact) and _zero(r, exact):
        ok = sgn(p) > 0 and sgn(u) > 0
        if ok and need_unit:
            ok = _zero(simplify(p * u - 1) if exact else float(p) * float(u) - 1, exact)
        return PreservationReport(ok, label, "diagonal in the eigenbasis")
    if _zero(p, exact) and _zero(u, exact):
        ok = sgn(q) * sigma > 0 and sgn(r) * sigma > 0
        if ok and need_unit:
            ok = _zero(simplify(q * r - 1) if exact else float(q) * float(r) - 1, exact)
        return PreservationReport(ok, label, "swaps the eigen-rays")
    return PreservationReport(False, label, "does not preserve the eigen-rays")


def _parabolic_exact(model: ParabolicModel, affine: AffineMap2) -> Optional[PreservationReport]:
    if not isinstance(model.psi, PsiCanonical):
        return None
    (p, q, r, u), (e, f), exact = _ts_affine(model, affine)
    label = "exact" if exact else "numeric"
    beta = model.psi.beta2 if exact else float(model.psi.beta2)
    if not _zero(q, exact):
        return PreservationReport(False, label, "moves the recession ray")
    # s' - psi(t') = u (s - psi(t)) identically in (t, s)
    c2 = p * p - u
    c1 = r - p * e / beta + p / 2 - u / 2
    c0 = f - e * e / (2 * beta) + e / 2
    if exact:
        c2, c1, c0 = simplify(c2), simplify(c1), simplify(c0)
    ok = all(_zero(c, exact) for c in (c2, c1, c0))
    return PreservationReport(ok, label, "graph of psi mapped to itself" if ok else "graph of psi is moved")


def sample_log_points(model: LogDomainModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Points of R^2 around the model (inside and outside), for two-sided tests."""
    centre = np.array([float(c) for c in model.interior_point()])
    out = []
    if isinstance(model, (HyperbolicModel, ParabolicModel)):
        m = n // 2
        for _ in range(m):
            if isinstance(model, HyperbolicModel):
                t = model.t_sign * math.exp(rng.uniform(-4, 4))
                base = float(model.phi.value(t))
            else:
                t = rng.uniform(-6, 6)
                base = float(model.psi.value(t))
            s = base + rng.choice([-1, 1]) * math.exp(rng.uniform(-6, 2))
            out.append([float(c) for c in model.point(t, s)])
    while len(out) < n:
        radius = math.exp(rng.uniform(-3, 3))
        angle = rng.uniform(0, 2 * math.pi)
        out.append([centre[0] + radius * math.cos(angle), centre[1] + radius * math.sin(angle)])
    return np.array(out)


def _sampled(model, affine: AffineMap2, n_samples: int, seed: int) -> PreservationReport:
    rng = np.random.default_rng(seed)
    pts = sample_log_points(model, rng, n_samples)
    inv = affine.inverse()
    for x in pts:
        x = (float(x[0]), float(x[1]))
        inside = model.contains_log(x)
        if model.contains_log(affine(x)) != inside or model.contains_log(inv(x)) != inside:
            return PreservationReport(False, "sampled", f"membership differs at {x}", n_samples)
    return PreservationReport(True, "sampled", "two-sided membership agrees", n_samples)


def preservation_report(model: LogDomainModel, affine: AffineMap2, n_samples: int = 10**4,
                        seed: int = DEFAULT_SEED) -> PreservationReport:
    if model.cone().transform(affine.matrix) != model.cone():
        return PreservationReport(False, "exact", "recession cone is not invariant")
    report = None
    if isinstance(model, HyperbolicModel):
        report = _hyperbolic_exact(model, affine)
    elif isinstance(model, ParabolicModel):
        report = _parabolic_exact(model, affine)
    elif isinstance(model, _Framed) or isinstance(model, Polyhedral):
        met = model.met_axes()
        for j in (0, 1):
            if met[j] and affine.matrix.column(j) not in ((1, 0), (0, 1)):
                return PreservationReport(False, "exact", "does not extend across a met axis")
            if met[j] and not met[0 if affine.matrix.column(j) == (1, 0) else 1]:
                return PreservationReport(False, "exact", "moves a met axis to an unmet one")
        if isinstance(model, Polyhedral) and affine.exact:
            report = _polyhedral_exact(model, affine)
    if report is None:
        report = _sampled(model, affine, n_samples, seed)
    return report


def _polyhedral_exact(model: Polyhedral, affine: AffineMap2) -> Optional[PreservationReport]:
    from .convexlog import apply_monomial

    if not all(is_exact(c) for n, c in model.halfplanes):
        return None
    image = apply_monomial(model, affine.matrix, affine.shift)

    def canon(hps):
        out = set()
        for n, c in irredundant(hps):
            scale = abs(n[0]) if n[0] != 0 else abs(n[1])
            out.add((simplify(n[0] / scale), simplify(n[1] / scale), simplify(c / scale)))
        return out

    ok = canon(image.halfplanes) == canon(model.halfplanes)
    return PreservationReport(ok, "exact", "irredundant half-planes compared")


def preserves(model: LogDomainModel, affine: AffineMap2, **kw) -> bool:
    return preservation_report(model, affine, **kw).preserved


# ---------------------------------------------------------------------------
# structure of the automorphism group


class AutKind(str, enum.Enum):
    COMPACT = "CompactOnly"
    PARABOLIC = "ParabolicType"
    HYPERBOLIC = "HyperbolicType"


@dataclass(frozen=True)
class AutClass:
    kind: AutKind
    generator: Optional[AffineMap2] = None
    matrix: Optional[Mat2Z] = None
    lam: Optional[QuadraticSurd] = None
    v: Optional[Vec] = None
    w: Optional[Vec] = None
    t_sign: Optional[int] = None
    beta2: Optional[Scalar] = None

    def to_json(self):
        out = {"kind": self.kind.value}
        if self.matrix is not None:
            out["matrix"] = self.matrix.rows()
        if self.lam is not None:
            out["lambda"] = str(self.lam)
        for name in ("v", "w"):
            vec = getattr(self, name)
            if vec is not None:
                out[name] = [format_scalar(c) for c in vec]
        if self.t_sign is not None:
            out["t_sign"] = "+" if self.t_sign > 0 else "-"
        if self.beta2 is not None:
            out["beta2"] = format_scalar(self.beta2)
        if self.generator is not None:
            out["generator"] = self.generator.to_json()
        return out


def classify_aut_structure(model: LogDomainModel, entry_bound: int = 50) -> AutClass:
    """Compact versus the two noncompact types, for domains missing both axes."""
    if not is_hyperbolic_domain(model):
        raise NotHyperbolicDomain("the logarithmic image contains a line")
    if axis_count(model) != 0:
        raise UnsupportedModel("structure classification covers domains missing both axes")
    if isinstance(model, HyperbolicModel):
        es = eigensystem(model.matrix)
        return AutClass(
            AutKind.HYPERBOLIC,
            generator=AffineMap2.about(model.matrix, model.offset),
            matrix=model.matrix,
            lam=es.eigenvalues[0],
            v=model.v,
            w=model.w,
            t_sign=model.t_sign,
        )
    if isinstance(model, ParabolicModel):
        return AutClass(
            AutKind.PARABOLIC,
            generator=AffineMap2.about(model.matrix, model.offset, vscale(model.beta2, model.v)),
            matrix=model.matrix,
            v=model.v,
            w=model.w,
            beta2=model.beta2,
        )
    if isinstance(model, Polyhedral):
        return _polyhedral_structure(model, entry_bound)
    raise UnsupportedModel(f"no structure rule for {type(model).__name__}")


def translated_wedge(model: Polyhedral):
    """``(apex, cone)`` when the polyhedral set is a translated open wedge."""
    from .convexlog import cone_from_normals
    from .surd import Direction2

    hps = irredundant(model.halfplanes)
    if len(hps) != 2:
        return None
    cone = cone_from_normals([n for n, _ in hps])
    if cone.kind != "wedge":
        return None
    (n1, c1), (n2, c2) = hps
    det = cross(n1, n2)
    apex = (simplify((c1 * n2[1] - c2 * n1[1]) / det), simplify((n1[0] * c2 - n2[0] * c1) / det))
    return apex, cone


def _polyhedral_structure(model: Polyhedral, entry_bound: int) -> AutClass:
    found = translated_wedge(model)
    if found is None:
        return AutClass(AutKind.COMPACT)
    apex, cone = found
    from .serreclass import find_hyperbolic_matrix

    A = find_hyperbolic_matrix(cone, entry_bound)
    if A is None:
        return AutClass(AutKind.COMPACT)
    es = eigensystem(A)
    v = es.vectors[0]
    t_sign = 1 if cone.contains(v) else -1
    w = es.vectors[1] if cone.contains(es.vectors[1]) else vscale(-1, es.vectors[1])
    return AutClass(
        AutKind.HYPERBOLIC,
        generator=AffineMap2.about(A, apex),
        matrix=A,
        lam=es.eigenvalues[0],
        v=v,
        w=w,
        t_sign=t_sign,
    )


def model_generators(model: LogDomainModel) -> List[AffineMap2]:
    """Known generators (modulo rotations) of the monomial automorphisms."""
    gens = []
    if isinstance(model, HyperbolicModel):
        gens.append(AffineMap2.about(model.matrix, model.offset))
    elif isinstance(model, ParabolicModel):
        gens.append(AffineMap2.about(model.matrix, model.offset, vscale(model.beta2, model.v)))
        refl = parabolic_reflection(model)
        if refl is not None:
            gens.append(refl)
    return gens


def parabolic_reflection(model: ParabolicModel) -> Optional[AffineMap2]:
    """``(t, s) -> (beta2 - t, s)`` when it is realised by an integer matrix."""
    if not isinstance(model.psi, PsiCanonical):
        return None
    v, w = model.v, model.w
    det = cross(v, w)
    # R v = -v, R w = w  =>  R = P diag(-1, 1) P^-1 with P = [v w]
    cols = []
    for e in ((1, 0), (0, 1)):
        t, s = solve_basis(v, w, e)
        cols.append(vadd(vscale(-t, v), vscale(s, w)))
    entries = [cols[0][0], cols[1][0], cols[0][1], cols[1][1]]
    if not all(isinstance(c, Fraction) and c.denominator == 1 for c in entries):
        return None
    R = Mat2Z(*(int(c) for c in entries))
    # about x0 the map is x0 + t v + s w -> x0 + (beta2 - t) v + s w
    return AffineMap2.about(R, model.offset, vscale(model.beta2, v))


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class Witness:
    affine: AffineMap2
    base_point: Vec
    norms_sq: Tuple[float, ...]
    k0: int
    exact: bool

    def to_json(self):
        return {
            "affine": self.affine.to_json(),
            "base_point": [format_scalar(c) for c in self.base_point],
            "norms_sq": list(self.norms_sq),
            "k0": self.k0,
            "exact": self.exact,
        }


def noncompactness_witness(model: LogDomainModel, k_max: int = 60) -> Optional[Witness]:
    """An orbit ``k -> F^k(x)`` whose norm diverges (checked up to ``k_max``)."""
    cls = classify_aut_structure(model)
    if cls.kind is AutKind.COMPACT:
        return None
    F = cls.generator
    x = model.interior_point()
    exact = F.exact and vec_exact(x)
    norms = []
    y = x
    for _ in range(k_max + 1):
        norms.append(dot(y, y) if exact else float(y[0]) ** 2 + float(y[1]) ** 2)
        y = F(y)
    k0 = k_max
    while k0 > 0 and norms[k0 - 1] < norms[k0]:
        k0 -= 1
    if not norms[-1] > norms[-2]:
        raise FormViolation("witness orbit does not diverge")
    return Witness(F, x, tuple(float(n) for n in norms), k0, exact)


# ---------------------------------------------------------------------------
# the three forms of automorphisms of parabolic models


class ParabolicCase(str, enum.Enum):
    IDENTITY = "IdentityCase"
    UNIPOTENT = "UnipotentCase"
    REFLECTION = "ReflectionCase"


@dataclass(frozen=True)
class ParabolicAutForm:
    case: ParabolicCase
    vtilde: Optional[Vec]
    residual: float
    exact: bool

    def to_json(self):
        return {
            "case": self.case.value,
            "vtilde": None if self.vtilde is None else [format_scalar(c) for c in self.vtilde],
            "residual": self.residual,
            "exact": self.exact,
        }


def parabolic_form_check(model: ParabolicModel, affine: AffineMap2, n_samples: int = 1000,
                         seed: int = DEFAULT_SEED) -> ParabolicAutForm:
    A = affine.matrix
    w = model.w
    if A.apply(w) != w:
        raise FormViolation(f"{A} does not fix w={w}")
    if A.is_identity():
        case, vtilde = ParabolicCase.IDENTITY, None
    else:
        cls = classify(A)
        if cls.kind is MatKind.PARABOLIC_UNIPOTENT:
            vtilde = eigensystem(A).vectors[0]
            # rescale so that A vtilde = vtilde + w for the model's own w
            image = vsub(A.apply(vtilde), vtilde)
            j = 0 if w[0] != 0 else 1
            vtilde = vscale(simplify(w[j] / image[j]), vtilde)
            case = ParabolicCase.UNIPOTENT
        elif A.det == -1:
            vtilde = eigensystem(A).vectors[1]
            case = ParabolicCase.REFLECTION
        else:
            raise FormViolation(f"{A} fits none of the three admissible forms")
    # invariance of s - psi(t)
    rng = np.random.default_rng(seed)
    exact = affine.exact and isinstance(model.psi, PsiCanonical) and vec_exact(model.offset)
    worst = 0.0
    for _ in range(n_samples):
        t = Fraction(int(rng.integers(-400, 401)), 16)
        gap = Fraction(int(rng.integers(1, 400)), 16) * model.side
        s = model.psi.value(t) + gap if exact else float(model.psi.value(float(t))) + float(gap)
        x = model.point(t, s)
        before = model.gap(x)
        after = model.gap(affine(x))
        diff = after - before
        worst = max(worst, abs(float(diff)))
        if exact and diff != 0:
            raise FormViolation(f"invariant s - psi(t) changes by {diff} at {x}")
    return ParabolicAutForm(case, vtilde, worst, exact)
