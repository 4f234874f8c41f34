"""Logarithmic images of Reinhardt domains in C^2.

A model describes ``log D = {(log|z1|, log|z2|) : z in D, z1 z2 != 0}``
together with the set of coordinate axes ``{z_j = 0}`` that meet ``D``.
All sets are open; points on the boundary are reported as outside.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    AxisViolation,
    DomainSignViolation,
    InconsistentAxisFlags,
    UnsupportedImage,
    UnsupportedModel,
)
from .intmat import MatKind, Mat2Z, classify, eigensystem
from .surd import (
    Direction2,
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

# ---------------------------------------------------------------------------
# boundary profiles


@dataclass(frozen=True)
class PhiZero:
    family = "zero"

    def value(self, t: Scalar) -> Scalar:
        _check_nonzero(t)
        return Fraction(0) if is_exact(t) else 0.0

    def to_json(self):
        return {"family": "zero"}


@dataclass(frozen=True)
class PhiAOverT:
    """``phi(t) = a/|t|``."""

    a: Fraction
    family = "a_over_t"

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be non-negative")

    def value(self, t: Scalar) -> Scalar:
        _check_nonzero(t)
        if is_exact(t):
            return simplify(self.a / abs(t))
        return float(self.a) / abs(float(t))

    def to_json(self):
        return {"family": "a_over_t", "a": format_scalar(self.a)}


@dataclass(frozen=True)
class PhiTable:
    """Piecewise-linear profile stored on the fundamental interval ``[1, lam]``.

    Values elsewhere follow from ``phi(lam t) = phi(t)/lam``.  The last
    knot must equal ``lam`` and its value must be ``values[0]/lam``.
    """

    lam: float
    knots: Tuple[float, ...]
    values: Tuple[float, ...]
    family = "table"
    tol: float = 1e-12

    def __post_init__(self):
        lam, ks, vs = float(self.lam), self.knots, self.values
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "knots", tuple(float(k) for k in ks))
        object.__setattr__(self, "values", tuple(float(v) for v in vs))
        ks, vs = self.knots, self.values
        if lam <= 1:
            raise ValueError("lam must exceed 1")
        if len(ks) != len(vs) or len(ks) < 2:
            raise ValueError("need at least two knots with matching values")
        if abs(ks[0] - 1.0) > self.tol or abs(ks[-1] - lam) > self.tol * lam:
            raise ValueError("knots must span exactly [1, lam]")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("knots must be strictly increasing")
        if min(vs) < 0:
            raise ValueError("phi must be non-negative")
        if abs(vs[-1] - vs[0] / lam) > self.tol * max(1.0, vs[0]):
            raise ValueError("table violates phi(lam) = phi(1)/lam")
        slopes = self.slopes()
        if any(s2 < s1 - self.tol for s1, s2 in zip(slopes, slopes[1:])):
            raise ValueError("table is not convex")
        if slopes[-1] > slopes[0] / lam**2 + self.tol:
            raise ValueError("extension by the functional equation is not convex")

    def slopes(self) -> List[float]:
        ks, vs = self.knots, self.values
        return [(vs[i + 1] - vs[i]) / (ks[i + 1] - ks[i]) for i in range(len(ks) - 1)]

    def reduce(self, t: float) -> Tuple[float, int]:
        """Write ``|t| = lam^n r`` with ``r`` in ``[1, lam)``."""
        r = abs(float(t))
        n = math.floor(math.log(r) / math.log(self.lam))
        r0 = r / self.lam**n
        if r0 < 1.0:
            n -= 1
            r0 = r / self.lam**n
        elif r0 >= self.lam:
            n += 1
            r0 = r / self.lam**n
        return min(max(r0, 1.0), self.lam), n

    def fundamental(self, r: float) -> float:
        ks, vs = self.knots, self.values
        i = min(max(bisect.bisect_right(ks, r) - 1, 0), len(ks) - 2)
        frac = (r - ks[i]) / (ks[i + 1] - ks[i])
        return vs[i] + frac * (vs[i + 1] - vs[i])

    def value(self, t: Scalar) -> float:
        _check_nonzero(t)
        r, n = self.reduce(t)
        return self.fundamental(r) / self.lam**n

    def to_json(self):
        return {"family": "table", "lam": self.lam, "knots": list(self.knots), "values": list(self.values)}

    @classmethod
    def sampled(cls, lam: float, fn, n_knots: int = 17) -> "PhiTable":
        """Interpolate ``fn`` on ``[1, lam]`` (``fn`` must satisfy the functional equation)."""
        ks = np.linspace(1.0, float(lam), n_knots)
        vs = [fn(k) for k in ks[:-1]]
        vs.append(vs[0] / float(lam))
        return cls(float(lam), tuple(ks), tuple(vs))


PhiSpec = Union[PhiZero, PhiAOverT, PhiTable]


@dataclass(frozen=True)
class PsiCanonical:
    """``psi(t) = t (t - beta2) / (2 beta2)``."""

    beta2: Fraction
    family = "canonical"

    def __post_init__(self):
        if self.beta2 == 0:
            raise ValueError("beta2 must be nonzero")

    def value(self, t: Scalar) -> Scalar:
        if is_exact(t) and is_exact(self.beta2):
            return simplify(t * (t - self.beta2) / (2 * self.beta2))
        t, b = float(t), float(self.beta2)
        return t * (t - b) / (2 * b)

    def to_json(self):
        return {"family": "canonical", "beta2": format_scalar(self.beta2)}


@dataclass(frozen=True)
class PsiTable:
    """Piecewise-linear profile on ``[min(0, beta2), max(0, beta2)]``.

    Extended by ``psi(t + beta2) = psi(t) + t``; convex for ``beta2 > 0`` and
    concave for ``beta2 < 0``.
    """

    beta2: float
    knots: Tuple[float, ...]
    values: Tuple[float, ...]
    family = "table"
    tol: float = 1e-12

    def __post_init__(self):
        b = float(self.beta2)
        object.__setattr__(self, "beta2", b)
        object.__setattr__(self, "knots", tuple(float(k) for k in self.knots))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        ks, vs = self.knots, self.values
        if b == 0:
            raise ValueError("beta2 must be nonzero")
        lo, hi = min(0.0, b), max(0.0, b)
        if len(ks) != len(vs) or len(ks) < 2:
            raise ValueError("need at least two knots with matching values")
        if abs(ks[0] - lo) > self.tol or abs(ks[-1] - hi) > self.tol:
            raise ValueError("knots must span the fundamental interval")
        if any(q <= p for p, q in zip(ks, ks[1:])):
            raise ValueError("knots must be strictly increasing")
        if abs(vs[-1] - vs[0]) > self.tol * max(1.0, abs(vs[0])):
            raise ValueError("table violates psi(beta2) = psi(0)")
        slopes = [(vs[i + 1] - vs[i]) / (ks[i + 1] - ks[i]) for i in range(len(ks) - 1)]
        sign = 1 if b > 0 else -1
        if any(sign * (s2 - s1) < -self.tol for s1, s2 in zip(slopes, slopes[1:])):
            raise ValueError("table is not convex" if b > 0 else "table is not concave")
        # one-sided slopes across the period boundary hi differ by sign(beta2)
        if sign * (slopes[0] + sign - slopes[-1]) < -self.tol:
            raise ValueError("extension by the functional equation breaks convexity")

    def reduce(self, t: float) -> Tuple[float, int]:
        """Write ``t = r + n beta2`` with ``r`` in the fundamental interval."""
        b = self.beta2
        lo, width = min(0.0, b), abs(b)
        m = math.floor((t - lo) / width)
        r = t - m * width
        if r >= lo + width:
            r -= width
            m += 1
        n = m if b > 0 else -m
        return r, n

    def fundamental(self, r: float) -> float:
        ks, vs = self.knots, self.values
        i = min(max(bisect.bisect_right(ks, r) - 1, 0), len(ks) - 2)
        frac = (r - ks[i]) / (ks[i + 1] - ks[i])
        return vs[i] + frac * (vs[i + 1] - vs[i])

    def value(self, t: Scalar) -> float:
        t = float(t)
        r, n = self.reduce(t)
        return self.fundamental(r) + n * r + self.beta2 * n * (n - 1) / 2

    def to_json(self):
        return {"family": "table", "beta2": self.beta2, "knots": list(self.knots), "values": list(self.values)}

    @classmethod
    def sampled(cls, beta2: float, fn, n_knots: int = 17) -> "PsiTable":
        lo, hi = min(0.0, beta2), max(0.0, beta2)
        ks = np.linspace(lo, hi, n_knots)
        vs = [fn(k) for k in ks[:-1]]
        vs.append(vs[0])
        return cls(float(beta2), tuple(ks), tuple(vs))


PsiSpec = Union[PsiCanonical, PsiTable]


def _check_nonzero(t):
    if t == 0:
        raise DomainSignViolation("phi is defined for t != 0 only")


def phi_eval(phi: PhiSpec, t: Scalar, t_sign: int = 1) -> Scalar:
    """Evaluate ``phi`` at ``t``; ``t`` must carry the sign of the model's half-plane."""
    if sgn(t) != t_sign:
        raise DomainSignViolation(f"t={t} has the wrong sign for this profile")
    return phi.value(t)


def psi_eval(psi: PsiSpec, t: Scalar) -> Scalar:
    return psi.value(t)


def phi_from_json(data) -> PhiSpec:
    family = data["family"]
    if family == "zero":
        return PhiZero()
    if family == "a_over_t":
        return PhiAOverT(Fraction(parse_scalar(data["a"])))
    if family == "table":
        return PhiTable(float(data["lam"]), tuple(data["knots"]), tuple(data["values"]))
    raise ValueError(f"unknown phi family {family!r}")


def psi_from_json(data) -> PsiSpec:
    family = data["family"]
    if family == "canonical":
        return PsiCanonical(Fraction(parse_scalar(data["beta2"])))
    if family == "table":
        return PsiTable(float(data["beta2"]), tuple(data["knots"]), tuple(data["values"]))
    raise ValueError(f"unknown psi family {family!r}")


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class Cone2:
    """Closed convex cone in R^2.

    ``kind`` is one of ``zero``, ``ray``, ``wedge``, ``line``, ``halfplane``,
    ``plane``.  Rays/wedges carry their extreme directions; a line carries
    one of its two directions; a half-plane carries its inner normal.
    """

    kind: str
    dirs: Tuple[Direction2, ...] = ()

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def ray(cls, d) -> "Cone2":
        return cls("ray", (_dir(d),))

    @classmethod
    def wedge(cls, d1, d2) -> "Cone2":
        d1, d2 = _dir(d1), _dir(d2)
        c = cross(d1.vec, d2.vec)
        if c == 0:
            if d1 == d2:
                return cls.ray(d1)
            return cls("line", (d1.line(),))
        if sgn(c) < 0:
            d1, d2 = d2, d1
        return cls("wedge", (d1, d2))

    @property
    def line_free(self) -> bool:
        return self.kind in ("zero", "ray", "wedge")

    def contains(self, u: Vec) -> bool:
        if u[0] == 0 and u[1] == 0:
            return True
        if self.kind == "zero":
            return False
        if self.kind == "plane":
            return True
        if self.kind == "ray":
            d = self.dirs[0].vec
            return cross(d, u) == 0 and sgn(dot(d, u)) > 0
        if self.kind == "line":
            return cross(self.dirs[0].vec, u) == 0
        if self.kind == "halfplane":
            return sgn(dot(self.dirs[0].vec, u)) >= 0
        d1, d2 = self.dirs[0].vec, self.dirs[1].vec
        return sgn(cross(d1, u)) >= 0 and sgn(cross(u, d2)) >= 0

    def transform(self, M: Mat2Z) -> "Cone2":
        if self.kind in ("zero", "plane"):
            return self
        if self.kind == "halfplane":
            # inner normal transforms by the inverse transpose
            n = M.inverse().transpose().apply(self.dirs[0].vec)
            return Cone2("halfplane", (Direction2.of(n),))
        images = [Direction2.of(M.apply(d.vec)) for d in self.dirs]
        if self.kind == "ray":
            return Cone2.ray(images[0])
        if self.kind == "line":
            return Cone2("line", (images[0].line(),))
        return Cone2.wedge(*images)

    def __eq__(self, other):
        if not isinstance(other, Cone2):
            return NotImplemented
        return self.kind == other.kind and set(self.dirs) == set(other.dirs)

    def __hash__(self):
        return hash((self.kind, frozenset(self.dirs)))

    def to_json(self):
        return {"kind": self.kind, "dirs": [d.to_json() for d in self.dirs]}


def _dir(d) -> Direction2:
    return d if isinstance(d, Direction2) else Direction2.of(d)


def cone_from_normals(normals: Sequence[Vec]) -> Cone2:
    """The cone ``{u : n.u <= 0 for all n}``."""
    normals = [n for n in normals if not (n[0] == 0 and n[1] == 0)]
    if not normals:
        return Cone2("plane")
    lines = {Direction2.of(n).line() for n in normals}
    if len(lines) == 1:
        base = Direction2.of(normals[0])
        if all(Direction2.of(n) == base for n in normals):
            return Cone2("halfplane", (-base,))
        return Cone2("line", (Direction2(-base.y, base.x).line(),))
    feasible = []
    for n in normals:
        for cand in ((-n[1], n[0]), (n[1], -n[0])):
            if all(sgn(dot(m, cand)) <= 0 for m in normals):
                d = Direction2.of(cand)
                if d not in feasible:
                    feasible.append(d)
    if not feasible:
        return Cone2.zero()
    if len(feasible) == 1:
        return Cone2.ray(feasible[0])
    return Cone2.wedge(feasible[0], feasible[1])


# ---------------------------------------------------------------------------
# strict linear feasibility in the plane (exact)


Halfplane = Tuple[Vec, Scalar]  # (normal n, offset c) meaning n.x < c


def _interval_1d(cons: Sequence[Tuple[Scalar, Scalar]]):
    """Open interval of x with ``a x < c`` for all ``(a, c)``; None if empty."""
    lo, hi = None, None
    for a, c in cons:
        if a == 0:
            if not sgn(c) > 0:
                return None
            continue
        bound = simplify(c / a)
        if sgn(a) > 0:
            hi = bound if hi is None or bound < hi else hi
        else:
            lo = bound if lo is None or bound > lo else lo
    if lo is not None and hi is not None and not lo < hi:
        return None
    return lo, hi


def _pick(lo, hi):
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return simplify(hi - 1)
    if hi is None:
        return simplify(lo + 1)
    return simplify((lo + hi) / 2)


def strict_interior_point(halfplanes: Sequence[Halfplane]) -> Optional[Vec]:
    """A point with ``n.x < c`` for every half-plane, or None (Fourier-Motzkin)."""
    upper, lower, free = [], [], []
    for n, c in halfplanes:
        if sgn(n[1]) > 0:
            upper.append((n, c))
        elif sgn(n[1]) < 0:
            lower.append((n, c))
        else:
            free.append((n[0], c))
    cons = list(free)
    # eliminating x2: (c_l - a_l x1)/b_l < x2 < (c_u - a_u x1)/b_u with b_l < 0 < b_u
    for (nu, cu) in upper:
        for (nl, cl) in lower:
            a = simplify(nl[0] / nl[1] - nu[0] / nu[1])
            c = simplify(cl / nl[1] - cu / nu[1])
            # (c_l - a_l x1)/b_l < (c_u - a_u x1)/b_u  <=>  a x1 > c ... rearranged
            cons.append((simplify(-a), simplify(-c)))
    iv = _interval_1d(cons)
    if iv is None:
        return None
    x1 = _pick(*iv)
    cons2 = []
    for n, c in halfplanes:
        cons2.append((n[1], simplify(c - n[0] * x1)))
    iv2 = _interval_1d(cons2)
    if iv2 is None:  # pragma: no cover - elimination guarantees a slice
        return None
    return (x1, _pick(*iv2))


def irredundant(halfplanes: Sequence[Halfplane]) -> List[Halfplane]:
    """Drop constraints implied by the others (greedy, keeps the set unchanged)."""
    kept = list(halfplanes)
    i = 0
    while i < len(kept):
        n, c = kept[i]
        others = kept[:i] + kept[i + 1:]
        probe = others + [((-n[0], -n[1]), -c)]
        if others and strict_interior_point(probe) is None:
            kept = others
        else:
            i += 1
    return kept


# ---------------------------------------------------------------------------
# models


def _log_abs(z: complex, met: bool) -> float:
    if z == 0:
        if not met:
            raise AxisViolation("zero coordinate on an axis that does not meet the domain")
        return -math.inf
    return math.log(abs(z))


class LogDomainModel:
    """Common interface; see the concrete dataclasses below."""

    kind: str

    def cone(self) -> Cone2:
        raise NotImplementedError

    def met_axes(self) -> Tuple[bool, bool]:
        raise NotImplementedError

    def contains_log(self, x: Vec) -> bool:
        raise NotImplementedError

    def contains(self, z: Sequence[complex]) -> bool:
        met = self.met_axes()
        x = (_log_abs(complex(z[0]), met[0]), _log_abs(complex(z[1]), met[1]))
        return self.contains_log(x)

    def interior_point(self) -> Vec:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


def _float_vec(v) -> Tuple[float, float]:
    return (float(v[0]), float(v[1]))


def _all_exact(*vecs) -> bool:
    return all(vec_exact(v) for v in vecs)


@dataclass(frozen=True)
class HyperbolicModel(LogDomainModel):
    """``{x0 + t v + s w : sign(t) = t_sign, s > phi(|t|)}`` with ``A v = lam v``, ``A w = w/lam``."""

    matrix: Mat2Z
    phi: PhiSpec
    t_sign: int = 1
    v: Optional[Vec] = None
    w: Optional[Vec] = None
    offset: Vec = (Fraction(0), Fraction(0))
    kind = "hyperbolic_model"

    def __post_init__(self):
        cls = classify(self.matrix)
        if cls.kind is not MatKind.HYPERBOLIC:
            raise UnsupportedModel(f"{self.matrix} is not hyperbolic with positive trace")
        if self.t_sign not in (1, -1):
            raise ValueError("t_sign must be +1 or -1")
        es = eigensystem(self.matrix)
        if self.v is None:
            object.__setattr__(self, "v", es.vectors[0])
        if self.w is None:
            object.__setattr__(self, "w", es.vectors[1])
        object.__setattr__(self, "offset", (simplify(self.offset[0]), simplify(self.offset[1])))
        lam = cls.lam
        if self.matrix.apply(self.v) != vscale(lam, self.v) or self.matrix.apply(self.w) != vscale(lam.inverse(), self.w):
            raise UnsupportedModel("stored v, w are not eigenvectors for lam, 1/lam")
        if isinstance(self.phi, PhiTable) and abs(self.phi.lam - float(lam)) > 1e-12 * float(lam):
            raise UnsupportedModel("phi table period does not match the matrix eigenvalue")

    @property
    def lam(self) -> QuadraticSurd:
        return classify(self.matrix).lam

    def coords(self, x: Vec) -> Tuple[Scalar, Scalar]:
        """``(t, s)`` with ``x = x0 + t v + s w``."""
        if _all_exact(x, self.offset):
            return solve_basis(self.v, self.w, vsub(x, self.offset))
        return _solve_float(self.v, self.w, vsub(_float_vec(x), _float_vec(self.offset)))

    def point(self, t: Scalar, s: Scalar) -> Vec:
        if is_exact(t) and is_exact(s) and vec_exact(self.offset):
            return vadd(self.offset, vadd(vscale(t, self.v), vscale(s, self.w)))
        v, w, o = _float_vec(self.v), _float_vec(self.w), _float_vec(self.offset)
        t, s = float(t), float(s)
        return (o[0] + t * v[0] + s * w[0], o[1] + t * v[1] + s * w[1])

    def contains_log(self, x: Vec) -> bool:
        if not all(math.isfinite(float(c)) for c in x):
            return False
        t, s = self.coords(x)
        if sgn(t) != self.t_sign:
            return False
        return s > self.phi.value(t)

    def cone(self) -> Cone2:
        return Cone2.wedge(vscale(self.t_sign, self.v), self.w)

    def met_axes(self):
        return (False, False)

    def interior_point(self) -> Vec:
        t = Fraction(self.t_sign)
        s = self.phi.value(t)
        s = simplify(s + 1) if is_exact(s) else s + 1.0
        return self.point(t, s)

    def to_json(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.rows(),
            "phi": self.phi.to_json(),
            "t_sign": "+" if self.t_sign > 0 else "-",
            "v": [format_scalar(c) for c in self.v],
            "w": [format_scalar(c) for c in self.w],
            "offset": [format_scalar(c) for c in self.offset],
        }

    def as_polyhedral(self) -> Optional["Polyhedral"]:
        """The open wedge as two half-planes (only when phi vanishes)."""
        if not isinstance(self.phi, PhiZero):
            return None
        det = cross(self.v, self.w)
        # t = cross(x - x0, w)/det, s = cross(v, x - x0)/det
        nt = (simplify(self.w[1] / det), simplify(-self.w[0] / det))
        ns = (simplify(-self.v[1] / det), simplify(self.v[0] / det))
        hps = []
        for n, sign in ((nt, self.t_sign), (ns, 1)):
            normal = vscale(-sign, n)
            hps.append((normal, dot(normal, self.offset)))
        return Polyhedral(tuple(hps), (False, False))


def _solve_float(p, q, x) -> Tuple[float, float]:
    p, q, x = _float_vec(p), _float_vec(q), _float_vec(x)
    det = p[0] * q[1] - p[1] * q[0]
    return ((x[0] * q[1] - x[1] * q[0]) / det, (p[0] * x[1] - p[1] * x[0]) / det)


@dataclass(frozen=True)
class ParabolicModel(LogDomainModel):
    """``{x0 + t v + s w : s > psi(t)}`` (``beta2 > 0``) or ``s < psi(t)`` (``beta2 < 0``).

    ``A w = w``, ``A v = v + w`` and ``x -> A x + beta2 v`` (about ``x0``)
    maps the set onto itself.
    """

    matrix: Mat2Z
    psi: PsiSpec
    v: Optional[Vec] = None
    w: Optional[Vec] = None
    offset: Vec = (Fraction(0), Fraction(0))
    kind = "parabolic_model"

    def __post_init__(self):
        if classify(self.matrix).kind is not MatKind.PARABOLIC_UNIPOTENT:
            raise UnsupportedModel(f"{self.matrix} is not unipotent")
        es = eigensystem(self.matrix)
        if self.v is None:
            object.__setattr__(self, "v", es.vectors[0])
        if self.w is None:
            object.__setattr__(self, "w", es.vectors[1])
        object.__setattr__(self, "offset", (simplify(self.offset[0]), simplify(self.offset[1])))
        A = self.matrix
        if A.apply(self.w) != self.w or A.apply(self.v) != vadd(self.v, self.w):
            raise UnsupportedModel("stored v, w do not satisfy A w = w, A v = v + w")

    @property
    def beta2(self):
        return self.psi.beta2

    @property
    def side(self) -> int:
        return 1 if self.beta2 > 0 else -1

    def coords(self, x: Vec):
        if _all_exact(x, self.offset) and isinstance(self.psi, PsiCanonical):
            return solve_basis(self.v, self.w, vsub(x, self.offset))
        return _solve_float(self.v, self.w, vsub(_float_vec(x), _float_vec(self.offset)))

    def point(self, t, s) -> Vec:
        if is_exact(t) and is_exact(s) and vec_exact(self.offset):
            return vadd(self.offset, vadd(vscale(t, self.v), vscale(s, self.w)))
        v, w, o = _float_vec(self.v), _float_vec(self.w), _float_vec(self.offset)
        t, s = float(t), float(s)
        return (o[0] + t * v[0] + s * w[0], o[1] + t * v[1] + s * w[1])

    def gap(self, x: Vec):
        """``s - psi(t)``; positive inside for ``beta2 > 0``, negative inside otherwise."""
        t, s = self.coords(x)
        p = self.psi.value(t)
        if is_exact(s) and is_exact(p):
            return simplify(s - p)
        return float(s) - float(p)

    def contains_log(self, x: Vec) -> bool:
        if not all(math.isfinite(float(c)) for c in x):
            return False
        return sgn(self.gap(x)) == self.side

    def cone(self) -> Cone2:
        return Cone2.ray(vscale(self.side, self.w))

    def met_axes(self):
        return (False, False)

    def interior_point(self) -> Vec:
        t = Fraction(0)
        return self.point(t, self.psi.value(t) + self.side)

    def to_json(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.rows(),
            "psi": self.psi.to_json(),
            "v": [format_scalar(c) for c in self.v],
            "w": [format_scalar(c) for c in self.w],
            "offset": [format_scalar(c) for c in self.offset],
        }


# -- models that meet one coordinate axis ----------------------------------


@dataclass(frozen=True)
class Frame:
    """Admissible monomial change ``x = M x_base + c`` for models meeting axes.

    Columns of ``M`` belonging to met base axes must be standard basis
    vectors, so that the corresponding map extends holomorphically across
    the axis (in both directions).
    """

    matrix: Mat2Z = Mat2Z(1, 0, 0, 1)
    offset: Vec = (Fraction(0), Fraction(0))

    def image_axis(self, j: int) -> int:
        col = self.matrix.column(j)
        if col == (1, 0):
            return 0
        if col == (0, 1):
            return 1
        raise UnsupportedImage(f"column {j} of {self.matrix} is not a standard basis vector")

    def compose(self, A: Mat2Z, btilde: Vec) -> "Frame":
        """Frame of ``x -> A x + btilde`` applied after this one."""
        return Frame(A @ self.matrix, vadd(A.apply(self.offset), btilde) if _all_exact(self.offset, btilde)
                     else _affine_float(A, self.offset, btilde))

    def to_base(self, x) -> Tuple[float, float]:
        """Invert the frame; ``-inf`` entries propagate only where they occur."""
        Minv = self.matrix.inverse()
        rows = ((Minv.a, Minv.b), (Minv.c, Minv.d))
        diff = [float(x[j]) - float(self.offset[j]) if math.isfinite(float(x[j])) else float(x[j]) for j in (0, 1)]
        out = []
        for row in rows:
            acc = 0.0
            for coef, val in zip(row, diff):
                if coef:
                    acc += coef * val
            out.append(acc)
        return out[0], out[1]

    def to_json(self):
        return {"matrix": self.matrix.rows(), "offset": [format_scalar(c) for c in self.offset]}


def _affine_float(A: Mat2Z, x, b):
    x, b = _float_vec(x), _float_vec(b)
    return (A.a * x[0] + A.b * x[1] + b[0], A.c * x[0] + A.d * x[1] + b[1])


def _frame_from_json(data) -> Frame:
    if not data:
        return Frame()
    return Frame(Mat2Z.from_rows(data["matrix"]), tuple(parse_scalar(c) for c in data.get("offset", [0, 0])))


@dataclass(frozen=True)
class _Framed(LogDomainModel):
    frame: Frame = Frame()

    base_met = (True, False)

    def base_contains(self, xb: Tuple[float, float]) -> bool:
        raise NotImplementedError

    def base_cone(self) -> Cone2:
        raise NotImplementedError

    def base_interior(self) -> Tuple[float, float]:
        raise NotImplementedError

    def met_axes(self):
        met = [False, False]
        for j, m in enumerate(self.base_met):
            if m:
                met[self.frame.image_axis(j)] = True
        return tuple(met)

    def contains_log(self, x) -> bool:
        xb = self.frame.to_base(x)
        if any(math.isnan(c) for c in xb):
            return False
        if xb[1] == -math.inf or xb[0] == math.inf or xb[1] == math.inf:
            return False
        return self.base_contains(xb)

    def cone(self) -> Cone2:
        return self.base_cone().transform(self.frame.matrix)

    def interior_point(self):
        xb = self.base_interior()
        M, c = self.frame.matrix, self.frame.offset
        return _affine_float(M, xb, c)

    def _frame_json(self):
        return {"frame": self.frame.to_json()}


@dataclass(frozen=True)
class Model4(_Framed):
    """Unit disc times the annulus ``r < |z2| < 1`` (``r = 0``: punctured disc)."""

    r: Scalar = Fraction(0)
    kind = "model4"

    def __post_init__(self):
        if not 0 <= self.r < 1:
            raise ValueError("r must lie in [0, 1)")
        self.met_axes()

    def base_contains(self, xb):
        x1, x2 = xb
        lower = math.log(float(self.r)) if self.r > 0 else -math.inf
        return x1 < 0 and lower < x2 < 0

    def base_cone(self):
        if self.r > 0:
            return Cone2.ray((-1, 0))
        return Cone2.wedge((-1, 0), (0, -1))

    def base_interior(self):
        lower = math.log(float(self.r)) if self.r > 0 else -2.0
        return (-1.0, lower / 2)

    def to_json(self):
        return {"kind": self.kind, "r": format_scalar(self.r), **self._frame_json()}


@dataclass(frozen=True)
class Model5(_Framed):
    """``|z1| < 1, 0 < |z2| < (1 - |z1|^2)^(p/2)``."""

    p: Scalar = Fraction(1)
    kind = "model5"

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        self.met_axes()

    def base_contains(self, xb):
        x1, x2 = xb
        if not x1 < 0:
            return False
        bound = 0.0 if x1 == -math.inf else float(self.p) / 2 * math.log1p(-math.exp(2 * x1))
        return x2 < bound

    def base_cone(self):
        return Cone2.wedge((-1, 0), (0, -1))

    def base_interior(self):
        return (-1.0, float(self.p) / 2 * math.log1p(-math.exp(-2.0)) - 1.0)

    def to_json(self):
        return {"kind": self.kind, "p": format_scalar(self.p), **self._frame_json()}


@dataclass(frozen=True)
class Model6(_Framed):
    """``0 < |z2| < exp(-|z1|^2)``."""

    kind = "model6"

    def __post_init__(self):
        self.met_axes()

    def base_contains(self, xb):
        x1, x2 = xb
        bound = 0.0 if x1 == -math.inf else -math.exp(2 * x1)
        return x2 < bound

    def base_cone(self):
        return Cone2.wedge((-1, 0), (0, -1))

    def base_interior(self):
        return (0.0, -2.0)

    def to_json(self):
        return {"kind": self.kind, **self._frame_json()}


# -- polyhedral images -------------------------------------------------------


@dataclass(frozen=True)
class Polyhedral(LogDomainModel):
    """Open intersection of half-planes ``n.x < c`` with per-axis meet flags."""

    halfplanes: Tuple[Halfplane, ...]
    axis_flags: Tuple[bool, bool] = (False, False)
    kind = "polyhedral"

    def __post_init__(self):
        hps = tuple((tuple(simplify(c) for c in n), simplify(c)) for n, c in self.halfplanes)
        object.__setattr__(self, "halfplanes", hps)
        object.__setattr__(self, "axis_flags", tuple(bool(f) for f in self.axis_flags))
        if strict_interior_point(hps) is None:
            raise UnsupportedModel("half-planes have empty intersection")

    def met_axes(self):
        return self.axis_flags

    def cone(self) -> Cone2:
        return cone_from_normals([n for n, _ in self.halfplanes])

    def contains_log(self, x) -> bool:
        exact = vec_exact(x)
        for n, c in self.halfplanes:
            total = None
            for j in (0, 1):
                if n[j] == 0:
                    continue
                xj = x[j]
                if not exact and math.isinf(float(xj)):
                    # the limit x_j -> -inf satisfies the constraint iff n_j > 0
                    if sgn(n[j]) * sgn(float(xj)) < 0:
                        total = -math.inf
                        break
                    return False
                term = n[j] * xj if exact else float(n[j]) * float(xj)
                total = term if total is None else total + term
            if total is None:
                total = 0
            if total == -math.inf:
                continue
            if exact and is_exact(c):
                if not sgn(simplify(total - c)) < 0:
                    return False
            elif not float(total) < float(c):
                return False
        return True

    def interior_point(self) -> Vec:
        return strict_interior_point(self.halfplanes)

    def irredundant(self) -> List[Halfplane]:
        return irredundant(self.halfplanes)

    def to_json(self):
        return {
            "kind": self.kind,
            "halfplanes": [
                {"normal": [format_scalar(c) for c in n], "offset": format_scalar(c)} for n, c in self.halfplanes
            ],
            "axis_flags": list(self.axis_flags),
        }


@dataclass(frozen=True)
class BoundedOrigin(Polyhedral):
    """Bounded domain containing the origin, with polyhedral log image."""

    kind = "bounded_origin"

    def __post_init__(self):
        object.__setattr__(self, "axis_flags", (True, True))
        super().__post_init__()
        if any(sgn(c) < 0 for n, _ in self.halfplanes for c in n):
            raise UnsupportedModel("normals of a domain containing the origin are non-negative")

    def to_json(self):
        data = super().to_json()
        data.pop("axis_flags")
        return data


MODEL_TYPES = (HyperbolicModel, ParabolicModel, Model4, Model5, Model6, Polyhedral, BoundedOrigin)


# ---------------------------------------------------------------------------
# queries


def recession_cone(model: LogDomainModel) -> Cone2:
    return model.cone()


def axis_count(model: LogDomainModel) -> int:
    """Number of coordinate axes meeting the domain (checked against the cone)."""
    met = model.met_axes()
    cone = model.cone()
    for j, flag in enumerate(met):
        e = (Fraction(-1), Fraction(0)) if j == 0 else (Fraction(0), Fraction(-1))
        if flag and not cone.contains(e):
            raise InconsistentAxisFlags(f"axis {j + 1} is flagged as met but -e{j + 1} is not in the cone")
    return sum(met)


def is_hyperbolic_domain(model: LogDomainModel) -> bool:
    """Line-free recession cone (met slices are hyperbolic by construction or taken on trust)."""
    cone = model.cone()
    if not cone.line_free:
        return False
    if isinstance(model, BoundedOrigin):
        return cone == Cone2.wedge((-1, 0), (0, -1))
    return True


def contains_log(model: LogDomainModel, x: Vec) -> bool:
    return model.contains_log(x)


def contains(model: LogDomainModel, z: Sequence[complex]) -> bool:
    return model.contains(z)


def _is_exact_btilde(b) -> bool:
    return vec_exact(b)


def apply_monomial(model: LogDomainModel, A: Mat2Z, btilde: Vec) -> LogDomainModel:
    """Image of the model under ``x -> A x + btilde`` (a monomial biholomorphism)."""
    A.require_unimodular()
    btilde = (simplify(btilde[0]), simplify(btilde[1]))

    def move(x):
        if _all_exact(x, btilde):
            return vadd(A.apply(x), btilde)
        return _affine_float(A, x, btilde)

    if isinstance(model, HyperbolicModel):
        A2 = A @ model.matrix @ A.inverse()
        v, w = A.apply(model.v), A.apply(model.w)
        t_sign = model.t_sign
        canonical_v = eigensystem(A2).vectors[0]
        if sgn(cross(canonical_v, v)) == 0 and sgn(dot(canonical_v, v)) < 0:
            v, t_sign = vscale(-1, v), -t_sign
        return HyperbolicModel(A2, model.phi, t_sign, v, w, move(model.offset))
    if isinstance(model, ParabolicModel):
        A2 = A @ model.matrix @ A.inverse()
        return ParabolicModel(A2, model.psi, A.apply(model.v), A.apply(model.w), move(model.offset))
    if isinstance(model, _Framed):
        frame = model.frame.compose(A, btilde)
        new = replace(model, frame=frame)
        new.met_axes()
        return new
    if isinstance(model, Polyhedral):
        met = model.met_axes()
        for j in (0, 1):
            if met[j]:
                col = A.column(j)
                if col not in ((1, 0), (0, 1)):
                    raise UnsupportedImage(f"{A} does not extend across the met axis {j + 1}")
        AinvT = A.inverse().transpose()
        hps = []
        for n, c in model.halfplanes:
            n2 = AinvT.apply(n)
            if _all_exact(n2, btilde) and is_exact(c):
                c2 = simplify(c + dot(n2, btilde))
            else:
                c2 = float(c) + float(n2[0]) * float(btilde[0]) + float(n2[1]) * float(btilde[1])
            hps.append((n2, c2))
        flags = [False, False]
        for j in (0, 1):
            if met[j]:
                flags[0 if A.column(j) == (1, 0) else 1] = True
        if isinstance(model, BoundedOrigin):
            return BoundedOrigin(tuple(hps))
        return Polyhedral(tuple(hps), tuple(flags))
    raise UnsupportedImage(f"cannot transform {type(model).__name__}")


# ---------------------------------------------------------------------------
# recognition of the one-axis polyhedral half-strip


def recognize_strip(model: Polyhedral) -> Optional[Scalar]:
    """If a one-axis polyhedral model is an admissible image of ``disc x P(r, 1)``, return ``r``.

    The image of ``{x1 < 0, log r < x2 < 0}`` under an admissible map has
    one constraint whose normal points along the met axis (with an integer
    slope ratio) and one or two constraints normal to the other axis.
    """
    met = model.met_axes()
    if sum(met) != 1:
        return None
    k = 0 if met[0] else 1
    o = 1 - k
    hps = irredundant(model.halfplanes)
    side, across = [], []
    for n, c in hps:
        if n[k] == 0:
            across.append((n, c))
        else:
            side.append((n, c))
    if len(side) != 1 or not 1 <= len(across) <= 2:
        return None
    n3 = side[0][0]
    if not sgn(n3[k]) > 0:
        return None
    ratio = simplify(n3[o] / n3[k])
    if not (isinstance(ratio, Fraction) and ratio.denominator == 1):
        return None
    if len(across) == 1:
        return Fraction(0)
    (na, ca), (nb, cb) = across
    if sgn(na[o]) == sgn(nb[o]):
        return None
    bounds = sorted([simplify(ca / na[o]), simplify(cb / nb[o])], key=float)
    width = float(bounds[1]) - float(bounds[0])
    return math.exp(-width)


# ---------------------------------------------------------------------------
# serialization


def model_from_json(data: dict) -> LogDomainModel:
    kind = data["kind"]
    if kind == "hyperbolic_model":
        sign = data.get("t_sign", "+")
        return HyperbolicModel(
            Mat2Z.from_rows(data["matrix"]),
            phi_from_json(data["phi"]),
            1 if sign in ("+", 1) else -1,
            _opt_vec(data.get("v")),
            _opt_vec(data.get("w")),
            _opt_vec(data.get("offset")) or (Fraction(0), Fraction(0)),
        )
    if kind == "parabolic_model":
        return ParabolicModel(
            Mat2Z.from_rows(data["matrix"]),
            psi_from_json(data["psi"]),
            _opt_vec(data.get("v")),
            _opt_vec(data.get("w")),
            _opt_vec(data.get("offset")) or (Fraction(0), Fraction(0)),
        )
    frame = _frame_from_json(data.get("frame"))
    if kind == "model4":
        return Model4(frame=frame, r=parse_scalar(data.get("r", 0)))
    if kind == "model5":
        return Model5(frame=frame, p=parse_scalar(data.get("p", 1)))
    if kind == "model6":
        return Model6(frame=frame)
    if kind in ("polyhedral", "bounded_origin"):
        hps = tuple(
            (tuple(parse_scalar(c) for c in h["normal"]), parse_scalar(h["offset"])) for h in data["halfplanes"]
        )
        if kind == "bounded_origin":
            return BoundedOrigin(hps)
        return Polyhedral(hps, tuple(data.get("axis_flags", (False, False))))
    raise ValueError(f"unknown model kind {kind!r}")


def _opt_vec(v):
    if v is None:
        return None
    return (parse_scalar(v[0]), parse_scalar(v[1]))


def model_to_json(model: LogDomainModel) -> dict:
    return model.to_json()
