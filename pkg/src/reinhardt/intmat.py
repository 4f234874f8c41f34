"""2x2 integer matrices: exact arithmetic, spectra and conjugacy-type tags."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

from .errors import ComplexSpectrum, NonUnimodular
from .surd import (
    Direction2,
    QuadraticSurd,
    Scalar,
    Vec,
    simplify,
    solve_basis,
    vadd,
    vscale,
)


@dataclass(frozen=True)
class Mat2Z:
    """Row-major integer matrix ``[[a, b], [c, d]]``.

    Any integer matrix is representable; :attr:`unimodular` flags whether
    it can serve as the exponent matrix of an algebraic automorphism.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"entry {name}={value!r} is not an integer")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Mat2Z":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> "Mat2Z":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_columns(cls, col0: Sequence[int], col1: Sequence[int]) -> "Mat2Z":
        return cls(col0[0], col1[0], col0[1], col1[1])

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    to_json = rows

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def unimodular(self) -> bool:
        return abs(self.det) == 1

    def require_unimodular(self) -> "Mat2Z":
        if not self.unimodular:
            raise NonUnimodular(f"det {self.rows()} = {self.det}")
        return self

    def column(self, j: int) -> Tuple[int, int]:
        return (self.a, self.c) if j == 0 else (self.b, self.d)

    def transpose(self) -> "Mat2Z":
        return Mat2Z(self.a, self.c, self.b, self.d)

    def inverse(self) -> "Mat2Z":
        det = self.require_unimodular().det
        return Mat2Z(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def __neg__(self):
        return Mat2Z(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other: "Mat2Z") -> "Mat2Z":
        return Mat2Z(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Mat2Z") -> "Mat2Z":
        return self + (-other)

    def __matmul__(self, other):
        if isinstance(other, Mat2Z):
            return Mat2Z(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        return self.apply(other)

    def apply(self, v: Vec) -> Vec:
        x, y = v
        return (simplify(self.a * x + self.b * y), simplify(self.c * x + self.d * y))

    def __pow__(self, k: int) -> "Mat2Z":
        base = self if k >= 0 else self.inverse()
        result = Mat2Z.identity()
        k = abs(k)
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def is_identity(self) -> bool:
        return self == Mat2Z.identity()

    def __str__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


IDENTITY = Mat2Z.identity()
MINUS_IDENTITY = -IDENTITY


class MatKind(str, enum.Enum):
    IDENTITY = "Identity"
    MINUS_IDENTITY = "MinusIdentity"
    ELLIPTIC = "EllipticFiniteOrder"
    PARABOLIC_UNIPOTENT = "ParabolicUnipotent"
    PARABOLIC_MINUS = "ParabolicMinus"
    REFLECTION = "Reflection"
    HYPERBOLIC = "Hyperbolic"
    HYPERBOLIC_NEGATIVE = "HyperbolicNegative"


@dataclass(frozen=True)
class MatClass:
    kind: MatKind
    order: Optional[int] = None  # finite order, when there is one
    lam: Optional[QuadraticSurd] = None  # eigenvalue of largest modulus for hyperbolic kinds
    minus_identity_power: Optional[int] = None  # least j with A^j = -I

    @property
    def finite_order(self) -> bool:
        return self.order is not None


def classify(A: Mat2Z) -> MatClass:
    """Tag a unimodular matrix by (det, trace)."""
    A.require_unimodular()
    det, tr = A.det, A.trace
    if det == 1:
        if tr == 2:
            if A.is_identity():
                return MatClass(MatKind.IDENTITY, order=1)
            return MatClass(MatKind.PARABOLIC_UNIPOTENT)
        if tr == -2:
            if A == MINUS_IDENTITY:
                return MatClass(MatKind.MINUS_IDENTITY, order=2, minus_identity_power=1)
            return MatClass(MatKind.PARABOLIC_MINUS)
        if abs(tr) < 2:
            # characteristic polynomials x^2+1, x^2-x+1, x^2+x+1
            order, minus = {0: (4, 2), 1: (6, 3), -1: (3, None)}[tr]
            return MatClass(MatKind.ELLIPTIC, order=order, minus_identity_power=minus)
        lam = _big_root(tr, det)
        if tr > 2:
            return MatClass(MatKind.HYPERBOLIC, lam=lam)
        return MatClass(MatKind.HYPERBOLIC_NEGATIVE, lam=lam)
    # det == -1: eigenvalues (tr +- sqrt(tr^2+4))/2, product -1
    if tr == 0:
        return MatClass(MatKind.REFLECTION, order=2)
    return MatClass(MatKind.HYPERBOLIC_NEGATIVE, lam=_big_root(tr, det))


def _roots(tr: int, det: int) -> Tuple[QuadraticSurd, QuadraticSurd]:
    disc = tr * tr - 4 * det
    if disc < 0:
        raise ComplexSpectrum(f"trace {tr}, det {det}")
    r = QuadraticSurd.sqrt(disc)
    half = Fraction(1, 2)
    return (QuadraticSurd(tr) + r) * half, (QuadraticSurd(tr) - r) * half


def _big_root(tr: int, det: int) -> QuadraticSurd:
    r1, r2 = _roots(tr, det)
    return r1 if abs(r1) >= abs(r2) else r2


@dataclass(frozen=True)
class EigenSystem:
    """Exact spectral data of a unimodular matrix with real spectrum.

    For diagonalisable matrices ``eigenvalues[i]`` belongs to
    ``vectors[i]``, ordered by decreasing modulus.  In the Jordan case
    ``vectors == (v, w)`` with ``A w = e w`` and ``A v = e v + w``.
    """

    kind: MatKind
    eigenvalues: Tuple[QuadraticSurd, QuadraticSurd]
    vectors: Tuple[Vec, Vec]
    jordan: bool = False

    @property
    def directions(self) -> Tuple[Direction2, Direction2]:
        return Direction2.of(self.vectors[0]), Direction2.of(self.vectors[1])


def _eigenvector(A: Mat2Z, mu) -> Vec:
    if A.b != 0:
        vec = (A.b, mu - A.a)
    elif A.c != 0:
        vec = (mu - A.d, A.c)
    elif mu == A.a:
        vec = (1, 0)
    else:
        vec = (0, 1)
    return Direction2.of(vec).line().vec


def eigensystem(A: Mat2Z) -> EigenSystem:
    cls = classify(A)
    kind = cls.kind
    if kind is MatKind.ELLIPTIC:
        raise ComplexSpectrum(f"{A} has non-real eigenvalues")
    if kind in (MatKind.IDENTITY, MatKind.MINUS_IDENTITY):
        e = QuadraticSurd(1 if kind is MatKind.IDENTITY else -1)
        return EigenSystem(kind, (e, e), ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))
    if kind in (MatKind.PARABOLIC_UNIPOTENT, MatKind.PARABOLIC_MINUS):
        e = 1 if kind is MatKind.PARABOLIC_UNIPOTENT else -1
        w, v = _jordan_pair(A, e)
        return EigenSystem(kind, (QuadraticSurd(e), QuadraticSurd(e)), (v, w), jordan=True)
    r1, r2 = _roots(A.trace, A.det)
    if abs(r2) > abs(r1) or (abs(r1) == abs(r2) and r2 > r1):
        r1, r2 = r2, r1
    return EigenSystem(kind, (r1, r2), (_eigenvector(A, r1), _eigenvector(A, r2)))


def _jordan_pair(A: Mat2Z, e: int) -> Tuple[Vec, Vec]:
    """Primitive ``w`` spanning ker(A - eI) and ``v`` with ``(A - eI) v = w``."""
    N = A - Mat2Z(e, 0, 0, e)
    # N is nilpotent of rank one, so its nonzero columns are multiples of w
    j = 0 if N.column(0) != (0, 0) else 1
    col = N.column(j)
    w = Direction2.of(col).line().vec
    mu = Fraction(col[0]) / w[0] if w[0] != 0 else Fraction(col[1]) / w[1]
    v = (Fraction(1 if j == 0 else 0) / mu, Fraction(1 if j == 1 else 0) / mu)
    return w, v


def affine_step(A: Mat2Z, btilde: Vec, x: Vec) -> Vec:
    return vadd(A.apply(x), btilde)


def orbit(A: Mat2Z, btilde: Vec, x: Vec, k: int) -> Vec:
    """k-fold iterate of ``x -> A x + btilde`` (negative k uses the inverse map)."""
    if k >= 0:
        for _ in range(k):
            x = affine_step(A, btilde, x)
        return x
    Ainv = A.inverse()
    for _ in range(-k):
        x = Ainv.apply((x[0] - btilde[0], x[1] - btilde[1]))
    return x


def orbit_parabolic_closed(w: Vec, v: Vec, beta2: Scalar, alpha1: Scalar, alpha2: Scalar, k: int) -> Vec:
    """Closed form of ``k`` steps of ``x -> A x + beta2 v`` when ``Aw=w, Av=v+w``."""
    x = vadd(vscale(alpha1, w), vscale(alpha2, v))
    step = vadd(vscale(alpha2, w), vscale(beta2, v))
    return vadd(vadd(x, vscale(k, step)), vscale(Fraction(k * (k - 1), 2) * beta2, w))


def orbit_hyperbolic_closed(lam: QuadraticSurd, v: Vec, w: Vec, t: Scalar, s: Scalar, k: int) -> Vec:
    """``A^k (t v + s w) = t lam^k v + s lam^-k w``."""
    lk = lam**k
    return vadd(vscale(t * lk, v), vscale(s / lk, w))


def fixed_point(A: Mat2Z, btilde: Vec) -> Optional[Vec]:
    """Solve ``A x + btilde = x``; None when ``A - I`` is singular (unless trivially solvable)."""
    N = A - IDENTITY
    det = N.det
    if det == 0:
        if A.is_identity() and btilde[0] == 0 and btilde[1] == 0:
            return (Fraction(0), Fraction(0))
        return None
    rhs = (-simplify(btilde[0]), -simplify(btilde[1]))
    det = Fraction(det)
    x = (N.d * rhs[0] - N.b * rhs[1]) / det
    y = (-N.c * rhs[0] + N.a * rhs[1]) / det
    return simplify(x), simplify(y)


def parabolic_normal_form(A: Mat2Z, btilde: Vec) -> Tuple[Vec, Scalar, Scalar]:
    """For unipotent ``A`` return ``(x0, beta1, beta2)`` with ``A x0 + btilde = x0 + beta2 v``."""
    es = eigensystem(A)
    if es.kind is not MatKind.PARABOLIC_UNIPOTENT:
        raise ValueError(f"{A} is not unipotent")
    v, w = es.vectors
    beta1, beta2 = solve_basis(w, v, btilde)
    x0 = vscale(-beta1, v)
    return x0, beta1, beta2


def dloussky(ks: Iterable[int]) -> Mat2Z:
    """Product of the factors ``[[0, 1], [k, 1]]`` in order (may be non-unimodular)."""
    result = Mat2Z.identity()
    for k in ks:
        if k <= 0:
            raise ValueError("Dloussky factors need positive k")
        result = result @ Mat2Z(0, 1, k, 1)
    return result
