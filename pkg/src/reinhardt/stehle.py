"""Explicit plurisubharmonic exhaustion functions and numerical checks of
the hypotheses of Stehlé's criterion (psh, exhaustion, ``u o F - u``
bounded above for automorphisms ``F``).

Everything is vectorised over numpy arrays of complex points ``(z1, z2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .autgroup import AffineMap2, model_generators
from .convexlog import ParabolicModel, PsiCanonical, apply_monomial
from .errors import AutomorphismRejected, GridTouchesBoundary, OutsideDomain, UnsupportedModel
from .intmat import Mat2Z

DEFAULT_SEED = 0xC0EFFEE
PSH_TOL = 1e-6
# samples approach the boundary up to a relative gap of 10**-BOUNDARY_DEPTH;
# rho(t) = -1/t turns rounding errors of size eps into eps/t^2, so deeper
# sampling measures float noise rather than u o F - u
BOUNDARY_DEPTH = 5

Array = np.ndarray
AutFn = Callable[[Array, Array], Tuple[Array, Array]]


def rho(t):
    """Convex increasing ``[-inf, 0) -> [0, inf)`` with a pole at 0."""
    return -1.0 / t


# ---------------------------------------------------------------------------
# domains: |z1| in a range, lo(|z1|) < |z2| < hi(|z1|)


@dataclass
class RadialDomain:
    name: str
    hi: Callable[[Array], Array]
    lo: Callable[[Array], Array] = lambda r: np.zeros_like(r)
    rho_max: float = math.inf
    z1_zero_ok: bool = True
    z2_zero_ok: bool = False
    grid_rho: Tuple[float, float] = (0.05, 0.9)

    def inside(self, z1: Array, z2: Array) -> Array:
        r1, r2 = np.abs(z1), np.abs(z2)
        with np.errstate(all="ignore"):
            ok = r1 < self.rho_max
            if not self.z1_zero_ok:
                ok &= r1 > 0
            lo = self.lo(r1)
            above = (r2 > lo) | (self.z2_zero_ok & (r2 == 0) & (lo == 0))
            ok &= above & (r2 < self.hi(r1))
        return ok

    def dist(self, z1: Array, z2: Array) -> Array:
        """Lower-bound proxy for the distance to the boundary and to both axes."""
        r1, r2 = np.abs(z1), np.abs(z2)
        eps = 1e-6 * np.maximum(r1, 1e-3)
        with np.errstate(all="ignore"):
            d_hi = (self.hi(r1) - r2) / np.sqrt(1 + ((self.hi(r1 + eps) - self.hi(np.abs(r1 - eps))) / (2 * eps)) ** 2)
            lo = self.lo(r1)
            d_lo = (r2 - lo) / np.sqrt(1 + ((self.lo(r1 + eps) - self.lo(np.abs(r1 - eps))) / (2 * eps)) ** 2)
            d = np.minimum(np.minimum(d_hi, d_lo), np.minimum(r1, r2))
            if math.isfinite(self.rho_max):
                d = np.minimum(d, self.rho_max - r1)
        return d

    def log_dist(self, z1: Array, z2: Array) -> Array:
        """Distance from ``(log|z1|, log|z2|)`` to the boundary of the logarithmic image."""
        x1 = np.log(np.abs(z1))
        x2 = np.log(np.abs(z2))
        e = 1e-6
        with np.errstate(all="ignore"):
            def edge(fn):
                val = np.log(fn(np.exp(x1)))
                slope = (np.log(fn(np.exp(x1 + e))) - np.log(fn(np.exp(x1 - e)))) / (2 * e)
                return val, np.sqrt(1 + slope**2)

            top, norm_top = edge(self.hi)
            d = (top - x2) / norm_top
            bottom, norm_bottom = edge(self.lo)
            d = np.where(np.isfinite(bottom), np.minimum(d, (x2 - bottom) / norm_bottom), d)
            if math.isfinite(self.rho_max):
                d = np.minimum(d, math.log(self.rho_max) - x1)
        return d

    def polar_grid(self, n: int, q_range=(0.1, 0.9), rho_range=None) -> Tuple[Array, Array]:
        """``n^4`` points: |z1|, arg z1, relative |z2| position, arg z2."""
        r_lo, r_hi = rho_range or self.grid_rho
        radii = np.linspace(r_lo, r_hi, n)
        args = np.linspace(0, 2 * np.pi, n, endpoint=False)
        qs = np.linspace(q_range[0], q_range[1], n)
        R1, A1, Q, A2 = np.meshgrid(radii, args, qs, args + 0.1, indexing="ij")
        R1, A1, Q, A2 = (x.ravel() for x in (R1, A1, Q, A2))
        lo, hi = self.lo(R1), self.hi(R1)
        R2 = lo + Q * (hi - lo)
        return R1 * np.exp(1j * A1), R2 * np.exp(1j * A2)

    def sample(self, rng: np.random.Generator, n: int) -> Tuple[Array, Array]:
        """Seeded points, a third of them crowding the boundary."""
        if math.isfinite(self.rho_max):
            r1 = self.rho_max * np.sqrt(rng.uniform(0, 1, n))
            near = rng.uniform(0, 1, n) < 1 / 3
            r1[near] = self.rho_max * (1 - 10 ** (-rng.uniform(1, BOUNDARY_DEPTH, near.sum())))
        else:
            r1 = np.exp(rng.uniform(-4, 2, n))
        if not self.z1_zero_ok:
            r1 = np.maximum(r1, 1e-300)
        q = rng.uniform(0, 1, n)
        mode = rng.integers(0, 3, n)
        q[mode == 1] = 1 - 10 ** (-rng.uniform(1, BOUNDARY_DEPTH, (mode == 1).sum()))
        q[mode == 2] = 10 ** (-rng.uniform(1, BOUNDARY_DEPTH, (mode == 2).sum()))
        lo, hi = self.lo(r1), self.hi(r1)
        r2 = lo + q * (hi - lo)
        z1 = r1 * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        z2 = r2 * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        keep = self.inside(z1, z2)
        return z1[keep], z2[keep]


def disc_annulus(r: float) -> RadialDomain:
    """Unit disc times ``r < |z2| < 1``."""
    return RadialDomain(
        "disc x annulus", hi=lambda x: np.ones_like(x), lo=lambda x: np.full_like(x, float(r)), rho_max=1.0
    )


def model5_domain(p: float) -> RadialDomain:
    p = float(p)
    return RadialDomain(
        "model5", hi=lambda x: np.power(np.clip(1 - x * x, 0, None), p / 2), rho_max=1.0
    )


def model6_closure() -> RadialDomain:
    """``|z2| < exp(-|z1|^2)`` including the axis ``z2 = 0``."""
    return RadialDomain("model6 closure", hi=lambda x: np.exp(-x * x), z2_zero_ok=True, grid_rho=(0.1, 1.2))


def normalize_parabolic(model: ParabolicModel) -> Tuple[ParabolicModel, Mat2Z]:
    """Monomial change making the recession ray point along ``(0, -1)``."""
    d = model.cone().dirs[0].vec
    p, q = int(d[0]), int(d[1])
    # (a, b) with a p + b q = -1 via extended gcd
    g, x, y = _egcd(p, q)
    a, b = -x * g, -y * g  # g = +-1
    M = Mat2Z(-q, p, a, b)
    if M.det != 1:
        raise AssertionError("normalising matrix must be unimodular")
    return apply_monomial(model, M, (0, 0)), M


def _egcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


class ParabolicProfile:
    """Upper boundary ``log|z2| < H(log|z1|)`` of a normalised parabolic model."""

    def __init__(self, model: ParabolicModel):
        if tuple(model.cone().dirs[0].vec) != (0, -1):
            raise UnsupportedModel("normalise the parabolic model first")
        self.model = model
        self.v = (float(model.v[0]), float(model.v[1]))
        self.x0 = (float(model.offset[0]), float(model.offset[1]))
        self.side = model.side
        self.psi = model.psi

    def psi_vec(self, t: Array) -> Array:
        if isinstance(self.psi, PsiCanonical):
            b = float(self.psi.beta2)
            return t * (t - b) / (2 * b)
        return np.vectorize(self.psi.value, otypes=[float])(t)

    def H(self, x1: Array) -> Array:
        t = (x1 - self.x0[0]) / self.v[0]
        return self.x0[1] + t * self.v[1] - self.side * self.psi_vec(t)

    def hi(self, r: Array) -> Array:
        with np.errstate(divide="ignore"):
            return np.where(r > 0, np.exp(self.H(np.log(np.where(r > 0, r, 1.0)))), 0.0)


def parabolic_closure(model: ParabolicModel) -> Tuple[RadialDomain, ParabolicProfile]:
    prof = ParabolicProfile(model)
    dom = RadialDomain(
        "parabolic closure", hi=prof.hi, z1_zero_ok=False, z2_zero_ok=True, grid_rho=(math.exp(-1.5), math.exp(1.5))
    )
    return dom, prof


# ---------------------------------------------------------------------------
# exhaustion functions


@dataclass
class ExhaustionFn:
    """A function given as the maximum of smooth branches on a domain."""

    name: str
    domain: RadialDomain
    branches: Callable[[Array, Array], List[Array]]
    params: Dict[str, object] = field(default_factory=dict)

    def values(self, z1: Array, z2: Array) -> Array:
        return np.max(np.vstack(self.branches(z1, z2)), axis=0)

    def __call__(self, z: Sequence[complex]) -> float:
        z1, z2 = np.array([complex(z[0])]), np.array([complex(z[1])])
        if not self.domain.inside(z1, z2)[0]:
            raise OutsideDomain(f"{z} is not in the domain of {self.name}")
        with np.errstate(divide="ignore"):
            return float(self.values(z1, z2)[0])

    def to_json(self):
        return {"name": self.name, "params": {k: str(v) for k, v in self.params.items()}}


def _log_abs(z: Array) -> Array:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z))


def u4(r) -> ExhaustionFn:
    """``max{-log(1-|z1|^2), -log dist(z2, C \\ P(r,1))}`` with the annulus distance in closed form."""
    rf = float(r)

    def branches(z1, z2):
        a2 = np.abs(z2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return [-np.log1p(-np.abs(z1) ** 2), -np.log(a2 - rf), -np.log1p(-a2)]

    return ExhaustionFn("U4", disc_annulus(rf), branches, {"r": r})


def u5_level(z1: Array, z2: Array, p: float) -> Array:
    """``log|z2| - (p/2) log(1-|z1|^2)``: negative on the domain, 0 on its outer boundary."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return _log_abs(z2) - p / 2 * np.log1p(-np.abs(z1) ** 2)


def u5(p) -> ExhaustionFn:
    """``max{rho(log|z2| - (p/2) log(1-|z1|^2)), -log|z2|}``.

    The first branch goes through ``rho`` so that it blows up at the outer
    boundary ``|z2| = (1-|z1|^2)^(p/2)``; without it the maximum stays
    bounded there (see :func:`u5_literal`).
    """
    pf = float(p)

    def branches(z1, z2):
        with np.errstate(divide="ignore", invalid="ignore"):
            return [rho(u5_level(z1, z2, pf)), -_log_abs(z2)]

    return ExhaustionFn("U5", model5_domain(pf), branches, {"p": p})


def u5_literal(p) -> ExhaustionFn:
    """``max{log|z2| - (p/2) log(1-|z1|^2), -log|z2|}`` taken verbatim.

    Plurisubharmonic with bounded ``u o F - u``, but not an exhaustion: at
    fixed ``z1`` and ``|z2|`` tending to the outer boundary it tends to
    ``max{0, -log|z2|}``.
    """
    pf = float(p)

    def branches(z1, z2):
        with np.errstate(divide="ignore", invalid="ignore"):
            return [u5_level(z1, z2, pf), -_log_abs(z2)]

    return ExhaustionFn("U5Literal", model5_domain(pf), branches, {"p": p})


def utilde6_values(z1: Array, z2: Array) -> Array:
    return _log_abs(z2) + np.abs(z1) ** 2


def utilde6() -> ExhaustionFn:
    """``log|z2| + |z1|^2``, invariant under every automorphism of the closure."""
    return ExhaustionFn("UTilde6", model6_closure(), lambda z1, z2: [utilde6_values(z1, z2)])


def rho_utilde6() -> ExhaustionFn:
    def branches(z1, z2):
        with np.errstate(divide="ignore"):
            return [rho(utilde6_values(z1, z2))]

    return ExhaustionFn("RhoUTilde6", model6_closure(), branches)


def u6() -> ExhaustionFn:
    """``max{rho(utilde), log^+|z1|}``; ``rho(-inf) = 0`` on the axis ``z2 = 0``."""

    def branches(z1, z2):
        with np.errstate(divide="ignore"):
            return [rho(utilde6_values(z1, z2)), _log_abs(z1), np.zeros(np.shape(z1))]

    return ExhaustionFn("U6", model6_closure(), branches)


def u_parabolic(model: ParabolicModel) -> ExhaustionFn:
    """``max{rho(log|z2| - H(log|z1|)), log|z1|, -log|z1|}`` on the closure of a parabolic model.

    Models whose recession ray is not ``(0, -1)`` are first moved there by a
    monomial change of coordinates; the function lives on the normalised model.
    """
    change = None
    if tuple(model.cone().dirs[0].vec) != (0, -1):
        model, change = normalize_parabolic(model)
    dom, prof = parabolic_closure(model)

    def branches(z1, z2):
        lz1 = _log_abs(z1)
        with np.errstate(divide="ignore"):
            ut = _log_abs(z2) - prof.H(lz1)
            return [rho(ut), lz1, -lz1]

    params = {"beta2": model.beta2}
    if change is not None:
        params["normalizing_matrix"] = change.rows()
    fn = ExhaustionFn("UParabolic", dom, branches, params)
    fn.profile = prof
    return fn


def neg_square_control() -> ExhaustionFn:
    """Planted non-plurisubharmonic control ``-|z1|^2`` (Levi form -1 along z1)."""
    return ExhaustionFn("NegSquare", disc_annulus(0.25), lambda z1, z2: [-np.abs(z1) ** 2])


def eval_u(fn: ExhaustionFn, z: Sequence[complex]) -> float:
    return fn(z)


# ---------------------------------------------------------------------------
# plurisubharmonicity


DIRECTIONS = [
    (1, 0),
    (0, 1),
    (1, 1),
    (1, -1),
    (1, 1j),
    (1, -1j),
    (2, 1),
    (1, 2j),
]


def _unit_directions():
    out = []
    for a, b in DIRECTIONS:
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        out.append((complex(a) / n, complex(b) / n))
    return out


_STENCIL = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))


@dataclass
class PshReport:
    min_levi: float
    points: int
    evaluated: int
    skipped_kinks: int
    h_min: float
    h_max: float
    argmin: Optional[Tuple[complex, complex, int]] = None

    @property
    def passed(self) -> bool:
        return self.min_levi >= -PSH_TOL

    def to_json(self):
        out = {
            "min_levi": self.min_levi,
            "points": self.points,
            "evaluated": self.evaluated,
            "skipped_kinks": self.skipped_kinks,
            "h_min": self.h_min,
            "h_max": self.h_max,
            "passed": self.passed,
        }
        if self.argmin is not None:
            z1, z2, k = self.argmin
            out["argmin"] = {"z1": [z1.real, z1.imag], "z2": [z2.real, z2.imag], "direction": k}
        return out


def check_psh(fn: ExhaustionFn, z1: Array, z2: Array, h_rel: float = 0.02, tol: float = PSH_TOL) -> PshReport:
    """Minimum over grid points and 8 complex directions of the Levi form estimate.

    For a direction ``(a, b)`` the function is restricted to the holomorphic
    curve ``zeta -> (z1 exp(a zeta), z2 exp(b zeta))`` whose tangent at 0 is
    ``(a z1, b z2)``.  The Laplacian of the restriction, estimated with a
    fourth-order five-point stencil along both real axes, equals four times
    the Levi form on that tangent; it is reported per unit tangent.  Steps
    scale with the distance to the boundary in logarithmic coordinates, which
    keeps the stencil well conditioned near the axes.  Points where the
    maximising branch changes inside the stencil are skipped (a maximum of
    psh branches is psh).
    """
    z1, z2 = np.asarray(z1, complex), np.asarray(z2, complex)
    dom = fn.domain
    if not dom.inside(z1, z2).all():
        raise GridTouchesBoundary("grid contains points outside the domain")
    if not ((np.abs(z1) > 0) & (np.abs(z2) > 0)).all():
        raise GridTouchesBoundary("grid points on a coordinate axis")
    d = dom.log_dist(z1, z2)
    if not (d > 0).all():
        raise GridTouchesBoundary("grid touches the boundary")
    h = h_rel * np.minimum(d, 1.0)
    best = math.inf
    argmin = None
    evaluated = skipped = 0
    idx_all = np.arange(z1.size)
    for k, (a, b) in enumerate(_unit_directions()):
        tangent2 = np.abs(a * z1) ** 2 + np.abs(b * z2) ** 2
        lap = np.zeros(z1.shape)
        valid = np.ones(z1.shape, bool)
        for unit in (1.0, 1j):
            acc = np.zeros(z1.shape)
            active = None
            centre = None
            for step, weight in sorted(_STENCIL, key=lambda sw: abs(sw[0])):
                zeta = step * h * unit
                w1 = z1 * np.exp(a * zeta)
                w2 = z2 * np.exp(b * zeta)
                if not dom.inside(w1, w2).all():
                    raise GridTouchesBoundary("finite-difference stencil leaves the domain")
                with np.errstate(divide="ignore", invalid="ignore"):
                    br = np.vstack(fn.branches(w1, w2))
                idx = np.argmax(br, axis=0)
                if active is None:
                    active = idx
                    centre = br[active, idx_all]
                    continue  # weights sum to zero, so the centre term drops out
                valid &= idx == active
                acc += weight * (br[active, idx_all] - centre)
            lap += acc / (12 * h * h)
        levi = lap / (4 * tangent2)
        evaluated += int(valid.sum())
        skipped += int((~valid).sum())
        if valid.any():
            masked = np.where(valid, levi, np.inf)
            i = int(np.argmin(masked))
            if masked[i] < best:
                best = float(masked[i])
                argmin = (complex(z1[i]), complex(z2[i]), k)
    return PshReport(best, int(z1.size), evaluated, skipped, float(h.min()), float(h.max()), argmin)


# ---------------------------------------------------------------------------
# automorphism families (vectorised)


@dataclass
class Automorphism:
    name: str
    apply: AutFn
    bound: Optional[float] = None  # analytic upper bound for u o F - u, when known


def mobius(alpha: complex, beta: complex) -> Callable[[Array], Array]:
    return lambda z: alpha * (z - beta) / (1 - np.conj(beta) * z)


def model4_automorphism(alpha, beta, rot2, invert: bool = False, r: float = 0.0) -> Automorphism:
    """``(a(z1), b(z2))``: a disc automorphism and an annulus automorphism."""
    a = mobius(alpha, beta)

    def apply(z1, z2):
        w2 = rot2 * z2 if not invert else rot2 * float(r) / z2
        return a(z1), w2

    bound = math.log((1 + abs(beta)) / (1 - abs(beta)))
    if invert:
        bound += -math.log(float(r))
    return Automorphism(f"model4(alpha={alpha:.3f}, beta={beta:.3f}, invert={invert})", apply, bound)


def model5_automorphism(alpha, beta, gamma, p) -> Automorphism:
    """``(alpha (z1 - beta)/(1 - conj(beta) z1), gamma (1-|beta|^2)^(p/2) (1 - conj(beta) z1)^(-p) z2)``."""
    pf = float(p)
    a = mobius(alpha, beta)

    def apply(z1, z2):
        factor = gamma * (1 - abs(beta) ** 2) ** (pf / 2) / (1 - np.conj(beta) * z1) ** pf
        return a(z1), factor * z2

    bound = pf / 2 * math.log((1 + abs(beta)) / (1 - abs(beta)))
    return Automorphism(f"model5(beta={beta:.3f})", apply, bound)


def model6_automorphism(alpha, beta, gamma) -> Automorphism:
    """``(alpha z1 + beta, gamma exp(-2 alpha conj(beta) z1 - |beta|^2) z2)``."""

    def apply(z1, z2):
        return alpha * z1 + beta, gamma * np.exp(-2 * alpha * np.conj(beta) * z1 - abs(beta) ** 2) * z2

    return Automorphism(f"model6(beta={beta:.3f})", apply, math.log1p(abs(beta)))


def monomial_automorphism(affine: AffineMap2, phases=(1.0, 1.0), name: str = "monomial") -> Automorphism:
    """``z -> (b1 z^{A^1}, b2 z^{A^2})`` with ``|b| = exp(shift)``."""
    A = affine.matrix
    b1 = math.exp(float(affine.shift[0])) * phases[0]
    b2 = math.exp(float(affine.shift[1])) * phases[1]

    def power(z, k):
        if k >= 0:
            return z**k
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1 / z ** (-k)

    def apply(z1, z2):
        return b1 * power(z1, A.a) * power(z2, A.b), b2 * power(z1, A.c) * power(z2, A.d)

    return Automorphism(name, apply, None)


def _unit(rng) -> complex:
    return complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))


def _disc_point(rng, radius: float = 0.9) -> complex:
    return complex(radius * math.sqrt(rng.uniform(0, 1)) * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def random_family(fn: ExhaustionFn, rng: np.random.Generator, count: int = 10) -> List[Automorphism]:
    """Random members of the automorphism family matching ``fn``'s domain."""
    auts: List[Automorphism] = []
    name = fn.name
    if name == "U4":
        r = float(fn.params["r"])
        # quarter-turn rotations act exactly in floating point
        auts.append(model4_automorphism(1j, 0j, -1j))
        for i in range(count - 1):
            auts.append(model4_automorphism(_unit(rng), _disc_point(rng), _unit(rng), invert=(r > 0 and i % 3 == 2), r=r))
    elif name in ("U5", "U5Literal"):
        p = fn.params["p"]
        for _ in range(count):
            auts.append(model5_automorphism(_unit(rng), _disc_point(rng), _unit(rng), p))
    elif name in ("U6", "UTilde6", "RhoUTilde6"):
        for _ in range(count):
            beta = complex(rng.normal(), rng.normal())
            auts.append(model6_automorphism(_unit(rng), beta, _unit(rng)))
    elif name == "UParabolic":
        model = fn.profile.model
        gens = model_generators(model)
        powers = [1, -1, 2, -3]
        i = 0
        while len(auts) < count:
            g = gens[i % len(gens)]
            k = powers[(i // len(gens)) % len(powers)]
            aut = monomial_automorphism(g.power(k), (_unit(rng), _unit(rng)), f"generator{i % len(gens)}^{k}")
            A = g.power(k).matrix
            if A.b == 0 and abs(A.a) == 1:
                # rho(utilde) is invariant; only max(log|z1|, -log|z1|) moves, by at most |shift_1|
                aut.bound = abs(float(g.power(k).shift[0]))
            auts.append(aut)
            i += 1
    elif name == "NegSquare":
        auts.append(model4_automorphism(1 + 0j, 0j, 1 + 0j))
    return auts


# ---------------------------------------------------------------------------
# boundedness of u o F - u


@dataclass
class BoundedReport:
    name: str
    sups: List[float]
    sizes: List[int]
    bound: Optional[float]
    kept: int
    unresolved: int = 0  # in-domain points whose value is dominated by rounding

    @property
    def stable(self) -> bool:
        s1, s2, s3 = self.sups[-3:] if len(self.sups) >= 3 else ([self.sups[0]] * 3)
        if not all(math.isfinite(s) for s in self.sups):
            return False
        if self.bound is not None and s3 <= self.bound + 1e-9:
            return True
        return s3 - s2 <= 0.05 * max(1.0, abs(s3))

    def to_json(self):
        return {
            "automorphism": self.name,
            "sups": self.sups,
            "sizes": self.sizes,
            "analytic_bound": self.bound,
            "stable": self.stable,
            "kept": self.kept,
            "unresolved": self.unresolved,
        }


def check_bounded_above(fn: ExhaustionFn, aut: Automorphism, sizes=(10**3, 10**4, 10**5),
                        seed: int = DEFAULT_SEED, reject_fraction: float = 0.01) -> BoundedReport:
    """Empirical ``sup (u o F - u)`` on nested seeded samples of increasing size."""
    rng = np.random.default_rng(seed)
    n = max(sizes)
    z1, z2 = fn.domain.sample(rng, int(n * 1.2) + 10)
    z1, z2 = z1[:n], z2[:n]
    with np.errstate(all="ignore"):
        w1, w2 = aut.apply(z1, z2)
    ok = fn.domain.inside(w1, w2)
    if (~ok).mean() > reject_fraction:
        raise AutomorphismRejected(f"{aut.name} moves {(~ok).mean():.1%} of the sample outside the domain")
    with np.errstate(divide="ignore", invalid="ignore"):
        before = fn.values(z1, z2)
        after = fn.values(w1, w2)
        resolved = _resolved(fn, z1, z2, before) & _resolved(fn, w1, w2, after)
    keep = ok & np.isfinite(before) & resolved
    diff = np.where(keep, after - before, -np.inf)
    sups = []
    for m in sizes:
        sups.append(float(np.max(diff[:m])))
    return BoundedReport(aut.name, sups, list(sizes), aut.bound, int(keep.sum()), int((ok & ~resolved).sum()))


def _resolved(fn: ExhaustionFn, z1: Array, z2: Array, value: Array, rel: float = 1e-12, tol: float = 1e-3) -> Array:
    """Points where a relative perturbation of size ``rel`` moves ``u`` by less than ``tol``."""
    out = np.isfinite(value)
    for f1, f2 in ((1 + rel, 1.0), (1.0, 1 + rel), (1 - rel, 1.0), (1.0, 1 - rel)):
        moved = fn.values(z1 * f1, z2 * f2)
        out &= np.abs(np.where(np.isfinite(moved), moved, np.inf) - value) < tol
    return out


def invariance_residual(aut: Automorphism, z1: Array, z2: Array) -> float:
    """``max |utilde(F(z)) - utilde(z)|`` on the given points."""
    w1, w2 = aut.apply(z1, z2)
    return float(np.max(np.abs(utilde6_values(w1, w2) - utilde6_values(z1, z2))))


# ---------------------------------------------------------------------------
# exhaustion


@dataclass
class ExhaustionReport:
    levels: List[float]
    radius: List[float]  # N(c): largest |z| seen with u < c
    margin: List[float]  # delta(c): smallest boundary distance seen with u < c
    sequences: Dict[str, List[float]]
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self):
        return {
            "levels": self.levels,
            "N": self.radius,
            "delta": self.margin,
            "sequences": self.sequences,
            "failures": self.failures,
            "passed": self.passed,
        }


def boundary_sequences(fn: ExhaustionFn) -> Dict[str, Tuple[Array, Array]]:
    """Sequences that leave every compact subset of the domain."""
    eps = 10.0 ** -np.arange(1, 13)
    seqs = {}
    dom = fn.domain
    name = fn.name
    ph = np.exp(0.3j)
    if name in ("U4", "U5", "U5Literal", "NegSquare"):
        r1 = 1 - eps
        mid = 0.5 * (dom.lo(r1) + dom.hi(r1))
        seqs["|z1| -> 1"] = (r1 * ph, mid * ph)
        z1 = np.full(eps.shape, 0.3 + 0j)
        lo, hi = dom.lo(np.abs(z1)), dom.hi(np.abs(z1))
        seqs["|z2| -> outer"] = (z1, (hi - eps * (hi - lo)) * ph)
        seqs["|z2| -> inner"] = (z1, (lo + eps * (hi - lo)) * ph)
    elif name in ("U6", "UTilde6", "RhoUTilde6"):
        z1 = np.full(eps.shape, 0.7 * ph)
        seqs["|z2| -> exp(-|z1|^2)"] = (z1, np.exp(-0.49) * (1 - eps) * ph)
        big = np.geomspace(2, 1e6, eps.size)
        seqs["|z1| -> inf on z2 = 0"] = (big * ph, np.zeros(eps.shape, complex))
    elif name == "UParabolic":
        z1 = np.full(eps.shape, 1.0 + 0j)
        seqs["|z2| -> boundary"] = (z1, dom.hi(np.abs(z1)) * (1 - eps) * ph)
        seqs["|z1| -> 0"] = (eps * ph, np.zeros(eps.shape, complex))
        seqs["|z1| -> inf"] = (ph / eps, np.zeros(eps.shape, complex))
    return seqs


def check_exhaustion(fn: ExhaustionFn, levels=(1.0, 2.0, 5.0, 10.0), n_samples: int = 10**4,
                     seed: int = DEFAULT_SEED) -> ExhaustionReport:
    rng = np.random.default_rng(seed)
    z1, z2 = fn.domain.sample(rng, n_samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = fn.values(z1, z2)
    d = fn.domain.dist(z1, z2)
    # distance to the boundary proper (axes inside the domain are not boundary)
    if fn.domain.z2_zero_ok:
        d = _boundary_only_dist(fn.domain, z1, z2)
    norm = np.sqrt(np.abs(z1) ** 2 + np.abs(z2) ** 2)
    radius, margin, failures = [], [], []
    for c in levels:
        sel = u < c
        radius.append(float(norm[sel].max()) if sel.any() else 0.0)
        margin.append(float(d[sel].min()) if sel.any() else math.inf)
        if sel.any() and not margin[-1] > 0:
            failures.append(f"level {c}: sublevel set reaches the boundary")
    for a, b in zip(margin, margin[1:]):
        if b > a + 1e-15:
            failures.append("sublevel margins are not monotone")
            break
    seqs = {}
    top = max(levels)
    for label, (s1, s2) in boundary_sequences(fn).items():
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = fn.values(s1, s2)
        seqs[label] = [float(v) for v in vals]
        tail = vals[-4:]
        if not (np.all(np.diff(tail) > 0) and tail[-1] > top):
            failures.append(f"{label}: values stay below level {top}")
    return ExhaustionReport(list(levels), radius, margin, seqs, failures)


def _boundary_only_dist(dom: RadialDomain, z1, z2):
    r1, r2 = np.abs(z1), np.abs(z2)
    eps = 1e-6 * np.maximum(r1, 1e-3)
    slope = (dom.hi(r1 + eps) - dom.hi(np.abs(r1 - eps))) / (2 * eps)
    d = (dom.hi(r1) - r2) / np.sqrt(1 + slope**2)
    if not dom.z1_zero_ok:
        d = np.minimum(d, r1)
    return d


# ---------------------------------------------------------------------------
# full suite


@dataclass
class StehleReport:
    fn: str
    psh: PshReport
    exhaustion: Optional[ExhaustionReport]
    bounded: List[BoundedReport]
    seed: int
    counts: Dict[str, int]

    @property
    def passed(self) -> bool:
        ok = self.psh.passed and all(b.stable for b in self.bounded)
        if self.exhaustion is not None:
            ok = ok and self.exhaustion.passed
        return ok

    def to_json(self):
        return {
            "fn": self.fn,
            "passed": self.passed,
            "psh": self.psh.to_json(),
            "exhaustion": None if self.exhaustion is None else self.exhaustion.to_json(),
            "bounded_above": [b.to_json() for b in self.bounded],
            "seed": self.seed,
            "counts": self.counts,
        }


def default_grid(fn: ExhaustionFn, n: int) -> Tuple[Array, Array]:
    return fn.domain.polar_grid(n)


def run_suite(fn: ExhaustionFn, seed: int = DEFAULT_SEED, grid_n: int = 12, sizes=(10**3, 10**4, 10**5),
              n_auts: int = 10, auts: Optional[List[Automorphism]] = None, exhaustion: bool = True) -> StehleReport:
    z1, z2 = default_grid(fn, grid_n)
    psh = check_psh(fn, z1, z2)
    ex = check_exhaustion(fn, n_samples=max(sizes) // 10 or 100, seed=seed) if exhaustion else None
    rng = np.random.default_rng(seed)
    if auts is None:
        auts = random_family(fn, rng, n_auts)
    bounded = [check_bounded_above(fn, a, sizes, seed) for a in auts]
    counts = {"grid": int(z1.size), "samples": int(max(sizes)), "automorphisms": len(auts)}
    return StehleReport(fn.name, psh, ex, bounded, seed, counts)


def exhaustion_for(name: str, **params) -> ExhaustionFn:
    """Look up an exhaustion function by name (CLI helper)."""
    table = {
        "U4": lambda: u4(params.get("r", Fraction(1, 4))),
        "U5": lambda: u5(params.get("p", 1)),
        "U5Literal": lambda: u5_literal(params.get("p", 1)),
        "UTilde6": utilde6,
        "RhoUTilde6": rho_utilde6,
        "U6": u6,
        "UParabolic": lambda: u_parabolic(params["model"]),
        "NegSquare": neg_square_control,
    }
    if name not in table:
        raise KeyError(f"unknown exhaustion function {name!r}")
    return table[name]()
