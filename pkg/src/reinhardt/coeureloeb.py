"""Numerical harness for the non-Stein bundle over a hyperbolic-type fiber.

For ``R > 1`` the disc maps ``f_R``, ``g_R``, ``h_R`` feed a hypothetical
psh exhaustion of the bundle.  On the boundary circle the bundle-reduced
values stay in fixed compact intervals, while at the centre ``Im g_R(0)``
and ``Im h_R(0)`` diverge as ``R -> 1``.  That is the contradiction.  This
module computes those scalar quantities: boundary data, conjugate functions,
the reduction by the deck group and the blow-up table.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .convexlog import HyperbolicModel, PhiAOverT, PhiTable, PhiZero
from .errors import IntervalViolation, MarginViolation, ResolutionTooLow, UnsupportedModel
from .intmat import MatKind, Mat2Z, classify
from .surd import QuadraticSurd, vec_float

TAIL_TOL = 1e-10
ENDPOINT_SLACK = 1e-9
DEFAULT_R_LIST = (1.5, 1.1, 1.01, 1.001)


# ---------------------------------------------------------------------------
# parameters


def choose_a(phi, lam: float, n_grid: int = 4097) -> Tuple[float, float]:
    """``(a, margin)`` with ``a/t > phi(t)`` for all ``t > 0``.

    ``t phi(t)`` is invariant under ``t -> lam t``, so its supremum is taken
    on the fundamental interval ``[1, lam]``; ``a`` adds 1 to it.
    """
    if isinstance(phi, PhiZero):
        return 1.0, 1.0
    if isinstance(phi, PhiAOverT):
        return float(phi.a) + 1.0, 1.0
    ts = np.linspace(1.0, lam, n_grid)
    if isinstance(phi, PhiTable):
        # on a segment phi = alpha t + beta, so t phi(t) is a parabola; add its vertex when inside
        ks, vs = phi.knots, phi.values
        extra = list(ks)
        for t0, t1, p0, p1 in zip(ks, ks[1:], vs, vs[1:]):
            alpha = (p1 - p0) / (t1 - t0)
            beta = p0 - alpha * t0
            if alpha < 0 and t0 < -beta / (2 * alpha) < t1:
                extra.append(-beta / (2 * alpha))
        ts = np.union1d(ts, extra)
    top = max(t * phi.value(t) for t in ts)
    return float(top) + 1.0, 1.0


@dataclass(frozen=True)
class CLParams:
    matrix: Mat2Z
    lam: QuadraticSurd
    v: Tuple[float, float]
    w: Tuple[float, float]
    phi: object
    a: float
    sign: int = 1
    margin: float = 1.0

    def __post_init__(self):
        if classify(self.matrix).kind is not MatKind.HYPERBOLIC:
            raise UnsupportedModel("the harness needs a hyperbolic matrix")
        if not self.lam > 1:
            raise UnsupportedModel("lambda must exceed 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def lam_f(self) -> float:
        return float(self.lam)

    def phi_abs(self, t: np.ndarray) -> np.ndarray:
        """``phi(|t|)`` (the minus branch uses the mirrored profile)."""
        t = np.abs(np.asarray(t, float))
        if isinstance(self.phi, PhiZero):
            return np.zeros_like(t)
        if isinstance(self.phi, PhiAOverT):
            return float(self.phi.a) / t
        return np.vectorize(self.phi.value, otypes=[float])(t)

    @classmethod
    def from_model(cls, model: HyperbolicModel, sign: Optional[int] = None) -> "CLParams":
        if not isinstance(model, HyperbolicModel):
            raise UnsupportedModel("counterexample parameters come from a hyperbolic-type model")
        lam = classify(model.matrix).lam
        a, margin = choose_a(model.phi, float(lam))
        return cls(
            model.matrix,
            lam,
            vec_float(model.v),
            vec_float(model.w),
            model.phi,
            a,
            model.t_sign if sign is None else sign,
            margin,
        )

    def to_json(self):
        return {
            "A": self.matrix.rows(),
            "lambda": str(self.lam),
            "lambda_float": self.lam_f,
            "v": list(self.v),
            "w": list(self.w),
            "phi": self.phi.to_json(),
            "a": self.a,
            "a_margin": self.margin,
            "sign": "+" if self.sign > 0 else "-",
        }


# ---------------------------------------------------------------------------
# disc functions


def f_R(R: float, zeta):
    """``log(i (R + zeta)/(R - zeta))`` (principal branch); ``0 < Im < pi`` on the closed disc."""
    if not R > 1:
        raise ValueError("R must exceed 1")
    zeta = np.asarray(zeta, complex)
    return np.log(1j * (R + zeta) / (R - zeta))


def roots_of_unity(N: int, shift: float = 0.0) -> np.ndarray:
    return np.exp(2j * np.pi * (np.arange(N) + shift) / N)


@dataclass
class DiskFn:
    """Holomorphic ``F(zeta) = sum_n coeffs[n] zeta^n`` determined by boundary samples of ``Im F``."""

    coeffs: np.ndarray
    samples: np.ndarray  # Im F at the N-th roots of unity
    tail: float

    @property
    def N(self) -> int:
        return self.samples.size

    @classmethod
    def from_imag_samples(cls, samples: np.ndarray) -> "DiskFn":
        """Holomorphic ``F`` with ``Im F = samples`` on the circle and ``Re F(0) = 0``.

        With ``samples = sum c_n e^{in theta}`` the function
        ``G = c_0 + 2 sum_{n>0} c_n zeta^n`` has ``Re G = samples`` on the
        circle and ``Im G(0) = 0``; then ``F = i G``.
        """
        samples = np.asarray(samples, float)
        N = samples.size
        c = np.fft.fft(samples) / N
        half = N // 2
        coeffs = np.empty(half + 1, complex)
        coeffs[0] = c[0].real
        coeffs[1:half] = 2 * c[1:half]
        coeffs[half] = c[half].real  # Nyquist term, real for real data
        energy = np.sum(np.abs(c[: half + 1]) ** 2)
        tail_energy = np.sum(np.abs(c[N // 4 : half + 1]) ** 2)
        tail = float(math.sqrt(tail_energy / energy)) if energy > 0 else 0.0
        return cls(1j * coeffs, samples, tail)

    def __call__(self, zeta) -> np.ndarray:
        """Direct evaluation of the truncated series (Horner)."""
        zeta = np.asarray(zeta, complex)
        out = np.zeros_like(zeta)
        for a in self.coeffs[::-1]:
            out = out * zeta + a
        return out

    def derivative(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, complex)
        n = np.arange(1, self.coeffs.size)
        out = np.zeros_like(zeta)
        for a in (n * self.coeffs[1:])[::-1]:
            out = out * zeta + a
        return out

    def on_circle(self, r: float, M: Optional[int] = None, shift: float = 0.0) -> np.ndarray:
        """Values at ``r exp(2 pi i (j + shift)/M)``, ``j = 0..M-1``, by one FFT."""
        M = M or self.N
        K = self.coeffs.size
        if M < K:
            raise ValueError("need at least as many circle points as coefficients")
        n = np.arange(K)
        spectrum = np.zeros(M, complex)
        spectrum[:K] = self.coeffs * r**n * np.exp(2j * np.pi * n * shift / M)
        return np.fft.ifft(spectrum) * M

    def at_center(self) -> complex:
        return complex(self.coeffs[0])


def auto_N(R: float, minimum: int = 4096) -> int:
    """Power of two resolving the boundary data (its Fourier decay rate is ``1/R``)."""
    need = 2 ** math.ceil(math.log2(128.0 / (R - 1.0)))
    return max(minimum, need)


def boundary_data(params: CLParams, R: float, N: int) -> Tuple[np.ndarray, np.ndarray]:
    u = f_R(R, roots_of_unity(N)).real
    return params.sign * np.exp(u), params.a * np.exp(-u)


def solve_gh(params: CLParams, R: float, N: Optional[int] = None, check: bool = True) -> Tuple[DiskFn, DiskFn]:
    """``g``, ``h`` with ``Im g = sign e^{Re f_R}``, ``Im h = a e^{-Re f_R}`` on the circle.

    Raises ``ResolutionTooLow`` when the spectral tail of the boundary data
    (relative l2 norm of the coefficients with ``N/4 <= n <= N/2``) exceeds
    ``TAIL_TOL``.
    """
    N = auto_N(R) if N is None else N
    if N <= 0 or N & (N - 1):
        raise ValueError("N must be a power of two")
    if N < 256:
        raise ResolutionTooLow(f"N={N} is below the minimum of 256 boundary samples")
    gdata, hdata = boundary_data(params, R, N)
    g = DiskFn.from_imag_samples(gdata)
    h = DiskFn.from_imag_samples(hdata)
    if check:
        worst = max(g.tail, h.tail)
        if worst > TAIL_TOL:
            raise ResolutionTooLow(f"spectral tail {worst:.3e} > {TAIL_TOL:g} at R={R}, N={N}")
    return g, h


def schwarz_quadrature(params: CLParams, R: float, zeta, M: int, which: str = "g") -> np.ndarray:
    """Independent oracle: trapezoidal Schwarz integral on ``M`` half-shifted nodes.

    ``F(zeta) = i/(2 pi) int (e^{it} + zeta)/(e^{it} - zeta) Im F(e^{it}) dt``.
    """
    nodes = roots_of_unity(M, shift=0.5)
    u = f_R(R, nodes).real
    data = params.sign * np.exp(u) if which == "g" else params.a * np.exp(-u)
    zeta = np.atleast_1d(np.asarray(zeta, complex))
    kernel = (nodes[None, :] + zeta[:, None]) / (nodes[None, :] - zeta[:, None])
    return 1j * (kernel @ data) / M


def interior_points(n: int = 10, radius: float = 0.9) -> np.ndarray:
    """Deterministic interior points spread over the disc."""
    k = np.arange(n)
    r = radius * np.sqrt((k + 0.5) / n)
    return r * np.exp(2j * np.pi * k * 0.6180339887498949)


def two_method_check(params: CLParams, R: float, g: DiskFn, h: DiskFn, n_points: int = 10) -> Dict[str, float]:
    pts = np.concatenate([[0j], interior_points(n_points - 1)])
    M = 4 * g.N
    dg = np.max(np.abs(g(pts) - schwarz_quadrature(params, R, pts, M, "g")))
    dh = np.max(np.abs(h(pts) - schwarz_quadrature(params, R, pts, M, "h")))
    return {"points": int(pts.size), "nodes": M, "max_diff_g": float(dg), "max_diff_h": float(dh)}


def cauchy_riemann_residual(F: DiskFn, n_points: int = 32, radius: float = 0.8, step: float = 1e-3) -> float:
    """``max |dU/dx - dV/dy| + |dU/dy + dV/dx|`` by fourth-order central differences."""
    pts = interior_points(n_points, radius)

    def d(direction):
        hstep = step * direction
        return (-F(pts + 2 * hstep) + 8 * F(pts + hstep) - 8 * F(pts - hstep) + F(pts - 2 * hstep)) / (12 * step)

    dx, dy = d(1.0), d(1j)
    res = np.abs(dx.real - dy.imag) + np.abs(dy.real + dx.imag)
    scale = max(1.0, float(np.max(np.abs(F.derivative(pts)))))
    return float(np.max(res) / scale)


def boundary_interpolation_error(F: DiskFn, R: float, params: CLParams, which: str = "g") -> float:
    """Error of ``Im F`` at the midpoints between sample nodes (relative to the data scale)."""
    N = F.N
    vals = F.on_circle(1.0, N, shift=0.5).imag
    u = f_R(R, roots_of_unity(N, 0.5)).real
    exact = params.sign * np.exp(u) if which == "g" else params.a * np.exp(-u)
    return float(np.max(np.abs(vals - exact)) / np.max(np.abs(exact)))


# ---------------------------------------------------------------------------
# scans


@dataclass
class MembershipReport:
    R: float
    N: int
    points: int
    min_margin: float
    argmin: complex

    @property
    def passed(self) -> bool:
        return self.min_margin > 0

    def to_json(self):
        return {
            "R": self.R,
            "N": self.N,
            "points": self.points,
            "min_margin": self.min_margin,
            "argmin": [self.argmin.real, self.argmin.imag],
            "passed": self.passed,
        }


def membership_scan(params: CLParams, R: float, g: DiskFn, h: DiskFn, n_radii: int = 41,
                    raise_on_violation: bool = True) -> MembershipReport:
    """``Im h - phi(|Im g|) > 0`` on a polar grid of the closed disc (boundary included)."""
    N = g.N
    best, where = math.inf, 0j
    count = 0
    for r in np.linspace(0.0, 1.0, n_radii):
        M = N if r > 0 else g.coeffs.size
        gv = g.on_circle(r, M)
        hv = h.on_circle(r, M)
        side = params.sign * gv.imag
        with np.errstate(divide="ignore"):
            margin = hv.imag - params.phi_abs(np.where(side > 0, gv.imag, 1.0))
        # points with Im g on the wrong side are outside the fiber altogether
        margin = np.where(side > 0, margin, -np.inf)
        i = int(np.argmin(margin))
        count += margin.size
        if margin[i] < best:
            best = float(margin[i])
            where = complex(r * np.exp(2j * np.pi * i / M))
    report = MembershipReport(R, N, count, best, where)
    if raise_on_violation and not report.passed:
        raise MarginViolation(f"margin {best:.3e} at zeta={where:.6f} (R={R}, N={N})")
    return report


@dataclass
class ReductionRecord:
    theta: float
    re_f: float
    im_g: float
    im_h: float
    k: int
    reduced_g: float
    reduced_h: float
    first_re: float
    first_im: float


@dataclass
class ReductionReport:
    R: float
    N: int
    records: List[ReductionRecord]
    violations: List[str]
    group_residual: float

    @property
    def fraction_in(self) -> float:
        bad = {v.split(":")[0] for v in self.violations}
        return 1.0 - len(bad) / max(1, len(self.records))

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self):
        return {
            "R": self.R,
            "N": self.N,
            "samples": len(self.records),
            "fraction_in_interval": self.fraction_in,
            "violations": self.violations[:20],
            "group_residual": self.group_residual,
            "passed": self.passed,
        }


def reduction_check(params: CLParams, R: float, g: DiskFn, h: DiskFn, raise_on_violation: bool = True,
                    slack: float = ENDPOINT_SLACK) -> ReductionReport:
    """Fundamental-domain reduction at the boundary samples.

    With ``k = floor(Re f_R / log lam)`` the reduced values
    ``lam^-k Im g`` and ``lam^k Im h`` must lie in ``[1, lam)`` and
    ``(a/lam, a]`` (mirrored for the minus branch), and the reduced first
    coordinate ``f_R/log lam - k`` in ``[0, 1) x (0, pi/log lam)``.  The
    reduction is also replayed as the deck transformation
    ``(zeta, b) -> (zeta - k, A^-k b)`` applied to ``b = g v + h w``.
    """
    N = g.N
    nodes = roots_of_unity(N)
    lam = params.lam_f
    loglam = math.log(lam)
    f = f_R(R, nodes)
    gv = g.on_circle(1.0, N)
    hv = h.on_circle(1.0, N)
    k = np.floor(f.real / loglam).astype(int)
    rg = lam ** (-k.astype(float)) * gv.imag
    rh = lam ** k.astype(float) * hv.imag
    first = f / loglam - k
    s, a = params.sign, params.a
    violations = []
    records = []
    theta = 2 * np.pi * np.arange(N) / N
    for i in range(N):
        records.append(ReductionRecord(float(theta[i]), float(f.real[i]), float(gv.imag[i]), float(hv.imag[i]),
                                       int(k[i]), float(rg[i]), float(rh[i]), float(first.real[i]), float(first.imag[i])))
        x = s * rg[i]  # in [1, lam)
        if not (1 - slack <= x < lam + slack):
            violations.append(f"{i}: reduced Im g = {rg[i]:.12g} outside the interval")
        y = rh[i]  # in (a/lam, a]
        if not (a / lam - slack < y <= a + slack):
            violations.append(f"{i}: reduced Im h = {rh[i]:.12g} outside the interval")
        if not (-slack <= first.real[i] < 1 + slack and 0 < first.imag[i] < math.pi / loglam):
            violations.append(f"{i}: reduced first coordinate {first[i]:.6g} outside the strip")
    resid = _group_residual(params, gv, hv, k, rg, rh)
    report = ReductionReport(R, N, records, violations, resid)
    if raise_on_violation and violations:
        raise IntervalViolation(violations[0])
    return report


def _group_residual(params, gv, hv, k, rg, rh, max_power: int = 40) -> float:
    """Compare ``A^-k (g v + h w)`` with ``lam^-k g v + lam^k h w`` (imaginary parts)."""
    v = np.asarray(params.v, float)
    w = np.asarray(params.w, float)
    worst = 0.0
    for kk in np.unique(k):
        if abs(kk) > max_power:
            continue
        P = params.matrix ** (-int(kk))
        Pm = np.array([[P.a, P.b], [P.c, P.d]], float)
        idx = k == kk
        b = np.outer(gv.imag[idx], v) + np.outer(hv.imag[idx], w)
        moved = b @ Pm.T
        target = np.outer(rg[idx], v) + np.outer(rh[idx], w)
        scale = np.max(np.abs(b)) + 1.0
        worst = max(worst, float(np.max(np.abs(moved - target)) / scale))
    return worst


# ---------------------------------------------------------------------------
# blow-up


@dataclass
class BlowupRow:
    R: float
    N: int
    im_g0: float
    im_h0: float
    quad_g0: float
    tail: float

    def to_json(self):
        return {"R": self.R, "N": self.N, "im_g0": self.im_g0, "im_h0": self.im_h0,
                "quadrature_im_g0": self.quad_g0, "tail": self.tail}


@dataclass
class BlowupTable:
    params: CLParams
    rows: List[BlowupRow]
    membership: List[MembershipReport] = field(default_factory=list)
    reductions: List[ReductionReport] = field(default_factory=list)
    agreement: List[Dict[str, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        s = self.params.sign
        g = [s * r.im_g0 for r in self.rows]
        h = [r.im_h0 for r in self.rows]
        return all(b > a for a, b in zip(g, g[1:])) and all(b > a for a, b in zip(h, h[1:]))

    @property
    def scans_passed(self) -> bool:
        return all(m.passed for m in self.membership) and all(r.passed for r in self.reductions)

    @property
    def passed(self) -> bool:
        return self.monotone and self.scans_passed

    def summary(self) -> Dict[str, object]:
        return {
            "params": self.params.to_json(),
            "rows": [r.to_json() for r in self.rows],
            "monotone": self.monotone,
            "membership": [m.to_json() for m in self.membership],
            "reduction": [r.to_json() for r in self.reductions],
            "agreement": self.agreement,
            "passed": self.passed,
            "conclusion": (
                "boundary values reduce into fixed compact intervals while the centre values diverge"
                if self.passed
                else "harness checks failed"
            ),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["R", "theta", "re_f", "im_g", "im_h", "k", "reduced_g", "reduced_h"])
        for rep in self.reductions:
            for rec in rep.records:
                wr.writerow([repr(rep.R), f"{rec.theta:.17g}", f"{rec.re_f:.17g}", f"{rec.im_g:.17g}",
                             f"{rec.im_h:.17g}", rec.k, f"{rec.reduced_g:.17g}", f"{rec.reduced_h:.17g}"])
        return buf.getvalue()

    def to_svg(self, width: int = 480, height: int = 320) -> str:
        """Static plot of ``|Im g_R(0)|`` against ``-log10(R - 1)``."""
        xs = [-math.log10(r.R - 1) for r in self.rows]
        ys = [abs(r.im_g0) for r in self.rows]
        pad = 40
        x0, x1 = min(xs), max(xs)
        y0, y1 = 0.0, max(ys) * 1.1
        span_x = (x1 - x0) or 1.0

        def px(x):
            return pad + (x - x0) / span_x * (width - 2 * pad)

        def py(y):
            return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
            f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
            f'<polyline points="{pts}" fill="none" stroke="blue"/>',
            f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">-log10(R-1)</text>',
            f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" text-anchor="middle">|Im g_R(0)|</text>',
        ]
        for x, y in zip(xs, ys):
            lines.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="blue"/>')
        lines.append("</svg>")
        return "\n".join(lines) + "\n"


def blowup_table(params: CLParams, R_list: Sequence[float] = DEFAULT_R_LIST, N: Optional[int] = None,
                 scans: bool = True, raise_on_violation: bool = False) -> BlowupTable:
    """Centre values along ``R_list`` (strictly decreasing to 1), with the boundary scans."""
    if any(b >= a for a, b in zip(R_list, R_list[1:])) or any(r <= 1 for r in R_list):
        raise ValueError("R_list must decrease strictly and stay above 1")
    table = BlowupTable(params, [])
    for R in R_list:
        n = auto_N(R) if N is None else N
        g, h = solve_gh(params, R, n)
        quad = schwarz_quadrature(params, R, [0j], 4 * n, "g")[0]
        table.rows.append(BlowupRow(R, n, g.at_center().imag, h.at_center().imag, float(quad.imag), max(g.tail, h.tail)))
        if scans:
            table.membership.append(membership_scan(params, R, g, h, raise_on_violation=raise_on_violation))
            table.reductions.append(reduction_check(params, R, g, h, raise_on_violation=raise_on_violation))
            agree = two_method_check(params, R, g, h)
            agree["R"] = R
            table.agreement.append(agree)
    return table
