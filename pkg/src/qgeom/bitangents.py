"""Bitangent lines of quartic surfaces and plane quartics.

A line is bitangent when the restriction of F to it is a constant times the
square of a quadratic.  Lines through a base point p are parametrized by the
points y of a complementary plane; writing F(E y + s p) = A s^4 + B s^3 +
C s^2 + D s + E4 with A = F(p), the restriction is a perfect square exactly
when the two Tschirnhaus-type invariants

    P1 = 8 A^2 D - 4 A B C + B^3          (cubic in y)
    P2 = 64 A^3 E4 - (4 A C - B^2)^2      (quartic in y)

vanish, which cuts out the 3 * 4 = 12 bitangents through a general point.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .poly import (
    DegenerateInput,
    MultiPoly,
    ProjPoint,
    UniPoly,
    as_point,
    complement_basis,
    restrict_to_line,
    subresultant_pair,
)
from .solve import PositiveDimensional, solve_bivariate
from .surface import LineInSurface, QuarticSurface, relative_value

log = logging.getLogger(__name__)

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class NotBitangent(ValueError):
    def __init__(self, message: str, scalars: tuple = ()):
        super().__init__(message)
        self.scalars = scalars


class PositiveDimensionalFiber(PositiveDimensional):
    """Infinitely many bitangents through the base point."""


class ChartFailure(ValueError):
    pass


def _sort_key(coords) -> tuple:
    return tuple((round(complex(c).real, 9), round(complex(c).imag, 9)) for c in coords)


@dataclass(frozen=True)
class PlueckerLine:
    a: ProjPoint
    b: ProjPoint
    pluecker: ProjPoint

    @classmethod
    def from_points(cls, a, b) -> "PlueckerLine":
        a, b = as_point(a), as_point(b)
        if a.exact and b.exact:
            av, bv = a.coords, b.coords
        else:
            av, bv = a.vector, b.vector
        p = [av[i] * bv[j] - av[j] * bv[i] for i, j in PAIRS]
        if all(abs(complex(c)) == 0 for c in p):
            raise DegenerateInput("line through proportional points")
        if not (a.exact and b.exact):
            scale = np.linalg.norm(a.vector) * np.linalg.norm(b.vector)
            if np.linalg.norm(np.array(p, dtype=complex)) <= 1e-12 * scale:
                raise DegenerateInput("line through (numerically) proportional points")
        return cls(a, b, ProjPoint(p))

    def relation(self):
        p01, p02, p03, p12, p13, p23 = self.pluecker.coords
        return p01 * p23 - p02 * p13 + p03 * p12

    def distance(self, other: "PlueckerLine") -> float:
        return self.pluecker.distance(other.pluecker)

    def point(self, t) -> np.ndarray:
        return self.a.vector + t * self.b.vector

    def to_json(self) -> dict:
        return {"span": [self.a.to_json(), self.b.to_json()], "pluecker": self.pluecker.to_json()}


@dataclass(frozen=True)
class BitangentCertificate:
    line: PlueckerLine
    quartic: UniPoly
    lead: complex
    square_root: UniPoly
    contacts: tuple[tuple[complex, ProjPoint], tuple[complex, ProjPoint]]
    residual: float
    scalars: tuple
    hyperflex: bool

    def to_json(self) -> dict:
        return {
            "line": self.line.to_json(),
            "contacts": [{"t": [complex(t).real, complex(t).imag], "point": p.to_json()}
                         for t, p in self.contacts],
            "residual": self.residual,
            "hyperflex": self.hyperflex,
        }


def square_root_data(q: UniPoly):
    """(lead, monic quadratic s, relative residual of q - lead * s^2) for a quartic q."""
    c = q.padded(5)
    c4 = c[4]
    beta = c[3] / (2 * c4)
    gamma = (c[2] / c4 - beta * beta) / 2
    s = UniPoly([gamma, beta, 1])
    diff = q - s * s * c4
    if q.exact and diff.is_zero():
        return c4, s, 0.0
    return c4, s, diff.norm() / q.norm()


def _quadratic_roots(s: UniPoly) -> list[complex]:
    gamma, beta = complex(s.coeff(0)), complex(s.coeff(1))
    disc = np.sqrt(complex(beta * beta - 4 * gamma))
    r1 = (-beta + disc) / 2 if beta.real >= 0 else (-beta - disc) / 2
    r2 = gamma / r1 if r1 != 0 else -beta - r1
    return sorted([r1, r2], key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def certify_bitangent(X: QuarticSurface, line: PlueckerLine, tol: float = 1e-9,
                      sres_tol: float = 1e-6) -> BitangentCertificate:
    """Certificate that F restricted to the line is c * (quadratic)^2.

    The line is parametrized as a + t b, with b replaced by b + k a when b
    itself lies on X (so that the restriction keeps degree 4).
    """
    a, b = line.a, line.b
    q = restrict_to_line(X.F, a, b)
    if q.is_zero() or q.norm() <= 1e-13 * X.F.norm():
        raise LineInSurface("the line lies on the surface")
    k = 0
    while abs(complex(q.coeff(4))) <= 1e-10 * q.norm():
        k += 1
        if k > 5:
            raise DegenerateInput("could not reparametrize the line")
        coords = [bi + k * ai for ai, bi in zip(a.coords, b.coords)] if (a.exact and b.exact) \
            else list(b.vector + k * a.vector)
        b = ProjPoint(coords)
        q = restrict_to_line(X.F, a, b)
    if k:
        line = PlueckerLine.from_points(a, b)
    sres = subresultant_pair(q)
    qn = q.norm()
    rel = (abs(complex(sres[0])) / qn ** 7, abs(complex(sres[1])) / qn ** 5)
    lead, s, residual = square_root_data(q)
    if residual > tol or max(rel) > sres_tol:
        raise NotBitangent(
            f"restriction is not a square (residual {residual:.2e}, "
            f"relative subresultants {rel[0]:.2e}, {rel[1]:.2e})", sres)
    roots = _quadratic_roots(s)
    hyper = abs(roots[0] - roots[1]) <= 1e-6 * (1 + abs(roots[0]))
    if hyper:
        mid = (roots[0] + roots[1]) / 2
        roots = [mid, mid]
    av, bv = a.vector, b.vector
    contacts = tuple((t, ProjPoint(av + t * bv)) for t in roots)
    return BitangentCertificate(line, q, complex(lead), s, contacts, float(residual),
                                tuple(sres), hyper)


# -- fibers of the bitangent map ---------------------------------------------------


@dataclass
class FiberReport:
    base_point: ProjPoint
    bitangents: list[BitangentCertificate]
    raw_solution_count: int
    filtered_count: int
    on_surface: bool = False
    rejected: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "base_point": self.base_point.to_json(),
            "on_surface": self.on_surface,
            "raw_solution_count": self.raw_solution_count,
            "filtered_count": self.filtered_count,
            "bitangents": [c.to_json() for c in self.bitangents],
            "rejected": list(self.rejected),
        }


def _split_by_base_power(G: MultiPoly) -> list[MultiPoly]:
    """Coefficients of s^k, k = 0..4, in G(y0, y1, y2, s), as ternary forms."""
    parts: dict[int, dict] = {}
    for e, c in G.terms.items():
        parts.setdefault(e[3], {})[e[:3]] = c
    return [MultiPoly(3, 4 - k, parts.get(k, {})) for k in range(5)]


def fiber_equations(F: MultiPoly, p: np.ndarray, E: np.ndarray) -> tuple[MultiPoly, MultiPoly, bool]:
    """The two ternary equations whose zeros are the bitangent directions through p."""
    G = F.to_float().linear_substitute(np.hstack([E, p[:, None]]))
    e4, d, c, b, a = _split_by_base_power(G)
    a0 = complex(a.coeff((0, 0, 0)))
    on = abs(a0) <= 1e-10 * F.norm() * np.linalg.norm(p) ** 4
    if not on:
        p1 = d * (8 * a0 * a0) - b * c * (4 * a0) + b * b * b
        p2 = e4 * (64 * a0 ** 3) - (c * (4 * a0) - b * b) ** 2
        return p1, p2, False
    # F(p + t y) = b t + c t^2 + d t^3 + e4 t^4: tangent at p, and a double root elsewhere
    return b, d * d - c * e4 * 4, True


def bitangents_through_point(X: QuarticSurface, p, seed: int = 0, tol: float = 1e-9,
                             merge_tol: float = 1e-7) -> FiberReport:
    """All bitangent lines through p, each certified; 12 for general p, 6 for general p on X."""
    p = as_point(p)
    pv = p.vector / np.linalg.norm(p.vector)
    rng = np.random.default_rng(seed)
    E = complement_basis(pv.conj()[None, :], rng)
    eq1, eq2, on = fiber_equations(X.F, pv, E)
    if on and relative_value(X.F, pv) > 1e-10:
        on = False
    try:
        sols = solve_bivariate(eq1, eq2, tol=1e-6, seed=seed)
    except PositiveDimensional as exc:
        raise PositiveDimensionalFiber(f"positive-dimensional family of bitangents through {p}") from exc
    certs: list[BitangentCertificate] = []
    rejected = []
    for s in sols:
        d = E @ s.vector
        try:
            cert = certify_bitangent(X, PlueckerLine.from_points(ProjPoint(pv), ProjPoint(d)), tol)
        except (NotBitangent, DegenerateInput) as exc:
            rejected.append(str(exc))
            continue
        if any(cert.line.distance(c.line) < merge_tol for c in certs):
            rejected.append("duplicate line")
            continue
        certs.append(cert)
    certs.sort(key=lambda c: _sort_key(c.line.pluecker.coords))
    return FiberReport(p, certs, sum(s.multiplicity for s in sols), len(certs), on, rejected)


# -- local structure at a bitangent ---------------------------------------------------


@dataclass(frozen=True)
class NormalForm:
    """Frame (e0, e1, e2, e3) with the line x2 = x3 = 0, contacts at (1:0) and (1:lam),
    and F restricted to the line equal to x1^2 (x1 - lam x0)^2."""

    frame: np.ndarray
    lam: complex
    g0: complex
    glam: complex
    h0: complex
    hlam: complex
    dg0: complex
    dh0: complex
    residual: float

    @property
    def delta(self) -> complex:
        return self.g0 * self.hlam - self.h0 * self.glam


def normal_form(X: QuarticSurface, cert: BitangentCertificate, rng: np.random.Generator | None = None,
                fourth_root: int = 0, swap_contacts: bool = False) -> NormalForm:
    """Projective frame putting the certified bitangent in the standard form.

    ``rng`` mixes the two transverse frame vectors and ``fourth_root`` and
    ``swap_contacts`` pick among the remaining discrete choices; every choice is
    a valid normalization.
    """
    f = X.F.to_float()
    a, b = cert.line.a.vector, cert.line.b.vector
    (t1, _), (t2, _) = cert.contacts
    if swap_contacts:
        t1, t2 = t2, t1
    nu = complex(cert.lead) ** -0.25 * 1j ** fourth_root
    e0 = a + t1 * b
    e1 = nu * b
    lam = (t2 - t1) / nu
    comp = complement_basis(np.array([a.conj(), b.conj()]))
    if rng is not None:
        mix = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        comp = comp @ mix
    e2, e3 = comp[:, 0], comp[:, 1]
    frame = np.stack([e0, e1, e2, e3], axis=1)
    grad0 = f.grad_at(e0)
    gradl = f.grad_at(e0 + lam * e1)
    hess0 = f.hess_at(e0)
    # check the normal form along the line at a few points
    xs = [(1.0, 0.3), (0.7, -1.1), (1.0, 2.0)]
    vals = [complex(f.evaluate_many(x0 * e0 + x1 * e1)) for x0, x1 in xs]
    target = [x1 ** 2 * (x1 - lam * x0) ** 2 for x0, x1 in xs]
    residual = max(abs(v - w) for v, w in zip(vals, target)) / max(1.0, max(abs(w) for w in target))
    return NormalForm(frame, lam, grad0 @ e2, gradl @ e2, grad0 @ e3, gradl @ e3,
                      e1 @ hess0 @ e2, e1 @ hess0 @ e3, float(residual))


def tangent_space_of_S(X: QuarticSurface, cert: BitangentCertificate, rng: np.random.Generator | None = None,
                       rank_tol: float = 1e-8, lam_tol: float = 1e-6, **gauge) -> tuple[int, np.ndarray, np.ndarray]:
    """Rank and solution basis of the linear conditions on (u0, u1, u2, u3) for
    first-order deformations x2 = u0 x0 + u1 x1, x3 = u2 x0 + u3 x1 to stay bitangent.

    Returns (rank, system matrix, basis of its kernel as columns).
    """
    nf = normal_form(X, cert, rng, **gauge)
    if nf.residual > 1e-6:
        raise DegenerateInput(f"normal form failed (residual {nf.residual:.1e})")
    if abs(nf.lam) > lam_tol:
        rows = np.array([[nf.g0, 0, nf.h0, 0],
                         [nf.glam, nf.lam * nf.glam, nf.hlam, nf.lam * nf.hlam]])
    else:
        rows = np.array([[nf.g0, 0, nf.h0, 0],
                         [nf.dg0, nf.g0, nf.dh0, nf.h0]])
    s = np.linalg.svd(rows, compute_uv=False)
    scale = np.linalg.norm(X.F.grad_at(nf.frame[:, 0])) + np.linalg.norm(X.F.grad_at(nf.frame[:, 0] + nf.lam * nf.frame[:, 1]))
    rank = int(np.sum(s > rank_tol * max(scale, 1e-300)))
    return rank, rows, complement_basis(rows)


@dataclass(frozen=True)
class RamificationValue:
    det: complex
    t_factor: complex
    delta: complex
    unit: complex
    residual: float
    chart: str


def ramification_matrix(nf: NormalForm, t: complex, swap: bool = False) -> np.ndarray:
    """Differential of the bitangent map at (line, point (1:t)) in local coordinates
    (w1, u0, u1) (or (w1, u2, u3) when ``swap`` exchanges the roles of g and h)."""
    lam = nf.lam
    g0, gl, h0, hl = (nf.h0, nf.hlam, nf.g0, nf.glam) if swap else (nf.g0, nf.glam, nf.h0, nf.hlam)
    m32 = -(lam - t) * g0 / (lam * h0) - t * gl / (lam * hl)
    m33 = -t * gl / hl
    return np.array([[1, 0, 0], [0, 1, t], [0, m32, m33]], dtype=complex)


def ramification_determinant(X: QuarticSurface, cert: BitangentCertificate, t: complex,
                             nf: NormalForm | None = None, chart_tol: float = 1e-8) -> RamificationValue:
    """Determinant of the differential at the point (1:t) of the line, with the
    factorization det = unit * t (t - lam) * Delta checked."""
    nf = nf or normal_form(X, cert)
    lam = nf.lam
    scale = max(abs(nf.g0), abs(nf.h0), abs(nf.glam), abs(nf.hlam))
    if abs(lam) <= 1e-6:
        raise ChartFailure("hyperflex line: no chart with distinct contact points")
    charts = [("h", False), ("g", True)]
    for name, swap in charts:
        b0, bl = (nf.g0, nf.glam) if swap else (nf.h0, nf.hlam)
        if abs(b0) <= chart_tol * scale or abs(bl) <= chart_tol * scale:
            continue
        m = ramification_matrix(nf, t, swap)
        d = complex(np.linalg.det(m))
        delta = nf.delta if not swap else -nf.delta
        unit = -1 / (lam * b0 * bl)
        tf = t * (t - lam)
        expected = unit * tf * delta
        mag = max(abs(d), abs(unit * tf) * (abs(nf.g0 * nf.hlam) + abs(nf.h0 * nf.glam)), 1e-300)
        return RamificationValue(d, tf, nf.delta, unit if not swap else -unit,
                                 abs(d - expected) / mag, f"{name}-chart")
    raise ChartFailure("both transverse derivatives vanish at a contact point")


def relative_delta(nf: NormalForm) -> float:
    return abs(nf.delta) / max(abs(nf.g0 * nf.hlam) + abs(nf.h0 * nf.glam), 1e-300)


def singular_contact_fixture(lam: Fraction = Fraction(2), seed: int = 0) -> QuarticSurface:
    """x1^2 (x1 - lam x0)^2 + x2 G + x3 H with G, H free of x0^3: (1:0:0:0) is singular on X."""
    from .poly import exponents

    rng = np.random.default_rng(seed)
    x0, x1, x2, x3 = MultiPoly.variables(4)
    G = MultiPoly(4, 3, {e: int(rng.integers(-5, 6)) for e in exponents(4, 3) if e != (3, 0, 0, 0)})
    H = MultiPoly(4, 3, {e: int(rng.integers(-5, 6)) for e in exponents(4, 3) if e != (3, 0, 0, 0)})
    F = x1 ** 2 * (x1 - x0 * lam) ** 2 + x2 * G + x3 * H
    return QuarticSurface(F, seed, smooth=False, flags=["fixture: singular contact point (1:0:0:0)"])


def normal_form_surface(lam, seed: int = 0) -> QuarticSurface:
    """x1^2 (x1 - lam x0)^2 + x2 G + x3 H with random G, H; the line x2 = x3 = 0 is bitangent."""
    from .poly import exponents

    rng = np.random.default_rng(seed)
    x0, x1, x2, x3 = MultiPoly.variables(4)
    G = MultiPoly(4, 3, {e: int(rng.integers(-5, 6)) for e in exponents(4, 3)})
    H = MultiPoly(4, 3, {e: int(rng.integers(-5, 6)) for e in exponents(4, 3)})
    F = x1 ** 2 * (x1 - x0 * lam) ** 2 + x2 * G + x3 * H
    return QuarticSurface.checked(F, seed)


# -- plane quartics -------------------------------------------------------------------


@dataclass(frozen=True)
class PlaneBitangent:
    line: ProjPoint
    contacts: tuple[ProjPoint, ProjPoint]
    residual: float


def _polish(f: MultiPoly, g: MultiPoly, v: np.ndarray, iters: int = 8) -> np.ndarray:
    """Newton on f = g = 0 in the chart a.v = 1 (keeps v if it does not improve)."""
    a = v.conj() / np.vdot(v, v).real
    scale = (f.norm(), g.norm())

    def res(x):
        return np.array([complex(f(x)) / scale[0], complex(g(x)) / scale[1], a @ x - 1])

    best = v
    for _ in range(iters):
        r = res(v)
        j = np.vstack([f.grad_at(v) / scale[0], g.grad_at(v) / scale[1], a])
        v = v + np.linalg.lstsq(j, -r, rcond=None)[0]
        if not np.all(np.isfinite(v)):
            break
        if np.linalg.norm(res(v)) < np.linalg.norm(res(best)):
            best = v
    return best


def plane_quartic_bitangents(f: MultiPoly, seed: int = 0, tol: float = 1e-8) -> list[PlaneBitangent]:
    """Bitangent lines of a smooth plane quartic (28 in general).

    Every contact point P solves f = 0 and D = 0, where D is the discriminant of
    the quadratic cofactor of the tangent line at P; the (spurious) points
    where the tangent parametrization degenerates are removed by certifying
    the tangent line and merging lines.
    """
    if f.num_vars != 3 or f.degree != 4:
        raise ValueError("expected a ternary quartic")
    rng = np.random.default_rng(seed)
    ff = f.to_float()
    e = rng.standard_normal(3)
    grad = ff.gradient_polys
    w = [grad[1] * e[2] - grad[2] * e[1], grad[2] * e[0] - grad[0] * e[2], grad[0] * e[1] - grad[1] * e[0]]
    hess = ff.hessian_polys
    c2 = MultiPoly.zero(3, 8)
    c3 = MultiPoly.zero(3, 10)
    for i in range(3):
        for j in range(3):
            c2 = c2 + hess[i][j] * w[i] * w[j] * 0.5
            for k in range(3):
                c3 = c3 + hess[i][j].diff(k) * w[i] * w[j] * w[k] * (1 / 6)
    c4 = ff.substitute(w)
    disc = c3 * c3 - c2 * c4 * 4
    sols = solve_bivariate(ff, disc, tol=1e-6, seed=seed)
    out: list[PlaneBitangent] = []
    for s in sols:
        P = _polish(ff, disc, s.vector)
        L = ff.grad_at(P)
        if np.linalg.norm(L) == 0:
            continue
        basis = complement_basis(L[None, :])
        a, b = basis[:, 0], basis[:, 1]
        pa, pb = ProjPoint(a + 0.37 * b), ProjPoint(b - 0.21 * a)
        q = restrict_to_line(ff, pa, pb)
        if q.degree < 4:
            continue
        _, sq, res = square_root_data(q)
        if res > tol:
            continue
        line = ProjPoint(L)
        if any(line.distance(o.line) < 1e-6 for o in out):
            continue
        va, vb = pa.vector, pb.vector
        contacts = tuple(ProjPoint(va + r * vb) for r in _quadratic_roots(sq))
        out.append(PlaneBitangent(line, contacts, float(res)))
    out.sort(key=lambda x: _sort_key(x.line.coords))
    return out
