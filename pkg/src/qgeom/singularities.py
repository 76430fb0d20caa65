"""Singular points of plane quartics: location, ADE type, delta invariant, genus.

A point is moved to the origin of an affine chart and the germ is read off
from its Taylor jets.  Double points with a rank-one quadratic jet are put in
the form ``y^2 = unit * x^k`` by eliminating ``y`` along the polar curve
``dg/dy = 0`` as a power series; ``k`` then distinguishes cusps (3) from
tacnodes (4) and higher contact.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations

import numpy as np

from .poly import (
    DegenerateInput,
    MultiPoly,
    exact_null_space,
    exponents,
    ProjPoint,
    as_point,
    projective_distance,
    restrict_to_line,
    roots_with_multiplicity,
)
from .solve import solve_bivariate

log = logging.getLogger(__name__)

SERIES_ORDER = 9


class NotOnCurve(ValueError):
    pass


class SmoothPointError(ValueError):
    pass


class DegenerateCurve(DegenerateInput):
    """Non-reduced curve, or a delta budget no reduced irreducible quartic has."""


class Kind(str, Enum):
    SMOOTH = "Smooth"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    TRIPLE = "OrdinaryTriple"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SingularityType:
    kind: Kind
    reason: str = ""

    @property
    def name(self) -> str:
        return self.kind.value if self.kind is not Kind.DEGENERATE else f"Degenerate({self.reason})"

    def __str__(self) -> str:
        return self.name


SMOOTH = SingularityType(Kind.SMOOTH)
A1_NODE = SingularityType(Kind.A1)
A2_CUSP = SingularityType(Kind.A2)
A3_TACNODE = SingularityType(Kind.A3)
ORDINARY_TRIPLE = SingularityType(Kind.TRIPLE)

DELTA = {Kind.SMOOTH: 0, Kind.A1: 1, Kind.A2: 1, Kind.A3: 2, Kind.TRIPLE: 3}


def degenerate(reason: str) -> SingularityType:
    return SingularityType(Kind.DEGENERATE, reason)


@dataclass(frozen=True)
class SingularityReport:
    location: ProjPoint
    type: SingularityType
    multiplicity: int
    delta: int | None

    def to_json(self) -> dict:
        return {"point": self.location.to_json(), "type": self.type.name, "delta": self.delta,
                "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class SectionProfile:
    reports: list[SingularityReport]
    geometric_genus: int
    irreducible_hint: bool
    notes: list[str] = field(default_factory=list)

    def types(self) -> list[Kind]:
        return sorted((r.type.kind for r in self.reports), key=lambda k: k.value)

    def to_json(self) -> dict:
        return {
            "genus": self.geometric_genus,
            "singularities": [r.to_json() for r in self.reports],
            "irreducible_hint": self.irreducible_hint,
        }


# -- local germs ----------------------------------------------------------------


def _chart(pt: ProjPoint) -> list[list]:
    """Columns (pt, e_a, e_b): an affine chart centred at pt using standard vectors."""
    coords = list(pt.coords)
    k = int(np.argmax([abs(complex(c)) for c in coords]))
    others = [i for i in range(3) if i != k]
    one, zero = (Fraction(1), Fraction(0)) if pt.exact else (1.0, 0.0)
    cols = [coords] + [[one if r == i else zero for r in range(3)] for i in others]
    return [[cols[c][r] for c in range(3)] for r in range(3)]


class Germ:
    """Affine germ ``g(u, v) = sum c[i, j] u^i v^j`` with the point at the origin."""

    def __init__(self, form: MultiPoly):
        self.form = form
        d = form.degree
        self.degree = d
        self.exact = form.exact
        zero = Fraction(0) if self.exact else 0j
        self.c = {(i, j): zero for i in range(d + 1) for j in range(d + 1 - i)}
        for (w, i, j), v in form.terms.items():
            self.c[(i, j)] = v
        self.scale = max((abs(complex(v)) for v in self.c.values()), default=0.0)

    @classmethod
    def at(cls, curve: MultiPoly, pt: ProjPoint) -> "Germ":
        return cls(curve.linear_substitute(_chart(pt)))

    def jet(self, k: int) -> list:
        """Coefficients of u^(k-j) v^j, j = 0..k."""
        return [self.c.get((k - j, j), 0) for j in range(k + 1)]

    def is_small(self, value, tol: float) -> bool:
        if self.exact and isinstance(value, Fraction):
            return value == 0
        return abs(complex(value)) <= tol * self.scale

    def transformed(self, n, m) -> "Germ":
        """Germ in the coordinates (x, y) with (u, v) = x n + y m."""
        mat = [[1, 0, 0], [0, n[0], m[0]], [0, n[1], m[1]]]
        return Germ(self.form.linear_substitute(mat))


def _series_mul(a: list, b: list, order: int) -> list:
    out = [0] * order
    for i, x in enumerate(a[:order]):
        if x == 0:
            continue
        for j, y in enumerate(b[: order - i]):
            out[i + j] += x * y
    return out


def _compose(c: dict, phi: list, order: int, dy: bool = False) -> list:
    """Series of g(x, phi(x)) (or of dg/dy along phi) truncated at x^order."""
    powers = [[1] + [0] * (order - 1)]
    max_j = max(j for _, j in c)
    for _ in range(max_j):
        powers.append(_series_mul(powers[-1], phi, order))
    out = [0] * order
    for (i, j), v in c.items():
        if v == 0 or i >= order:
            continue
        if dy:
            if j == 0:
                continue
            coef, pw = v * j, powers[j - 1]
        else:
            coef, pw = v, powers[j]
        for k in range(order - i):
            out[i + k] += coef * pw[k]
    return out


def polar_elimination(germ: Germ, order: int = SERIES_ORDER) -> list:
    """Series h(x) = g(x, phi(x)) where phi solves dg/dy = 0, phi(0) = 0.

    Requires the y^2 coefficient to be nonzero; each fixed-point sweep gains one
    correct order of phi.
    """
    c02 = germ.c[(0, 2)]
    phi = [0] * order
    for _ in range(order + 1):
        gy = _compose(germ.c, phi, order, dy=True)
        phi = [p - q / (2 * c02) for p, q in zip(phi, gy)]
        phi[0] = 0
    return _compose(germ.c, phi, order)


def _binary_cubic_disc(a, b, c, d):
    return b * b * c * c - 4 * a * c ** 3 - 4 * b ** 3 * d - 27 * a * a * d * d + 18 * a * b * c * d


def _tangent_separation(coeffs) -> float:
    """Smallest projective distance between the linear factors of a binary form.

    The discriminant is not a good float test: a chart can squeeze distinct
    tangent lines together and shrink it far below any fixed threshold, while a
    genuine double factor splits only by about the square root of roundoff.
    """
    cs = np.array([complex(v) for v in coeffs])
    lines = []
    # coefficient of u^(3-i) v^i; roots in (u : v), infinity included
    k = len(cs) - 1
    while k >= 0 and abs(cs[k]) <= 1e-14 * np.max(np.abs(cs)):
        lines.append(np.array([1.0, 0.0]))
        k -= 1
    for r in np.roots(cs[: k + 1][::-1]) if k > 0 else []:
        lines.append(np.array([r, 1.0]) / np.hypot(abs(r), 1.0))
    if len(lines) < 2:
        return 1.0
    return min(projective_distance(lines[i], lines[j])
               for i in range(len(lines)) for j in range(i + 1, len(lines)))


def multiplicity_at(curve: MultiPoly, pt, tol: float = 1e-8) -> int:
    """Order of vanishing of the curve at ``pt``."""
    pt = as_point(pt)
    germ = Germ.at(curve, pt)
    if not germ.is_small(germ.c[(0, 0)], tol):
        raise NotOnCurve(f"point {pt} is not on the curve (value {complex(germ.c[(0, 0)]):.3e})")
    for k in range(1, curve.degree + 1):
        if not all(germ.is_small(v, tol) for v in germ.jet(k)):
            return k
    raise DegenerateCurve("every jet vanishes: the curve is identically zero")


def classify_singularity(curve: MultiPoly, pt, tol: float = 1e-8, rank_tol: float = 1e-6,
                         allow_smooth: bool = True) -> SingularityReport:
    """Type, multiplicity and delta invariant of the germ of ``curve`` at ``pt``.

    Smooth points are reported as ``SMOOTH`` with delta 0 (or rejected when
    ``allow_smooth`` is false).
    """
    pt = as_point(pt)
    mult = multiplicity_at(curve, pt, tol)
    germ = Germ.at(curve, pt)
    if mult == 1:
        if not allow_smooth:
            raise SmoothPointError(f"{pt} is a smooth point of the curve")
        return SingularityReport(pt, SMOOTH, 1, 0)
    if mult == 3:
        a, b, c, d = germ.jet(3)
        disc = _binary_cubic_disc(a, b, c, d)
        big = max(abs(complex(v)) for v in (a, b, c, d)) ** 4
        if germ.exact and isinstance(disc, Fraction):
            squarefree = disc != 0
        else:
            squarefree = _tangent_separation((a, b, c, d)) > rank_tol
        if squarefree:
            return SingularityReport(pt, ORDINARY_TRIPLE, 3, 3)
        return SingularityReport(pt, degenerate("non-ordinary triple point"), 3, None)
    if mult >= 4:
        return SingularityReport(pt, degenerate(f"multiplicity {mult}"), mult, None)

    a, b, c = germ.jet(2)
    disc = 4 * a * c - b * b
    big = max(abs(complex(v)) for v in (a, b, c)) ** 2
    if germ.exact and isinstance(disc, Fraction):
        rank2 = disc != 0
    else:
        rank2 = abs(complex(disc)) > rank_tol * big
    if rank2:
        return SingularityReport(pt, A1_NODE, 2, 1)
    # rank one: move the kernel of the quadratic jet onto the x axis
    if abs(complex(c)) >= abs(complex(a)):
        n, m = (1, -b / (2 * c)), (0, 1)
    else:
        n, m = (-b / (2 * a), 1), (1, 0)
    local = germ.transformed(n, m)
    h = polar_elimination(local)
    for k in range(2, SERIES_ORDER):
        if not local.is_small(h[k], rank_tol if k == 2 else tol * 100):
            break
    else:
        raise DegenerateCurve(f"germ at {pt} is non-reduced (polar series vanishes to order {SERIES_ORDER})")
    if k == 3:
        return SingularityReport(pt, A2_CUSP, 2, 1)
    if k == 4:
        return SingularityReport(pt, A3_TACNODE, 2, 2)
    if k == 2:
        # only reachable when the rank test and the series disagree; treat as a node
        return SingularityReport(pt, A1_NODE, 2, 1)
    return SingularityReport(pt, degenerate(f"A{k - 1}"), 2, k // 2)


# -- global structure ---------------------------------------------------------


def is_reduced(curve: MultiPoly, rng: np.random.Generator | None = None, tol: float = 1e-6) -> bool:
    """A generic line meets a reduced curve in distinct points."""
    rng = rng or np.random.default_rng(12345)
    p = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    q = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    binary = restrict_to_line(curve.to_float(), ProjPoint(p), ProjPoint(q))
    if binary.degree < curve.degree:
        return True
    roots = roots_with_multiplicity(binary, tol)
    return all(m == 1 for _, m in roots)


def _centroid(points: list[np.ndarray]) -> np.ndarray:
    ref = points[0] / np.linalg.norm(points[0])
    acc = np.zeros_like(ref)
    for v in points:
        v = v / np.linalg.norm(v)
        acc += v * (np.vdot(v, ref) / abs(np.vdot(v, ref)))
    return acc / len(points)


def _polish_singular(fc: MultiPoly, v: np.ndarray, iters: int = 200) -> np.ndarray:
    """Gauss-Newton on grad f = 0 in the chart a.v = 1.

    Solutions of the polar system at a non-nodal point come out spread over a
    cluster of radius ~ eps^(1/mu); the iteration converges (linearly at such
    points) to the point itself.
    """
    a = v.conj() / np.vdot(v, v).real
    best, best_r = v, np.linalg.norm(fc.grad_at(v))
    for _ in range(iters):
        r = np.append(fc.grad_at(v), a @ v - 1)
        j = np.vstack([fc.hess_at(v), a])
        step = np.linalg.lstsq(j, -r, rcond=None)[0]
        v = v + step
        res = np.linalg.norm(fc.grad_at(v))
        if res < best_r:
            best, best_r = v, res
        if np.linalg.norm(step) <= 1e-15 * np.linalg.norm(v):
            break
    return best / np.max(np.abs(best))


def singular_points(curve: MultiPoly, seed: int = 0, tol: float = 1e-8,
                    merge_tol: float = 1e-6) -> list[ProjPoint]:
    """All singular points of a reduced ternary form."""
    if curve.num_vars != 3:
        raise ValueError("singular_points expects a ternary form")
    if not is_reduced(curve):
        raise DegenerateCurve("curve is not reduced")
    rng = np.random.default_rng(seed)
    fc = curve.to_float()
    grads = fc.gradient_polys
    w = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    combos = [sum((g * complex(wi) for g, wi in zip(grads, row)), MultiPoly.zero(3, fc.degree - 1))
              for row in w]
    # split higher-order singular points appear as loose clusters of solutions
    sols = solve_bivariate(combos[0], combos[1], tol=1e-3, seed=seed, merge_tol=1e-9)
    cands = [s.vector / np.linalg.norm(s.vector) for s in sols]
    clusters: list[list[np.ndarray]] = []
    for v in cands:
        for cl in clusters:
            if projective_distance(v, cl[0]) < 1e-3:
                cl.append(v)
                break
        else:
            clusters.append([v])
    found: list[np.ndarray] = []
    gscale = max(g.norm() for g in grads)
    for cl in clusters:
        for v in ([_centroid(cl)] + cl if len(cl) > 1 else cl):
            v = _polish_singular(fc, v / np.max(np.abs(v)))
            gv = np.abs(fc.grad_at(v))
            if np.max(gv) <= tol * gscale * 10 and abs(fc(v)) <= tol * fc.norm() * 10:
                found.append(v)
                break
    out: list[np.ndarray] = []
    for v in found:
        if any(projective_distance(v, u) < merge_tol for u in out):
            log.debug("merging singular points closer than %.1e", merge_tol)
            continue
        out.append(v)
    pts = [ProjPoint(v) for v in out]
    pts.sort(key=lambda p: tuple((round(c.real, 9), round(c.imag, 9)) for c in p.coords))
    return pts


def _line_is_component(curve: MultiPoly, a: ProjPoint, b: ProjPoint) -> bool:
    binary = restrict_to_line(curve.to_float(), a, b)
    return binary.norm() <= 1e-8 * curve.norm()


def section_profile(curve: MultiPoly, seed: int = 0, tol: float = 1e-8,
                    known: list | None = None) -> SectionProfile:
    """Singularities and geometric genus ``3 - sum(delta)`` of a plane quartic.

    ``known`` lists points that must appear among the singular points (e.g. the
    tangency point of a tangent section); each one replaces any numerical
    solution within 1e-5 of it.
    """
    pts = singular_points(curve, seed=seed, tol=tol)
    for k in known or []:
        # a known point replaces its (less accurate) numerical copy
        k = as_point(k)
        pts = [p for p in pts if k.distance(p) > 1e-5] + [k]
    reports = [classify_singularity(curve, p, tol=tol, allow_smooth=False) for p in pts]
    unknown = [r for r in reports if r.delta is None]
    if unknown:
        raise DegenerateCurve(f"unclassified singularity {unknown[0].type.name}")
    total = sum(r.delta for r in reports)
    if total > 3:
        raise DegenerateCurve(f"delta sum {total} exceeds 3: curve is reducible")
    hint = not any(_line_is_component(curve, a.location, b.location) for a, b in combinations(reports, 2))
    notes = ["irreducible_hint is a numerical heuristic"] if not curve.exact else []
    return SectionProfile(reports, 3 - total, hint, notes)


def quartic_with_nodes(points, rng: np.random.Generator | None = None, bound: int = 5) -> MultiPoly:
    """Exact integer plane quartic singular at the given integer points.

    Singularity at ``p`` is three linear conditions (the partials vanish) on the
    15 coefficients; a random integer member of the solution space is returned.
    """
    rng = rng or np.random.default_rng(0)
    mons = exponents(3, 4)
    rows = []
    for p in points:
        p = [Fraction(c) for c in p]
        for i in range(3):
            row = []
            for e in mons:
                if e[i] == 0:
                    row.append(Fraction(0))
                    continue
                d = list(e)
                d[i] -= 1
                row.append(e[i] * p[0] ** d[0] * p[1] ** d[1] * p[2] ** d[2])
            rows.append(row)
    basis = exact_null_space(rows)
    if not basis:
        raise DegenerateInput("no quartic is singular at all the given points")
    for _ in range(20):
        w = [int(rng.integers(1, bound + 1)) * int(rng.choice([-1, 1])) for _ in basis]
        coeffs = [sum(wi * b[j] for wi, b in zip(w, basis)) for j in range(len(mons))]
        if any(coeffs):
            return MultiPoly(3, 4, dict(zip(mons, coeffs)))
    raise DegenerateInput("random combination vanished")
