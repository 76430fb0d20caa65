"""Quartic surfaces in P^3: Gauss map, tangent sections and point types."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .poly import (
    DegenerateInput,
    MultiPoly,
    ProjPoint,
    as_point,
    complement_basis,
    exact_null_space,
    exponents,
    random_unitary,
    restrict_to_line,
)
from .singularities import DegenerateCurve, Kind, SectionProfile, section_profile

log = logging.getLogger(__name__)

ON_SURFACE_TOL = 1e-10


class NotOnSurface(ValueError):
    pass


class SingularSurfacePoint(ValueError):
    pass


class LineInSurface(DegenerateInput):
    pass


class SmoothnessCheckFailed(RuntimeError):
    pass


@dataclass
class QuarticSurface:
    F: MultiPoly
    seed: int | None = None
    smooth: bool | None = None
    contains_lines: bool | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.F.num_vars != 4 or self.F.degree != 4:
            raise ValueError("a quartic surface needs a degree-4 form in 4 variables")

    @property
    def mode(self) -> str:
        return self.F.mode

    @property
    def generic(self) -> bool:
        return bool(self.smooth) and not self.contains_lines

    @classmethod
    def checked(cls, F: MultiPoly, seed: int | None = None, lines: bool = False) -> "QuarticSurface":
        X = cls(F, seed)
        X.smooth = not singular_point_sweep(F)
        X.flags.append("smoothness: numerical sweep (heuristic)")
        if not X.smooth:
            X.flags.append("singular point found")
        if lines:
            X.contains_lines = bool(line_sweep(F))
            if X.contains_lines:
                X.flags.append("non-generic: contains lines")
        return X

    def to_json(self) -> dict:
        return {"F": self.F.to_json(), "seed": self.seed, "smooth": self.smooth,
                "contains_lines": self.contains_lines, "flags": list(self.flags)}

    @classmethod
    def from_json(cls, data: dict) -> "QuarticSurface":
        if "F" not in data:
            return cls(MultiPoly.from_json(data))
        X = cls(MultiPoly.from_json(data["F"]), data.get("seed"))
        X.smooth = data.get("smooth")
        X.contains_lines = data.get("contains_lines")
        X.flags = list(data.get("flags", []))
        return X


# -- generation and genericity sweeps ----------------------------------------------


def _batched_gauss_newton(residual, jacobian, x, iters):
    for _ in range(iters):
        r = residual(x)
        j = jacobian(x)
        step = -np.einsum("bij,bj->bi", np.linalg.pinv(j), r)
        x = x + step
        x[~np.all(np.isfinite(x), axis=1)] = 0
    return x


def singular_point_sweep(F: MultiPoly, starts: int = 256, seed: int = 0, tol: float = 1e-8) -> list[ProjPoint]:
    """Multi-start Gauss-Newton on grad F = 0; returns the singular points found."""
    rng = np.random.default_rng(seed)
    f = F.to_float()
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x = rng.standard_normal((starts, 4)) + 1j * rng.standard_normal((starts, 4))
    x = x / (x @ c)[:, None]

    def residual(x):
        return np.concatenate([f.grad_at(x), (x @ c - 1)[:, None]], axis=1)

    def jacobian(x):
        h = np.moveaxis(f.hess_at(x), -1, 0)
        return np.concatenate([h, np.broadcast_to(c, (len(x), 1, 4))], axis=1)

    x = _batched_gauss_newton(residual, jacobian, x, 40)
    norms = np.linalg.norm(x, axis=1)
    ok = norms > 0
    g = np.linalg.norm(f.grad_at(x[ok]), axis=1) / (f.norm() * norms[ok] ** 3)
    found: list[ProjPoint] = []
    for v, gv in zip(x[ok], g):
        if gv < tol:
            pt = ProjPoint(v)
            if all(pt.distance(q) > 1e-6 for q in found):
                found.append(pt)
    return found


def line_sweep(F: MultiPoly, starts: int = 400, seed: int = 0, tol: float = 1e-9) -> list[tuple[ProjPoint, ProjPoint]]:
    """Multi-start search for lines inside V(F); each found line as a point pair."""
    rng = np.random.default_rng(seed)
    u = random_unitary(4, rng)
    g = F.to_float().linear_substitute(u)
    ts = np.exp(2j * np.pi * np.arange(5) / 5)

    def points(z):
        a = np.stack([np.ones(len(z)), np.zeros(len(z)), z[:, 0], z[:, 1]], axis=1)
        b = np.stack([np.zeros(len(z)), np.ones(len(z)), z[:, 2], z[:, 3]], axis=1)
        return a, b

    def residual(z):
        a, b = points(z)
        return np.stack([g.evaluate_many(a + t * b) for t in ts], axis=1)

    def jacobian(z):
        a, b = points(z)
        rows = []
        for t in ts:
            gr = g.grad_at(a + t * b)
            rows.append(np.stack([gr[:, 2], gr[:, 3], t * gr[:, 2], t * gr[:, 3]], axis=1))
        return np.stack(rows, axis=1)

    z = rng.standard_normal((starts, 4)) + 1j * rng.standard_normal((starts, 4))
    z = _batched_gauss_newton(residual, jacobian, z, 60)
    res = np.max(np.abs(residual(z)), axis=1) / g.norm()
    lines = []
    for zi, r in zip(z, res):
        if r < tol and np.all(np.abs(zi) < 1e6):
            a, b = points(zi[None, :])
            lines.append((ProjPoint(u @ a[0]), ProjPoint(u @ b[0])))
    return lines


def random_quartic(seed: int, max_retries: int = 100) -> QuarticSurface:
    """Integer coefficients uniform in [-9, 9], smoothness-checked."""
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        F = MultiPoly(4, 4, {e: int(rng.integers(-9, 10)) for e in exponents(4, 4)})
        X = QuarticSurface.checked(F, seed)
        if X.smooth:
            return X
    raise SmoothnessCheckFailed(f"no smooth quartic after {max_retries} draws (seed {seed})")


def fermat_fixture() -> QuarticSurface:
    """x0^4 - x1^4 + x2^4 - x3^4: smooth, but contains 48 lines."""
    x0, x1, x2, x3 = MultiPoly.variables(4)
    X = QuarticSurface.checked(x0 ** 4 - x1 ** 4 + x2 ** 4 - x3 ** 4, lines=True)
    X.flags.append("fixture: Fermat-type quartic")
    return X


def _random_cubic_times_x3(rng, lead_one: bool = True) -> MultiPoly:
    x3 = MultiPoly.variable(4, 3)
    cubic = MultiPoly(4, 3, {e: Fraction(int(rng.integers(-5, 6))) for e in exponents(4, 3)})
    if lead_one:
        cubic = cubic - MultiPoly.monomial((3, 0, 0, 0), cubic.coeff((3, 0, 0, 0))) + MultiPoly.monomial((3, 0, 0, 0), 1)
    return x3 * cubic


def _plane_quartic(terms: dict) -> MultiPoly:
    return MultiPoly(4, 4, {(a, b, c, 0): v for (a, b, c), v in terms.items()})


def swallowtail_fixture(seed: int = 0) -> QuarticSurface:
    """Quartic whose tangent section at (1:0:0:0) has a tacnode there and nothing else.

    The section is x2^2 - x1^4 plus random terms of higher weight (x1 weight 1,
    x2 weight 2), which keeps the germ an A3.
    """
    rng = np.random.default_rng(seed)
    r = lambda: Fraction(int(rng.integers(1, 7)) * int(rng.choice([-1, 1])))
    sec = {(2, 0, 2): 1, (0, 4, 0): -1, (1, 1, 2): r(), (1, 0, 3): r(),
           (0, 2, 2): r(), (0, 1, 3): r(), (0, 0, 4): r(), (0, 3, 1): r()}
    F = _plane_quartic(sec) + _random_cubic_times_x3(rng)
    X = QuarticSurface.checked(F, seed)
    X.flags.append("fixture: Gauss swallowtail at (1:0:0:0)")
    return X


def parabolic_fixture(seed: int = 0) -> QuarticSurface:
    """Quartic whose tangent section at (1:0:0:0) has a cusp there."""
    rng = np.random.default_rng(seed)
    r = lambda: Fraction(int(rng.integers(1, 7)) * int(rng.choice([-1, 1])))
    sec = {(2, 0, 2): 1, (1, 3, 0): -1}
    for e in exponents(3, 4):
        if e[0] <= 1 and e not in sec:
            sec[e] = r()
    F = _plane_quartic(sec) + _random_cubic_times_x3(rng)
    X = QuarticSurface.checked(F, seed)
    X.flags.append("fixture: parabolic point at (1:0:0:0)")
    return X


def hyperflex_fixture(seed: int = 0) -> QuarticSurface:
    """Random quartic with F(1, t, 0, 0) = c t^4: a hyperflex line at (1:0:0:0)."""
    rng = np.random.default_rng(seed)
    banned = {(4, 0, 0, 0), (3, 1, 0, 0), (2, 2, 0, 0), (1, 3, 0, 0)}
    terms = {e: int(rng.integers(-9, 10)) for e in exponents(4, 4) if e not in banned}
    terms[(0, 4, 0, 0)] = int(rng.integers(1, 10))
    terms[(3, 0, 0, 1)] = 1
    X = QuarticSurface.checked(MultiPoly(4, 4, terms), seed)
    X.flags.append("fixture: hyperflex line x2 = x3 = 0 at (1:0:0:0)")
    return X


# -- points ------------------------------------------------------------------------


def relative_value(F: MultiPoly, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=complex)
    return abs(complex(F.evaluate_many(v))) / (F.norm() * np.linalg.norm(v) ** 4)


def on_surface(X: QuarticSurface, p, tol: float = ON_SURFACE_TOL) -> ProjPoint:
    """Validate ``p`` on X; near misses get Newton projection steps along the gradient."""
    p = as_point(p)
    if p.exact and X.F.exact:
        if X.F(p.coords) != 0:
            raise NotOnSurface(f"F({p}) = {X.F(p.coords)}")
        return p
    v = p.vector
    if relative_value(X.F, v) <= tol:
        return p
    if relative_value(X.F, v) > 1e-6:
        raise NotOnSurface(f"relative value {relative_value(X.F, v):.2e} at {p}")
    for _ in range(3):
        g = X.F.grad_at(v)
        v = v - complex(X.F.evaluate_many(v)) * g.conj() / np.vdot(g, g).real
        if relative_value(X.F, v) <= tol:
            return ProjPoint(v)
    raise NotOnSurface(f"Newton projection did not reach the surface at {p}")


def random_points_on_surface(X: QuarticSurface, rng: np.random.Generator, count: int) -> list[ProjPoint]:
    """Points of X cut out by random complex lines (one root per line)."""
    out = []
    f = X.F.to_float()
    while len(out) < count:
        a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        q = restrict_to_line(f, ProjPoint(a), ProjPoint(b))
        if q.degree < 4:
            continue
        roots = np.roots([complex(c) for c in reversed(q.coeffs)])
        t = roots[int(rng.integers(len(roots)))]
        a, b = ProjPoint(a).vector, ProjPoint(b).vector
        v = a + t * b
        for _ in range(3):
            g = f.grad_at(v)
            v = v - complex(f.evaluate_many(v)) * g.conj() / np.vdot(g, g).real
        out.append(ProjPoint(v))
    return out


def gauss_map(X: QuarticSurface, p) -> ProjPoint:
    p = as_point(p)
    if p.exact and X.F.exact:
        g = [gi(p.coords) for gi in X.F.gradient_polys]
    else:
        g = X.F.grad_at(p.vector)
    if all(abs(complex(c)) == 0 for c in g):
        raise SingularSurfacePoint(f"grad F vanishes at {p}")
    return ProjPoint(g)


@dataclass(frozen=True)
class TangentPlane:
    point: ProjPoint
    normal: ProjPoint
    basis: tuple[tuple, tuple, tuple]

    def matrix(self) -> np.ndarray:
        return np.array([[complex(c) for c in b] for b in self.basis]).T

    def contains(self, q, tol: float = 1e-10) -> bool:
        q = as_point(q)
        n = self.normal.vector
        return abs(n @ q.vector) <= tol * np.linalg.norm(n) * np.linalg.norm(q.vector)


def tangent_plane(X: QuarticSurface, p, tol: float = ON_SURFACE_TOL) -> TangentPlane:
    """Tangent plane at p: normal [grad F(p)] and a basis (p, e1, e2) of the plane."""
    p = on_surface(X, p, tol)
    normal = gauss_map(X, p)
    if p.exact and X.F.exact:
        null = exact_null_space([list(normal.coords)])
        chosen = [list(p.coords)]
        for v in null:
            trial = chosen + [v]
            if len(exact_null_space(trial)) == 4 - len(trial):
                chosen = trial
            if len(chosen) == 3:
                break
        basis = tuple(tuple(v) for v in chosen)
    else:
        pv = p.vector
        comp = complement_basis(np.array([normal.vector, pv.conj()]))
        basis = (tuple(pv), tuple(comp[:, 0]), tuple(comp[:, 1]))
    return TangentPlane(p, normal, basis)


def tangent_section(X: QuarticSurface, p, tol: float = ON_SURFACE_TOL) -> tuple[MultiPoly, ProjPoint]:
    """The plane quartic T_pX cut with X, in plane coordinates where p = (1:0:0)."""
    plane = tangent_plane(X, p, tol)
    sec = _restrict(X.F, plane)
    origin = ProjPoint([1, 0, 0]) if sec.exact else ProjPoint([1.0, 0.0, 0.0])
    return sec, origin


def _restrict(F: MultiPoly, plane: TangentPlane) -> MultiPoly:
    # basis vectors are used as given (not renormalized) so p maps to (1:0:0)
    cols = [list(b) for b in plane.basis]
    return F.linear_substitute([[cols[j][i] for j in range(3)] for i in range(4)])


# -- point classification ----------------------------------------------------------


class PointKind(str, Enum):
    GENERAL_NODE = "GeneralNode"
    SIMPLE_PARABOLIC = "SimpleParabolic"
    SIMPLE_GAUSS_DOUBLE = "SimpleGaussDouble"
    PARABOLIC_GAUSS_DOUBLE = "ParabolicGaussDouble"
    DUAL_PARABOLIC_GAUSS_DOUBLE = "DualParabolicGaussDouble"
    GAUSS_SWALLOWTAIL = "GaussSwallowtail"
    GAUSS_TRIPLE = "GaussTriple"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class PointClass:
    kind: PointKind
    reason: str = ""

    @property
    def name(self) -> str:
        return self.kind.value

    def __str__(self) -> str:
        return self.name if not self.reason else f"{self.name}({self.reason})"


_TABLE = {
    (2, Kind.A1, ()): PointKind.GENERAL_NODE,
    (2, Kind.A2, ()): PointKind.SIMPLE_PARABOLIC,
    (1, Kind.A1, (Kind.A1,)): PointKind.SIMPLE_GAUSS_DOUBLE,
    (1, Kind.A2, (Kind.A1,)): PointKind.PARABOLIC_GAUSS_DOUBLE,
    (1, Kind.A1, (Kind.A2,)): PointKind.DUAL_PARABOLIC_GAUSS_DOUBLE,
    (1, Kind.A3, ()): PointKind.GAUSS_SWALLOWTAIL,
    (0, Kind.A1, (Kind.A1, Kind.A1)): PointKind.GAUSS_TRIPLE,
}


def point_class_from_profile(profile: SectionProfile, origin: ProjPoint) -> PointClass:
    at_p = min(profile.reports, key=lambda r: r.location.distance(origin))
    if at_p.location.distance(origin) > 1e-6:
        return PointClass(PointKind.UNCLASSIFIED, "tangency point not singular on the section")
    others = tuple(sorted((r.type.kind for r in profile.reports if r is not at_p), key=lambda k: k.value))
    kind = _TABLE.get((profile.geometric_genus, at_p.type.kind, others))
    if kind is None:
        desc = ",".join(k.value for k in others) or "none"
        return PointClass(PointKind.UNCLASSIFIED,
                          f"genus {profile.geometric_genus}, {at_p.type.name} at p, others: {desc}")
    return PointClass(kind)


def classify_point(X: QuarticSurface, p, tol: float = ON_SURFACE_TOL, seed: int = 0) -> tuple[PointClass, SectionProfile | None]:
    """Type of the pair (tangent section, p) according to the singularities of the section."""
    sec, origin = tangent_section(X, p, tol)
    try:
        profile = section_profile(sec, seed=seed, known=[origin])
    except DegenerateCurve as exc:
        return PointClass(PointKind.UNCLASSIFIED, str(exc)), None
    cls = point_class_from_profile(profile, origin)
    if cls.kind is not PointKind.UNCLASSIFIED:
        expected_genus = {PointKind.GENERAL_NODE: 2, PointKind.SIMPLE_PARABOLIC: 2,
                          PointKind.GAUSS_TRIPLE: 0}.get(cls.kind, 1)
        assert profile.geometric_genus == expected_genus
    return cls, profile


# -- second fundamental form -----------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticData:
    hessian2x2: np.ndarray
    directions: list[ProjPoint]
    rank: int
    parabolic_measure: float


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def parabolic_measure(X: QuarticSurface, p) -> float:
    """|det Hess F(p)| with p of unit norm, relative to |Hess F(p)|^4."""
    v = _unit(as_point(p).vector)
    h = X.F.hess_at(v)
    return float(abs(np.linalg.det(h)) / np.linalg.norm(h) ** 4)


def is_parabolic(X: QuarticSurface, p, tol: float = 1e-9) -> bool:
    p = on_surface(X, p)
    return parabolic_measure(X, p) < tol


def asymptotic_directions(X: QuarticSurface, p, tol: float = 1e-9) -> AsymptoticData:
    """Null directions of the local quadratic form z = -q(x, y) at p.

    The rank is decided by the same normalized Hessian determinant as
    :func:`is_parabolic`, so the two always agree.
    """
    p = on_surface(X, p)
    v = _unit(p.vector)
    grad = X.F.grad_at(v)
    if np.linalg.norm(grad) == 0:
        raise SingularSurfacePoint(f"grad F vanishes at {p}")
    b = complement_basis(np.array([grad, v.conj()]))
    hess2 = b.T @ X.F.hess_at(v) @ b / np.linalg.norm(grad)
    measure = parabolic_measure(X, p)
    scale = np.linalg.norm(hess2)
    if scale <= 1e-12 * np.linalg.norm(X.F.hess_at(v)) / np.linalg.norm(grad):
        return AsymptoticData(hess2, [], 0, measure)
    if measure < tol:
        _, _, vh = np.linalg.svd(hess2)
        xy = vh[-1].conj()
        return AsymptoticData(hess2, [ProjPoint(b @ xy)], 1, measure)
    a, c, d = hess2[0, 0], hess2[0, 1], hess2[1, 1]
    # a x^2 + 2 c x y + d y^2 = 0
    if abs(a) >= abs(d):
        ys = np.roots([a, 2 * c, d])  # x/y
        pairs = [np.array([r, 1.0]) for r in ys]
    else:
        xs = np.roots([d, 2 * c, a])  # y/x
        pairs = [np.array([1.0, r]) for r in xs]
    dirs = [ProjPoint(b @ xy) for xy in pairs]
    return AsymptoticData(hess2, dirs, 2, measure)


def hyperflex_directions(X: QuarticSurface, p, tol: float = 1e-8) -> list[ProjPoint]:
    """Tangent directions d at p with F(p + t d) = c t^4."""
    p = on_surface(X, p)
    data = asymptotic_directions(X, p)
    if data.rank == 0:
        raise DegenerateInput("second fundamental form vanishes at p")
    out = []
    f = X.F.to_float()
    pv = _unit(p.vector)
    for d in data.directions:
        dv = _unit(d.vector)
        q = restrict_to_line(f, ProjPoint(pv), ProjPoint(dv))
        c = q.padded(5)
        size = max(abs(complex(x)) for x in c) if not q.is_zero() else 0.0
        if size == 0 or (abs(complex(c[4])) <= tol * f.norm() and abs(complex(c[3])) <= tol * f.norm()):
            raise LineInSurface(f"the line through {p} in direction {d} lies in X")
        if abs(complex(c[3])) <= tol * size and abs(complex(c[2])) <= tol * size:
            out.append(d)
    return out


def polar_section_membership(X: QuarticSurface, p, q, tol: float = 1e-9) -> bool:
    """Whether q lies on the polar cubic of p, i.e. p lies in the tangent plane at q."""
    q = on_surface(X, q)
    p = as_point(p)
    if p.exact and q.exact and X.F.exact:
        return sum(pi * g(q.coords) for pi, g in zip(p.coords, X.F.gradient_polys)) == 0
    g = X.F.grad_at(q.vector)
    return abs(g @ p.vector) <= tol * np.linalg.norm(g) * np.linalg.norm(p.vector)


def tangent_cone_directions(X: QuarticSurface, p) -> list[ProjPoint]:
    """Branch tangents of the tangent section at p, mapped back into P^3."""
    plane = tangent_plane(X, p)
    sec = _restrict(X.F.to_float(), plane)
    a = complex(sec.coeff((2, 2, 0)))
    b = complex(sec.coeff((2, 1, 1)))
    c = complex(sec.coeff((2, 0, 2)))
    m = plane.matrix()
    if abs(a) >= abs(c):
        pairs = [np.array([0, r, 1.0]) for r in np.roots([a, b, c])]
    else:
        pairs = [np.array([0, 1.0, r]) for r in np.roots([c, b, a])]
    return [ProjPoint(m @ w) for w in pairs]
