"""Exact intersection numbers behind the enumerative invariants of the bitangent congruence.

Everything here is integer (or exact rational) arithmetic:

* the Chow ring of the Grassmannian of lines in P^3 in the Schubert basis;
* the numerical rings of the P^1-bundles P(Q_S) over the bitangent surface S
  and P(Omega_X(1)) over the quartic X, via the relation t^2 = c1 t - c2;
* divisor lattices with adjunction;
* a ledger of consistency identities, each with both sides reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable

BASIS = ("1", "l", "h", "p", "lh", "pt")
GRADE = (0, 1, 2, 2, 3, 4)

# products of basis elements (index pairs) as dicts of basis index -> coefficient
_TABLE: dict[tuple[int, int], dict[int, int]] = {
    (1, 1): {2: 1, 3: 1},
    (1, 2): {4: 1},
    (1, 3): {4: 1},
    (2, 2): {5: 1},
    (3, 3): {5: 1},
    (2, 3): {},
    (1, 4): {5: 1},
}


@dataclass(frozen=True)
class SchubertClass:
    """Integer combination of 1, sigma_l, sigma_h, sigma_p, sigma_lh, [pt]."""

    coeffs: tuple[int, ...] = (0, 0, 0, 0, 0, 0)

    def __post_init__(self):
        if len(self.coeffs) != 6:
            raise ValueError("six Schubert coefficients expected")
        if not all(isinstance(c, int) for c in self.coeffs):
            raise TypeError("Schubert coefficients must be integers")

    @classmethod
    def basis(cls, name: str) -> "SchubertClass":
        c = [0] * 6
        c[BASIS.index(name)] = 1
        return cls(tuple(c))

    def __add__(self, other: "SchubertClass") -> "SchubertClass":
        return SchubertClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "SchubertClass") -> "SchubertClass":
        return SchubertClass(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, k: int) -> "SchubertClass":
        return SchubertClass(tuple(k * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return other * self
        return schubert_mul(self, other)

    def __pow__(self, n: int) -> "SchubertClass":
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self) -> str:
        parts = [f"{c}*{n}" for c, n in zip(self.coeffs, BASIS) if c]
        return " + ".join(parts) or "0"


def _basis_product(i: int, j: int) -> dict[int, int]:
    if i == 0:
        return {j: 1}
    if j == 0:
        return {i: 1}
    if GRADE[i] + GRADE[j] > 4:
        return {}
    return _TABLE.get((i, j)) or _TABLE.get((j, i)) or {}


def schubert_mul(a: SchubertClass, b: SchubertClass) -> SchubertClass:
    out = [0] * 6
    for i, x in enumerate(a.coeffs):
        if not x:
            continue
        for j, y in enumerate(b.coeffs):
            if not y:
                continue
            for k, c in _basis_product(i, j).items():
                out[k] += x * y * c
    return SchubertClass(tuple(out))


def schubert_degree(c: SchubertClass) -> int:
    return c.coeffs[5]


ONE = SchubertClass.basis("1")
SIGMA_L = SchubertClass.basis("l")
SIGMA_H = SchubertClass.basis("h")
SIGMA_P = SchubertClass.basis("p")
SIGMA_LH = SchubertClass.basis("lh")
POINT = SchubertClass.basis("pt")


# -- constants -------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerConstants:
    """Structural inputs and cited values; every ledger row depends on some of them."""

    # bidegree of the bitangent congruence: [S] = s_p sigma_p + s_h sigma_h
    s_p: int = 12
    s_h: int = 28
    # numerical c2 of the quotient bundle restricted to S
    pq_c2: int = 28
    # quartic surface X: h^2, K_X = k_x h, c2(X)
    x_h2: int = 4
    k_x: int = 0
    c2_x: int = 24
    chi_x: int = 2
    # bitangent surface S: K_S = k_s H + sigma, invariants
    k_s: int = 3
    c2_s: int = 192
    p_g_s: int = 45
    q_s: int = 0
    # curve classes on X (multiples of h) and on S (multiples of H)
    par: int = 8
    hf: int = 20
    dou: int = 80
    c_on_s: int = 4
    b_hf: int = 2
    # local and cited counts
    degree_f: int = 12
    contact_degree: int = 6
    sigma_dou_degree: int = 160
    swallowtail_multiplicity: int = 2
    swallowtails: int = 320
    genus_par: int = 129
    genus_c: int = 561
    genus_dou: int = 1281
    rational_curves: int = 3200
    nodes_per_curve: int = 3
    triple_points: int = 9600
    hf_arithmetic_genus: int = 801
    hf_geometric_genus: int = 201
    hf_delta: int = 600
    gauss_degree: int = 3
    dual_dou_degree: int = 480
    deg_s: int = 40


PRINTED_CLASS_OF_S = "40 sigma_l^2 + 28 sigma_h + 12 sigma_p"


def class_of_S(k: LedgerConstants = LedgerConstants()) -> SchubertClass:
    """Class of the bitangent surface in the Grassmannian: order s_p, class s_h."""
    return k.s_p * SIGMA_P + k.s_h * SIGMA_H


# -- P^1-bundles -----------------------------------------------------------------------


@dataclass(frozen=True)
class BundleRing:
    """Numerical ring of P(E) -> B for a rank-2 bundle E on a surface B with Pic(B)
    numerically generated by one divisor D:  tau^2 = c1 tau - c2,
    c1 = c1_coef * D, deg c2 = c2_deg, D^2 = d2."""

    d2: int
    c1_coef: int
    c2_deg: int

    def base_mul(self, a: tuple, b: tuple) -> tuple:
        """Base classes are (degree-0 int, coefficient of D, degree of 0-cycle)."""
        return (a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                a[0] * b[2] + a[2] * b[0] + a[1] * b[1] * self.d2)

    def power_of_tau(self, n: int) -> tuple[tuple, tuple]:
        """tau^n = A tau + B with A, B base classes."""
        c1 = (0, self.c1_coef, 0)
        c2 = (0, 0, self.c2_deg)
        a, b = (0, 0, 0), (1, 0, 0)
        for _ in range(n):
            # tau (a tau + b) = a (c1 tau - c2) + b tau
            na = tuple(x + y for x, y in zip(self.base_mul(a, c1), b))
            nb = tuple(-x for x in self.base_mul(a, c2))
            a, b = na, nb
        return a, b

    def number(self, tau: int, d: int) -> int:
        """Degree of tau^tau * (pullback D)^d for tau + d = 3."""
        if tau + d != 3:
            raise ValueError("monomial must have total degree 3")
        a, _ = self.power_of_tau(tau)
        dpow = (1, 0, 0)
        for _ in range(d):
            dpow = self.base_mul(dpow, (0, 1, 0))
        # push forward keeps the coefficient of tau
        return self.base_mul(a, dpow)[2]

    def number_by_segre(self, tau: int, d: int) -> int:
        """Same number from push-forwards of tau powers (Segre classes)."""
        if tau == 0:
            return 0
        segre = {0: (1, 0, 0), 1: (0, self.c1_coef, 0),
                 2: (0, 0, self.c1_coef ** 2 * self.d2 - self.c2_deg)}
        s = segre.get(tau - 1, (0, 0, 0))
        dpow = (1, 0, 0)
        for _ in range(d):
            dpow = self.base_mul(dpow, (0, 1, 0))
        return self.base_mul(s, dpow)[2]

    def evaluate(self, poly: dict[tuple[int, int], int]) -> int:
        """Degree of a cubic polynomial {(tau power, D power): coefficient}."""
        return sum(c * self.number(i, j) for (i, j), c in poly.items())


def mul_linear(*factors: tuple[int, int]) -> dict[tuple[int, int], int]:
    """Expand a product of linear forms a tau + b D into {(i, j): coeff}."""
    out = {(0, 0): 1}
    for a, b in factors:
        new: dict[tuple[int, int], int] = {}
        for (i, j), c in out.items():
            if a:
                new[(i + 1, j)] = new.get((i + 1, j), 0) + c * a
            if b:
                new[(i, j + 1)] = new.get((i, j + 1), 0) + c * b
        out = new
    return out


def pq_ring(k: LedgerConstants = LedgerConstants()) -> BundleRing:
    """P(Q_S) over S with tau = R and D = H (hyperplane class of the Pluecker embedding)."""
    deg_s = schubert_degree(SIGMA_L * SIGMA_L * class_of_S(k))
    return BundleRing(d2=deg_s, c1_coef=1, c2_deg=k.pq_c2)


def px_ring(k: LedgerConstants = LedgerConstants()) -> BundleRing:
    """P(Omega_X(1)) over X with tau = T and D = h; c1(Omega_X) = K_X, c2(Omega_X) = c2(X)."""
    return BundleRing(d2=k.x_h2, c1_coef=k.k_x, c2_deg=k.c2_x)


def pq_number(tau: int, d: int, k: LedgerConstants = LedgerConstants()) -> int:
    return pq_ring(k).number(tau, d)


def px_number(tau: int, d: int, k: LedgerConstants = LedgerConstants()) -> int:
    return px_ring(k).number(tau, d)


# -- divisor lattices ------------------------------------------------------------------


class NonIntegralGenus(ArithmeticError):
    pass


@dataclass(frozen=True)
class DivisorLattice:
    """Rank-one numerical lattice Z * D with D^2 = d2 and K = k * D."""

    name: str
    d2: int
    k: int

    def dot(self, a: int, b: int) -> int:
        return a * b * self.d2


def adjunction_genus(lattice: DivisorLattice, d: int) -> int:
    """Arithmetic genus 1 + D.(D + K)/2 of the class d * D."""
    twice = lattice.dot(d, d + lattice.k)
    if twice % 2:
        raise NonIntegralGenus(f"D.(D+K) = {twice} is odd on {lattice.name}")
    return 1 + twice // 2


def x_lattice(k: LedgerConstants = LedgerConstants()) -> DivisorLattice:
    return DivisorLattice("Pic(X)", k.x_h2, k.k_x)


def s_lattice(k: LedgerConstants = LedgerConstants()) -> DivisorLattice:
    return DivisorLattice("NumPic(S)", schubert_degree(SIGMA_L * SIGMA_L * class_of_S(k)), k.k_s)


# Picard classes with a 2-torsion part: (R coefficient, H coefficient, sigma mod 2)
def pic(r: int = 0, h: int = 0, sigma: int = 0) -> tuple[int, int, int]:
    return (r, h, sigma % 2)


def pic_add(*classes: tuple[int, int, int]) -> tuple[int, int, int]:
    return pic(sum(c[0] for c in classes), sum(c[1] for c in classes), sum(c[2] for c in classes))


def pic_scale(n: int, c: tuple[int, int, int]) -> tuple[int, int, int]:
    return pic(n * c[0], n * c[1], n * c[2])


def numerical(c: tuple[int, int, int]) -> tuple[int, int]:
    return c[:2]


# -- ledger ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerRow:
    name: str
    expected: object
    computed: object
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "expected": _jsonable(self.expected),
                "computed": _jsonable(self.computed), "pass": self.passed, "detail": self.detail}


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class LedgerReport:
    rows: list[LedgerRow]
    notes: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.rows)

    def table(self) -> str:
        width = max(len(r.name) for r in self.rows)
        lines = []
        for i, r in enumerate(self.rows, 1):
            flag = "PASS" if r.passed else "FAIL"
            lines.append(f"{i:2d}. {r.name:<{width}}  expected={_jsonable(r.expected)!s:<14} "
                         f"computed={_jsonable(r.computed)!s:<14} {flag}  {r.detail}")
        lines.append(f"{self.passed}/{len(self.rows)} identities pass")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "passed": self.passed,
                "total": len(self.rows), "notes": list(self.notes)}


def _row(name: str, expected, computed, detail: str = "", extra: bool = True) -> LedgerRow:
    return LedgerRow(name, expected, computed, bool(expected == computed and extra), detail)


def _safe(fn: Callable[[], LedgerRow], name: str) -> LedgerRow:
    try:
        return fn()
    except ArithmeticError as exc:
        return LedgerRow(name, None, None, False, f"error: {exc}")


def run_ledger(k: LedgerConstants = LedgerConstants()) -> LedgerReport:
    """Evaluate the fifteen consistency identities for the given constants."""
    S = class_of_S(k)
    pq, px = pq_ring(k), px_ring(k)
    X, Sl = x_lattice(k), s_lattice(k)
    deg_s = schubert_degree(SIGMA_L * SIGMA_L * S)
    r3 = pq.number(3, 0)
    y_part = 2 * r3
    px_branch = px.evaluate(mul_linear((6, 8), (0, 1), (1, 2)))
    sigma_part = 2 * px_branch
    pq_cross = k.c_on_s * pq.number(2, 1)
    deg_dou = k.dou * k.x_h2
    # the P(Omega_X(1)) ring is only meaningful if its inputs satisfy Noether on X
    x_noether = Fraction(k.k_x ** 2 * k.x_h2 + k.c2_x, 12)

    def noether() -> LedgerRow:
        lhs = Fraction(k.k_s ** 2 * deg_s + k.c2_s, 12)
        rhs = 1 - k.q_s + k.p_g_s
        return _row("Noether on S", rhs, lhs, f"(K^2 + c2)/12 with K^2 = {k.k_s ** 2 * deg_s}, c2 = {k.c2_s}")

    def genera() -> LedgerRow:
        g_par = adjunction_genus(X, k.par)
        g_c = adjunction_genus(Sl, k.c_on_s)
        return _row("genus of C_par and of C in |4H|", (k.genus_par, k.genus_c), (g_par, g_c),
                    "adjunction on Pic(X) and NumPic(S)")

    def riemann_hurwitz() -> LedgerRow:
        g_c = adjunction_genus(Sl, k.c_on_s)
        branch = Fraction(k.par * k.hf * k.x_h2, k.swallowtail_multiplicity)
        return _row("Riemann-Hurwitz for the double cover C_dou -> C", 2 * k.genus_dou - 2,
                    2 * (2 * g_c - 2) + branch, f"branch points = {branch}")

    def hf_genus() -> LedgerRow:
        pa = adjunction_genus(X, k.hf)
        return _row("arithmetic genus and delta budget of C_hf", (k.hf_arithmetic_genus, k.hf_delta),
                    (pa, pa - k.hf_geometric_genus), f"geometric genus {k.hf_geometric_genus}")

    def canonical_y() -> LedgerRow:
        k_s = pic(0, k.k_s, 1)
        line_bundle = pic(0, 1, 1)
        computed = pic_add(k_s, line_bundle)
        branch = pic_scale(2, line_bundle)
        return _row("K_Y = pullback of 4H", pic(0, 4, 0), computed,
                    f"double cover formula K_Y = pi*(K_S + L), L = H + sigma, 2L = {branch[1]}H = B_hf",
                    extra=branch == pic(0, k.b_hf, 0))

    def ramification_class() -> LedgerRow:
        k_s = pic(0, k.k_s, 1)
        c1_q = pic(0, 1, 0)
        k_p = pic_add(pic(-2, 0, 0), k_s, c1_q)
        f_star_k_p3 = pic(-4, 0, 0)
        r_f = pic_add(k_p, pic_scale(-1, f_star_k_p3))
        y = pic(2, 0, 1)
        diff = pic_add(r_f, pic_scale(-1, y))
        f_star_x = pic(4, 0, 0)
        twice_y = numerical(pic_scale(2, y))
        return _row("R(f) - Y = pullback of 4H", pic(0, 4, 0), diff,
                    "K_P(Q_S) - f*K_P3 with Y = 2R + pi*sigma; f*X = 2Y numerically",
                    extra=numerical(f_star_x) == twice_y)

    rows = [
        _row("deg S = sigma_l^2 [S]", k.deg_s, deg_s, f"[S] = {S!r}"),
        _row("deg f = R^3", k.degree_f, r3, "push-forward in P(Q_S)"),
        _row("f*(H^2).Y = 2 R^3", k.contact_degree * k.x_h2, y_part, "Y -> X of degree 6 times deg X"),
        _row("f*(H^2).pi*(4H) via P(Omega_X(1))", k.sigma_dou_degree, sigma_part,
             f"2 x {px_branch}; cross-check 4 R^2 pi*H = {pq_cross}; T^3 = {px.number(3, 0)}",
             extra=sigma_part == pq_cross and x_noether == k.chi_x),
        _row("l.f_*R(f) = 24 + 160 = (6X + Sigma_dou).l",
             (k.degree_f // 2) * k.x_h2 + k.sigma_dou_degree, y_part + sigma_part,
             "ramification splits into Y and Sigma"),
        _row("deg Sigma_dou restricted to X = 2 deg C_dou", 2 * deg_dou, k.sigma_dou_degree * k.x_h2,
             f"deg C_dou = {k.dou}h.h = {deg_dou}"),
        _safe(noether, "Noether on S"),
        _safe(genera, "genus of C_par and of C in |4H|"),
        _row("Gauss swallowtails = C_par.C_hf / 2", k.swallowtails,
             Fraction(k.par * k.hf * k.x_h2, k.swallowtail_multiplicity),
             f"C_par.C_hf = {k.par * k.hf * k.x_h2}"),
        _safe(riemann_hurwitz, "Riemann-Hurwitz for the double cover C_dou -> C"),
        _row("Gauss triple points = 3 x rational curves", k.triple_points,
             k.nodes_per_curve * k.rational_curves, "three nodes on each nodal rational curve"),
        _safe(hf_genus, "arithmetic genus and delta budget of C_hf"),
        canonical_y(),
        ramification_class(),
        _row("deg of the dual curve of C_dou", k.dual_dou_degree,
             Fraction(k.gauss_degree * deg_dou, 2),
             f"Gauss map by cubics, 2:1 onto its image; observation: {k.dual_dou_degree} = 3 x {k.sigma_dou_degree}"),
    ]
    notes = [
        f"class of S used: {S!r}; printed form recorded as '{PRINTED_CLASS_OF_S}'",
        f"sigma_h [S] = {schubert_degree(SIGMA_H * S)} (bitangents in a plane), "
        f"sigma_p [S] = {schubert_degree(SIGMA_P * S)} (bitangents through a point)",
        f"branch curve B_hf in |{k.b_hf}H|: p_a = {_p_a_or_none(Sl, k.b_hf)} (consistency datum)",
        "sigma is 2-torsion: it is carried in Picard classes and dropped in intersection numbers",
    ]
    return LedgerReport(rows, notes)


def _p_a_or_none(lattice: DivisorLattice, d: int):
    try:
        return adjunction_genus(lattice, d)
    except NonIntegralGenus:
        return None


def constant_names() -> list[str]:
    return [f.name for f in fields(LedgerConstants)]
