"""Homogeneous polynomials, binary forms and projective points.

Two coefficient modes coexist: *exact* (``fractions.Fraction``) for structural
identities and *float* (Python ``float``/``complex``) for the numerical solvers.
Mixing the two always lands in float mode.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

Exp = tuple[int, ...]


class DimensionMismatch(ValueError):
    pass


class DegenerateInput(ValueError):
    """Proportional points, rank-deficient bases, identically zero input."""


class NonConvergence(RuntimeError):
    pass


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _coerce(c):
    if isinstance(c, bool):
        raise TypeError("boolean coefficient")
    if isinstance(c, (int, Fraction)):
        return Fraction(c)
    if isinstance(c, np.generic):
        c = c.item()
    if isinstance(c, complex):
        return c.real if c.imag == 0 else c
    if isinstance(c, (float, Number)):
        return float(c)
    raise TypeError(f"unsupported coefficient {c!r}")


def _to_float(c):
    if isinstance(c, Fraction):
        return float(c)
    return c


def _is_zero(c) -> bool:
    return c == 0


def exponents(num_vars: int, degree: int) -> list[Exp]:
    """All exponent vectors of the given degree, in lexicographically decreasing order."""
    if num_vars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in exponents(num_vars - 1, degree - first):
            out.append((first,) + rest)
    return out


class MultiPoly:
    """Homogeneous polynomial stored as a sparse map ``exponent -> coefficient``."""

    __slots__ = ("num_vars", "degree", "terms", "__dict__")

    def __init__(self, num_vars: int, degree: int, terms: dict[Exp, object] | None = None):
        self.num_vars = num_vars
        self.degree = degree
        clean: dict[Exp, object] = {}
        exact = True
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != num_vars:
                raise DimensionMismatch(f"exponent {e} has length != {num_vars}")
            if sum(e) != degree or min(e) < 0:
                raise ValueError(f"exponent {e} is not of degree {degree}")
            c = _coerce(c)
            exact &= isinstance(c, Fraction)
            if not _is_zero(c):
                clean[e] = c
        if not exact:
            clean = {e: _to_float(c) for e, c in clean.items()}
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int, degree: int) -> "MultiPoly":
        return cls(num_vars, degree, {})

    @classmethod
    def constant(cls, num_vars: int, c) -> "MultiPoly":
        return cls(num_vars, 0, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, num_vars: int, i: int) -> "MultiPoly":
        e = [0] * num_vars
        e[i] = 1
        return cls(num_vars, 1, {tuple(e): 1})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "MultiPoly":
        return cls(len(exp), sum(exp), {tuple(exp): c})

    @classmethod
    def linear(cls, coeffs: Sequence) -> "MultiPoly":
        n = len(coeffs)
        return cls(n, 1, {tuple(int(j == i) for j in range(n)): c for i, c in enumerate(coeffs)})

    @classmethod
    def variables(cls, num_vars: int) -> list["MultiPoly"]:
        return [cls.variable(num_vars, i) for i in range(num_vars)]

    # -- basic properties -------------------------------------------------

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), Fraction(0) if self.exact else 0.0)

    def norm(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    def to_float(self) -> "MultiPoly":
        return MultiPoly(self.num_vars, self.degree, {e: complex(c) for e, c in self.terms.items()})

    def __repr__(self) -> str:
        if not self.terms:
            return f"MultiPoly(0; n={self.num_vars}, d={self.degree})"
        parts = []
        for e in sorted(self.terms, reverse=True):
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            parts.append(f"({self.terms[e]})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.num_vars == other.num_vars
        return (self.num_vars, self.degree, self.terms) == (other.num_vars, other.degree, other.terms)

    def __hash__(self):
        return hash((self.num_vars, self.degree, frozenset(self.terms.items())))

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other: "MultiPoly") -> None:
        if self.num_vars != other.num_vars:
            raise DimensionMismatch("different numbers of variables")
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError("sum of forms of different degrees is not homogeneous")

    def __add__(self, other):
        if isinstance(other, MultiPoly):
            self._check_compatible(other)
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            out = dict(self.terms)
            for e, c in other.terms.items():
                out[e] = out.get(e, 0) + c
            return MultiPoly(self.num_vars, self.degree, out)
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.num_vars, self.degree, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            if self.num_vars != other.num_vars:
                raise DimensionMismatch("different numbers of variables")
            out: dict[Exp, object] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, 0) + c1 * c2
            return MultiPoly(self.num_vars, self.degree + other.degree, out)
        if isinstance(other, (Number, np.generic)):
            c = _coerce(other)
            return MultiPoly(self.num_vars, self.degree, {e: v * c for e, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus and substitution ---------------------------------------

    def diff(self, i: int) -> "MultiPoly":
        if self.degree == 0:
            return MultiPoly.zero(self.num_vars, 0)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return MultiPoly(self.num_vars, self.degree - 1, out)

    def substitute(self, forms: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose with ``x_i -> forms[i]``; all forms share num_vars and degree."""
        if len(forms) != self.num_vars:
            raise DimensionMismatch("need one form per variable")
        m = forms[0].num_vars
        k = forms[0].degree
        powers: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, a: int) -> MultiPoly:
            if (i, a) not in powers:
                powers[(i, a)] = MultiPoly.constant(m, 1) if a == 0 else power(i, a - 1) * forms[i]
            return powers[(i, a)]

        total = MultiPoly.zero(m, self.degree * k)
        for e, c in self.terms.items():
            term = MultiPoly.constant(m, c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
            total = total + term
        return total

    def linear_substitute(self, matrix) -> "MultiPoly":
        """Compose with ``x = M y`` where ``M`` has shape (num_vars, m)."""
        rows = [MultiPoly.linear(list(row)) for row in matrix]
        return self.substitute(rows)

    # -- numerical evaluation --------------------------------------------

    @cached_property
    def _compiled(self):
        if not self.terms:
            return np.zeros((0, self.num_vars), dtype=int), np.zeros(0, dtype=complex)
        exps = np.array(list(self.terms.keys()), dtype=int)
        coeffs = np.array([complex(c) for c in self.terms.values()], dtype=complex)
        return exps, coeffs

    def __call__(self, x):
        """Evaluate at a coordinate vector; exact arithmetic when both sides are exact."""
        x = list(x.coords) if isinstance(x, ProjPoint) else list(x)
        if len(x) != self.num_vars:
            raise DimensionMismatch(f"point of length {len(x)} for {self.num_vars} variables")
        if self.exact and all(is_exact(v) for v in x):
            total = Fraction(0)
            for e, c in self.terms.items():
                term = c
                for v, a in zip(x, e):
                    if a:
                        term *= Fraction(v) ** a
                total += term
            return total
        return complex(self.evaluate_many(np.asarray([complex(v) for v in x]))[()])

    def evaluate_many(self, xs) -> np.ndarray:
        """Vectorized float evaluation; ``xs`` has shape (..., num_vars)."""
        exps, coeffs = self._compiled
        xs = np.asarray(xs, dtype=complex)
        if coeffs.size == 0:
            return np.zeros(xs.shape[:-1], dtype=complex)
        mons = np.prod(xs[..., None, :] ** exps, axis=-1)
        return mons @ coeffs

    @cached_property
    def gradient_polys(self) -> list["MultiPoly"]:
        return [self.diff(i) for i in range(self.num_vars)]

    @cached_property
    def hessian_polys(self) -> list[list["MultiPoly"]]:
        g = self.gradient_polys
        return [[gi.diff(j) for j in range(self.num_vars)] for gi in g]

    def grad_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.array([g.evaluate_many(x) for g in self.gradient_polys]).T

    def hess_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.array([[h.evaluate_many(x) for h in row] for row in self.hessian_polys])

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if isinstance(c, Fraction):
                terms.append({"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)})
            elif isinstance(c, complex):
                terms.append({"exp": list(e), "coef": [c.real, c.imag]})
            else:
                terms.append({"exp": list(e), "coef": float(c)})
        return {"num_vars": self.num_vars, "degree": self.degree, "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "MultiPoly":
        try:
            n = int(data["num_vars"])
            d = int(data["degree"])
            terms = {}
            for t in data["terms"]:
                e = tuple(int(k) for k in t["exp"])
                if "num" in t:
                    c = Fraction(int(t["num"]), int(t.get("den", "1")))
                elif isinstance(t["coef"], list):
                    c = complex(t["coef"][0], t["coef"][1])
                else:
                    c = float(t["coef"])
                if e in terms:
                    raise ValueError(f"duplicate exponent {list(e)}")
                terms[e] = c
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed MultiPoly JSON: {exc!r}") from exc
        return cls(n, d, terms)


class UniPoly:
    """Dense univariate polynomial, coefficients low degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [_coerce(c) for c in coeffs]
        if not all(isinstance(c, Fraction) for c in cs):
            cs = [_to_float(c) for c in cs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UniPoly":
        out = cls([lead])
        for r in roots:
            out = out * cls([-r, 1])
        return out

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int):
        return self.coeffs[k] if k < len(self.coeffs) else 0

    def padded(self, n: int) -> list:
        return self.coeffs + [0] * (n - len(self.coeffs))

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def deriv(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([a + b for a, b in zip(self.padded(n), other.padded(n))])

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            if self.is_zero() or other.is_zero():
                return UniPoly([])
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return UniPoly(out)
        return UniPoly([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def norm(self) -> float:
        return max((abs(complex(c)) for c in self.coeffs), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self):
        return f"UniPoly({self.coeffs})"


class ProjPoint:
    """Point of projective space with a canonical representative.

    Exact points are stored as content-free integers whose first nonzero entry
    is positive; float points have their largest-magnitude coordinate equal to 1.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable):
        cs = [_coerce(c) for c in coords]
        if all(isinstance(c, Fraction) for c in cs):
            if all(c == 0 for c in cs):
                raise DegenerateInput("zero vector is not a projective point")
            lcm = 1
            for c in cs:
                lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
            ints = [int(c * lcm) for c in cs]
            g = 0
            for v in ints:
                g = math.gcd(g, v)
            ints = [v // g for v in ints]
            if next(v for v in ints if v) < 0:
                ints = [-v for v in ints]
            self.coords = tuple(Fraction(v) for v in ints)
        else:
            v = np.array([complex(c) for c in cs])
            k = int(np.argmax(np.abs(v)))
            if abs(v[k]) == 0 or not np.all(np.isfinite(v)):
                raise DegenerateInput("zero or non-finite vector is not a projective point")
            v = v / v[k]
            v[k] = 1.0
            self.coords = tuple(complex(c) for c in v)

    @property
    def exact(self) -> bool:
        return isinstance(self.coords[0], Fraction)

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    @property
    def vector(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coords])

    def distance(self, other: "ProjPoint") -> float:
        return projective_distance(self.vector, other.vector)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        if self.exact:
            return "ProjPoint(" + ":".join(str(c) for c in self.coords) + ")"
        return "ProjPoint(" + ":".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in self.coords) + ")"

    def to_json(self) -> list:
        if self.exact:
            return [str(c) for c in self.coords]
        return [[c.real, c.imag] for c in self.coords]


def projective_distance(a, b) -> float:
    """Sine of the angle between two lines through the origin of C^n."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    # norm of the component of a orthogonal to b; accurate for nearly equal lines
    return float(min(1.0, np.linalg.norm(a - np.vdot(b, a) * b)))


def as_point(x) -> ProjPoint:
    return x if isinstance(x, ProjPoint) else ProjPoint(x)


# -- operations ---------------------------------------------------------------


def evaluate(f: MultiPoly, x) -> object:
    """Value of ``f`` at the canonical representative of the projective point ``x``."""
    x = as_point(x)
    if len(x) != f.num_vars:
        raise DimensionMismatch(f"point in P^{x.dim} for a form in {f.num_vars} variables")
    return f(x.coords)


def gradient(f: MultiPoly) -> list[MultiPoly]:
    return [f.diff(i) for i in range(f.num_vars)]


def _rank(vectors, tol: float = 1e-10) -> int:
    if all(is_exact(c) for v in vectors for c in v):
        return exact_rank([[Fraction(c) for c in v] for v in vectors])
    m = np.array([[complex(c) for c in v] for v in vectors])
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def exact_rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][col] != 0:
                factor = m[i][col] / m[rank][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def exact_null_space(rows: list[list]) -> list[list[Fraction]]:
    """Basis of {v : rows . v = 0} over the rationals (reduced row echelon form)."""
    m = [[Fraction(c) for c in r] for r in rows]
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(m, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def restrict_to_line(f: MultiPoly, p, q) -> UniPoly:
    """The binary form ``t -> f(p + t q)`` as a dense polynomial of degree <= deg f."""
    p, q = as_point(p), as_point(q)
    if len(p) != f.num_vars or len(q) != f.num_vars:
        raise DimensionMismatch("line points do not match the number of variables")
    if _rank([p.coords, q.coords]) < 2:
        raise DegenerateInput("line through proportional points")
    binary = f.linear_substitute([[a, b] for a, b in zip(p.coords, q.coords)])
    d = f.degree
    return UniPoly([binary.coeff((d - k, k)) for k in range(d + 1)])


def restrict_to_plane(f: MultiPoly, basis: Sequence) -> MultiPoly:
    """Ternary form ``y -> f(y0 b0 + y1 b1 + y2 b2)``."""
    pts = [as_point(b) for b in basis]
    if len(pts) != 3:
        raise ValueError("a plane needs three spanning points")
    if any(len(b) != f.num_vars for b in pts):
        raise DimensionMismatch("basis points do not match the number of variables")
    if _rank([b.coords for b in pts]) < 3:
        raise DegenerateInput("rank-deficient plane basis")
    return f.linear_substitute([[b.coords[i] for b in pts] for i in range(f.num_vars)])


def polar_cubic(f: MultiPoly, p) -> MultiPoly:
    """First polar ``sum_i p_i df/dx_i`` (a cubic when ``f`` is a quartic)."""
    p = as_point(p)
    if len(p) != f.num_vars:
        raise DimensionMismatch("pole does not match the number of variables")
    out = MultiPoly.zero(f.num_vars, f.degree - 1)
    for pi, g in zip(p.coords, f.gradient_polys):
        if pi != 0:
            out = out + g * pi
    return out


def polynomial_det(matrix: list[list[MultiPoly]]) -> MultiPoly:
    """Determinant of a square matrix of forms by memoized Laplace expansion."""
    n = len(matrix)
    memo: dict[tuple[int, ...], MultiPoly] = {}

    def minor(cols: tuple[int, ...]) -> MultiPoly:
        # rows n-len(cols) .. n-1 against the given columns
        if len(cols) == 1:
            return matrix[n - 1][cols[0]]
        if cols in memo:
            return memo[cols]
        row = n - len(cols)
        total = None
        for k, c in enumerate(cols):
            entry = matrix[row][c]
            if entry.is_zero():
                continue
            term = entry * minor(cols[:k] + cols[k + 1:])
            if k % 2:
                term = -term
            total = term if total is None else total + term
        if total is None:
            nv = matrix[0][0].num_vars
            total = MultiPoly.zero(nv, sum(matrix[r][0].degree for r in range(row, n)))
        memo[cols] = total
        return total

    return minor(tuple(range(n)))


def hessian_det(f: MultiPoly) -> MultiPoly:
    """Determinant of the matrix of second partials; degree n(d-2)."""
    out = polynomial_det(f.hessian_polys)
    if out.is_zero():
        return MultiPoly.zero(f.num_vars, f.num_vars * (f.degree - 2))
    return out


# -- resultants ---------------------------------------------------------------


def bareiss_det(m: list[list]) -> object:
    """Fraction-free determinant for exact entries."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det(m: list[list]) -> object:
    if all(is_exact(c) for row in m for c in row):
        return bareiss_det([[Fraction(c) for c in row] for row in m])
    return complex(np.linalg.det(np.array(m, dtype=complex)))


def sylvester_rows(p: Sequence, q: Sequence, j: int = 0) -> list[list]:
    """Rows of the j-th subresultant matrix; coefficients given high degree first."""
    m, n = len(p) - 1, len(q) - 1
    width = m + n - j
    rows = []
    for k in range(n - j):
        rows.append([0] * k + list(p) + [0] * (width - m - 1 - k))
    for k in range(m - j):
        rows.append([0] * k + list(q) + [0] * (width - n - 1 - k))
    return rows


def principal_subresultant(p: Sequence, q: Sequence, j: int) -> object:
    rows = sylvester_rows(p, q, j)
    size = len(rows)
    return det([r[:size] for r in rows])


def subresultant_pair(q: UniPoly) -> tuple[object, object]:
    """(Res(q, q'), first principal subresultant of (q, q')) for a quartic q.

    ``Res`` vanishes iff q has a repeated root; both vanish iff deg gcd(q, q') >= 2,
    i.e. iff q has at most two distinct roots.
    """
    if q.degree != 4:
        raise ValueError(f"expected a quartic, got degree {q.degree}")
    hi = list(reversed(q.coeffs))
    dhi = list(reversed(q.deriv().coeffs))
    return principal_subresultant(hi, dhi, 0), principal_subresultant(hi, dhi, 1)


def roots_with_multiplicity(q: UniPoly, tol: float = 1e-7) -> list[tuple[complex, int]]:
    """Complex roots clustered into multiplicity groups.

    Eigenvalues of the companion matrix are grouped by single linkage at
    relative distance ``tol``; each cluster is replaced by its centroid, which is
    far better conditioned than the individual split roots.
    """
    if q.is_zero():
        raise DegenerateInput("identically zero polynomial")
    if q.degree == 0:
        return []
    if q.exact:
        return _exact_multiplicity_roots(q, tol)
    cs = np.array([complex(c) for c in reversed(q.coeffs)])
    raw = np.roots(cs)
    if len(raw) != q.degree or not np.all(np.isfinite(raw)):
        raise NonConvergence("companion eigenvalue computation failed")
    order = np.lexsort((raw.imag, raw.real))
    raw = raw[order]
    n = len(raw)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(raw[i]), abs(raw[j]))
            if abs(raw[i] - raw[j]) <= tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(complex(raw[i]))
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return out


def _monic_divmod(a: list, b: list) -> tuple[list, list]:
    """Division of coefficient lists (ascending powers) over the rationals."""
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        k = len(a) - len(b)
        c = a[-1] / b[-1]
        q[k] = c
        for i, bc in enumerate(b):
            a[i + k] -= c * bc
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _exact_gcd(a: list, b: list) -> list:
    while b:
        _, r = _monic_divmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a]


def _exact_multiplicity_roots(q: UniPoly, tol: float) -> list[tuple[complex, int]]:
    """Square-free decomposition (Yun) in exact arithmetic, then roots of each factor."""
    f = [Fraction(c) for c in q.coeffs]
    df = [Fraction(c) for c in q.deriv().coeffs]
    g = _exact_gcd(f, df)
    b, _ = _monic_divmod(f, g)
    c, _ = _monic_divmod(df, g)
    out = []
    k = 1
    while len(b) > 1:
        db = [i * v for i, v in enumerate(b)][1:]
        d = [x - y for x, y in zip(c + [0] * (len(db) - len(c)), db + [0] * (len(c) - len(db)))]
        while d and d[-1] == 0:
            d.pop()
        a = _exact_gcd(b, d) if d else [Fraction(1) / b[-1] * v for v in b]
        if len(a) > 1:
            for r, _ in roots_with_multiplicity(UniPoly([float(v) for v in a]), tol):
                out.append((r, k))
        b, _ = _monic_divmod(b, a)
        c, _ = _monic_divmod(d, a) if d else ([Fraction(0)], [])
        k += 1
    out.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return out


def expansion_residual(q: UniPoly, roots: list[tuple[complex, int]]) -> float:
    """Relative coefficient error of ``lead * prod (t - r)^m`` against ``q``."""
    lead = complex(q.coeffs[-1])
    rebuilt = UniPoly([lead])
    for r, m in roots:
        for _ in range(m):
            rebuilt = rebuilt * UniPoly([-r, 1])
    n = max(len(q.coeffs), len(rebuilt.coeffs))
    diff = max(abs(complex(a) - complex(b)) for a, b in zip(q.padded(n), rebuilt.padded(n)))
    return diff / max(q.norm(), 1e-300)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def complement_basis(vectors: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of the given rows."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    _, s, vh = np.linalg.svd(vectors)
    rank = int(np.sum(s > 1e-14 * max(1.0, s[0])))
    comp = vh[rank:].conj().T
    if rng is not None and comp.shape[1] > 1:
        comp = comp @ random_unitary(comp.shape[1], rng)
    return comp


def product_of_linear(forms: Iterable[Sequence]) -> MultiPoly:
    out = None
    for f in forms:
        lf = MultiPoly.linear(list(f))
        out = lf if out is None else out * lf
    return out


def dehomogenized_coeffs(f: MultiPoly) -> np.ndarray:
    """Dense array ``C[i, j]`` with ``f(x, y, 1) = sum C[i, j] x^i y^j`` (ternary forms)."""
    if f.num_vars != 3:
        raise DimensionMismatch("expected a ternary form")
    d = f.degree
    c = np.zeros((d + 1, d + 1), dtype=complex)
    for (i, j, _), v in f.terms.items():
        c[i, j] = complex(v)
    return c

