"""Isolated common zeros of two plane curves.

The solver works projectively: inputs are ternary forms (the homogenization of
affine equations), so solutions at infinity are found like any other.  A random
unitary change of coordinates puts the system in general position, one
affine variable is eliminated by treating the Sylvester matrix as a matrix
polynomial in the other and solving its linearized eigenproblem, and every
root is back-substituted and polished by Newton's method.  A seeded multi-start Newton sweep fills any gap
left by the elimination phase.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .poly import (
    DegenerateInput,
    MultiPoly,
    NonConvergence,
    ProjPoint,
    dehomogenized_coeffs,
    projective_distance,
    random_unitary,
)

log = logging.getLogger(__name__)


class PositiveDimensional(ValueError):
    """The two curves share a component."""


@dataclass(frozen=True)
class BivariateSolution:
    point: ProjPoint
    multiplicity: int
    residual: float
    ambiguous: bool = False

    @property
    def vector(self) -> np.ndarray:
        return self.point.vector


def _eval_dense(c: np.ndarray, x: complex, y: complex) -> complex:
    d = c.shape[0] - 1
    xs = x ** np.arange(d + 1)
    ys = y ** np.arange(d + 1)
    return complex(xs @ c @ ys)


def _jacobian_dense(c: np.ndarray, x: complex, y: complex) -> tuple[complex, complex]:
    d = c.shape[0] - 1
    k = np.arange(d + 1)
    xs = x ** k
    ys = y ** k
    dxs = np.concatenate([[0], k[1:] * x ** (k[1:] - 1)])
    dys = np.concatenate([[0], k[1:] * y ** (k[1:] - 1)])
    return complex(dxs @ c @ ys), complex(xs @ c @ dys)


def _y_coeffs(c: np.ndarray, x: complex) -> np.ndarray:
    """Coefficients (low first) in y of the dense bivariate polynomial at fixed x."""
    xs = x ** np.arange(c.shape[0])
    return xs @ c


def _sylvester(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two univariate polynomials given low-degree-first."""
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    mat = np.zeros((size, size), dtype=complex)
    ah, bh = a[::-1], b[::-1]
    for k in range(n):
        mat[k, k:k + m + 1] = ah
    for k in range(m):
        mat[n + k, k:k + n + 1] = bh
    return mat


def _hidden_variable_roots(cf: np.ndarray, cg: np.ndarray, m: int, n: int) -> np.ndarray:
    """Roots in x of Res_y(f, g) as eigenvalues of the linearized Sylvester matrix polynomial.

    The Sylvester matrix is a polynomial in x of degree max(m, n); its
    block-companion pencil is solved by the QZ algorithm, which avoids forming
    the (badly scaled) resultant coefficients.
    """
    size = m + n
    deg = max(m, n)
    coeff_mats = np.zeros((deg + 1, size, size), dtype=complex)
    for k in range(n):
        for j in range(m + 1):
            # entry multiplies y^(m - j) of f
            col = cf[:, m - j]
            coeff_mats[: len(col), k, k + j] = col[: deg + 1]
    for k in range(m):
        for j in range(n + 1):
            col = cg[:, n - j]
            coeff_mats[: len(col), n + k, k + j] = col[: deg + 1]
    big = size * deg
    a = np.zeros((big, big), dtype=complex)
    b = np.eye(big, dtype=complex)
    a[: big - size, size:] = np.eye(big - size)
    for k in range(deg):
        a[big - size:, k * size:(k + 1) * size] = -coeff_mats[k]
    b[big - size:, big - size:] = coeff_mats[deg]
    alpha, beta = scipy.linalg.eig(a, b, right=False, homogeneous_eigvals=True)
    score = np.abs(beta) / (np.abs(alpha) + np.abs(beta))
    # perturbed infinite eigenvalues (higher Jordan blocks) can pass the threshold;
    # the resultant has degree m * n, so keep at most that many, most finite first
    order = np.argsort(-score, kind="stable")[: m * n]
    order = order[score[order] > 1e-10]
    return alpha[order] / beta[order]


def _newton2(cf, cg, x, y, iters=60):
    """Newton iteration on the affine pair; returns the final point and step size."""
    step = np.inf
    for _ in range(iters):
        fv, gv = _eval_dense(cf, x, y), _eval_dense(cg, x, y)
        fx, fy = _jacobian_dense(cf, x, y)
        gx, gy = _jacobian_dense(cg, x, y)
        det = fx * gy - fy * gx
        if det == 0 or not np.isfinite(det):
            break
        dx = (fv * gy - fy * gv) / det
        dy = (fx * gv - fv * gx) / det
        x, y = x - dx, y - dy
        step = abs(dx) + abs(dy)
        if not np.isfinite(step) or abs(x) > 1e8 or abs(y) > 1e8:
            return x, y, np.inf
        if step < 1e-15 * (1 + abs(x) + abs(y)):
            break
    return x, y, step


def _residual(f: MultiPoly, g: MultiPoly, v: np.ndarray) -> float:
    v = v / np.max(np.abs(v))
    return max(abs(f.evaluate_many(v)) / f.norm(), abs(g.evaluate_many(v)) / g.norm())


def solve_bivariate(
    f: MultiPoly,
    g: MultiPoly,
    tol: float = 1e-9,
    seed: int = 0,
    merge_tol: float = 1e-7,
    extra_starts: int | None = None,
) -> list[BivariateSolution]:
    """All isolated common zeros of two ternary forms, with multiplicities.

    Multiplicities are the cluster sizes of the eliminated roots, so their sum
    equals deg f * deg g for a complete intersection.  Returned solutions have
    relative joint residual below ``tol``; near-coincident distinct solutions are
    flagged ``ambiguous`` rather than merged.
    """
    if f.num_vars != 3 or g.num_vars != 3:
        raise ValueError("solve_bivariate expects ternary forms")
    if f.is_zero() or g.is_zero():
        raise DegenerateInput("identically zero equation")
    f, g = f.to_float(), g.to_float()
    if f.degree == 0 or g.degree == 0:
        return []
    rng = np.random.default_rng(seed)
    m, n = f.degree, g.degree
    bezout = m * n
    for attempt in range(4):
        u = random_unitary(3, rng)
        ft = f.linear_substitute(u) * (1.0 / f.norm())
        gt = g.linear_substitute(u) * (1.0 / g.norm())
        cf, cg = dehomogenized_coeffs(ft), dehomogenized_coeffs(gt)
        # leading y coefficients must not vanish for the resultant degree count
        if abs(cf[0, m]) < 1e-8 or abs(cg[0, n]) < 1e-8:
            continue
        probes = np.exp(2j * np.pi * (np.arange(4) + rng.random()) / 4)
        best_cond = 0.0
        for x in probes:
            sv = np.linalg.svd(_sylvester(_y_coeffs(cf, x)[: m + 1], _y_coeffs(cg, x)[: n + 1]),
                               compute_uv=False)
            best_cond = max(best_cond, sv[-1] / sv[0])
        # a shared component makes every Sylvester matrix singular
        if best_cond < 1e-13:
            raise PositiveDimensional("the curves share a common component")
        xroots = _hidden_variable_roots(cf, cg, m, n)
        if len(xroots) != bezout:
            log.debug("eliminant has %d finite roots, expected %d", len(xroots), bezout)
            if len(xroots) < bezout and attempt < 3:
                continue
        found: list[tuple[complex, complex]] = []
        for xr in xroots:
            ys = np.roots(_y_coeffs(cf, xr)[: m + 1][::-1])
            if len(ys) == 0:
                continue
            gvals = [abs(_eval_dense(cg, xr, y)) for y in ys]
            y0 = ys[int(np.argmin(gvals))]
            x1, y1, _ = _newton2(cf, cg, complex(xr), complex(y0))
            found.append((x1, y1))
        sols = _cluster(found, merge_tol)
        total = sum(len(c) for c in sols)
        if total < bezout or extra_starts:
            sols = _augment_by_newton(cf, cg, sols, merge_tol, rng, extra_starts or 8 * bezout)
        out = []
        for members in sols:
            x = complex(np.mean([m_[0] for m_ in members]))
            y = complex(np.mean([m_[1] for m_ in members]))
            v = u @ np.array([x, y, 1.0])
            res = _residual(f, g, v)
            if res > tol:
                log.debug("dropping solution with residual %.2e", res)
                continue
            out.append((v, len(members), res))
        return _finalize(out, merge_tol)
    raise NonConvergence("no generic chart found for the bivariate system")


def _cluster(points, merge_tol):
    clusters: list[list[tuple[complex, complex]]] = []
    for x, y in points:
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        v = np.array([x, y, 1.0])
        for c in clusters:
            if projective_distance(v, np.array([c[0][0], c[0][1], 1.0])) < merge_tol:
                c.append((x, y))
                break
        else:
            clusters.append([(x, y)])
    return clusters


def _augment_by_newton(cf, cg, clusters, merge_tol, rng, starts):
    for _ in range(starts):
        x0 = complex(rng.normal(scale=2.0), rng.normal(scale=2.0))
        y0 = complex(rng.normal(scale=2.0), rng.normal(scale=2.0))
        x, y, step = _newton2(cf, cg, x0, y0, iters=80)
        if not np.isfinite(step) or step > 1e-8:
            continue
        if abs(_eval_dense(cf, x, y)) > 1e-9 or abs(_eval_dense(cg, x, y)) > 1e-9:
            continue
        v = np.array([x, y, 1.0])
        if all(projective_distance(v, np.array([c[0][0], c[0][1], 1.0])) >= merge_tol for c in clusters):
            clusters.append([(x, y)])
    return clusters


def _finalize(items, merge_tol) -> list[BivariateSolution]:
    pts = [ProjPoint(v) for v, _, _ in items]
    out = []
    for i, (pt, (_, mult, res)) in enumerate(zip(pts, items)):
        near = any(
            j != i and pt.distance(other) < 100 * merge_tol for j, other in enumerate(pts)
        )
        out.append(BivariateSolution(pt, mult, float(res), near))
    out.sort(key=lambda s: tuple((round(c.real, 9), round(c.imag, 9)) for c in s.point.coords))
    return out


def gauss_newton(fun, jac, x0: np.ndarray, max_iter: int = 50, tol: float = 1e-14):
    """Minimum-norm Newton steps for a (possibly under- or over-determined) system.

    Returns ``(x, residual_norm, converged)``; convergence means the step fell
    below ``tol`` relative to ``x``.
    """
    x = np.asarray(x0, dtype=complex).copy()
    for _ in range(max_iter):
        r = np.asarray(fun(x), dtype=complex)
        j = np.asarray(jac(x), dtype=complex)
        step = np.linalg.lstsq(j, -r, rcond=None)[0]
        x = x + step
        if not np.all(np.isfinite(x)):
            return x, np.inf, False
        if np.linalg.norm(step) <= tol * max(1.0, np.linalg.norm(x)):
            return x, float(np.linalg.norm(fun(x))), True
    return x, float(np.linalg.norm(fun(x))), False
