"""Gauss double points: pairs p != p' on X with the same tangent plane.

Pairs are the solutions of

    F(p) = 0,  F(p') = 0,  grad F(p') = mu * grad F(p),  a.p = 1,  b.p' = 1

(8 equations in the 9 unknowns p, p', mu), a curve in the space of pairs whose
projection to X is the double cover curve.  Isolated samples come from
minimum-norm Newton iterations started at random tangent-line configurations;
paths are traced by slicing the curve with a moving linear functional.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bitangents import (
    BitangentCertificate,
    NotBitangent,
    PlueckerLine,
    _sort_key,
    certify_bitangent,
    normal_form,
    relative_delta,
)
from .poly import (
    DegenerateInput,
    ProjPoint,
    complement_basis,
    expansion_residual,
    projective_distance,
    restrict_to_line,
    roots_with_multiplicity,
)
from .surface import PointKind, QuarticSurface, classify_point, relative_value

log = logging.getLogger(__name__)

DIAGONAL_TOL = 1e-4
MERGE_TOL = 1e-6


class PairRejected(ValueError):
    def __init__(self, tag: str, message: str):
        super().__init__(f"{tag}: {message}")
        self.tag = tag


class ContinuationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussDoublePair:
    p: ProjPoint
    p_prime: ProjPoint
    line: PlueckerLine
    dual_point: ProjPoint
    residuals: dict
    certificate: BitangentCertificate | None = None

    def swapped(self) -> "GaussDoublePair":
        return GaussDoublePair(self.p_prime, self.p, self.line, self.dual_point,
                               dict(self.residuals), self.certificate)

    def key(self) -> tuple:
        """Involution-invariant identity of the pair."""
        return tuple(sorted([_sort_key(self.p.coords), _sort_key(self.p_prime.coords)]))

    def to_json(self) -> dict:
        return {
            "p": self.p.to_json(),
            "p_prime": self.p_prime.to_json(),
            "line": self.line.to_json(),
            "dual_point": self.dual_point.to_json(),
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
        }


# -- the pair system ----------------------------------------------------------------


class PairSystem:
    def __init__(self, X: QuarticSurface):
        f = X.F.to_float()
        self.f = f * (1.0 / f.norm())

    def residual(self, z, ca, cb, extra=None):
        p, pp, mu = z[:4], z[4:8], z[8]
        r = np.concatenate([[complex(self.f.evaluate_many(p)), complex(self.f.evaluate_many(pp))],
                            self.f.grad_at(pp) - mu * self.f.grad_at(p), [ca @ p - 1, cb @ pp - 1]])
        if extra is not None:
            w, target = extra
            r = np.concatenate([r, [w @ p - target]])
        return r

    def jacobian(self, z, ca, cb, extra=None):
        p, pp, mu = z[:4], z[4:8], z[8]
        gp, gpp = self.f.grad_at(p), self.f.grad_at(pp)
        j = np.zeros((8 if extra is None else 9, 9), dtype=complex)
        j[0, :4] = gp
        j[1, 4:8] = gpp
        j[2:6, :4] = -mu * self.f.hess_at(p)
        j[2:6, 4:8] = self.f.hess_at(pp)
        j[2:6, 8] = -gp
        j[6, :4] = ca
        j[7, 4:8] = cb
        if extra is not None:
            j[8, :4] = extra[0]
        return j

    def newton(self, z, ca, cb, extra=None, max_iter=40, tol=1e-13):
        for _ in range(max_iter):
            r = self.residual(z, ca, cb, extra)
            j = self.jacobian(z, ca, cb, extra)
            dz = np.linalg.lstsq(j, -r, rcond=None)[0]
            z = z + dz
            if not np.all(np.isfinite(z)) or np.linalg.norm(z) > 1e6:
                return z, False
            step = np.linalg.norm(dz)
            if step <= tol * np.linalg.norm(z):
                return z, True
            # stagnation at roundoff level for moderately conditioned Jacobians
            if np.linalg.norm(r) <= 1e-14 and step <= 1e-9 * np.linalg.norm(z):
                return z, True
        return z, False


def _gauge(v: np.ndarray) -> np.ndarray:
    c = v.conj() / np.vdot(v, v)
    return c


def _point_on(f, rng) -> np.ndarray:
    while True:
        a = ProjPoint(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        b = ProjPoint(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        q = restrict_to_line(f, a, b)
        if q.degree == 4:
            roots = np.roots([complex(c) for c in reversed(q.coeffs)])
            return a.vector + roots[int(rng.integers(4))] * b.vector


def _seed(system: PairSystem, rng) -> np.ndarray | None:
    """Start: p on X, p' a residual intersection of a random tangent line at p."""
    f = system.f
    p = _point_on(f, rng)
    p = p / np.linalg.norm(p)
    tangent = complement_basis(f.grad_at(p)[None, :])
    d = tangent @ (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    d = d - np.vdot(p, d) * p
    q = restrict_to_line(f, ProjPoint(p), ProjPoint(d))
    pv, dv = ProjPoint(p).vector, ProjPoint(d).vector
    if q.degree < 3:
        return None
    roots = np.roots([complex(c) for c in reversed(q.coeffs)])
    roots = roots[np.abs(roots) > 1e-6 * max(1.0, float(np.max(np.abs(roots))))]
    if len(roots) == 0:
        return None
    pp = pv + roots[int(rng.integers(len(roots)))] * dv
    gp, gpp = f.grad_at(pv), f.grad_at(pp)
    mu = np.vdot(gp, gpp) / np.vdot(gp, gp)
    return np.concatenate([pv, pp, [mu]])


# -- certification -------------------------------------------------------------------


def line_parameter(line: PlueckerLine, x: np.ndarray) -> complex:
    """Parameter t with x proportional to a + t b."""
    m = np.stack([line.a.vector, line.b.vector], axis=1)
    lam, mu = np.linalg.lstsq(m, x, rcond=None)[0]
    return mu / lam


def dou_line(pair: GaussDoublePair) -> PlueckerLine:
    """The line joining the two points of a pair (symmetric in the pair)."""
    return pair.line


def _line_for(p: ProjPoint, pp: ProjPoint) -> PlueckerLine:
    a, b = sorted([p, pp], key=lambda x: _sort_key(x.coords))
    av, bv = a.vector / np.linalg.norm(a.vector), b.vector / np.linalg.norm(b.vector)
    phase = np.vdot(av, bv)
    if abs(phase) > 0:
        bv = bv * (abs(phase) / phase)
    return PlueckerLine.from_points(ProjPoint(av + bv), ProjPoint(bv - av))


def certify_pair(X: QuarticSurface, p, pp, tol: float = 1e-8, classify: bool = True,
                 seed: int = 0) -> GaussDoublePair:
    """Check all pair invariants; raise :class:`PairRejected` with a tag otherwise."""
    p, pp = ProjPoint(p), ProjPoint(pp)
    dist = p.distance(pp)
    if dist < DIAGONAL_TOL:
        tag = "diagonal" if dist < MERGE_TOL else "SwallowtailSuspect"
        raise PairRejected(tag, f"points only {dist:.1e} apart")
    f = X.F
    on_p, on_pp = relative_value(f, p.vector), relative_value(f, pp.vector)
    gp, gpp = f.grad_at(p.vector), f.grad_at(pp.vector)
    wedge = projective_distance(gp, gpp)
    if max(on_p, on_pp) > tol or wedge > 1e-9:
        raise PairRejected("residual", f"on-surface {max(on_p, on_pp):.1e}, wedge {wedge:.1e}")
    line = _line_for(p, pp)
    try:
        cert = certify_bitangent(X, line, tol=tol)
    except (NotBitangent, DegenerateInput) as exc:
        raise PairRejected("bitangency", str(exc)) from exc
    q = cert.quartic
    roots = roots_with_multiplicity(q, 1e-5)
    mults = sorted(m for _, m in roots)
    osc = expansion_residual(q, roots)
    if mults != [2, 2] or osc > tol:
        raise PairRejected("osculation", f"root multiplicities {mults}, residual {osc:.1e}")
    params = [line_parameter(cert.line, v) for v in (p.vector, pp.vector)]
    contact_err = max(min(abs(t - r) for r, _ in roots) for t in params)
    if contact_err > 1e-6:
        raise PairRejected("osculation", f"contacts off the pair by {contact_err:.1e}")
    nf = normal_form(X, cert)
    delta = relative_delta(nf)
    if delta > 1e-7:
        raise PairRejected("ramification", f"relative Delta {delta:.1e}")
    residuals = {
        "on_surface_p": on_p,
        "on_surface_p_prime": on_pp,
        "gradient_parallelism": wedge,
        "bitangency": cert.residual,
        "osculation": osc,
        "delta": delta,
    }
    if classify:
        for label, x in (("p", p), ("p_prime", pp)):
            cls, _ = classify_point(X, x, seed=seed)
            if cls.kind is not PointKind.SIMPLE_GAUSS_DOUBLE:
                raise PairRejected(cls.name, f"classify_point({label}) = {cls}")
    return GaussDoublePair(p, pp, line, ProjPoint(gp), residuals, cert)


@dataclass
class PairSearch:
    pairs: list[GaussDoublePair]
    rejected: dict[str, int]
    tagged: list[tuple[str, ProjPoint, ProjPoint]]
    converged: int
    seeds: int

    def to_json(self) -> dict:
        return {
            "seeds": self.seeds,
            "converged": self.converged,
            "certified": len(self.pairs),
            "rejected": dict(sorted(self.rejected.items())),
            "pairs": [pr.to_json() for pr in self.pairs],
        }


def find_double_pairs(X: QuarticSurface, num_seeds: int, rng_seed: int = 0,
                      tol: float = 1e-8) -> PairSearch:
    """Multi-start Newton search for certified Gauss double pairs."""
    system = PairSystem(X)
    found: dict[tuple, GaussDoublePair] = {}
    rejected: dict[str, int] = {}
    tagged = []
    converged = 0
    for k in range(num_seeds):
        rng = np.random.default_rng([rng_seed, k])
        z = _seed(system, rng)
        if z is None:
            rejected["seed"] = rejected.get("seed", 0) + 1
            continue
        z, ok = system.newton(z, _gauge(z[:4]), _gauge(z[4:8]))
        if not ok:
            rejected["nonconvergent"] = rejected.get("nonconvergent", 0) + 1
            continue
        converged += 1
        try:
            pair = certify_pair(X, z[:4], z[4:8], tol)
        except PairRejected as exc:
            rejected[exc.tag] = rejected.get(exc.tag, 0) + 1
            if exc.tag not in ("diagonal", "residual"):
                tagged.append((exc.tag, ProjPoint(z[:4]), ProjPoint(z[4:8])))
            continue
        key = pair.key()
        if key in found or any(pair.p.distance(o.p) < MERGE_TOL or pair.p.distance(o.p_prime) < MERGE_TOL
                               for o in found.values()):
            rejected["duplicate"] = rejected.get("duplicate", 0) + 1
            continue
        found[key] = pair
    pairs = sorted(found.values(), key=lambda pr: pr.key())
    return PairSearch(pairs, rejected, tagged, converged, num_seeds)


# -- osculation -----------------------------------------------------------------------


@dataclass(frozen=True)
class OsculationReport:
    multiplicities: list[int]
    root_residual: float
    contact_error: float
    plane_angle: float
    ok: bool


def _state(pair: GaussDoublePair) -> np.ndarray:
    p = pair.p.vector / np.linalg.norm(pair.p.vector)
    pp = pair.p_prime.vector / np.linalg.norm(pair.p_prime.vector)
    return np.concatenate([p, pp, [0]])


def osculation_certificate(X: QuarticSurface, pair: GaussDoublePair, h: float = 1e-4,
                           tol: float = 1e-8, angle_tol: float = 1e-5) -> OsculationReport:
    """Root multiplicities of F on the joining line, and tangency of the ruled
    surface of joining lines to X at p (finite differences along the curve)."""
    cert = pair.certificate or certify_bitangent(X, pair.line, tol=tol)
    roots = roots_with_multiplicity(cert.quartic, 1e-5)
    mults = sorted(m for _, m in roots)
    res = expansion_residual(cert.quartic, roots)
    params = [line_parameter(cert.line, v) for v in (pair.p.vector, pair.p_prime.vector)]
    contact = max(min(abs(t - r) for r, _ in roots) for t in params)
    # a symmetric step pair; another slice or a shorter step rescues the rare corrector failure
    for seed, step in ((0, h), (1, h), (2, h / 10), (3, h / 10)):
        try:
            tracker = _Tracker(X, _state(pair), seed=seed)
        except ContinuationFailure:
            continue
        plus, minus = tracker.solve_at(step), tracker.solve_at(-step)
        if plus is not None and minus is not None:
            h = step
            break
    else:
        raise ContinuationFailure("could not step along the double curve near the pair")
    p0 = tracker.z0[:4]

    def aligned(v):
        return v * (np.vdot(v, p0) / abs(np.vdot(v, p0)))

    dp = (aligned(plus[:4]) - aligned(minus[:4])) / (2 * h)
    span = np.stack([p0, tracker.z0[4:8] - p0, dp], axis=1)
    u, s, _ = np.linalg.svd(span, full_matrices=False)
    if s[-1] <= 1e-8 * s[0]:
        raise ContinuationFailure("degenerate ruled-surface tangent plane")
    g = X.F.grad_at(p0)
    angle = float(np.max(np.abs(g @ u)) / np.linalg.norm(g))
    ok = mults == [2, 2] and res < tol and contact < 1e-6 and angle < angle_tol
    return OsculationReport(mults, float(res), float(contact), angle, ok)


# -- continuation ----------------------------------------------------------------------


class _Tracker:
    """Slice-parameter continuation: the extra equation w.p = w.p0 + s * omega."""

    def __init__(self, X: QuarticSurface, z0: np.ndarray, seed: int = 0):
        self.system = PairSystem(X)
        rng = np.random.default_rng(seed)
        z0 = z0.copy()
        self.ca, self.cb = _gauge(z0[:4]), _gauge(z0[4:8])
        z0[:4] = z0[:4] / (self.ca @ z0[:4])
        z0[4:8] = z0[4:8] / (self.cb @ z0[4:8])
        gp = self.system.f.grad_at(z0[:4])
        z0[8] = np.vdot(gp, self.system.f.grad_at(z0[4:8])) / np.vdot(gp, gp)
        z0, ok = self.system.newton(z0, self.ca, self.cb)
        if not ok:
            raise ContinuationFailure("start point does not converge onto the curve")
        self.w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        j = self.system.jacobian(z0, self.ca, self.cb)
        _, _, vh = np.linalg.svd(j)
        tangent = vh[-1].conj()
        rate = self.w @ tangent[:4]
        if abs(rate) < 1e-12:
            raise ContinuationFailure("slice functional is stationary along the curve")
        scale = np.linalg.norm(tangent) / abs(rate)
        self.omega = rate / abs(rate) * (1.0 / scale)
        self.base = self.w @ z0[:4]
        self.z0 = z0

    def extra(self, s):
        return (self.w, self.base + s * self.omega)

    def tangent(self, z, s):
        j = self.system.jacobian(z, self.ca, self.cb, self.extra(s))
        rhs = np.zeros(9, dtype=complex)
        rhs[8] = self.omega
        return np.linalg.solve(j, rhs)

    def correct(self, z, s, max_iter=12):
        return self.system.newton(z, self.ca, self.cb, self.extra(s), max_iter=max_iter, tol=1e-14)

    def solve_at(self, s, z=None, s_from=0.0):
        z = self.z0 if z is None else z
        guess = z + (s - s_from) * self.tangent(z, s_from)
        z1, ok = self.correct(guess, s)
        return z1 if ok else None


@dataclass
class DouPath:
    samples: list[GaussDoublePair]
    parameters: list[float]
    states: list[np.ndarray]
    step_sizes: list[float]
    halvings: int
    stop_reason: str
    tracker: _Tracker | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "samples": [s.to_json() for s in self.samples],
            "parameters": list(self.parameters),
            "step_sizes": list(self.step_sizes),
            "halvings": self.halvings,
            "stop_reason": self.stop_reason,
        }


def trace_C_dou(X: QuarticSurface, start: GaussDoublePair, steps: int, step_size: float = 0.01,
                max_halvings: int = 10, classify: bool = True, seed: int = 0) -> DouPath:
    """Predictor-corrector continuation along the double curve from a certified pair.

    Each accepted sample is re-certified; the walk stops early (with a reason)
    when certification fails or the step cannot be rescued by halving.
    """
    tracker = _Tracker(X, _state(start), seed)
    z, s = tracker.z0, 0.0
    samples = [start]
    params = [0.0]
    states = [z]
    sizes = []
    halvings = 0
    reason = "completed"
    h = step_size
    for _ in range(steps):
        for attempt in range(max_halvings + 1):
            z1 = tracker.solve_at(s + h, z, s)
            if z1 is not None and np.linalg.norm(z1[:8] - z[:8]) < 10 * abs(h) * np.linalg.norm(z[:8]):
                break
            h /= 2
            halvings += 1
        else:
            reason = "corrector failed after maximal step halving"
            break
        try:
            pair = certify_pair(X, z1[:4], z1[4:8], classify=classify, seed=seed)
        except PairRejected as exc:
            reason = f"certification failed: {exc}"
            break
        s += h
        z = z1
        samples.append(pair)
        params.append(s)
        states.append(z1)
        sizes.append(h)
        h = min(step_size, 2 * h)
    if len(samples) == 1 and reason != "completed":
        raise ContinuationFailure(reason)
    return DouPath(samples, params, states, sizes, halvings, reason, tracker)


def retrace(path: DouPath) -> float:
    """Walk the recorded parameter schedule backwards; maximal state deviation."""
    tracker = path.tracker
    z = path.states[-1]
    worst = 0.0
    for k in range(len(path.parameters) - 1, 0, -1):
        s_from, s_to = path.parameters[k], path.parameters[k - 1]
        z = tracker.solve_at(s_to, z, s_from)
        if z is None:
            return float("inf")
        ref = path.states[k - 1]
        worst = max(worst, float(np.linalg.norm(z[:8] - ref[:8]) / np.linalg.norm(ref[:8])))
    return worst
