from fractions import Fraction

import numpy as np
import pytest

from qgeom.bitangents import (
    ChartFailure,
    NotBitangent,
    PlueckerLine,
    bitangents_through_point,
    certify_bitangent,
    normal_form,
    normal_form_surface,
    plane_quartic_bitangents,
    ramification_determinant,
    relative_delta,
    singular_contact_fixture,
    tangent_space_of_S,
)
from qgeom.gauss_double import find_double_pairs
from qgeom.poly import MultiPoly, ProjPoint, UniPoly, restrict_to_line
from qgeom.surface import (
    LineInSurface,
    QuarticSurface,
    fermat_fixture,
    hyperflex_fixture,
    random_points_on_surface,
)

ROOTS5 = np.exp(2j * np.pi * np.arange(5) / 5)


def _line_coeffs(F, p, d):
    """Coefficients of F(s p + d) in s, lowest first, by interpolation at roots of unity."""
    vals = F.evaluate_many(ROOTS5[:, None] * p[None, :] + d[None, :])
    return np.fft.fft(vals) / 5


def square_oracle(X, p, rng, bound=12, max_starts=3000):
    """Bitangent lines through p by Newton on F(s p + d) = A (s^2 + beta s + gamma)^2.

    Unknowns are the direction d = E (u, v, 1) and beta, gamma; no elimination
    and no square-root invariants are involved.
    """
    F = X.F.to_float()
    p = p / np.linalg.norm(p)
    E = np.linalg.svd(p.conj()[None, :])[2][1:].conj().T
    E = E @ (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    A = complex(F.evaluate_many(p))

    def residual(z):
        d = E @ np.array([z[0], z[1], 1.0])
        c = _line_coeffs(F, p, d)
        beta, gamma = z[2], z[3]
        target = A * np.array([gamma ** 2, 2 * beta * gamma, beta ** 2 + 2 * gamma, 2 * beta])
        return c[:4] - target

    found = []
    for _ in range(max_starts):
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ok = False
        for _ in range(80):
            r = residual(z)
            h = 1e-7
            jac = np.stack([(residual(z + h * np.eye(4)[k]) - r) / h for k in range(4)], axis=1)
            dz = np.linalg.lstsq(jac, -r, rcond=None)[0]
            z = z + dz
            if not np.all(np.isfinite(z)) or np.linalg.norm(z) > 1e6:
                break
            if np.linalg.norm(dz) < 1e-12 * (1 + np.linalg.norm(z)):
                ok = np.linalg.norm(residual(z)) < 1e-9 * abs(A)
                break
        if ok:
            line = PlueckerLine.from_points(ProjPoint(p), ProjPoint(E @ np.array([z[0], z[1], 1.0])))
            if all(line.distance(o) > 1e-6 for o in found):
                found.append(line)
                if len(found) == bound:
                    break
    return found


def test_pluecker_relation_and_distance():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(4), rng.standard_normal(4)
    line = PlueckerLine.from_points(a, b)
    assert abs(line.relation()) < 1e-12
    other = PlueckerLine.from_points(2 * a + b, a - 3 * b)
    assert line.distance(other) < 1e-12
    exact = PlueckerLine.from_points((1, 2, 0, 3), (0, 1, -1, 2))
    assert exact.relation() == 0


@pytest.mark.parametrize("lam", [Fraction(2), Fraction(-3, 2), Fraction(5)])
def test_normal_form_line_is_bitangent_with_known_contacts(lam):
    X = normal_form_surface(lam)
    cert = certify_bitangent(X, PlueckerLine.from_points((1, 0, 0, 0), (0, 1, 0, 0)))
    ts = sorted(complex(t).real for t, _ in cert.contacts)
    assert np.allclose(ts, sorted([0.0, float(lam)]), atol=1e-12)
    assert not cert.hyperflex
    assert cert.residual == 0.0


def test_hyperflex_line_has_coincident_contacts():
    X = hyperflex_fixture(0)
    cert = certify_bitangent(X, PlueckerLine.from_points((1, 0, 0, 0), (0, 1, 0, 0)))
    assert cert.hyperflex
    assert cert.contacts[0][0] == cert.contacts[1][0]
    nf = normal_form(X, cert)
    with pytest.raises(ChartFailure):
        ramification_determinant(X, cert, 0.5, nf)


def test_random_line_is_not_bitangent(quartic_a):
    rng = np.random.default_rng(1)
    line = PlueckerLine.from_points(rng.standard_normal(4), rng.standard_normal(4))
    with pytest.raises(NotBitangent) as info:
        certify_bitangent(quartic_a, line)
    assert len(info.value.scalars) == 2


def test_flex_line_is_not_bitangent():
    # F restricted to x2 = x3 = 0 is x1^3 (x1 - x0): a (3, 1) contact pattern
    x0, x1, x2, x3 = MultiPoly.variables(4)
    F = x1 ** 3 * (x1 - x0) + x2 * (x0 ** 3 + x3 ** 3) + x3 * (x1 ** 3 - x2 ** 3 + x0 ** 2 * x3)
    X = QuarticSurface(F)
    with pytest.raises(NotBitangent):
        certify_bitangent(X, PlueckerLine.from_points((1, 0, 0, 0), (0, 1, 0, 0)))


def test_line_in_surface_is_refused():
    X = fermat_fixture()
    # x0 = x1, x2 = x3 lies on x0^4 - x1^4 + x2^4 - x3^4
    with pytest.raises(LineInSurface):
        certify_bitangent(X, PlueckerLine.from_points((1, 1, 0, 0), (0, 0, 1, 1)))


@pytest.mark.parametrize("seed", range(3))
def test_fiber_through_general_point_has_twelve_lines(quartic_a, quartic_b, seed):
    rng = np.random.default_rng(seed)
    for X in (quartic_a, quartic_b):
        p = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        rep = bitangents_through_point(X, p, seed=seed)
        assert rep.filtered_count == 12 and not rep.on_surface
        for c in rep.bitangents:
            assert c.residual < 1e-9
            pv = ProjPoint(p).vector
            m = np.stack([c.line.a.vector, c.line.b.vector, pv], axis=1)
            assert np.linalg.svd(m, compute_uv=False)[-1] < 1e-9


@pytest.mark.parametrize("seed", range(2))
def test_fiber_matches_square_oracle(quartic_a, seed):
    rng = np.random.default_rng(50 + seed)
    p = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    rep = bitangents_through_point(quartic_a, p, seed=seed)
    oracle = square_oracle(quartic_a, ProjPoint(p).vector, rng)
    assert len(oracle) == 12
    for line in oracle:
        assert min(line.distance(c.line) for c in rep.bitangents) < 1e-7


@pytest.mark.parametrize("seed", range(3))
def test_fiber_through_point_of_surface_has_six_lines(quartic_a, seed):
    p = random_points_on_surface(quartic_a, np.random.default_rng(seed), 1)[0]
    rep = bitangents_through_point(quartic_a, p, seed=seed)
    assert rep.on_surface and rep.filtered_count == 6
    for c in rep.bitangents:
        assert min(t.distance(p) for _, t in c.contacts) < 1e-8


def test_fiber_is_seed_independent(quartic_b):
    p = np.array([1.0, -2.0, 0.5, 3.0])
    lines = [bitangents_through_point(quartic_b, p, seed=s).bitangents for s in range(3)]
    for other in lines[1:]:
        for c in other:
            assert min(c.line.distance(d.line) for d in lines[0]) < 1e-8


@pytest.fixture(scope="module")
def fiber(quartic_a):
    rng = np.random.default_rng(7)
    return bitangents_through_point(quartic_a, rng.standard_normal(4), seed=7).bitangents


def test_bitangent_variety_is_smooth_of_dimension_two(quartic_a, fiber):
    for c in fiber:
        rank, rows, kernel = tangent_space_of_S(quartic_a, c)
        assert rank == 2 and kernel.shape == (4, 2)
        assert np.linalg.norm(rows @ kernel) < 1e-10


def test_rank_is_gauge_invariant(quartic_a, fiber):
    rng = np.random.default_rng(0)
    for c in fiber[:5]:
        deltas = set()
        for k in range(20):
            gauge = {"fourth_root": k % 4, "swap_contacts": bool(k % 2)}
            rank, _, _ = tangent_space_of_S(quartic_a, c, rng, **gauge)
            assert rank == 2
            deltas.add(relative_delta(normal_form(quartic_a, c, rng, **gauge)) < 1e-7)
        assert deltas == {False}


@pytest.mark.parametrize("lam", [Fraction(2), Fraction(-1, 3)])
def test_singular_contact_drops_rank(lam):
    X = singular_contact_fixture(lam)
    cert = certify_bitangent(X, PlueckerLine.from_points((1, 0, 0, 0), (0, 1, 0, 0)))
    rank, _, _ = tangent_space_of_S(X, cert)
    assert rank <= 1


def test_ramification_factorization(quartic_a, fiber):
    rng = np.random.default_rng(3)
    for c in fiber:
        nf = normal_form(quartic_a, c)
        assert nf.residual < 1e-8
        for t in rng.standard_normal(10) + 1j * rng.standard_normal(10):
            val = ramification_determinant(quartic_a, c, t, nf)
            assert val.residual < 1e-8
        for t in (0, nf.lam):
            val = ramification_determinant(quartic_a, c, t, nf)
            assert abs(val.det) < 1e-8 * max(1.0, abs(val.unit * val.delta))


def test_delta_vanishes_on_gauss_double_lines(quartic_a, fiber):
    pairs = find_double_pairs(quartic_a, 15).pairs
    assert pairs
    for pr in pairs:
        assert relative_delta(normal_form(quartic_a, pr.certificate)) < 1e-7
    assert all(relative_delta(normal_form(quartic_a, c)) > 1e-4 for c in fiber)


def test_restriction_is_a_square_on_every_fiber_line(quartic_b):
    rep = bitangents_through_point(quartic_b, np.array([0.3, 1.0, -1.0, 2.0]))
    for c in rep.bitangents:
        q = restrict_to_line(quartic_b.F.to_float(), c.line.a, c.line.b)
        s = c.square_root
        assert (q - s * s * c.lead).norm() < 1e-9 * q.norm()


def _plane_quartic(seed):
    rng = np.random.default_rng(seed)
    from qgeom.poly import exponents
    return MultiPoly(3, 4, {e: int(rng.integers(-9, 10)) for e in exponents(3, 4)})


@pytest.mark.parametrize("seed", range(2))
def test_plane_quartic_has_28_bitangents(seed):
    f = _plane_quartic(seed)
    out = plane_quartic_bitangents(f, seed=seed)
    assert len(out) == 28
    ff = f.to_float()
    for b in out:
        assert b.residual < 1e-8
        for c in b.contacts:
            assert abs(complex(ff(c.vector))) < 1e-8 * ff.norm() * np.linalg.norm(c.vector) ** 4
            assert abs(b.line.vector @ c.vector) < 1e-8 * np.linalg.norm(c.vector)


def test_plane_quartic_rejects_wrong_shape():
    with pytest.raises(ValueError):
        plane_quartic_bitangents(MultiPoly.variables(4)[0] ** 4)
