import dataclasses
import json
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeom.chow import (
    BundleRing,
    ONE,
    POINT,
    PRINTED_CLASS_OF_S,
    SIGMA_H,
    SIGMA_L,
    SIGMA_LH,
    SIGMA_P,
    DivisorLattice,
    LedgerConstants,
    NonIntegralGenus,
    SchubertClass,
    adjunction_genus,
    class_of_S,
    constant_names,
    mul_linear,
    numerical,
    pic,
    pic_add,
    pic_scale,
    pq_ring,
    px_ring,
    run_ledger,
    schubert_degree,
    x_lattice,
)


@pytest.mark.parametrize("product, degree", [
    (SIGMA_L ** 4, 2),
    (SIGMA_L ** 2 * SIGMA_H, 1),
    (SIGMA_L ** 2 * SIGMA_P, 1),
    (SIGMA_H * SIGMA_H, 1),
    (SIGMA_P * SIGMA_P, 1),
    (SIGMA_H * SIGMA_P, 0),
    (SIGMA_L * SIGMA_LH, 1),
    (POINT, 1),
    (ONE * POINT, 1),
])
def test_schubert_degrees(product, degree):
    assert schubert_degree(product) == degree


def test_pieri_rules():
    assert SIGMA_L * SIGMA_L == SIGMA_H + SIGMA_P
    assert SIGMA_L * SIGMA_H == SIGMA_LH
    assert SIGMA_L * SIGMA_P == SIGMA_LH
    assert SIGMA_L ** 5 == SchubertClass.basis("1") * 0


def test_class_of_S_has_degree_40():
    S = class_of_S()
    assert schubert_degree(SIGMA_L ** 2 * S) == 40
    # the basis is self-dual: sigma_h and sigma_p pick out their own coefficients
    assert schubert_degree(SIGMA_H * S) == 28
    assert schubert_degree(SIGMA_P * S) == 12


classes = st.builds(lambda *c: SchubertClass(tuple(c)), *[st.integers(-6, 6)] * 6)


@settings(max_examples=150, deadline=None)
@given(classes, classes, classes)
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * ONE == a


rings = st.builds(BundleRing, st.integers(1, 50), st.integers(-6, 6), st.integers(-60, 60))


@settings(max_examples=150, deadline=None)
@given(rings)
def test_bundle_numbers_agree_with_segre_pushforward(ring):
    for tau in range(4):
        assert ring.number(tau, 3 - tau) == ring.number_by_segre(tau, 3 - tau)


@settings(max_examples=150, deadline=None)
@given(rings)
def test_tau_relation(ring):
    # tau^3 = c1 tau^2 D - c2 tau, and tau restricted to a fiber has degree 1
    assert ring.number(3, 0) == ring.c1_coef * ring.number(2, 1) - ring.c2_deg
    assert ring.number(1, 2) == ring.d2
    assert ring.number(0, 3) == 0


def test_known_bundle_numbers():
    pq, px = pq_ring(), px_ring()
    assert [pq.number(t, 3 - t) for t in range(4)] == [0, 40, 40, 12]
    assert [px.number(t, 3 - t) for t in range(4)] == [0, 4, 0, -24]
    with pytest.raises(ValueError):
        pq.number(2, 2)


def test_mul_linear_expands_products():
    assert mul_linear((1, 0), (1, 0)) == {(2, 0): 1}
    square = {k: v for k, v in mul_linear((1, 1), (1, -1)).items() if v}
    assert square == {(2, 0): 1, (0, 2): -1}


def test_adjunction_genus():
    X = x_lattice()
    assert adjunction_genus(X, 1) == 3
    assert adjunction_genus(X, 4) == 33
    with pytest.raises(NonIntegralGenus):
        adjunction_genus(DivisorLattice("odd", 1, 0), 1)


def test_picard_tuples():
    a = pic(1, 2, 1)
    assert pic_add(a, a) == pic(2, 4, 0)
    assert pic_scale(3, a) == pic(3, 6, 1)
    assert numerical(a) == (1, 2)


def test_default_ledger_passes():
    rep = run_ledger()
    assert rep.all_pass
    assert len(rep.rows) == 15 and rep.passed == 15
    assert PRINTED_CLASS_OF_S.startswith("40")
    json.dumps(rep.to_json())
    assert "PASS" in rep.table() or "pass" in rep.table().lower()


def test_ledger_runs_quickly():
    t = time.perf_counter()
    run_ledger()
    assert time.perf_counter() - t < 1.0


def _mutant(**changes):
    return run_ledger(dataclasses.replace(LedgerConstants(), **changes))


def _failed(rep):
    return {r.name for r in rep.rows if not r.passed}


def test_wrong_c2_breaks_noether():
    assert "Noether on S" in _failed(_mutant(c2_s=191))


def test_wrong_class_of_S_breaks_degree_of_f():
    failed = _failed(_mutant(s_p=13))
    assert "deg f = R^3" in failed


@pytest.mark.parametrize("name", constant_names())
def test_every_constant_is_load_bearing(name):
    base = getattr(LedgerConstants(), name)
    assert not _mutant(**{name: base + 1}).all_pass


def test_fractional_values_fail_cleanly():
    rep = _mutant(par=7)
    assert not rep.all_pass
    assert any(isinstance(r.computed, (Fraction, type(None))) or not r.passed for r in rep.rows)
