import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carduality.car_space import e1, e2, random_instance
from carduality.errors import FockDimensionError
from carduality.fock_rep import (
    FockSpace,
    car_defects,
    enumerate_pairings,
    fock_state_defect,
    pairing_count,
    parity_blocks,
    parity_ops,
    product_on_vacuum,
    tensor_representation,
    vacuum_expansion,
)
from carduality.numlin import Subspace, op_norm

from conftest import random_vector


def _fock(dim=4, seed=2):
    inst = random_instance(dim, seed)
    return inst, FockSpace.over(inst.P)


def _jordan_wigner(d):
    """``c(p_i)*`` built as Kronecker products, bit ``i`` being factor ``d-1-i``."""
    up = np.array([[0, 0], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    ident = np.eye(2)
    out = []
    for i in range(d):
        factors = [ident] * (d - 1 - i) + [up] + [z] * i
        out.append(reduce(np.kron, factors) if factors else np.eye(1))
    return out


def test_creators_match_jordan_wigner():
    _, F = _fock(6, 1)
    for mine, ref in zip(F.creators(), _jordan_wigner(3)):
        np.testing.assert_array_equal(mine, ref)


def test_creation_on_vacuum_and_sign_rule():
    _, F = _fock()
    p1, p2 = F.frame[:, 0], F.frame[:, 1]
    e = np.eye(4)
    np.testing.assert_allclose(F.creation(p1) @ F.vacuum, e[0b01], atol=1e-14)
    wedge12 = e[0b11]
    np.testing.assert_allclose(F.annihilation(p1) @ wedge12, e[0b10], atol=1e-14)
    np.testing.assert_allclose(F.annihilation(p2) @ wedge12, -e[0b01], atol=1e-14)
    np.testing.assert_allclose(F.creation(p1) @ F.creation(p2) @ F.vacuum, wedge12, atol=1e-14)


def test_creation_warns_outside_one_particle_space():
    inst, F = _fock()
    outside = (np.eye(4) - inst.P.matrix) @ np.ones(4)
    with pytest.warns(RuntimeWarning):
        F.creation(outside + F.frame[:, 0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_creation_anticommutators(seed):
    inst, F = _fock(6, 3)
    rng = np.random.default_rng(seed)
    p, h = (inst.P.matrix @ random_vector(rng, 6) for _ in range(2))
    cp, ch = F.creation(p), F.creation(h)
    assert op_norm(cp @ ch + ch @ cp) < 1e-12
    assert op_norm(cp.conj().T @ ch + ch @ cp.conj().T - np.vdot(p, h) * np.eye(8)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_car_relations_random(seed):
    _, F = _fock(6, 5)
    rng = np.random.default_rng(seed)
    for val in car_defects(F, random_vector(rng, 6), random_vector(rng, 6)).values():
        assert val < 1e-10


def test_pi_a_is_antilinear_and_kills_to_one_particle():
    inst, F = _fock()
    rng = np.random.default_rng(0)
    f, c = random_vector(rng, 4), 0.3 - 1.1j
    np.testing.assert_allclose(F.pi_a(c * f), np.conj(c) * F.pi_a(f), atol=1e-12)
    pgf = inst.P.matrix @ inst.space.apply(f)
    np.testing.assert_allclose(F.pi_a(f) @ F.vacuum, F.one_particle_vector(pgf), atol=1e-12)


def test_vacuum_expectation():
    inst, F = _fock()
    rng = np.random.default_rng(1)
    for _ in range(10):
        assert fock_state_defect(F, inst.P.matrix, random_vector(rng, 4)) < 1e-12


def test_parity_and_twist():
    inst, F = _fock()
    Z, ep, em, zt = parity_ops(F)
    e = np.eye(4)
    np.testing.assert_allclose(Z @ Z, np.eye(4))
    np.testing.assert_allclose(Z, Z.conj().T)
    np.testing.assert_allclose(zt, ep - 1j * em, atol=1e-14)
    np.testing.assert_allclose(zt @ e[0b11], e[0b11], atol=1e-14)
    np.testing.assert_allclose(zt @ e[0b01], -1j * e[0b01], atol=1e-14)
    np.testing.assert_allclose(zt @ F.vacuum, F.vacuum, atol=1e-14)
    rng = np.random.default_rng(3)
    a = F.pi_a(random_vector(rng, 4))
    assert op_norm(zt @ a @ zt.conj().T - 1j * Z @ a) < 1e-12
    assert op_norm(Z @ a @ Z + a) < 1e-12


def test_pairing_small_cases():
    (term,) = enumerate_pairings(2, 1)
    assert term.pairs == ((2, 1),) and term.survivors == () and term.sign == 1
    assert len(enumerate_pairings(4, 1)) == 6
    assert len(enumerate_pairings(4, 2)) == 3
    (t0,) = enumerate_pairings(3, 0)
    assert t0.survivors == (3, 2, 1) and t0.sign == 1


def test_pairing_counts_closed_form():
    for n in range(9):
        for p in range(n // 2 + 1):
            terms = enumerate_pairings(n, p)
            assert len(terms) == math.comb(n, n - 2 * p) * math.factorial(2 * p) // (math.factorial(p) * 2**p)
            assert len(terms) == pairing_count(n, p)
            assert len({t.bottom_row for t in terms}) == len(terms)


def test_pairing_invariants():
    for term in enumerate_pairings(6, 2):
        alphas = [a for a, _ in term.pairs]
        assert all(a > b for a, b in term.pairs)
        assert alphas == sorted(alphas, reverse=True)
        assert list(term.survivors) == sorted(term.survivors, reverse=True)
        assert sorted(term.bottom_row) == list(range(1, 7))


def test_pairing_rejects_bad_arguments():
    with pytest.raises(ValueError):
        enumerate_pairings(3, 2)


def test_two_generator_expansion():
    inst, F = _fock()
    rng = np.random.default_rng(4)
    f1, f2 = random_vector(rng, 4), random_vector(rng, 4)
    pm, g = inst.P.matrix, inst.space
    expected = F.wedge([pm @ g.apply(f2), pm @ g.apply(f1)]) + np.vdot(pm @ f2, pm @ g.apply(f1)) * F.vacuum
    np.testing.assert_allclose(vacuum_expansion([f1, f2], F), expected, atol=1e-12)
    np.testing.assert_allclose(product_on_vacuum([f1, f2], F), expected, atol=1e-12)


def test_expansion_trivial_orders():
    inst, F = _fock()
    np.testing.assert_allclose(vacuum_expansion([], F), F.vacuum)
    f = random_vector(np.random.default_rng(5), 4)
    np.testing.assert_allclose(vacuum_expansion([f], F), F.pi_a(f) @ F.vacuum, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 5))
def test_expansion_matches_operator_products(seed, n):
    rng = np.random.default_rng(seed)
    inst, F = _fock(6, seed)
    fs = [random_vector(rng, 6) for _ in range(n)]
    assert op_norm(vacuum_expansion(fs, F) - product_on_vacuum(fs, F)) < 1e-9


def test_wedge_is_alternating():
    _, F = _fock(6, 2)
    rng = np.random.default_rng(6)
    a, b, c = (F.frame @ random_vector(rng, 3) for _ in range(3))
    np.testing.assert_allclose(F.wedge([a, b, c]), -F.wedge([b, a, c]), atol=1e-12)
    np.testing.assert_allclose(F.wedge([a, a]), 0, atol=1e-12)


def test_fock_dimension_cap():
    frame = np.eye(26, 13, dtype=complex)
    with pytest.raises(FockDimensionError):
        FockSpace(Subspace(frame), np.eye(26))


@pytest.mark.parametrize("variant", ["A", "B"])
def test_tensor_variants_are_fock_representations(variant):
    a, b = e1(), e1(1.0)
    rep = tensor_representation(FockSpace.over(a.P), FockSpace.over(b.P), variant)
    pm = np.zeros((4, 4), dtype=complex)
    pm[:2, :2], pm[2:, 2:] = a.P.matrix, b.P.matrix
    rng = np.random.default_rng(7)
    for _ in range(10):
        f, h = random_vector(rng, 4), random_vector(rng, 4)
        assert max(car_defects(rep, f, h).values()) < 1e-10
        assert fock_state_defect(rep, pm, f) < 1e-10
    assert rep.dim == 4 and op_norm(rep.Z - np.kron(np.diag([1, -1]), np.diag([1, -1]))) == 0


def test_tensor_variants_share_n_point_functions():
    a, b = e1(), e2()
    fa, fb = FockSpace.over(a.P), FockSpace.over(b.P)
    ra, rb = tensor_representation(fa, fb, "A"), tensor_representation(fa, fb, "B")
    rng = np.random.default_rng(8)
    for n in range(1, 5):
        fs = [random_vector(rng, 6) for _ in range(n)]
        for adj in range(2 ** n):
            va, vb = ra.vacuum, rb.vacuum
            for k, f in enumerate(fs):
                ma, mb = ra.pi_a(f), rb.pi_a(f)
                if adj >> k & 1:
                    ma, mb = ma.conj().T, mb.conj().T
                va, vb = ma @ va, mb @ vb
            assert abs(np.vdot(ra.vacuum, va) - np.vdot(rb.vacuum, vb)) < 1e-10


def test_tensor_block_form_on_first_factor():
    a, b = e1(), e1(0.7)
    rep = tensor_representation(FockSpace.over(a.P), FockSpace.over(b.P), "B")
    f0 = np.array([1.0, 0.5j, 0, 0])
    x0 = rep.pi_a(f0) @ rep.pi_a(f0).conj().T
    even = FockSpace.over(a.P).pi_a(f0[:2]) @ FockSpace.over(a.P).pi_a(f0[:2]).conj().T
    np.testing.assert_allclose(x0, np.kron(even, np.eye(2)), atol=1e-12)


def test_nested_tensor_with_trivial_factor():
    a = e1()
    rep = tensor_representation(FockSpace.trivial(), tensor_representation(FockSpace.over(a.P), FockSpace.trivial(), "A"), "B")
    rng = np.random.default_rng(9)
    assert rep.dim == 2
    assert max(car_defects(rep, random_vector(rng, 2), random_vector(rng, 2)).values()) < 1e-12


def test_parity_blocks():
    _, F = _fock()
    Z = F.Z
    rng = np.random.default_rng(10)
    a, b, c = (F.pi_a(random_vector(rng, 4)) for _ in range(3))
    even, odd, d = parity_blocks(a, Z)
    assert op_norm(even) < 1e-12 and max(d.values()) < 1e-12
    even, odd, d = parity_blocks(a @ b, Z)
    assert op_norm(odd) < 1e-12 and max(d.values()) < 1e-12
    assert max(parity_blocks(a @ b @ c, Z)[2].values()) < 1e-10
