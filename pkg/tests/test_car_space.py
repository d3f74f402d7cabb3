import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carduality.car_space import (
    BasisProjection,
    CarSpace,
    Instance,
    InvariantSubspace,
    direct_sum_space,
    e1,
    e2,
    e3,
    gamma_commuting_unitary,
    is_generic_position,
    random_instance,
    random_mixed_instance,
    reference_projection,
    standard_space,
)
from carduality.errors import InvalidSpace
from carduality.numlin import AntilinearMap, Subspace, op_norm


def test_space_validation():
    with pytest.raises(InvalidSpace):
        CarSpace(3, AntilinearMap(np.eye(3)))
    with pytest.raises(InvalidSpace):
        CarSpace(2, AntilinearMap(np.array([[0, 1], [-1, 0]])))
    with pytest.raises(InvalidSpace):
        CarSpace(2, AntilinearMap(2 * np.eye(2)))


def test_basis_projection_validation():
    space = standard_space(1)
    with pytest.raises(InvalidSpace):
        BasisProjection(np.eye(2), space)
    with pytest.raises(InvalidSpace):
        BasisProjection(np.diag([1.0, 0.5]), space)


def test_invariant_subspace_validation():
    space = standard_space(1)
    with pytest.raises(InvalidSpace):
        InvariantSubspace(Subspace(np.array([[1.0], [0.0]])), space)


def test_builtin_instances():
    assert (e1().dim, e1().q.dim, is_generic_position(e1().P, e1().q)) == (2, 1, True)
    assert (e2().dim, e2().q.dim, is_generic_position(e2().P, e2().q)) == (4, 2, True)
    assert (e3().dim, e3().q.dim, is_generic_position(e3().P, e3().q)) == (6, 3, False)


def test_reference_projection_on_nonstandard_space():
    space = direct_sum_space(e1().space, standard_space(2))
    p = reference_projection(space)
    assert p.subspace.dim == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([2, 4, 6, 8]))
def test_random_instance_invariants(seed, dim):
    inst = random_instance(dim, seed)
    g = inst.space
    pm = inst.P.matrix
    assert op_norm(pm + g.conj_op(pm) - np.eye(dim)) < 1e-10
    qm = inst.q.projection()
    assert op_norm(g.conj_op(qm) - qm) < 1e-10
    assert inst.q.dim == dim // 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_gamma_commuting_unitary(seed):
    space = standard_space(3)
    u = gamma_commuting_unitary(space, seed)
    assert op_norm(u.conj().T @ u - np.eye(6)) < 1e-10
    # U Γ = Γ U  <=>  U G = G conj(U)
    assert op_norm(u @ space.G - space.G @ u.conj()) < 1e-10


def test_json_round_trip_exact():
    for inst in (e1(), e2(), e3(), random_mixed_instance(1, 2, ["contains", "avoids"])):
        back = Instance.from_json(inst.to_json())
        assert np.array_equal(back.P.matrix, inst.P.matrix)
        assert np.array_equal(back.q.frame, inst.q.frame)
        assert np.array_equal(back.space.G, inst.space.G)


def test_random_instance_is_deterministic():
    a, b = random_instance(6, 11), random_instance(6, 11)
    assert np.array_equal(a.P.matrix, b.P.matrix) and np.array_equal(a.q.frame, b.q.frame)
