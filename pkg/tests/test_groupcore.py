import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posdefgroup.errors import AxiomError, InvalidOrderError, MorphismError, TableSizeError
from posdefgroup.groupcore import (GroupMorphism, check_morphism, closure, commutator_subgroup, find_isomorphism,
                                   identity_morphism, make_cyclic, make_dihedral, make_from_table, make_product,
                                   make_symmetric, power_subgroup, subgroup, validate_morphism)

GROUPS = [make_cyclic(1), make_cyclic(4), make_cyclic(6), make_dihedral(3), make_dihedral(4), make_dihedral(5),
          make_symmetric(3), make_symmetric(4), make_product(make_cyclic(2), make_cyclic(2)),
          make_product(make_cyclic(2), make_cyclic(3))]


def assert_group_axioms(G):
    m, e = G.order, G.identity
    idx = np.arange(m)
    assert np.array_equal(G.mul[e], idx) and np.array_equal(G.mul[:, e], idx)
    assert np.all(G.mul[idx, G.inv] == e) and np.all(G.mul[G.inv, idx] == e)
    for a in range(m):
        assert np.array_equal(G.mul[G.mul[a]], G.mul[a][G.mul])


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_constructed_groups_satisfy_axioms(G):
    assert_group_axioms(G)


def test_cyclic_examples():
    Z1 = make_cyclic(1)
    assert Z1.order == 1 and Z1.op(0, 0) == 0
    Z4 = make_cyclic(4)
    assert Z4.inverse(1) == 3 and Z4.inverse(2) == 2
    assert make_cyclic(6).element_order(2) == 3


@pytest.mark.parametrize("maker", [make_cyclic, make_dihedral, make_symmetric])
def test_zero_order_rejected(maker):
    with pytest.raises(InvalidOrderError):
        maker(0)


def test_dihedral_relations():
    D3 = make_dihedral(3)
    r, s = 1, 3
    assert D3.order == 6
    assert D3.op(r, s) != D3.op(s, r)
    assert D3.power(D3.op(s, r), 2) == D3.identity
    assert D3.power(r, 3) == D3.identity and D3.power(s, 2) == D3.identity
    assert commutator_subgroup(make_dihedral(4)) == (0, 2)


def test_symmetric_examples():
    S3 = make_symmetric(3)
    assert S3.order == 6 and S3.labels[S3.identity] == "012"
    assert len(commutator_subgroup(S3)) == 3
    assert len(commutator_subgroup(make_symmetric(4))) == 12


def test_symmetric_size_guard():
    with pytest.raises(TableSizeError):
        make_symmetric(8)
    with pytest.raises(TableSizeError):
        make_symmetric(9)


def test_product_examples():
    K = make_product(make_cyclic(2), make_cyclic(2))
    assert all(K.element_order(g) == 2 for g in K.elements() if g != K.identity)
    G = make_dihedral(3)
    assert find_isomorphism(make_product(G, make_cyclic(1)), G) is not None
    assert find_isomorphism(make_product(make_cyclic(2), make_cyclic(3)), make_cyclic(6)) is not None
    assert find_isomorphism(K, make_cyclic(4)) is None


def test_from_table_examples():
    Z2 = make_from_table([[0, 1], [1, 0]])
    assert Z2.identity == 0
    with pytest.raises(AxiomError):
        make_from_table([[0, 1], [1, 1]])


def test_from_table_associativity_witness():
    # a Latin square with identity 0 that is not associative
    table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(AxiomError) as exc:
        make_from_table(table)
    a, b, c = exc.value.witness
    T = np.array(table)
    assert T[T[a, b], c] != T[a, T[b, c]]


def test_hand_built_d3_matches_dihedral():
    # S3 is the dihedral group of order 6 up to relabelling
    S3 = make_symmetric(3)
    hand = make_from_table(S3.mul.tolist())
    assert find_isomorphism(hand, make_dihedral(3)) is not None


def test_closure_examples():
    S3, D4 = make_symmetric(3), make_dihedral(4)
    assert closure(S3, [S3.identity]) == (S3.identity,)
    three_cycle = S3.labels.index("120")
    assert len(closure(S3, [three_cycle])) == 3
    assert closure(D4, [2]) == (0, 2)


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_commutator_subgroup_trivial_iff_abelian(G):
    assert (commutator_subgroup(G) == (G.identity,)) == G.is_abelian()


def test_commutator_subgroup_examples():
    assert commutator_subgroup(make_cyclic(6)) == (0,)
    assert len(commutator_subgroup(make_symmetric(3))) == 3
    assert commutator_subgroup(make_dihedral(5)) == (0, 1, 2, 3, 4)


@pytest.mark.parametrize("G", GROUPS, ids=lambda G: G.name)
def test_power_subgroup_two_is_commutator_subgroup(G):
    assert power_subgroup(G, 2) == commutator_subgroup(G)
    assert power_subgroup(G, 1) == (G.identity,)


def test_power_subgroup_s3():
    S3 = make_symmetric(3)
    assert len(power_subgroup(S3, 2)) == 3


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(GROUPS), st.lists(st.integers(0, 100), max_size=3),
       st.lists(st.integers(0, 100), max_size=3))
def test_closure_idempotent_and_monotone(G, a, b):
    A = [x % G.order for x in a]
    B = A + [x % G.order for x in b]
    cA = closure(G, A)
    assert closure(G, cA) == cA
    assert set(cA) <= set(closure(G, B))


def test_morphism_examples():
    Z4, Z2 = make_cyclic(4), make_cyclic(2)
    assert validate_morphism(identity_morphism(Z4)).is_isomorphism
    v = validate_morphism(GroupMorphism(Z4, Z2, np.arange(4) % 2))
    assert v.is_homomorphism and not v.is_injective and v.is_surjective
    P, Z6 = make_product(Z2, make_cyclic(3)), make_cyclic(6)
    natural = np.array([(3 * (g // 3) + 2 * (g % 3)) % 6 for g in P.elements()])
    assert validate_morphism(GroupMorphism(P, Z6, natural)).is_isomorphism


def test_morphism_violation_has_witness():
    Z3 = make_cyclic(3)
    phi = GroupMorphism(Z3, Z3, np.array([0, 2, 2]))
    with pytest.raises(MorphismError) as exc:
        check_morphism(phi)
    s, t = exc.value.witness
    assert phi(Z3.op(s, t)) != Z3.op(phi(s), phi(t))


def test_subgroup_restriction():
    H = subgroup(make_dihedral(4), [0, 2])
    assert H.order == 2 and find_isomorphism(H, make_cyclic(2)) is not None
    with pytest.raises(AxiomError):
        subgroup(make_dihedral(4), [0, 1])


def test_large_table_is_sampled():
    G = make_from_table(make_cyclic(300).mul)
    assert not G.exhaustive and G.warnings
