import numpy as np
import pytest
import sympy

import randoms
from posdefgroup.criteria import (COUNTEREXAMPLE_T0, COUNTEREXAMPLE_T1, ZZ_MAX_LEVEL, Z_MAX_LEVEL,
                                  brehmer_check, brehmer_operator, counterexample_block, counterexample_det,
                                  counterexample_function, dcmap, doubly_commuting_check, factor_3x3,
                                  gamma_factor, half_power, klein_criterion, pm_criterion, z2_criterion,
                                  z3_criterion, z4_criterion, z_band, z_truncation, zz_block, zz_truncation)
from posdefgroup.errors import (CommutationError, DomainError, NotContractionError, NotPositiveError,
                                SingularityError, SymmetryError)
from posdefgroup.groupcore import make_cyclic, make_product
from posdefgroup.linalg import psd_check
from posdefgroup.pdfun import OperatorFunction, gram_block

HALF_SWAP = np.array([[0, 0.5], [0.5, 0]])
W3 = np.exp(2j * np.pi / 3)


def z3_gram(T0, T1):
    T1 = np.asarray(T1, dtype=complex)
    return gram_block(OperatorFunction(make_cyclic(3), [T0, T1, T1.conj().T])).flat


def z4_gram(T1, T2):
    T1 = np.asarray(T1, dtype=complex)
    return gram_block(OperatorFunction(make_cyclic(4), [np.eye(len(T1)), T1, T2, T1.conj().T])).flat


def klein_gram(T1, T2, T3):
    K = make_product(make_cyclic(2), make_cyclic(2))
    return gram_block(OperatorFunction(K, [np.eye(len(T1)), T1, T2, T3])).flat


# -- gamma factorization and the 2x2 criteria --------------------------------------

def test_gamma_identity_diagonal():
    rng = np.random.default_rng(0)
    B = randoms.contraction(rng, 3, 0.8)
    g = gamma_factor(np.eye(3), B, np.eye(3))
    assert np.allclose(g.gamma, B) and g.is_contraction and g.block_positive


def test_gamma_expansion_fails():
    g = gamma_factor(np.eye(2), 1.5 * np.eye(2), np.eye(2))
    assert not g.is_contraction and not g.block_positive and not g.oracle.is_psd


def test_gamma_counterexample_boundary():
    g = gamma_factor(COUNTEREXAMPLE_T0, COUNTEREXAMPLE_T1, COUNTEREXAMPLE_T0)
    assert g.block_positive and g.norm == pytest.approx(1.0, abs=1e-9)
    assert abs(g.oracle.min_eigenvalue) < 1e-12


def test_gamma_requires_psd_corners():
    with pytest.raises(NotPositiveError):
        gamma_factor(np.diag([1.0, -1.0]), np.zeros((2, 2)), np.eye(2))


def test_gamma_range_projection():
    # singular corners: gamma only lives on the ranges
    A = np.diag([1.0, 0.0])
    g = gamma_factor(A, np.diag([0.5, 0.0]), A)
    assert g.block_positive and np.allclose(g.gamma, np.diag([0.5, 0.0]))
    g = gamma_factor(A, np.array([[0.0, 0.0], [0.0, 0.1]]), A)
    assert not g.block_positive


def test_pm_examples():
    rng = np.random.default_rng(1)
    assert pm_criterion(randoms.psd(rng, 3), np.zeros((3, 3)))
    r = pm_criterion(np.eye(2), np.diag([1.0, -1.0]))
    assert r.holds and abs(r.oracle.min_eigenvalue) < 1e-12
    assert not pm_criterion(np.eye(2), 2 * np.eye(2))
    with pytest.raises(SymmetryError):
        pm_criterion(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_z2_examples():
    assert z2_criterion(np.eye(2), HALF_SWAP).holds
    r = z2_criterion(COUNTEREXAMPLE_T0, COUNTEREXAMPLE_T1)
    assert r.holds and r.verdict == "positive"
    assert not z2_criterion(np.eye(2), 2 * np.eye(2))


def test_z2_conditions_consistent():
    rng = np.random.default_rng(2)
    for _ in range(100):
        r = z2_criterion(*randoms.z2_instance(rng))
        if not r.notes:
            assert len(set(r.conditions.values())) == 1


def test_z2_unit_reduces_to_norm():
    rng = np.random.default_rng(3)
    for _ in range(100):
        T1 = randoms.hermitian(rng, 2, rng.uniform(0, 2))
        assert z2_criterion(np.eye(2), T1).holds == (np.linalg.norm(T1, 2) <= 1 + 1e-9)


def test_z2_strict():
    assert z2_criterion(np.eye(2), HALF_SWAP, strict=True).verdict == "strictly-positive"
    assert z2_criterion(np.eye(2), np.diag([1.0, 0.0]), strict=True).verdict == "not-strictly-positive"
    with pytest.raises(SingularityError):
        z2_criterion(np.diag([1.0, 0.0]), np.zeros((2, 2)), strict=True)


# -- 3x3 and Z3 ----------------------------------------------------------------------

def test_factor_3x3_identity_corners():
    rng = np.random.default_rng(4)
    I, O = np.eye(2), np.zeros((2, 2))
    R = randoms.contraction(rng, 2, 0.7)
    r = factor_3x3(I, O, R, I, O, I)
    assert r.holds and np.allclose(r.factors["gamma_R"], R)
    assert not factor_3x3(I, O, 1.5 * np.eye(2), I, O, I)


def test_factor_3x3_from_positive_z3_function():
    rng = np.random.default_rng(5)
    Z3 = make_cyclic(3)
    for _ in range(20):
        g = gram_block(randoms.pd_function(rng, Z3, 2)).blocks
        r = factor_3x3(g[0, 0], g[0, 1], g[0, 2], g[1, 1], g[1, 2], g[2, 2])
        assert r.holds and r.quantities["gamma_R_norm"] <= 1 + 1e-9


def test_z3_examples():
    assert z3_criterion(np.eye(2), W3 * np.eye(2)).holds
    assert z3_criterion(np.eye(2), np.eye(2)).holds
    rng = np.random.default_rng(6)
    for _ in range(50):
        T1 = 0.9 * randoms.unitary(rng, 2)
        assert z3_criterion(np.eye(2), T1).holds == psd_check(z3_gram(np.eye(2), T1)).is_psd


def test_z3_strict_needs_invertible_defects():
    with pytest.raises(SingularityError):
        z3_criterion(np.eye(1), np.eye(1), strict=True)
    assert z3_criterion(np.eye(2), 0.3 * np.eye(2), strict=True).verdict == "strictly-positive"


# -- half power, Z4, Klein ----------------------------------------------------------

def test_half_power_examples():
    assert np.allclose(half_power(np.zeros((2, 2))).B, 0)
    assert half_power(np.eye(1)).B[0, 0] == pytest.approx(1 / np.sqrt(2))
    b = half_power(0.5 * np.eye(2)).B
    # scalar oracle: 2 b sqrt(1 - b^2) = 1/2 on the smaller root
    expected = np.sin(np.arcsin(0.5) / 2)
    assert np.allclose(b, expected * np.eye(2)) and expected == pytest.approx(0.2588, abs=1e-4)
    with pytest.raises(NotContractionError):
        half_power(1.1 * np.eye(2))


def test_half_power_random():
    rng = np.random.default_rng(7)
    for _ in range(500):
        d = int(rng.integers(1, 4))
        T = randoms.contraction(rng, d)
        hp = half_power(T)
        assert hp.residuals["two_B_DB"] <= 1e-9
        assert max(hp.residuals.values()) <= 1e-9


def test_z4_examples():
    assert z4_criterion(np.zeros((2, 2)), np.zeros((2, 2))).holds
    lam = 1j
    assert z4_criterion(lam * np.eye(2), lam ** 2 * np.eye(2)).holds
    rng = np.random.default_rng(8)
    for _ in range(50):
        T1, T2 = randoms.z4_instance(rng)
        assert z4_criterion(T1, T2).holds == psd_check(z4_gram(T1, T2)).is_psd


def test_z4_rejects_non_hermitian_square():
    with pytest.raises(SymmetryError):
        z4_criterion(np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_klein_examples():
    O, I = np.zeros((2, 2)), np.eye(2)
    assert klein_criterion(O, O, O).holds
    assert klein_criterion(I, I, I).holds
    rng = np.random.default_rng(9)
    for _ in range(50):
        Ts = randoms.klein_instance(rng)
        assert klein_criterion(*Ts).holds == psd_check(klein_gram(*Ts)).is_psd
    with pytest.raises(SymmetryError):
        klein_criterion(np.array([[0.0, 1.0], [0.0, 0.0]]), O, O)


# -- truncations -----------------------------------------------------------------------

def test_z_truncation_examples():
    rng = np.random.default_rng(10)
    assert np.allclose(z_band(np.zeros((2, 2)), 4), np.eye(10))
    for n in range(1, 7):
        assert z_truncation(np.zeros((2, 2)), n).is_psd
        assert z_truncation(randoms.unitary(rng, 2), n).is_psd
    r = z_truncation(1.01 * randoms.unitary(rng, 2), 1)
    assert not r.is_psd and r.label == "indefinite at level 1"
    assert z_truncation(0.5 * np.eye(1), 3).label == "positive up to level 3"


def test_z_truncation_level_cap():
    with pytest.raises(DomainError):
        z_truncation(np.eye(1), Z_MAX_LEVEL + 1)
    with pytest.raises(DomainError):
        z_truncation(np.eye(1), 0)


def test_zz_examples():
    O = np.zeros((2, 2))
    assert zz_truncation(O, O, 3).is_psd
    rng = np.random.default_rng(11)
    for _ in range(20):
        T1, T2 = randoms.doubly_commuting_pair(rng, 2)
        for n in range(1, 4):
            assert zz_truncation(T1, T2, n).is_psd
    T1 = np.diag([1.2, 0.3])
    r = zz_truncation(T1, np.diag([0.1, 0.2]), 1)
    assert not r.is_psd and r.label == "indefinite at level 1"


def test_zz_contains_z_band():
    rng = np.random.default_rng(12)
    T1, T2 = randoms.doubly_commuting_pair(rng, 2)
    flat = zz_block(T1, T2, 2)
    d = 2
    # indices (0,0), (1,0), (2,0) sit at positions 0, 3, 6
    idx = np.concatenate([np.arange(p * d, (p + 1) * d) for p in (0, 3, 6)])
    assert np.allclose(flat[np.ix_(idx, idx)], z_band(T1, 2))


def test_zz_requires_commuting_pair():
    with pytest.raises(CommutationError):
        zz_truncation(np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [0.0, 0.0]]), 1)
    with pytest.raises(DomainError):
        zz_truncation(np.eye(1), np.eye(1), ZZ_MAX_LEVEL + 1)


def test_dcmap_values():
    T1, T2 = np.diag([0.5, 0.2]), np.diag([0.3, 0.4j])
    assert np.allclose(dcmap(T1, T2, 2, 1), T1 @ T1 @ T2)
    assert np.allclose(dcmap(T1, T2, -1, 2), T1.conj().T @ T2 @ T2)
    assert np.allclose(dcmap(T1, T2, 1, -1), T2.conj().T @ T1)
    assert np.allclose(dcmap(T1, T2, -1, -1), T1.conj().T @ T2.conj().T)


def test_doubly_commuting_examples():
    rng = np.random.default_rng(13)
    N = randoms.doubly_commuting_pair(rng, 3)[0]
    assert doubly_commuting_check(N, N @ N - 0.5 * N + 0.1 * np.eye(3))
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    r = doubly_commuting_check(J, J)
    assert r.commuting and not r.doubly_commuting
    r = doubly_commuting_check(randoms.cmat(rng, 3), randoms.cmat(rng, 3))
    assert not r.commuting and not r.doubly_commuting


def test_brehmer_examples():
    O, I = np.zeros((2, 2)), np.eye(2)
    r = brehmer_check(O, O)
    assert r.passes and np.allclose(r.operator, I)
    r = brehmer_check(I, I)
    assert r.passes and np.allclose(r.operator, 0)
    c, S = 0.9, np.array([[0.0, 1.0], [1.0, 0.0]])
    r = brehmer_check(c * S, c * S)
    assert r.passes and np.allclose(r.operator, (1 - c ** 2) ** 2 * I)
    assert not brehmer_check(1.1 * I, 0.1 * I).passes


def test_brehmer_quadratic_form_identity():
    rng = np.random.default_rng(14)
    for _ in range(50):
        T1, T2 = randoms.doubly_commuting_pair(rng, 3)
        flat = zz_block(T1, T2, 1)
        h = randoms.cmat(rng, 3, 1)[:, 0]
        x = np.concatenate([T1 @ T2 @ h, -T1 @ h, -T2 @ h, h])
        assert abs(np.vdot(x, flat @ x) - np.vdot(h, brehmer_operator(T1, T2) @ h)) <= 1e-9
        assert brehmer_check(T1, T2, seed=int(rng.integers(100))).quadratic_form_residual <= 1e-9


def test_level_one_positivity_implies_brehmer():
    rng = np.random.default_rng(15)
    for _ in range(100):
        Q = randoms.unitary(rng, 2)
        T1 = (Q * rng.uniform(-1.2, 1.2, 2)) @ Q.conj().T
        T2 = (Q * rng.uniform(-1.2, 1.2, 2)) @ Q.conj().T
        if zz_truncation(T1, T2, 1).is_psd:
            assert brehmer_check(T1, T2).passes


# -- the counterexample -------------------------------------------------------------

def exact_counterexample_det(n):
    T0 = sympy.Matrix(COUNTEREXAMPLE_T0.astype(int))
    T1 = sympy.Matrix(COUNTEREXAMPLE_T1.astype(int))
    return int(sympy.Matrix(sympy.BlockMatrix([[T0 ** n, T1 ** n], [T1 ** n, T0 ** n]])).det())


def test_counterexample_function_is_positive_with_zero_eigenvalue():
    r = psd_check(gram_block(counterexample_function()).flat)
    assert r.is_psd and abs(r.min_eigenvalue) < 1e-12


def test_counterexample_small_determinants():
    assert exact_counterexample_det(2) == -11
    assert np.linalg.det(counterexample_block(2)) == pytest.approx(-11, abs=1e-9)
    assert exact_counterexample_det(3) == -72


@pytest.mark.parametrize("n", range(3, 13))
def test_counterexample_det_closed_form(n):
    value = counterexample_det(n)
    assert value == exact_counterexample_det(n)
    assert value < 0
    numeric = np.linalg.det(counterexample_block(n))
    assert abs(numeric - value) <= 1e-12 * abs(value)


def test_counterexample_det_domain():
    with pytest.raises(DomainError):
        counterexample_det(2)
