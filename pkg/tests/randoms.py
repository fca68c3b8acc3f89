"""Seeded random instances shared by the test modules."""

import numpy as np

from posdefgroup.groupcore import FiniteGroup
from posdefgroup.pdfun import OperatorFunction
from posdefgroup.reps import UnitaryRep


def cmat(rng, p, q=None):
    q = p if q is None else q
    return rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))


def hermitian(rng, d, scale=1.0):
    X = cmat(rng, d)
    return scale * (X + X.conj().T) / 2


def unitary(rng, d):
    Q, R = np.linalg.qr(cmat(rng, d))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def with_norm(M, norm):
    return M * (norm / np.linalg.norm(M, 2))


def contraction(rng, d, norm=None):
    norm = rng.uniform(0.0, 1.0) if norm is None else norm
    return with_norm(cmat(rng, d), norm)


def psd(rng, d, rank=None):
    rank = d if rank is None else rank
    X = cmat(rng, d, rank)
    return X @ X.conj().T / d


def pd_function(rng, G: FiniteGroup, d, k=None) -> OperatorFunction:
    """``T(x) = sum_v X(v)* X(x^-1 v)``, a Gram kernel and hence positive definite."""
    k = rng.integers(1, d + 2) if k is None else k
    X = rng.standard_normal((G.order, k, d)) + 1j * rng.standard_normal((G.order, k, d))
    shifted = X[G.mul[G.inv][:, :]]          # shifted[x, v] = X(x^-1 v)
    vals = np.einsum("vkd,xvke->xde", X.conj(), shifted)
    return OperatorFunction(G, vals)


def doubly_commuting_pair(rng, d):
    """Commuting normal contractions, which therefore doubly commute."""
    Q = unitary(rng, d)

    def diag_contraction():
        r = np.sqrt(rng.uniform(0, 1, d))
        return (Q * (r * np.exp(2j * np.pi * rng.uniform(0, 1, d)))) @ Q.conj().T

    return diag_contraction(), diag_contraction()


def cyclic_exponent_characters(orders):
    """All characters of a product of cyclic groups, as exponent tuples per factor."""
    grids = np.meshgrid(*[np.arange(n) for n in orders], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def abelian_rep(rng, G: FiniteGroup, orders, d) -> UnitaryRep:
    """Random representation of a product of cyclic groups ``Z_n1 x ... x Z_nk``.

    Element index follows the mixed-radix order used by ``make_product``.
    """
    chars = cyclic_exponent_characters(orders)
    picks = chars[rng.integers(0, len(chars), d)]
    coords = np.stack(np.unravel_index(np.arange(G.order), orders), axis=1)
    phase = sum(coords[:, f][:, None] * picks[None, :, f] / orders[f] for f in range(len(orders)))
    lam = np.exp(2j * np.pi * phase)                 # lam[s, j]
    Q = unitary(rng, d)
    return UnitaryRep(G, np.einsum("ij,sj,kj->sik", Q, lam, Q.conj()))


def self_adjoint_unitary(rng, d, Q=None):
    Q = unitary(rng, d) if Q is None else Q
    signs = rng.choice([-1.0, 1.0], d)
    return (Q * signs) @ Q.conj().T


# --- instances for the criterion-vs-eigenvalue comparisons --------------------
# Scales are chosen so roughly half of each family is positive.

def _dim(rng):
    return int(rng.integers(1, 4))


def z2_instance(rng):
    d = _dim(rng)
    return psd(rng, d), hermitian(rng, d, rng.uniform(0, 1.5))


def z3_instance(rng):
    d = _dim(rng)
    if rng.random() < 0.5:
        return np.eye(d), contraction(rng, d, rng.uniform(0, 1.1))
    T0 = psd(rng, d)
    R = sqrt_psd_np(T0)
    return T0, rng.uniform(0, 1) * R @ cmat(rng, d) @ R / 3


def z4_instance(rng):
    d = _dim(rng)
    return contraction(rng, d, rng.uniform(0, 1.05)), hermitian(rng, d, rng.uniform(0, 0.8))


def klein_instance(rng):
    d = _dim(rng)
    return tuple(hermitian(rng, d, rng.uniform(0, 0.6)) for _ in range(3))


def gamma_instance(rng):
    d = _dim(rng)
    A, C = psd(rng, d), psd(rng, d)
    B = rng.uniform(0, 1.3) * sqrt_psd_np(A) @ contraction(rng, d, 1.0) @ sqrt_psd_np(C)
    return A, B, C


def pm_instance(rng):
    d = _dim(rng)
    return psd(rng, d), hermitian(rng, d, rng.uniform(0, 1))


def three_by_three_instance(rng):
    d = _dim(rng)
    X = cmat(rng, 3 * d)
    H = X @ X.conj().T + rng.uniform(0, 2.5) * hermitian(rng, 3 * d)
    b = lambda i, j: H[i * d:(i + 1) * d, j * d:(j + 1) * d]
    return b(0, 0), b(0, 1), b(0, 2), b(1, 1), b(1, 2), b(2, 2)


def sqrt_psd_np(M):
    w, Q = np.linalg.eigh(M)
    return (Q * np.sqrt(np.clip(w, 0, None))) @ Q.conj().T
