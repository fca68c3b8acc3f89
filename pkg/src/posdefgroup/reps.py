"""Unitary representations of finite groups.

Covers verification, the roots-of-unity spectrum test, commutativity via the
commutator subgroup, the decomposition of a commutative representation into
spectral projections with characters, and when ``s -> U(s)^n`` is again a
representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (ConsistencyError, PreconditionError, ShapeError, SnappingError, StructureError)
from .groupcore import FiniteGroup, closure, commutator_subgroup, make_dihedral, make_symmetric, power_subgroup
from .linalg import DEFAULT_TOL, ToleranceConfig, adjoint, as_matrix, fro, joint_diagonalize


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    group: FiniteGroup
    U: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=complex)
        if U.ndim != 3 or U.shape[1] != U.shape[2] or U.shape[0] != self.group.order:
            raise ShapeError(f"U must have shape ({self.group.order}, d, d), got {U.shape}")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def dim(self) -> int:
        return int(self.U.shape[1])

    def __call__(self, s: int) -> np.ndarray:
        return self.U[s]


@dataclass(frozen=True)
class RepReport:
    valid: bool
    unitarity_defect: float
    identity_defect: float
    homomorphism_defect: float
    witness: tuple[int, int] | None = None
    nonunitary_element: int | None = None

    def __bool__(self) -> bool:
        return self.valid


def _rep_defects(group: FiniteGroup, U: np.ndarray):
    d = U.shape[1]
    eye = np.eye(d)
    unit = np.linalg.norm(adjoint(U) @ U - eye, axis=(1, 2))
    ident = fro(U[group.identity] - eye)
    # U(st) - U(s)U(t) over all pairs
    hom = np.linalg.norm(U[group.mul] - U[:, None] @ U[None, :], axis=(2, 3))
    return unit, ident, hom


def verify_rep(rep: UnitaryRep, cfg: ToleranceConfig = DEFAULT_TOL) -> RepReport:
    unit, ident, hom = _rep_defects(rep.group, rep.U)
    tol = cfg.residual_tol * max(1.0, np.sqrt(rep.dim))
    bad_pair = np.unravel_index(np.argmax(hom), hom.shape)
    worst_unit = int(np.argmax(unit))
    valid = unit.max() <= tol and ident <= tol and hom.max() <= tol
    return RepReport(
        valid=bool(valid),
        unitarity_defect=float(unit.max()),
        identity_defect=float(ident),
        homomorphism_defect=float(hom.max()),
        witness=None if hom.max() <= tol else (int(bad_pair[0]), int(bad_pair[1])),
        nonunitary_element=None if unit.max() <= tol else worst_unit,
    )


def require_rep(rep: UnitaryRep, cfg: ToleranceConfig = DEFAULT_TOL) -> RepReport:
    report = verify_rep(rep, cfg)
    if not report.valid:
        raise PreconditionError(
            f"not a unitary representation (unitarity {report.unitarity_defect:.2e}, "
            f"identity {report.identity_defect:.2e}, homomorphism {report.homomorphism_defect:.2e} "
            f"at {report.witness})")
    return report


def _root_distance(z: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nearest ``m``-th root exponent for each ``z`` and the distance to it."""
    k = np.mod(np.rint(np.angle(z) * m / (2 * np.pi)), m).astype(np.int64)
    return k, np.abs(z - np.exp(2j * np.pi * k / m))


@dataclass(frozen=True)
class SpectrumReport:
    in_roots: bool
    worst_distance: float
    order: int


def spectrum_in_roots(rep: UnitaryRep, cfg: ToleranceConfig = DEFAULT_TOL) -> SpectrumReport:
    """Every eigenvalue of every ``U(s)`` lies on an ``|G|``-th root of unity."""
    m = rep.group.order
    eigs = np.linalg.eigvals(rep.U)
    _, dist = _root_distance(eigs, m)
    worst = float(dist.max()) if dist.size else 0.0
    return SpectrumReport(worst <= cfg.cluster_tol, worst, m)


@dataclass(frozen=True)
class CommutativityReport:
    commutative: bool
    max_commutator: float
    max_defect_on_commutator_subgroup: float
    commutator_subgroup: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.commutative


def is_commutative(rep: UnitaryRep, cfg: ToleranceConfig = DEFAULT_TOL) -> CommutativityReport:
    """Pairwise commutation, cross-checked against triviality on ``[G, G]``."""
    U = rep.U
    tol = cfg.residual_tol * max(1.0, np.sqrt(rep.dim))
    comm = np.linalg.norm(U[:, None] @ U[None, :] - U[None, :] @ U[:, None], axis=(2, 3))
    H = commutator_subgroup(rep.group)
    eye = np.eye(rep.dim)
    defect = max(fro(U[g] - eye) for g in H)
    route_pairs = bool(comm.max() <= tol)
    route_subgroup = bool(defect <= tol)
    if route_pairs != route_subgroup:
        raise ConsistencyError(
            f"pairwise commutation ({comm.max():.3e}) and [G,G]-triviality ({defect:.3e}) disagree")
    return CommutativityReport(route_pairs, float(comm.max()), float(defect), H)


@dataclass(frozen=True, eq=False)
class StructureDecomposition:
    """``U(s) = sum_i lambda_i(s) P_i`` with ``lambda_i(s) = exp(2 pi i k_i(s) / |G|)``.

    ``exponents[i, s]`` holds ``k_i(s)``, so the characters are exact and
    multiplicativity is checked in integer arithmetic mod ``|G|``.
    """

    group: FiniteGroup
    projections: np.ndarray = field(repr=False)
    exponents: np.ndarray

    @property
    def k(self) -> int:
        return int(self.projections.shape[0])

    @property
    def characters(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.exponents / self.group.order)


def _decomposition_invariants(S: StructureDecomposition, cfg: ToleranceConfig) -> list[tuple[str, float]]:
    """Return ``(invariant, violation)`` pairs for every failing invariant."""
    P = S.projections
    G = S.group
    m = G.order
    tol = cfg.residual_tol
    failures = []
    if P.ndim != 3 or P.shape[0] == 0:
        return [("at least one projection", float("inf"))]
    d = P.shape[1]
    herm = max(fro(p - adjoint(p)) for p in P)
    idem = max(fro(p @ p - p) for p in P)
    orth = max((fro(P[i] @ P[j]) for i in range(len(P)) for j in range(len(P)) if i != j), default=0.0)
    total = fro(P.sum(axis=0) - np.eye(d))
    nonzero = min(fro(p) for p in P)
    for name, value, bad in (("hermitian projections", herm, herm > tol),
                             ("idempotent projections", idem, idem > tol),
                             ("mutually orthogonal projections", orth, orth > tol),
                             ("resolution of identity", total, total > tol),
                             ("nonzero projections", nonzero, nonzero < 0.5)):
        if bad:
            failures.append((name, value))
    k = S.exponents
    if k.shape != (len(P), m):
        failures.append(("one exponent per projection and element", float("inf")))
        return failures
    lhs = k[:, G.mul]                       # k_i(st)
    rhs = (k[:, :, None] + k[:, None, :]) % m
    if not np.array_equal(lhs % m, rhs):
        failures.append(("multiplicative characters", float(np.count_nonzero(lhs % m != rhs))))
    return failures


def structure_decompose(rep: UnitaryRep, cfg: ToleranceConfig = DEFAULT_TOL,
                        seed: int = 0) -> StructureDecomposition:
    """Spectral projections and characters of a commutative representation."""
    require_rep(rep, cfg)
    if not is_commutative(rep, cfg).commutative:
        raise PreconditionError("representation is not commutative")
    G = rep.group
    m = G.order
    jd = joint_diagonalize(list(rep.U), cfg, seed)
    Q, eigs = jd.basis, jd.eigenvalues            # eigs[s, j]

    # merge columns whose joint eigenvalue vectors agree within cluster_tol
    n = Q.shape[1]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(n):
        for b in range(a + 1, n):
            if np.max(np.abs(eigs[:, a] - eigs[:, b])) <= cfg.cluster_tol:
                parent[find(a)] = find(b)
    clusters: dict[int, list[int]] = {}
    for j in range(n):
        clusters.setdefault(find(j), []).append(j)

    projections, exponents = [], []
    for cols in sorted(clusters.values()):
        vec = eigs[:, cols].mean(axis=1)
        k, dist = _root_distance(vec, m)
        if dist.max() > cfg.cluster_tol:
            raise SnappingError(f"eigenvalue {vec[np.argmax(dist)]} is {dist.max():.3e} "
                                f"from the nearest {m}-th root of unity")
        Qc = Q[:, cols]
        projections.append(Qc @ adjoint(Qc))
        exponents.append(k)

    # clusters that snap to the same character belong to one projection
    merged: dict[tuple[int, ...], np.ndarray] = {}
    for P, k in zip(projections, exponents):
        key = tuple(int(x) for x in k)
        merged[key] = merged.get(key, 0) + P
    keys = sorted(merged)
    S = StructureDecomposition(G, np.array([merged[key] for key in keys]),
                               np.array(keys, dtype=np.int64).reshape(len(keys), m))
    failures = _decomposition_invariants(S, cfg)
    if failures:
        name, value = failures[0]
        raise StructureError(f"decomposition violates '{name}' ({value:.3e})", name)
    recon = reconstruct(S, cfg, check=False).U
    gap = float(np.max(np.linalg.norm(recon - rep.U, axis=(1, 2))))
    if gap > cfg.residual_tol:
        raise StructureError(f"reconstruction differs from U by {gap:.3e}", "reconstruction")
    return S


def spectra_match(rep: UnitaryRep, S: StructureDecomposition, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    """``sigma(U(s)) = {lambda_1(s), ..., lambda_k(s)}`` as sets, for every ``s``."""
    lam = S.characters
    for s in rep.group.elements():
        eigs = np.linalg.eigvals(rep.U[s])
        chars = lam[:, s]
        if not all(np.min(np.abs(chars - z)) <= cfg.cluster_tol for z in eigs):
            return False
        if not all(np.min(np.abs(eigs - c)) <= cfg.cluster_tol for c in chars):
            return False
    return True


def reconstruct(S: StructureDecomposition, cfg: ToleranceConfig = DEFAULT_TOL,
                check: bool = True) -> UnitaryRep:
    if check:
        failures = _decomposition_invariants(S, cfg)
        if failures:
            name, value = failures[0]
            raise StructureError(f"decomposition violates '{name}' ({value:.3e})", name)
    U = np.einsum("is,ijk->sjk", S.characters, S.projections)
    rep = UnitaryRep(S.group, U)
    if check:
        require_rep(rep, cfg)
    return rep


@dataclass(frozen=True)
class PowerRepReport:
    n: int
    is_representation: bool
    direct: RepReport
    power_subgroup: tuple[int, ...]
    max_defect_on_power_subgroup: float

    def __bool__(self) -> bool:
        return self.is_representation


def power_rep_check(rep: UnitaryRep, n: int, cfg: ToleranceConfig = DEFAULT_TOL) -> PowerRepReport:
    """Is ``s -> U(s)^n`` a representation?

    Decided twice: directly, and by triviality of ``U`` on the subgroup
    generated by ``s^-(n-1) (ts)^(n-1) t^-(n-1)``. The answers must agree.
    """
    require_rep(rep, cfg)
    if n < 1:
        raise ValueError("n must be >= 1")
    direct = verify_rep(UnitaryRep(rep.group, np.linalg.matrix_power(rep.U, n)), cfg)
    Gn = power_subgroup(rep.group, n)
    eye = np.eye(rep.dim)
    defect = max(fro(rep.U[g] - eye) for g in Gn)
    tol = cfg.residual_tol * max(1.0, np.sqrt(rep.dim))
    via_subgroup = bool(defect <= tol)
    if direct.valid != via_subgroup:
        raise ConsistencyError(f"direct check ({direct.valid}) and G_n check ({via_subgroup}) disagree at n={n}")
    return PowerRepReport(n, direct.valid, direct, Gn, float(defect))


# --- builders -----------------------------------------------------------------


def _is_unitary(M, tol) -> bool:
    return fro(adjoint(M) @ M - np.eye(M.shape[0])) <= tol


def _is_self_adjoint_unitary(M, tol) -> bool:
    return fro(M - adjoint(M)) <= tol and _is_unitary(M, tol)


def build_cyclic_rep(G: FiniteGroup, U0, cfg: ToleranceConfig = DEFAULT_TOL,
                     generator: int | None = None) -> UnitaryRep:
    """Representation of a cyclic group determined by the image of a generator."""
    U0 = as_matrix(U0, "U0")
    m = G.order
    if generator is None:
        generator = next((g for g in G.elements() if G.element_order(g) == m), None)
        if generator is None:
            raise PreconditionError(f"{G.name} is not cyclic")
    elif len(closure(G, [generator])) != m:
        raise PreconditionError(f"element {generator} does not generate {G.name}")
    tol = cfg.residual_tol
    if not _is_unitary(U0, tol):
        raise PreconditionError("U0 is not unitary")
    if fro(np.linalg.matrix_power(U0, m) - np.eye(U0.shape[0])) > tol * m:
        raise PreconditionError(f"U0^{m} != I")
    U = np.empty((m,) + U0.shape, dtype=complex)
    x, P = G.identity, np.eye(U0.shape[0], dtype=complex)
    for _ in range(m):
        U[x] = P
        x, P = G.op(x, generator), P @ U0
    return UnitaryRep(G, U)


def _permutation_parity(label: str) -> int:
    perm = [int(c) for c in label]
    seen, parity = set(), 0
    for start in range(len(perm)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def build_symmetric_commutative(n: int, U0, cfg: ToleranceConfig = DEFAULT_TOL) -> UnitaryRep:
    """``I`` on even permutations and a self-adjoint unitary ``U0`` on odd ones."""
    G = make_symmetric(n)
    U0 = as_matrix(U0, "U0")
    if not _is_self_adjoint_unitary(U0, cfg.residual_tol):
        raise PreconditionError("U0 must be a self-adjoint unitary")
    eye = np.eye(U0.shape[0], dtype=complex)
    U = np.array([U0 if _permutation_parity(label) else eye for label in G.labels])
    return UnitaryRep(G, U)


def build_dihedral_commutative(n: int, Us, Ur=None, cfg: ToleranceConfig = DEFAULT_TOL) -> UnitaryRep:
    """Commutative representation of ``D_n`` from the images of ``r`` and ``s``.

    For odd ``n`` the rotation image is forced to be ``I``. For even ``n``,
    ``U(r^j) = Ur^j`` and ``U(s r^j) = Us Ur^j``, with ``Ur`` and ``Us``
    commuting self-adjoint unitaries.
    """
    G = make_dihedral(n)
    Us = as_matrix(Us, "Us")
    d = Us.shape[0]
    eye = np.eye(d, dtype=complex)
    tol = cfg.residual_tol
    if not _is_self_adjoint_unitary(Us, tol):
        raise PreconditionError("Us must be a self-adjoint unitary")
    if n % 2:
        if Ur is not None and fro(as_matrix(Ur) - eye) > tol:
            raise PreconditionError("for odd n the rotation must map to I")
        Ur = eye
    else:
        Ur = eye if Ur is None else as_matrix(Ur, "Ur")
        if Ur.shape != Us.shape:
            raise PreconditionError("Ur and Us must have the same shape")
        if not _is_self_adjoint_unitary(Ur, tol):
            raise PreconditionError("Ur must be a self-adjoint unitary")
        if fro(Ur @ Us - Us @ Ur) > tol:
            raise PreconditionError("Ur and Us do not commute")
    U = np.empty((2 * n, d, d), dtype=complex)
    for j in range(n):
        Urj = np.linalg.matrix_power(Ur, j)
        U[j] = Urj
        U[n + j] = Us @ Urj
    return UnitaryRep(G, U)


def permutation_rep(n: int) -> UnitaryRep:
    """``U(sigma) e_i = e_{sigma(i)}`` on ``C^n``."""
    G = make_symmetric(n)
    U = np.zeros((G.order, n, n), dtype=complex)
    for s, label in enumerate(G.labels):
        for i, c in enumerate(label):
            U[s, int(c), i] = 1.0
    return UnitaryRep(G, U)
