"""Explicit positivity criteria for small groups and truncations of Z and Z+Z.

Every criterion computes its own verdict from factorization data (contraction
factors, defect operators, half powers) and then compares it with a direct
eigenvalue test of the assembled Gram block. A disagreement raises
:class:`ConsistencyError`, except when the block's smallest eigenvalue sits
within a narrow band around zero, where the two routes may legitimately
round differently; that case is recorded in ``notes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (CommutationError, ConsistencyError, DomainError, NotContractionError, NotPositiveError,
                     ShapeError, SingularityError, SymmetryError)
from .groupcore import make_cyclic
from .linalg import (DEFAULT_TOL, PsdReport, ToleranceConfig, adjoint, as_matrix, block_assemble, fro,
                     op_norm, psd_check, psd_scale)
from .pdfun import OperatorFunction, gram_block

Z_MAX_LEVEL = 8
ZZ_MAX_LEVEL = 4
BOUNDARY_BAND = 1e3


def _herm_eig(M):
    w, Q = np.linalg.eigh((M + adjoint(M)) / 2)
    return w, Q


def _psd_root(M) -> np.ndarray:
    w, Q = _herm_eig(M)
    return (Q * np.sqrt(np.clip(w, 0.0, None))) @ adjoint(Q)


def _root_pinv(M, cutoff: float) -> np.ndarray:
    """Pseudoinverse of ``M^(1/2)`` for PSD ``M``, dropping eigenvalues ``<= cutoff``."""
    w, Q = _herm_eig(M)
    keep = w > cutoff
    return (Q[:, keep] / np.sqrt(w[keep])) @ adjoint(Q[:, keep])


def _defect_clipped(G) -> np.ndarray:
    """``(I - G*G)^(1/2)`` with negative eigenvalues from rounding clipped to zero."""
    return _psd_root(np.eye(G.shape[1]) - adjoint(G) @ G)


def _require_hermitian(M, name: str, cfg: ToleranceConfig) -> np.ndarray:
    dev = fro(M - adjoint(M))
    if dev > cfg.psd_tol * psd_scale(M):
        raise SymmetryError(f"{name} must be Hermitian (||M - M*|| = {dev:.3e})", name, dev)
    return (M + adjoint(M)) / 2


def _near_boundary(oracle: PsdReport) -> bool:
    return abs(oracle.min_eigenvalue) <= BOUNDARY_BAND * oracle.tolerance_used


def _reconcile(name: str, holds: bool, oracle: PsdReport, notes: list, strict: bool = False) -> None:
    expected = oracle.is_strictly_positive if strict else oracle.is_psd
    if holds == expected:
        return
    if _near_boundary(oracle):
        notes.append(f"{name}: criterion and eigenvalue test differ at the boundary "
                     f"(min eigenvalue {oracle.min_eigenvalue:.3e})")
        return
    raise ConsistencyError(f"{name}: criterion says {holds}, eigenvalue test says {expected} "
                           f"(min eigenvalue {oracle.min_eigenvalue:.3e})")


@dataclass(frozen=True)
class CriterionReport:
    """``holds`` is the criterion's own verdict; ``oracle`` tests the assembled block."""

    name: str
    holds: bool
    oracle: PsdReport
    conditions: dict
    quantities: dict
    factors: dict = field(default_factory=dict, repr=False)
    notes: tuple[str, ...] = ()
    strict: bool = False

    @property
    def verdict(self) -> str:
        if self.strict:
            return "strictly-positive" if self.holds else "not-strictly-positive"
        return "positive" if self.holds else "indefinite"

    def __bool__(self) -> bool:
        return self.holds


# -- 2x2 blocks -------------------------------------------------------------

@dataclass(frozen=True)
class GammaFactor:
    """Contraction ``gamma`` with ``B = A^(1/2) gamma C^(1/2)`` between the ranges."""

    gamma: np.ndarray = field(repr=False)
    norm: float
    reconstruction_residual: float
    is_contraction: bool
    block_positive: bool
    oracle: PsdReport = field(repr=False)
    notes: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.block_positive


def gamma_factor(A, B, C, cfg: ToleranceConfig = DEFAULT_TOL) -> GammaFactor:
    """Factor the off-diagonal block of ``[[A, B], [B*, C]]`` through the diagonal roots.

    Eigenvalues of ``A`` and ``C`` below ``psd_tol * scale`` count as zero, so
    the range projections match the tolerance of the eigenvalue test.
    """
    A, B, C = as_matrix(A, "A"), as_matrix(B, "B"), as_matrix(C, "C")
    if A.shape[0] != A.shape[1] or C.shape[0] != C.shape[1] or B.shape != (A.shape[0], C.shape[0]):
        raise ShapeError(f"incompatible shapes A {A.shape}, B {B.shape}, C {C.shape}")
    block = np.block([[A, B], [adjoint(B), C]])
    scale = psd_scale(block)
    for name, M in (("A", A), ("C", C)):
        rep = psd_check(M, cfg, scale=scale)
        if not rep.is_psd:
            raise NotPositiveError(f"{name} is not positive semidefinite "
                                   f"(min eigenvalue {rep.min_eigenvalue:.3e})", rep)
    cutoff = cfg.psd_tol * scale
    Ah, Ch = _psd_root(A), _psd_root(C)
    gamma = _root_pinv(A, cutoff) @ B @ _root_pinv(C, cutoff)
    norm = op_norm(gamma)
    residual = fro(Ah @ gamma @ Ch - B)
    contraction = bool(norm <= 1 + cfg.contraction_tol)
    holds = contraction and bool(residual <= np.sqrt(cfg.psd_tol) * scale)
    oracle = psd_check(block, cfg, scale=scale)
    notes: list[str] = []
    _reconcile("gamma factorization", holds, oracle, notes)
    return GammaFactor(gamma, norm, residual, contraction, holds, oracle, tuple(notes))


def pm_criterion(A, B, cfg: ToleranceConfig = DEFAULT_TOL) -> CriterionReport:
    """``[[A, B], [B, A]] >= 0`` iff ``A - B >= 0`` and ``A + B >= 0`` (``B`` Hermitian)."""
    A, B = as_matrix(A, "A"), as_matrix(B, "B")
    B = _require_hermitian(B, "B", cfg)
    block = block_assemble([[A, B], [B, A]])
    scale = psd_scale(block)
    minus, plus = psd_check(A - B, cfg, scale=scale), psd_check(A + B, cfg, scale=scale)
    holds = minus.is_psd and plus.is_psd
    oracle = psd_check(block, cfg, scale=scale)
    notes: list[str] = []
    _reconcile("+/-B <= A", holds, oracle, notes)
    return CriterionReport("pm", holds, oracle,
                           {"A-B>=0": minus.is_psd, "A+B>=0": plus.is_psd},
                           {"min_eig_A-B": minus.min_eigenvalue, "min_eig_A+B": plus.min_eigenvalue},
                           notes=tuple(notes))


def z2_criterion(T0, T1, cfg: ToleranceConfig = DEFAULT_TOL, strict: bool = False) -> CriterionReport:
    """Positive definiteness on Z_2 for Hermitian ``T(0)``, ``T(1)``, via four equivalent tests."""
    T0 = _require_hermitian(as_matrix(T0, "T0"), "T0", cfg)
    T1 = _require_hermitian(as_matrix(T1, "T1"), "T1", cfg)
    d = T0.shape[0]
    block = block_assemble([[T0, T1], [T1, T0]])
    scale = psd_scale(block)
    notes: list[str] = []

    func = OperatorFunction(make_cyclic(2), np.array([T0, T1]))
    as_function = psd_check(gram_block(func).flat, cfg, scale=scale)
    oracle = psd_check(block, cfg, scale=scale)
    t0_psd = psd_check(T0, cfg, scale=scale)
    try:
        gf = gamma_factor(T0, T1, T0, cfg)
        gamma_ok, gamma_norm = gf.block_positive, gf.norm
        notes.extend(gf.notes)
    except NotPositiveError:
        gamma_ok, gamma_norm = False, float("nan")
    pm = pm_criterion(T0, T1, cfg)
    notes.extend(pm.notes)
    conditions = {"function_positive_definite": as_function.is_psd, "block_positive": oracle.is_psd,
                  "gamma_contraction": gamma_ok, "T0_positive_and_pm": t0_psd.is_psd and pm.holds}
    quantities = {"gamma_norm": gamma_norm, "min_eigenvalue": oracle.min_eigenvalue}

    if fro(T0 - np.eye(d)) <= cfg.psd_tol * scale:
        conditions["norm_T1_le_1"] = bool(op_norm(T1) <= 1 + cfg.contraction_tol)
        quantities["norm_T1"] = op_norm(T1)

    holds = conditions["gamma_contraction"] and conditions["T0_positive_and_pm"]
    for key, value in conditions.items():
        if value != holds:
            _reconcile(f"z2 condition {key}", holds, oracle, notes)
    _reconcile("z2", holds, oracle, notes)

    if strict:
        w, Q = _herm_eig(T0)
        if w[0] <= cfg.psd_tol * scale:
            raise SingularityError(f"T(0) is not strictly positive (min eigenvalue {w[0]:.3e})")
        inv_root = (Q / np.sqrt(w)) @ adjoint(Q)
        X = inv_root @ T1 @ inv_root
        xnorm = op_norm(X)
        strict_holds = bool(xnorm < 1 - cfg.contraction_tol)
        quantities["strict_contraction_norm"] = xnorm
        conditions["strict"] = strict_holds
        _reconcile("z2 strict", strict_holds, oracle, notes, strict=True)
        holds = strict_holds
    return CriterionReport("z2", holds, oracle, conditions, quantities, notes=tuple(notes), strict=strict)


# -- 3x3 blocks -------------------------------------------------------------

def factor_3x3(A, B, R, C, Bp, D, cfg: ToleranceConfig = DEFAULT_TOL) -> CriterionReport:
    """Positivity of ``[[A, B, R], [B*, C, B'], [R*, B'*, D]]`` through the corner factors.

    With ``B = A^(1/2) G C^(1/2)`` and ``B' = C^(1/2) G' D^(1/2)``, the block is
    positive iff both corners are and ``R - A^(1/2) G G' D^(1/2)`` factors as
    ``A^(1/2) D_{G*} G_R D_{G'} D^(1/2)`` with a contraction ``G_R``.
    """
    A, B, R, C, Bp, D = (as_matrix(M, n) for M, n in
                         ((A, "A"), (B, "B"), (R, "R"), (C, "C"), (Bp, "B'"), (D, "D")))
    full = np.block([[A, B, R], [adjoint(B), C, Bp], [adjoint(R), adjoint(Bp), D]])
    scale = psd_scale(full)
    oracle = psd_check(full, cfg, scale=scale)
    notes: list[str] = []
    corner1 = psd_check(np.block([[A, B], [adjoint(B), C]]), cfg, scale=scale)
    corner2 = psd_check(np.block([[C, Bp], [adjoint(Bp), D]]), cfg, scale=scale)
    conditions = {"upper_corner_positive": corner1.is_psd, "lower_corner_positive": corner2.is_psd}
    quantities = {"min_eigenvalue": oracle.min_eigenvalue}
    if not (corner1.is_psd and corner2.is_psd):
        failing = [k for k, v in conditions.items() if not v]
        notes.append("failing corner: " + ", ".join(failing))
        _reconcile("3x3", False, oracle, notes)
        return CriterionReport("3x3", False, oracle, conditions, quantities, notes=tuple(notes))

    g1, g2 = gamma_factor(A, B, C, cfg), gamma_factor(C, Bp, D, cfg)
    notes.extend(g1.notes + g2.notes)
    G, Gp = g1.gamma, g2.gamma
    cutoff = cfg.psd_tol * scale
    Ah, Dh = _psd_root(A), _psd_root(D)
    DGs = _defect_clipped(adjoint(G))       # D_{G*} = (I - G G*)^(1/2)
    DGp = _defect_clipped(Gp)               # D_{G'} = (I - G'* G')^(1/2)
    target = R - Ah @ G @ Gp @ Dh
    left = _root_pinv(DGs @ DGs, cutoff) @ _root_pinv(A, cutoff)
    right = _root_pinv(D, cutoff) @ _root_pinv(DGp @ DGp, cutoff)
    GR = left @ target @ right
    residual = fro(Ah @ DGs @ GR @ DGp @ Dh + Ah @ G @ Gp @ Dh - R)
    gr_norm = op_norm(GR)
    conditions["gamma_R_contraction"] = bool(gr_norm <= 1 + cfg.contraction_tol)
    conditions["R_factors"] = bool(residual <= np.sqrt(cfg.psd_tol) * scale)
    holds = conditions["gamma_R_contraction"] and conditions["R_factors"]
    quantities.update({"gamma_norm": g1.norm, "gamma_prime_norm": g2.norm,
                       "gamma_R_norm": gr_norm, "reconstruction_residual": residual})
    _reconcile("3x3", holds, oracle, notes)
    return CriterionReport("3x3", holds, oracle, conditions, quantities,
                           factors={"gamma": G, "gamma_prime": Gp, "gamma_R": GR}, notes=tuple(notes))


def z3_criterion(T0, T1, cfg: ToleranceConfig = DEFAULT_TOL, strict: bool = False) -> CriterionReport:
    """Positive definiteness on Z_3 with ``T(2) = T(1)*``."""
    T0 = _require_hermitian(as_matrix(T0, "T0"), "T0", cfg)
    T1 = as_matrix(T1, "T1")
    d = T0.shape[0]
    T1s = adjoint(T1)
    func = OperatorFunction(make_cyclic(3), np.array([T0, T1, T1s]))
    flat = gram_block(func).flat
    scale = psd_scale(flat)
    oracle = psd_check(flat, cfg, scale=scale)
    notes: list[str] = []
    conditions: dict = {}
    quantities: dict = {"min_eigenvalue": oracle.min_eigenvalue}

    t0 = psd_check(T0, cfg, scale=scale)
    conditions["T0_positive"] = t0.is_psd
    if t0.is_psd:
        # rows of the Gram block: [T0, T1, T1*], [T1*, T0, T1], [T1, T1*, T0]
        f3 = factor_3x3(T0, T1, T1s, T0, T1, T0, cfg)
        notes.extend(f3.notes)
        conditions["factorization"] = f3.holds
        quantities.update({k: v for k, v in f3.quantities.items() if k != "min_eigenvalue"})
    else:
        conditions["factorization"] = False
    holds = conditions["T0_positive"] and conditions["factorization"]
    _reconcile("z3", holds, oracle, notes)

    if fro(T0 - np.eye(d)) <= cfg.psd_tol * scale:
        n1 = op_norm(T1)
        quantities["norm_T1"] = n1
        if n1 > 1 + cfg.contraction_tol:
            conditions["unit_form"] = False
            if strict:
                raise SingularityError(f"strict form needs ||T1|| < 1, got {n1:.12g}")
        else:
            DT, DTs = _defect_clipped(T1), _defect_clipped(T1s)
            target = T1s - T1 @ T1
            if strict:
                if n1 >= 1 - cfg.contraction_tol:
                    raise SingularityError(f"strict form needs ||T1|| < 1, got {n1:.12g}")
                X = np.linalg.solve(DTs, target) @ np.linalg.inv(DT)
                residual = fro(DTs @ X @ DT - target)
            else:
                cutoff = cfg.psd_tol * scale
                X = _root_pinv(DTs @ DTs, cutoff) @ target @ _root_pinv(DT @ DT, cutoff)
                residual = fro(DTs @ X @ DT - target)
            xn = op_norm(X)
            quantities.update({"unit_gamma_norm": xn, "unit_residual": residual})
            conditions["unit_form"] = bool(xn <= 1 + cfg.contraction_tol and residual <= np.sqrt(cfg.psd_tol) * scale)
            if strict:
                # invertible defects: the block is strictly positive iff gamma is a strict contraction
                conditions["strict"] = bool(xn < 1 - cfg.contraction_tol and residual <= np.sqrt(cfg.psd_tol) * scale)
                _reconcile("z3 strict", conditions["strict"], oracle, notes, strict=True)
                holds = conditions["strict"]
        _reconcile("z3 unit form", conditions["unit_form"], oracle, notes)
    elif strict:
        raise SingularityError("the strict form is stated for T(0) = I")
    return CriterionReport("z3", holds, oracle, conditions, quantities, notes=tuple(notes), strict=strict)


# -- groups of order 4 --------------------------------------------------------

@dataclass(frozen=True)
class HalfPower:
    """``B`` with ``[[D_{B*}, B], [B*, D_B]]`` the positive root of ``[[I, T], [T*, I]]``."""

    B: np.ndarray = field(repr=False)
    D_B: np.ndarray = field(repr=False)
    D_Bstar: np.ndarray = field(repr=False)
    root: np.ndarray = field(repr=False)
    residuals: dict = field(default_factory=dict)


def half_power(T, cfg: ToleranceConfig = DEFAULT_TOL) -> HalfPower:
    T = as_matrix(T, "T")
    if T.shape[0] != T.shape[1]:
        raise ShapeError(f"T must be square, got {T.shape}")
    norm = op_norm(T)
    if norm > 1 + cfg.contraction_tol:
        raise NotContractionError(f"||T|| = {norm:.12g} exceeds 1", norm)
    d = T.shape[0]
    eye = np.eye(d)
    S = _psd_root(np.block([[eye, T], [adjoint(T), eye]]))
    S = (S + adjoint(S)) / 2
    top, B, bottom = S[:d, :d], S[:d, d:], S[d:, d:]
    res = {
        "top_left_defect": fro(top @ top + B @ adjoint(B) - eye),
        "bottom_right_defect": fro(bottom @ bottom + adjoint(B) @ B - eye),
        "intertwining": fro(top @ B - B @ bottom),
        "two_B_DB": fro(2 * B @ bottom - T),
    }
    return HalfPower(B, bottom, top, S, res)


def _order4(name, pm_T2_ok, t1_ok, plus, minus, oracle, notes, conditions, quantities):
    conditions.update({"T1_contraction": t1_ok, "pm_T2_le_I": pm_T2_ok,
                       "gamma_plus": plus is not None and plus.block_positive,
                       "gamma_minus": minus is not None and minus.block_positive})
    quantities.update({"gamma_plus_norm": plus.norm if plus is not None else float("nan"),
                       "gamma_minus_norm": minus.norm if minus is not None else float("nan")})
    holds = t1_ok and pm_T2_ok and conditions["gamma_plus"] and conditions["gamma_minus"]
    _reconcile(name, holds, oracle, notes)
    return holds


def _gamma_or_none(A, B, C, cfg, notes):
    try:
        g = gamma_factor(A, B, C, cfg)
    except NotPositiveError:
        return None
    notes.extend(g.notes)
    return g


def z4_criterion(T1, T2, cfg: ToleranceConfig = DEFAULT_TOL) -> CriterionReport:
    """Positive definiteness on Z_4 with ``T(0) = I``, ``T(3) = T1*`` and Hermitian ``T2``."""
    T1 = as_matrix(T1, "T1")
    T2 = _require_hermitian(as_matrix(T2, "T2"), "T2", cfg)
    d = T1.shape[0]
    eye = np.eye(d)
    func = OperatorFunction(make_cyclic(4), np.array([eye, T1, T2, adjoint(T1)]))
    flat = gram_block(func).flat
    scale = psd_scale(flat)
    oracle = psd_check(flat, cfg, scale=scale)
    notes: list[str] = []
    conditions: dict = {}
    quantities: dict = {"min_eigenvalue": oracle.min_eigenvalue}

    t1_ok = bool(op_norm(T1) <= 1 + cfg.contraction_tol)
    pm_ok = psd_check(eye - T2, cfg, scale=scale).is_psd and psd_check(eye + T2, cfg, scale=scale).is_psd
    plus = _gamma_or_none(eye + T2, T1 + adjoint(T1), eye + T2, cfg, notes)
    minus = _gamma_or_none(eye - T2, T1 - adjoint(T1), eye - T2, cfg, notes)
    holds = _order4("z4", pm_ok, t1_ok, plus, minus, oracle, notes, conditions, quantities)

    factors = {}
    if t1_ok:
        # recover one self-adjoint contraction from the flat block and test it as a residual
        hp = half_power(T1, cfg)
        S, DS, DSs = hp.B, hp.D_B, hp.D_Bstar
        A = np.block([[eye, T1], [adjoint(T1), eye]])
        Bm = np.block([[T2, adjoint(T1)], [T1, T2]])
        cutoff = cfg.psd_tol * scale
        Ainv = _root_pinv(A, cutoff)
        G = Ainv @ Bm @ Ainv
        G1, G2, G4 = G[:d, :d], G[:d, d:], G[d:, d:]
        Ss, G2s = adjoint(S), adjoint(G2)
        eq1a = DSs @ G1 @ DSs + DSs @ G2 @ Ss + S @ G2s @ DSs + S @ G4 @ Ss
        eq1b = Ss @ G1 @ S + Ss @ G2 @ DS + DS @ G2s @ S + DS @ G4 @ DS
        eq2 = Ss @ G1 @ DSs + Ss @ G2 @ Ss + DS @ G2s @ DSs + DS @ G4 @ Ss
        res = max(fro(eq1a - T2), fro(eq1b - T2), fro(eq2 - T1))
        gnorm = op_norm(G)
        quantities.update({"recovered_gamma_norm": gnorm, "recovered_gamma_hermitian_defect": fro(G - adjoint(G)),
                           "block_equation_residual": res})
        conditions["recovered_gamma"] = bool(gnorm <= 1 + cfg.contraction_tol and res <= np.sqrt(cfg.psd_tol) * scale)
        factors["gamma"] = G
        factors["half_power"] = S
    else:
        conditions["recovered_gamma"] = False
    _reconcile("z4 recovered gamma", conditions["recovered_gamma"], oracle, notes)
    return CriterionReport("z4", holds, oracle, conditions, quantities, factors, tuple(notes))


def klein_criterion(T1, T2, T3, cfg: ToleranceConfig = DEFAULT_TOL) -> CriterionReport:
    """Positive definiteness on Z_2+Z_2 = {e, a, b, ab} with ``T(a), T(b), T(ab) = T1, T2, T3``."""
    T1 = _require_hermitian(as_matrix(T1, "T1"), "T1", cfg)
    T2 = _require_hermitian(as_matrix(T2, "T2"), "T2", cfg)
    T3 = _require_hermitian(as_matrix(T3, "T3"), "T3", cfg)
    eye = np.eye(T1.shape[0])
    flat = block_assemble([[eye, T1, T2, T3], [T1, eye, T3, T2], [T2, T3, eye, T1], [T3, T2, T1, eye]])
    scale = psd_scale(flat)
    oracle = psd_check(flat, cfg, scale=scale)
    notes: list[str] = []
    conditions: dict = {}
    quantities: dict = {"min_eigenvalue": oracle.min_eigenvalue}
    t1_ok = bool(op_norm(T1) <= 1 + cfg.contraction_tol)
    pm_ok = psd_check(eye - T2, cfg, scale=scale).is_psd and psd_check(eye + T2, cfg, scale=scale).is_psd
    plus = _gamma_or_none(eye + T2, T1 + T3, eye + T2, cfg, notes)
    minus = _gamma_or_none(eye - T2, T1 - T3, eye - T2, cfg, notes)
    holds = _order4("klein", pm_ok, t1_ok, plus, minus, oracle, notes, conditions, quantities)
    return CriterionReport("klein", holds, oracle, conditions, quantities, notes=tuple(notes))


# -- truncations of Z and Z+Z -------------------------------------------------

@dataclass(frozen=True)
class TruncationReport:
    kind: str
    level: int
    report: PsdReport
    identity_residual: float

    @property
    def is_psd(self) -> bool:
        return self.report.is_psd

    @property
    def label(self) -> str:
        if self.report.is_psd:
            return f"positive up to level {self.level}"
        return f"indefinite at level {self.level}"

    def __bool__(self) -> bool:
        return self.is_psd


def _check_level(n: int, cap: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"truncation level must be an integer >= 1, got {n!r}")
    if n > cap:
        raise DomainError(f"truncation level {n} exceeds the cap {cap}")


def z_band(P, n: int) -> np.ndarray:
    """``(n+1) x (n+1)`` block Toeplitz matrix with ``P^(j-i)`` above and ``P*^(i-j)`` below the diagonal."""
    P = as_matrix(P, "P")
    d = P.shape[0]
    powers = [np.eye(d, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ P)
    grid = np.empty((n + 1, n + 1, d, d), dtype=complex)
    for i in range(n + 1):
        for j in range(n + 1):
            grid[i, j] = powers[j - i] if j >= i else adjoint(powers[i - j])
    return block_assemble(grid)


def z_truncation(P, n: int, cfg: ToleranceConfig = DEFAULT_TOL, max_level: int = Z_MAX_LEVEL) -> TruncationReport:
    """Positivity of the level-``n`` band matrix of ``k -> P^k`` (``P*^|k|`` for ``k < 0``).

    The band is also rebuilt as ``(I - Q)^-1 + (I - Q*)^-1 - I`` with ``Q`` the
    lower shift carrying ``P*``; the two constructions must agree.
    """
    P = as_matrix(P, "P")
    _check_level(n, max_level)
    d = P.shape[0]
    flat = z_band(P, n)
    Q = np.zeros_like(flat)
    for i in range(1, n + 1):
        Q[i * d:(i + 1) * d, (i - 1) * d:i * d] = adjoint(P)
    eye = np.eye(flat.shape[0])
    rebuilt = np.linalg.inv(eye - Q) + np.linalg.inv(eye - adjoint(Q)) - eye
    residual = fro(rebuilt - flat)
    if residual > cfg.residual_tol * psd_scale(flat):
        raise ConsistencyError(f"shift-resolvent form of the band matrix disagrees ({residual:.3e})")
    return TruncationReport("Z", n, psd_check(flat, cfg), residual)


def dcmap(T1, T2, m: int, n: int) -> np.ndarray:
    """Value at ``(m, n)`` of the function on Z+Z built from a commuting pair."""
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    mp = np.linalg.matrix_power
    if m >= 0 and n >= 0:
        return mp(T1, m) @ mp(T2, n)
    if m < 0 and n >= 0:
        return mp(adjoint(T1), -m) @ mp(T2, n)
    if m >= 0 and n < 0:
        return mp(adjoint(T2), -n) @ mp(T1, m)
    return mp(adjoint(T1), -m) @ mp(adjoint(T2), -n)


def _commutator_norm(T1, T2) -> float:
    return fro(T1 @ T2 - T2 @ T1)


def _require_commuting(T1, T2, cfg) -> None:
    c = _commutator_norm(T1, T2)
    if c > cfg.residual_tol * max(1.0, op_norm(T1) * op_norm(T2)):
        raise CommutationError(f"T1 and T2 do not commute (||[T1, T2]|| = {c:.3e})", (0, 1), c)


def zz_block(T1, T2, n: int) -> np.ndarray:
    """Block matrix ``[T(q - p)]`` over index pairs ``0..n`` squared, lexicographic order."""
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    d = T1.shape[0]
    pairs = [(a, b) for a in range(n + 1) for b in range(n + 1)]
    cache = {}
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            cache[a, b] = dcmap(T1, T2, a, b)
    k = len(pairs)
    grid = np.empty((k, k, d, d), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        for j, (c, e) in enumerate(pairs):
            grid[i, j] = cache[c - a, e - b]
    return block_assemble(grid)


def zz_truncation(T1, T2, n: int, cfg: ToleranceConfig = DEFAULT_TOL,
                  max_level: int = ZZ_MAX_LEVEL) -> TruncationReport:
    """Positivity of the level-``n`` block matrix of the commuting-pair function on Z+Z.

    The first block row must satisfy ``A_1j = A_11 diag(T1)^(j-1)``, and the
    block Toeplitz structure ``A_ij = A_(i+1)(j+1)`` is checked as well.
    """
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    _check_level(n, max_level)
    _require_commuting(T1, T2, cfg)
    d = T1.shape[0]
    flat = zz_block(T1, T2, n)
    w = (n + 1) * d
    sup = flat.reshape(n + 1, w, n + 1, w).transpose(0, 2, 1, 3)
    A11 = sup[0, 0]
    Lam = np.kron(np.eye(n + 1), T1)
    residual = 0.0
    for j in range(n + 1):
        residual = max(residual, fro(sup[0, j] - A11 @ np.linalg.matrix_power(Lam, j)))
    for i in range(n):
        for j in range(n):
            residual = max(residual, fro(sup[i, j] - sup[i + 1, j + 1]))
    if residual > cfg.residual_tol * psd_scale(flat):
        raise ConsistencyError(f"block structure of the Z+Z matrix is violated ({residual:.3e})")
    return TruncationReport("ZxZ", n, psd_check(flat, cfg), residual)


@dataclass(frozen=True)
class DoublyCommutingReport:
    commuting: bool
    doubly_commuting: bool
    commutator_norm: float
    star_commutator_norm: float

    def __bool__(self) -> bool:
        return self.doubly_commuting


def doubly_commuting_check(T1, T2, cfg: ToleranceConfig = DEFAULT_TOL) -> DoublyCommutingReport:
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    tol = cfg.residual_tol * max(1.0, op_norm(T1) * op_norm(T2))
    c = _commutator_norm(T1, T2)
    cs = fro(adjoint(T1) @ T2 - T2 @ adjoint(T1))
    return DoublyCommutingReport(bool(c <= tol), bool(c <= tol and cs <= tol), c, cs)


@dataclass(frozen=True)
class BrehmerReport:
    passes: bool
    operator: np.ndarray = field(repr=False)
    report: PsdReport = field(repr=False)
    T1_contraction: bool = True
    T2_contraction: bool = True
    quadratic_form_residual: float = 0.0

    def __bool__(self) -> bool:
        return self.passes


def brehmer_operator(T1, T2) -> np.ndarray:
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    T12 = T1 @ T2
    M = np.eye(T1.shape[0]) - adjoint(T1) @ T1 - adjoint(T2) @ T2 + adjoint(T12) @ T12
    return (M + adjoint(M)) / 2


def brehmer_check(T1, T2, cfg: ToleranceConfig = DEFAULT_TOL, seed: int = 0, samples: int = 8) -> BrehmerReport:
    """Test ``I - T1*T1 - T2*T2 + (T1T2)*(T1T2) >= 0`` and both contractions.

    The quadratic form of the level-1 Z+Z block at ``x = (T1T2h, -T1h, -T2h, h)``
    equals the Brehmer form at ``h``; this is confirmed on seeded random ``h``.
    """
    T1, T2 = as_matrix(T1, "T1"), as_matrix(T2, "T2")
    _require_commuting(T1, T2, cfg)
    M = brehmer_operator(T1, T2)
    rep = psd_check(M, cfg)
    c1 = bool(op_norm(T1) <= 1 + cfg.contraction_tol)
    c2 = bool(op_norm(T2) <= 1 + cfg.contraction_tol)

    flat = zz_block(T1, T2, 1)
    rng = np.random.default_rng(seed)
    d = T1.shape[0]
    worst = 0.0
    for _ in range(samples):
        h = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        h /= np.linalg.norm(h)
        x = np.concatenate([T1 @ T2 @ h, -T1 @ h, -T2 @ h, h])
        lhs = np.vdot(x, flat @ x)
        rhs = np.vdot(h, M @ h)
        worst = max(worst, abs(lhs - rhs))
    if worst > cfg.residual_tol * psd_scale(flat):
        raise ConsistencyError(f"quadratic form identity fails ({worst:.3e})")
    return BrehmerReport(c1 and c2 and rep.is_psd, M, rep, c1, c2, worst)


# -- the Z_2 counterexample ------------------------------------------------

COUNTEREXAMPLE_T0 = np.diag([2.0, 1.0])
COUNTEREXAMPLE_T1 = np.array([[-1.0, -1.0], [-1.0, 0.0]])


def counterexample_function() -> OperatorFunction:
    """Positive definite on Z_2 whose pointwise square is not."""
    return OperatorFunction(make_cyclic(2), np.array([COUNTEREXAMPLE_T0, COUNTEREXAMPLE_T1]))


def counterexample_block(n: int) -> np.ndarray:
    T0n = np.linalg.matrix_power(COUNTEREXAMPLE_T0, n)
    T1n = np.linalg.matrix_power(COUNTEREXAMPLE_T1, n)
    return np.block([[T0n, T1n], [T1n, T0n]])


def _fib_like(n: int) -> list[int]:
    a = [1, 1, 2]  # a_0, a_1, a_2
    while len(a) <= n:
        a.append(a[-1] + a[-2])
    return a


def counterexample_det(n: int, check: bool = True) -> float:
    """Closed-form determinant of the Gram block of ``s -> T(s)^n`` for the counterexample.

    With ``a_1 = 1, a_2 = 2, a_k = a_(k-1) + a_(k-2)`` (and ``a_0 = 1``),
    ``T(1)^n = (-1)^n [[a_n, a_(n-1)], [a_(n-1), a_(n-2)]]`` and the block splits as
    ``det(T0^n + T1^n) det(T0^n - T1^n)``, giving
    ``(4^n - a_n^2)(1 - a_(n-2)^2) - a_(n-1)^2 (2^(n+1) + 2 a_n a_(n-2) - a_(n-1)^2)``.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise DomainError(f"closed form is stated for n >= 3, got {n!r}")
    a = _fib_like(n)
    an, an1, an2 = a[n], a[n - 1], a[n - 2]
    value = (4 ** n - an ** 2) * (1 - an2 ** 2) - an1 ** 2 * (2 ** (n + 1) + 2 * an * an2 - an1 ** 2)
    if check:
        numeric = float(np.linalg.det(counterexample_block(n)))
        if abs(numeric - value) > 1e-9 * max(1.0, abs(value)):
            raise ConsistencyError(f"closed form {value} disagrees with numeric determinant {numeric}")
    return float(value)
