"""Finite-dimensional Naimark dilation of a positive definite function.

The dilation space is the range of the Gram block ``Delta`` of ``T`` over the
whole group. With ``Delta = Q diag(lam) Q*`` restricted to eigenvalues above
``rank_tol * lam_max``, ``W = diag(lam)^(1/2) Q*`` maps ``C^(md)`` onto ``K``
isometrically for the Gram form. Left translation ``(L(t)h)(s) = h(t^-1 s)``
preserves the Gram form, so ``U(t) = W L(t) W^+`` is unitary on ``K``, and
``V = W iota_e`` (embedding at the identity block) gives ``V* U(s) V = T(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ConstructionError, NotPositiveError, ShapeError
from .linalg import DEFAULT_TOL, ToleranceConfig, adjoint, as_matrix, fro, psd_check, rank
from .pdfun import OperatorFunction, check_symmetry, gram_block, is_positive_definite, power_map
from .reps import UnitaryRep, verify_rep


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """``V: C^d -> C^dimK`` and a unitary family ``U`` with ``T(s) = V* U(s) V``."""

    V: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    dim_k: int
    residuals: dict = field(default_factory=dict)

    def as_rep(self, group) -> UnitaryRep:
        return UnitaryRep(group, self.U)


@dataclass(frozen=True)
class DilationReport:
    valid: bool
    residuals: dict
    converse_positive: bool

    def __bool__(self) -> bool:
        return self.valid


def left_translation(group, t: int, d: int) -> np.ndarray:
    """Block permutation ``(L(t)h)(s) = h(t^-1 s)`` on ``C^(|G| d)``."""
    m = group.order
    L = np.zeros((m * d, m * d))
    eye = np.eye(d)
    for s in range(m):
        src = group.op(group.inverse(t), s)
        L[s * d:(s + 1) * d, src * d:(src + 1) * d] = eye
    return L


def dilation_residuals(T: OperatorFunction, V, U) -> dict:
    """Worst-case defects of every dilation identity, plus the minimality rank gap."""
    G = T.group
    V = np.asarray(V, dtype=complex)
    U = np.asarray(U, dtype=complex)
    k = V.shape[0]
    eye = np.eye(k)
    if U.shape != (G.order, k, k):
        raise ShapeError(f"U must have shape ({G.order}, {k}, {k}), got {U.shape}")
    if k == 0:
        return {"unitarity": 0.0, "identity": 0.0, "homomorphism": 0.0,
                "isometry_gram": fro(T.values[G.identity]),
                "compression": float(np.max(np.linalg.norm(T.values, axis=(1, 2)))),
                "minimality_rank_deficit": 0}
    unit = float(np.max(np.linalg.norm(adjoint(U) @ U - eye, axis=(1, 2))))
    ident = fro(U[G.identity] - eye)
    hom = float(np.max(np.linalg.norm(U[G.mul] - U[:, None] @ U[None, :], axis=(2, 3))))
    gram = fro(adjoint(V) @ V - T.values[G.identity])
    comp = float(np.max(np.linalg.norm(adjoint(V) @ U @ V - T.values, axis=(1, 2))))
    span = np.hstack(list(U @ V))
    s = np.linalg.svd(span, compute_uv=False)
    # minimality: singular values of [U(s)V]_s bounded away from zero on all of K
    deficit = int(k - np.sum(s > 1e-8 * max(1.0, s[0]))) if s.size else k
    return {"unitarity": unit, "identity": ident, "homomorphism": hom,
            "isometry_gram": gram, "compression": comp, "minimality_rank_deficit": deficit}


def _residuals_ok(res: dict, cfg: ToleranceConfig, scale: float) -> bool:
    tol = cfg.residual_tol
    return (res["unitarity"] <= tol and res["identity"] <= tol and res["homomorphism"] <= tol
            and res["isometry_gram"] <= tol * scale and res["compression"] <= tol * scale
            and res["minimality_rank_deficit"] == 0)


def naimark_dilate(T: OperatorFunction, cfg: ToleranceConfig = DEFAULT_TOL) -> NaimarkDilation:
    report = is_positive_definite(T, cfg)
    if not report.is_psd:
        raise NotPositiveError("T is not positive definite; no dilation exists", report)
    G, d = T.group, T.dim
    m = G.order
    Delta = gram_block(T).flat
    w, Q = np.linalg.eigh((Delta + adjoint(Delta)) / 2)
    lam_max = float(w[-1]) if w.size else 0.0
    keep = w > cfg.rank_tol * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    Qk, wk = Q[:, keep], w[keep]
    W = np.sqrt(wk)[:, None] * adjoint(Qk)            # dimK x md
    W_pinv = Qk / np.sqrt(wk)[None, :]                 # md x dimK
    k = int(keep.sum())

    U = np.empty((m, k, k), dtype=complex)
    for t in G.elements():
        U[t] = W @ left_translation(G, t, d) @ W_pinv
    e = G.identity
    V = W[:, e * d:(e + 1) * d]

    res = dilation_residuals(T, V, U)
    scale = max(1.0, fro(T.values[e]))
    if not _residuals_ok(res, cfg, scale):
        raise ConstructionError(f"dilation failed re-verification: {res}", res)
    return NaimarkDilation(V, U, k, res)


def verify_dilation(T: OperatorFunction, D: NaimarkDilation, cfg: ToleranceConfig = DEFAULT_TOL) -> DilationReport:
    """Recheck every dilation identity and that ``s -> V* U(s) V`` is positive definite."""
    res = dilation_residuals(T, D.V, D.U)
    scale = max(1.0, fro(T.values[T.group.identity]))
    if D.dim_k:
        compressed = OperatorFunction(T.group, adjoint(D.V) @ D.U @ D.V)
        # a broken family can compress to a non-symmetric function
        converse = bool(check_symmetry(compressed, cfg)) and psd_check(gram_block(compressed).flat, cfg).is_psd
    else:
        converse = True
    return DilationReport(_residuals_ok(res, cfg, scale) and converse, res, converse)


def compression(rep: UnitaryRep, V, isometry: bool = False,
                cfg: ToleranceConfig = DEFAULT_TOL) -> OperatorFunction:
    """``s -> V* U(s) V``; with ``isometry`` set, ``V`` must have orthonormal columns."""
    V = as_matrix(V, "V")
    if V.shape[0] != rep.dim:
        raise ShapeError(f"V must have {rep.dim} rows, got shape {V.shape}")
    if isometry and fro(adjoint(V) @ V - np.eye(V.shape[1])) > cfg.residual_tol:
        raise ShapeError("V does not have orthonormal columns")
    return OperatorFunction(rep.group, adjoint(V) @ rep.U @ V)


@dataclass(frozen=True)
class CompatibilityReport:
    n: int
    precondition_met: bool
    compatible: bool | None
    dilation_route_residual: float
    power_identity_residual: float
    notes: tuple[str, ...] = ()


def power_compatibility(T: OperatorFunction, D: NaimarkDilation, n: int,
                        cfg: ToleranceConfig = DEFAULT_TOL) -> CompatibilityReport:
    """Does ``V* U(s)^n V = T(s)^n`` hold for all ``s``?

    Requires the power map of ``T`` to be positive definite and
    ``s -> U(s)^n`` to be a representation. The answer is computed directly
    and compared with the group-side test ``T(s^n) = T(s)^n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    G = T.group
    Tn = power_map(T, n)
    notes = []
    pd = psd_check(gram_block(Tn).flat, cfg).is_psd
    if not pd:
        notes.append("T_n is not positive definite")
    Un = np.linalg.matrix_power(D.U, n) if D.dim_k else D.U
    if D.dim_k and not verify_rep(UnitaryRep(G, Un), cfg).valid:
        notes.append("s -> U(s)^n is not a unitary representation")
    if notes:
        return CompatibilityReport(n, False, None, float("nan"), float("nan"), tuple(notes))

    scale = max(1.0, float(np.max(np.linalg.norm(Tn.values, axis=(1, 2)))))
    tol = cfg.residual_tol * scale
    via_dilation = adjoint(D.V) @ Un @ D.V if D.dim_k else np.zeros_like(T.values)
    r_dil = float(np.max(np.linalg.norm(via_dilation - Tn.values, axis=(1, 2))))
    powers = np.array([G.power(s, n) for s in G.elements()])
    r_pow = float(np.max(np.linalg.norm(T.values[powers] - Tn.values, axis=(1, 2))))
    if (r_dil <= tol) != (r_pow <= tol):
        raise ConsistencyError(f"dilation route ({r_dil:.3e}) and T(s^n) = T(s)^n route "
                               f"({r_pow:.3e}) disagree")
    return CompatibilityReport(n, True, r_dil <= tol, r_dil, r_pow)
