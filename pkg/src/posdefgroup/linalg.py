"""Dense complex matrix kernel.

Everything here works on ``numpy`` ``complex128`` arrays. Positivity verdicts
are relative to ``max(1, ||M||_F)`` so that exact zero eigenvalues (common in
rank-deficient Gram blocks) are not misread as negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (CommutationError, NormalityError, NotContractionError, NotHermitianError,
                     NotPositiveError, ShapeError)

POSITIVE = "positive"
PSD_AT_TOL = "positive-semidefinite-at-tolerance"
INDEFINITE = "indefinite"


@dataclass(frozen=True)
class ToleranceConfig:
    psd_tol: float = 1e-9
    rank_tol: float = 1e-10
    cluster_tol: float = 1e-8
    contraction_tol: float = 1e-9
    residual_tol: float = 1e-7

    def __post_init__(self):
        for name in ("psd_tol", "rank_tol", "cluster_tol", "contraction_tol", "residual_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positivity test.

    ``verdict`` is one of ``"positive"`` (smallest eigenvalue clearly above
    zero), ``"positive-semidefinite-at-tolerance"`` (within the tolerance band
    around zero) or ``"indefinite"``. ``witness`` is a unit vector with a
    negative Rayleigh quotient when indefinite.
    """

    verdict: str
    min_eigenvalue: float
    tolerance_used: float
    eigenvalues: np.ndarray = field(repr=False)
    witness: np.ndarray | None = field(default=None, repr=False)
    notes: tuple[str, ...] = ()

    @property
    def is_psd(self) -> bool:
        return self.verdict != INDEFINITE

    @property
    def is_strictly_positive(self) -> bool:
        return self.verdict == POSITIVE

    def __bool__(self) -> bool:
        return self.is_psd


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    a = np.asarray(M, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{name} has non-finite entries")
    return a


def _square(M, name="matrix") -> np.ndarray:
    a = as_matrix(M, name)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    return a


def adjoint(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def fro(M) -> float:
    return float(np.linalg.norm(M))


def psd_scale(M) -> float:
    return max(1.0, fro(M))


def hermitian_part(M, cfg: ToleranceConfig = DEFAULT_TOL, *, scale: float | None = None) -> np.ndarray:
    """Return ``(M + M*)/2`` after checking ``M`` is Hermitian within tolerance."""
    M = _square(M)
    scale = psd_scale(M) if scale is None else scale
    deviation = fro(M - adjoint(M))
    if deviation > cfg.psd_tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: ||M - M*||_F = {deviation:.3e}", deviation)
    return (M + adjoint(M)) / 2


def psd_check(M, cfg: ToleranceConfig = DEFAULT_TOL, *, scale: float | None = None) -> PsdReport:
    """Certify ``M >= 0`` from the smallest eigenvalue of its Hermitian part.

    ``scale`` defaults to ``max(1, ||M||_F)``; callers comparing several
    matrices against one threshold pass the same scale to each.
    """
    M = _square(M)
    scale = psd_scale(M) if scale is None else float(scale)
    H = hermitian_part(M, cfg, scale=scale)
    if H.shape[0] == 0:
        return PsdReport(POSITIVE, float("inf"), cfg.psd_tol * scale, np.zeros(0))
    w, Q = np.linalg.eigh(H)
    lam_min = float(w[0])
    tol = cfg.psd_tol * scale
    if lam_min < -tol:
        return PsdReport(INDEFINITE, lam_min, tol, w, Q[:, 0].copy())
    verdict = POSITIVE if lam_min > tol else PSD_AT_TOL
    return PsdReport(verdict, lam_min, tol, w)


def require_psd(M, cfg: ToleranceConfig = DEFAULT_TOL, name: str = "matrix") -> PsdReport:
    report = psd_check(M, cfg)
    if not report.is_psd:
        raise NotPositiveError(f"{name} is not positive semidefinite "
                               f"(min eigenvalue {report.min_eigenvalue:.3e})", report)
    return report


def sqrt_psd(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Principal square root; eigenvalues inside the tolerance band are clipped to 0."""
    M = _square(M)
    require_psd(M, cfg)
    w, Q = np.linalg.eigh((M + adjoint(M)) / 2)
    w = np.clip(w, 0.0, None)
    S = (Q * np.sqrt(w)) @ adjoint(Q)
    return (S + adjoint(S)) / 2


def op_norm(M) -> float:
    """Largest singular value."""
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def is_contraction(T, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    return bool(op_norm(T) <= 1 + cfg.contraction_tol)


def defect(T, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``D_T = (I - T*T)^(1/2)`` for a contraction ``T``."""
    T = as_matrix(T)
    norm = op_norm(T)
    if norm > 1 + cfg.contraction_tol:
        raise NotContractionError(f"||T|| = {norm:.12g} exceeds 1", norm)
    n = T.shape[1]
    return sqrt_psd(np.eye(n) - adjoint(T) @ T, cfg)


def pinv(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse, singular values below ``rank_tol * s_max`` dropped."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(M.shape[::-1], dtype=complex)
    return np.linalg.pinv(M, rcond=cfg.rank_tol)


def range_projector(M, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the column space of ``M``."""
    M = as_matrix(M)
    return M @ pinv(M, cfg)


def rank(M, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    M = as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > cfg.rank_tol * s[0])) if s[0] > 0 else 0


def block_assemble(blocks) -> np.ndarray:
    """Flatten an ``m x m`` grid of ``d x d`` blocks into an ``(md) x (md)`` matrix.

    ``blocks`` is either a nested sequence of matrices or an array of shape
    ``(m, m, d, d)``.
    """
    if isinstance(blocks, np.ndarray) and blocks.ndim == 4:
        grid = blocks.astype(complex, copy=False)
    else:
        rows = [list(r) for r in blocks]
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise ShapeError("block grid must be square and non-empty")
        mats = [[as_matrix(b) for b in r] for r in rows]
        shapes = {b.shape for r in mats for b in r}
        if len(shapes) != 1:
            raise ShapeError(f"ragged block grid, block shapes {sorted(shapes)}")
        grid = np.array(mats, dtype=complex)
    m, m2, p, q = grid.shape
    if m != m2:
        raise ShapeError("block grid must be square")
    return grid.transpose(0, 2, 1, 3).reshape(m * p, m2 * q)


def split_blocks(flat: np.ndarray, m: int) -> np.ndarray:
    """Inverse of :func:`block_assemble` for square blocks."""
    n = flat.shape[0]
    if n % m:
        raise ShapeError(f"cannot split a {n}x{n} matrix into {m}x{m} blocks")
    d = n // m
    return flat.reshape(m, d, m, d).transpose(0, 2, 1, 3)


@dataclass(frozen=True)
class JointDiagonalization:
    """Unitary ``basis`` with ``basis* M_k basis`` diagonal for every member.

    ``eigenvalues[k, j]`` is the eigenvalue of member ``k`` on column ``j``.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    offdiagonal_residual: float


def _cluster_split(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups, current = [], [order[0]]
    for prev, nxt in zip(order[:-1], order[1:]):
        if values[nxt] - values[prev] > tol:
            groups.append(np.array(current))
            current = []
        current.append(nxt)
    groups.append(np.array(current))
    return groups


def _refine(family: list[np.ndarray], rng: np.random.Generator, tol: float, depth: int) -> np.ndarray:
    n = family[0].shape[0]
    if n == 1:
        return np.eye(1, dtype=complex)
    scalar = all(fro(M - np.trace(M) / n * np.eye(n)) <= tol for M in family)
    if scalar or depth > 64:
        return np.eye(n, dtype=complex)
    coeffs = rng.standard_normal((len(family), 2))
    H = sum(a * (M + adjoint(M)) / 2 + b * (M - adjoint(M)) / 2j
            for (a, b), M in zip(coeffs, family))
    w, Q = np.linalg.eigh((H + adjoint(H)) / 2)
    columns = []
    for idx in _cluster_split(w, tol):
        Qc = Q[:, idx]
        if len(idx) == 1:
            columns.append(Qc)
            continue
        sub = [adjoint(Qc) @ M @ Qc for M in family]
        columns.append(Qc @ _refine(sub, rng, tol, depth + 1))
    return np.hstack(columns)


def joint_diagonalize(family: Sequence, cfg: ToleranceConfig = DEFAULT_TOL,
                      seed: int = 0) -> JointDiagonalization:
    """Simultaneously diagonalize pairwise commuting normal matrices.

    A seeded random real combination of the Hermitian and skew parts of the
    family is diagonalized; eigenvalue clusters (width ``cluster_tol``) are
    refined recursively with fresh combinations restricted to the cluster.
    """
    mats = [_square(M, "family member") for M in family]
    if not mats:
        raise ShapeError("family must be non-empty")
    n = mats[0].shape[0]
    if any(M.shape != (n, n) for M in mats):
        raise ShapeError("family members must share one shape")
    scale = max(1.0, max(fro(M) for M in mats))
    tol = cfg.cluster_tol * scale
    for i, M in enumerate(mats):
        dev = fro(M @ adjoint(M) - adjoint(M) @ M)
        if dev > tol:
            raise NormalityError(f"family member {i} is not normal (||MM* - M*M|| = {dev:.3e})", i, dev)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            dev = fro(mats[i] @ mats[j] - mats[j] @ mats[i])
            if dev > tol:
                raise CommutationError(f"members {i} and {j} do not commute (norm {dev:.3e})", (i, j), dev)

    Q = _refine(mats, np.random.default_rng(seed), tol, 0)
    diag = np.array([adjoint(Q) @ M @ Q for M in mats])
    eigs = np.array([np.diagonal(D) for D in diag])
    off = max(fro(D - np.diag(np.diagonal(D))) for D in diag)
    return JointDiagonalization(Q, eigs, off)
