"""Operator-valued functions on finite groups and their Gram blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConsistencyError, MorphismError, ShapeError, SymmetryError
from .groupcore import FiniteGroup, GroupMorphism, check_morphism
from .linalg import (DEFAULT_TOL, PsdReport, ToleranceConfig, adjoint, as_matrix, block_assemble, fro,
                     psd_check, psd_scale)


@dataclass(frozen=True, eq=False)
class OperatorFunction:
    """A map ``s -> T(s)`` from a finite group into ``d x d`` complex matrices.

    ``values[s]`` is ``T(s)``; the array has shape ``(|G|, d, d)``.
    """

    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise ShapeError(f"values must have shape (|G|, d, d), got {vals.shape}")
        if vals.shape[0] != self.group.order:
            raise ShapeError(f"expected {self.group.order} values, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise ShapeError("values contain non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def __call__(self, s: int) -> np.ndarray:
        return self.values[s]

    @classmethod
    def from_callable(cls, group: FiniteGroup, f: Callable[[int], object]) -> "OperatorFunction":
        return cls(group, np.array([as_matrix(f(s)) for s in group.elements()]))

    @classmethod
    def from_mapping(cls, group: FiniteGroup, values: Mapping[int, object]) -> "OperatorFunction":
        missing = [s for s in group.elements() if s not in values]
        if missing:
            raise ShapeError(f"no value given for elements {missing}")
        return cls.from_callable(group, lambda s: values[s])

    @classmethod
    def constant(cls, group: FiniteGroup, M) -> "OperatorFunction":
        M = as_matrix(M)
        return cls(group, np.broadcast_to(M, (group.order,) + M.shape))


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    worst_deviation: float
    witness: int | None

    def __bool__(self) -> bool:
        return self.symmetric


def check_symmetry(T: OperatorFunction, cfg: ToleranceConfig = DEFAULT_TOL) -> SymmetryReport:
    """Check ``T(s^-1) = T(s)*`` for every ``s``."""
    dev = np.linalg.norm(T.values[T.group.inv] - adjoint(T.values), axis=(1, 2))
    worst = int(np.argmax(dev))
    scale = max(1.0, float(np.max(np.linalg.norm(T.values, axis=(1, 2)))))
    ok = bool(dev[worst] <= cfg.psd_tol * scale)
    return SymmetryReport(ok, float(dev[worst]), None if ok else worst)


@dataclass(frozen=True, eq=False)
class BlockGram:
    """``blocks[i, j] = T(s_i^-1 s_j)`` over the ordered tuple ``elements``."""

    elements: tuple[int, ...]
    blocks: np.ndarray = field(repr=False)
    flat: np.ndarray = field(repr=False)


def gram_block(T: OperatorFunction, elements: Sequence[int] | None = None) -> BlockGram:
    G = T.group
    elems = tuple(G.elements()) if elements is None else tuple(int(s) for s in elements)
    if any(not 0 <= s < G.order for s in elems):
        raise ShapeError(f"element indices must lie in [0, {G.order})")
    idx = np.array(elems, dtype=np.int64)
    words = G.mul[G.inv[idx][:, None], idx[None, :]]
    blocks = T.values[words]
    return BlockGram(elems, blocks, block_assemble(blocks))


def require_symmetric(T: OperatorFunction, cfg: ToleranceConfig = DEFAULT_TOL) -> None:
    sym = check_symmetry(T, cfg)
    if not sym.symmetric:
        raise SymmetryError(f"T(s^-1) != T(s)* at s = {sym.witness} "
                            f"(deviation {sym.worst_deviation:.3e})", sym.witness, sym.worst_deviation)


def is_positive_definite(T: OperatorFunction, cfg: ToleranceConfig = DEFAULT_TOL,
                         elements: Sequence[int] | None = None) -> PsdReport:
    """Positivity of the Gram block over the whole group (or a given tuple)."""
    require_symmetric(T, cfg)
    return psd_check(gram_block(T, elements).flat, cfg)


def conjugate_by(T: OperatorFunction, V) -> OperatorFunction:
    """``s -> V* T(s) V``. ``V`` is ``d x k``; the result is ``k``-dimensional."""
    V = as_matrix(V, "V")
    if V.shape[0] != T.dim:
        raise ShapeError(f"V must have {T.dim} rows, got shape {V.shape}")
    return OperatorFunction(T.group, adjoint(V) @ T.values @ V)


def pullback(T: OperatorFunction, phi: GroupMorphism) -> OperatorFunction:
    """``g0 -> T(phi(g0))`` on the source group of ``phi``."""
    if phi.target is not T.group and not phi.target.same_table(T.group):
        raise MorphismError("morphism target is not the group of T")
    check_morphism(phi)
    return OperatorFunction(phi.source, T.values[phi.map])


def hadamard_block(A, B) -> np.ndarray:
    """Blockwise product ``[A_ij B_ij]`` of two grids of shape ``(m, m, d, d)``.

    :class:`BlockGram` values are accepted for either argument.
    """
    A = A.blocks if isinstance(A, BlockGram) else np.asarray(A, dtype=complex)
    B = B.blocks if isinstance(B, BlockGram) else np.asarray(B, dtype=complex)
    if A.ndim != 4 or A.shape != B.shape or A.shape[0] != A.shape[1] or A.shape[2] != A.shape[3]:
        raise ShapeError(f"block grids must share a square shape, got {A.shape} and {B.shape}")
    return A @ B


def power_map(T: OperatorFunction, n: int) -> OperatorFunction:
    if n < 1:
        raise ValueError("power must be >= 1")
    return OperatorFunction(T.group, np.linalg.matrix_power(T.values, n))


def power_pd_check(T: OperatorFunction, n: int, cfg: ToleranceConfig = DEFAULT_TOL) -> PsdReport:
    """Positivity of ``s -> T(s)^n`` via the n-fold block Hadamard power of the Gram block.

    The direct Gram block of the power map is computed as well; the two
    flats must coincide.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    require_symmetric(T, cfg)
    notes = []
    if not psd_check(gram_block(T).flat, cfg).is_psd:
        notes.append("T itself is not positive definite")

    base = gram_block(T).blocks
    grid = base
    for _ in range(n - 1):
        grid = hadamard_block(grid, base)
    flat = block_assemble(grid)
    direct = gram_block(power_map(T, n)).flat
    gap = fro(flat - direct)
    if gap > cfg.psd_tol * psd_scale(direct):
        raise ConsistencyError(f"Hadamard power and power map disagree ({gap:.3e})")

    report = psd_check(flat, cfg)
    if report.verdict != psd_check(direct, cfg).verdict:
        raise ConsistencyError("Hadamard power and power map give different verdicts")
    return PsdReport(report.verdict, report.min_eigenvalue, report.tolerance_used,
                     report.eigenvalues, report.witness, tuple(notes))
