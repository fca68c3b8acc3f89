"""Finite groups stored as multiplication tables.

Elements are the integers ``0 .. m-1``. Labels are cosmetic only; all the
block-matrix code indexes by position, so the element order of a table is the
canonical order of every Gram block built over the group.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AxiomError, InvalidOrderError, MorphismError, TableSizeError

EXHAUSTIVE_LIMIT = 256
MAX_SYMMETRIC_DEGREE = 7
_SAMPLED_TRIPLES = 200_000


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table.

    ``mul[a, b]`` is the index of the product ``a*b``. ``exhaustive`` records
    whether the group axioms were checked on every triple (always true for
    the built-in constructors, which are correct by construction).
    """

    mul: np.ndarray
    inv: np.ndarray
    identity: int
    labels: tuple[str, ...]
    name: str = "G"
    exhaustive: bool = True
    warnings: tuple[str, ...] = field(default=())

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"

    def op(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def power(self, a: int, k: int) -> int:
        """``a**k`` for any integer ``k`` (negative powers use the inverse)."""
        if k < 0:
            a, k = self.inverse(a), -k
        result, base = self.identity, a
        while k:
            if k & 1:
                result = self.op(result, base)
            base = self.op(base, base)
            k >>= 1
        return result

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.op(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def same_table(self, other: "FiniteGroup") -> bool:
        return self.order == other.order and bool(np.array_equal(self.mul, other.mul))

    def elements(self) -> range:
        return range(self.order)


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidOrderError(f"group parameter must be a positive integer, got {n!r}")


def _build(mul, identity, labels, name) -> FiniteGroup:
    mul = np.asarray(mul, dtype=np.int64)
    inv = np.argmax(mul == identity, axis=1)
    return FiniteGroup(_frozen(mul), _frozen(inv), int(identity), tuple(labels), name)


def make_cyclic(n: int) -> FiniteGroup:
    _check_order(n)
    idx = np.arange(n)
    mul = (idx[:, None] + idx[None, :]) % n
    return _build(mul, 0, [str(k) for k in range(n)], f"Z{n}")


def make_dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order ``2n``.

    Index ``k`` is ``r^k`` and index ``n + k`` is ``s r^k``. Products follow
    from ``r s = s r^-1``.
    """
    _check_order(n)
    m = 2 * n
    flip = np.arange(m) // n
    rot = np.arange(m) % n
    # (s^a r^b)(s^c r^d) = s^(a+c) r^((-1)^c b + d)
    a, b = flip[:, None], rot[:, None]
    c, d = flip[None, :], rot[None, :]
    new_flip = (a + c) % 2
    new_rot = (np.where(c == 1, -b, b) + d) % n
    mul = new_flip * n + new_rot
    labels = [f"r^{k}" for k in range(n)] + [f"s r^{k}" for k in range(n)]
    return _build(mul, 0, labels, f"D{n}")


def make_symmetric(n: int) -> FiniteGroup:
    """Symmetric group on ``{0, .., n-1}`` with permutations in lexicographic order.

    The product is composition ``(st)(i) = s(t(i))``, so ``e_i -> e_{s(i)}``
    is a homomorphism into permutation matrices.
    """
    _check_order(n)
    if n > MAX_SYMMETRIC_DEGREE:
        raise TableSizeError(
            f"S_{n} has {math.factorial(n)} elements; tables are built only for n <= {MAX_SYMMETRIC_DEGREE}"
        )
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    m = perms.shape[0]
    # base-n codes sort in lexicographic order, so a code's rank is its index
    weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = perms @ weights
    mul = np.empty((m, m), dtype=np.int64)
    for a in range(m):
        mul[a] = np.searchsorted(codes, perms[a][perms] @ weights)
    labels = ["".join(map(str, p)) for p in perms]
    return _build(mul, 0, labels, f"S{n}")


def make_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Direct product; element ``(g, h)`` has index ``g * |H| + h``."""
    m, k = G.order, H.order
    g = np.arange(m * k) // k
    h = np.arange(m * k) % k
    mul = G.mul[g[:, None], g[None, :]] * k + H.mul[h[:, None], h[None, :]]
    identity = G.identity * k + H.identity
    labels = [f"({G.labels[i]},{H.labels[j]})" for i in range(m) for j in range(k)]
    return _build(mul, identity, labels, f"{G.name}x{H.name}")


def make_from_table(mul, labels: Sequence[str] | None = None, name: str = "G",
                    seed: int = 0) -> FiniteGroup:
    """Validate a Cayley table and derive the identity and inverses.

    Tables up to order 256 are checked on every triple. Larger tables are
    checked on a random sample of triples and carry a warning.
    """
    mul = np.asarray(mul)
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
        raise AxiomError(f"table must be a non-empty square array, got shape {mul.shape}")
    if not np.issubdtype(mul.dtype, np.integer):
        if not np.all(np.equal(np.mod(mul, 1), 0)):
            raise AxiomError("table entries must be integers")
    mul = mul.astype(np.int64)
    m = mul.shape[0]
    if mul.min() < 0 or mul.max() >= m:
        raise AxiomError(f"table entries must lie in [0, {m})")

    idx = np.arange(m)
    candidates = [e for e in range(m)
                  if np.array_equal(mul[e], idx) and np.array_equal(mul[:, e], idx)]
    if not candidates:
        raise AxiomError("no two-sided identity element", witness=())
    e = candidates[0]

    inv = np.full(m, -1, dtype=np.int64)
    for a in range(m):
        right = np.flatnonzero(mul[a] == e)
        both = [b for b in right if mul[b, a] == e]
        if not both:
            raise AxiomError(f"element {a} has no inverse", witness=(a,))
        inv[a] = both[0]

    warnings: tuple[str, ...] = ()
    exhaustive = m <= EXHAUSTIVE_LIMIT
    if exhaustive:
        bad = np.empty((0, 3), dtype=np.int64)
        for a in range(m):
            # (ab)c versus a(bc), all b, c at once
            hits = np.argwhere(mul[mul[a]] != mul[a][mul])
            if len(hits):
                bad = np.array([[a, hits[0][0], hits[0][1]]])
                break
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, m, size=(3, _SAMPLED_TRIPLES))
        mask = mul[mul[a, b], c] != mul[a, mul[b, c]]
        bad = np.stack([a[mask], b[mask], c[mask]], axis=1)
        warnings = (f"order {m} > {EXHAUSTIVE_LIMIT}: associativity checked on "
                    f"{_SAMPLED_TRIPLES} sampled triples only",)
    if len(bad):
        w = tuple(int(x) for x in bad[0])
        raise AxiomError(f"associativity fails at triple {w}", witness=w)

    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(m))
    if len(labels) != m:
        raise AxiomError(f"expected {m} labels, got {len(labels)}")
    return FiniteGroup(_frozen(mul), _frozen(inv), int(e), labels, name, exhaustive, warnings)


def closure(G: FiniteGroup, gens: Iterable[int]) -> tuple[int, ...]:
    """Smallest subgroup containing ``gens``, as a sorted tuple of indices."""
    gens = sorted({int(g) for g in gens})
    seen = {G.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.op(x, g)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return tuple(sorted(seen))


def commutator(G: FiniteGroup, s: int, t: int) -> int:
    """``s t s^-1 t^-1``."""
    return G.op(G.op(G.op(s, t), G.inverse(s)), G.inverse(t))


def commutator_subgroup(G: FiniteGroup) -> tuple[int, ...]:
    gens = {commutator(G, s, t) for s in G.elements() for t in G.elements()}
    return closure(G, gens)


def power_word(G: FiniteGroup, s: int, t: int, n: int) -> int:
    """``s^-(n-1) (ts)^(n-1) t^-(n-1)``."""
    k = n - 1
    return G.op(G.op(G.power(s, -k), G.power(G.op(t, s), k)), G.power(t, -k))


def power_subgroup(G: FiniteGroup, n: int) -> tuple[int, ...]:
    """Subgroup generated by the words ``s^-(n-1) (ts)^(n-1) t^-(n-1)``.

    A representation ``U`` has ``s -> U(s)^n`` multiplicative exactly when
    ``U`` is trivial on this subgroup.
    """
    _check_order(n)
    gens = {power_word(G, s, t, n) for s in G.elements() for t in G.elements()}
    return closure(G, gens)


def subgroup(G: FiniteGroup, elements: Iterable[int], name: str | None = None) -> FiniteGroup:
    """Restrict ``G`` to a subgroup; indices are renumbered in sorted order."""
    elems = sorted({int(x) for x in elements})
    pos = {x: i for i, x in enumerate(elems)}
    try:
        mul = [[pos[G.op(a, b)] for b in elems] for a in elems]
    except KeyError as exc:
        raise AxiomError(f"element set is not closed under multiplication: {exc}") from None
    return make_from_table(mul, [G.labels[x] for x in elems], name or f"sub({G.name})")


@dataclass(frozen=True, eq=False)
class GroupMorphism:
    source: FiniteGroup
    target: FiniteGroup
    map: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.map, dtype=np.int64)
        if table.shape != (self.source.order,):
            raise MorphismError(
                f"map must have one entry per source element ({self.source.order}), got shape {table.shape}")
        if table.min(initial=0) < 0 or table.max(initial=0) >= self.target.order:
            raise MorphismError("map entries out of range for the target group")
        object.__setattr__(self, "map", _frozen(table))

    def __call__(self, g: int) -> int:
        return int(self.map[g])


@dataclass(frozen=True)
class MorphismVerdict:
    is_homomorphism: bool
    is_injective: bool
    is_surjective: bool
    witness: tuple[int, int] | None = None

    @property
    def is_isomorphism(self) -> bool:
        return self.is_homomorphism and self.is_injective and self.is_surjective


def validate_morphism(phi: GroupMorphism) -> MorphismVerdict:
    """Check ``phi(st) = phi(s) phi(t)`` on every pair and report bijectivity."""
    S, T, f = phi.source, phi.target, phi.map
    lhs = f[S.mul]
    rhs = T.mul[f[:, None], f[None, :]]
    bad = np.argwhere(lhs != rhs)
    witness = (int(bad[0][0]), int(bad[0][1])) if len(bad) else None
    image = np.unique(f)
    return MorphismVerdict(
        is_homomorphism=witness is None,
        is_injective=len(image) == S.order,
        is_surjective=len(image) == T.order,
        witness=witness,
    )


def check_morphism(phi: GroupMorphism) -> MorphismVerdict:
    """Like :func:`validate_morphism` but raise on a homomorphism violation."""
    verdict = validate_morphism(phi)
    if not verdict.is_homomorphism:
        s, t = verdict.witness
        raise MorphismError(f"phi(st) != phi(s)phi(t) at (s, t) = ({s}, {t})", witness=verdict.witness)
    return verdict


def apply_morphism(phi: GroupMorphism, elements: Iterable[int]) -> tuple[int, ...]:
    return tuple(phi(g) for g in elements)


def identity_morphism(G: FiniteGroup) -> GroupMorphism:
    return GroupMorphism(G, G, np.arange(G.order))


def _generators(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    span = {G.identity}
    for g in sorted(G.elements(), key=lambda x: -G.element_order(x)):
        if g not in span:
            gens.append(g)
            span = set(closure(G, gens))
        if len(span) == G.order:
            break
    return gens


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> GroupMorphism | None:
    """Brute-force isomorphism search for small groups.

    Generators of ``G`` are assigned images of matching element order in
    ``H``; each assignment is extended along words and checked.
    """
    if G.order != H.order:
        return None
    if sorted(G.element_order(g) for g in G.elements()) != sorted(H.element_order(h) for h in H.elements()):
        return None
    gens = _generators(G)
    # BFS words: element -> (parent element, generator) so images extend multiplicatively
    parent: dict[int, tuple[int, int]] = {}
    order = [G.identity]
    seen = {G.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.op(x, g)
            if y not in seen:
                seen.add(y)
                parent[y] = (x, g)
                order.append(y)
                queue.append(y)
    options = [[h for h in H.elements() if H.element_order(h) == G.element_order(g)] for g in gens]
    for images in itertools.product(*options):
        assign = dict(zip(gens, images))
        table = np.empty(G.order, dtype=np.int64)
        table[G.identity] = H.identity
        for y in order[1:]:
            x, g = parent[y]
            table[y] = H.op(int(table[x]), assign[g])
        if len(np.unique(table)) != G.order:
            continue
        phi = GroupMorphism(G, H, table)
        if validate_morphism(phi).is_homomorphism:
            return phi
    return None
