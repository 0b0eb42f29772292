"""Symmetric-group and set-partition kernel.

Permutations are stored 0-based as a tuple of images. Composition follows
the functional convention ``(s * t)(x) = s(t(x))``.

For moment diagrams on ``2p`` labelled points the ground set is ordered
``1^T, ..., p^T, 1^B, ..., p^B`` and mapped to indices ``0 .. 2p-1``; use
:func:`top` and :func:`bottom` to convert labels to indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Sequence

MAX_ENUMERATION_ORDER = 8
MAX_GEODESIC_ORDER = 12


class CapExceeded(ValueError):
    """Raised when an enumeration would exceed its documented size cap."""


def catalan(m: int) -> int:
    return comb(2 * m, m) // (m + 1)


def top(i: int, p: int) -> int:
    """Index of label ``i^T`` (1-based ``i``) in the 2p-point ground set."""
    if not 1 <= i <= p:
        raise ValueError(f"label {i} outside 1..{p}")
    return i - 1


def bottom(i: int, p: int) -> int:
    """Index of label ``i^B`` (1-based ``i``) in the 2p-point ground set."""
    if not 1 <= i <= p:
        raise ValueError(f"label {i} outside 1..{p}")
    return p + i - 1


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a permutation of range({len(images)})")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(tuple(range(size)))

    @classmethod
    def from_cycles(cls, size: int, *cycles: Sequence[int]) -> "Permutation":
        """Build from 1-based cycles, e.g. ``from_cycles(3, (1, 2))``."""
        images = list(range(size))
        seen: set[int] = set()
        for cycle in cycles:
            for a in cycle:
                if not 1 <= a <= size or a in seen:
                    raise ValueError(f"bad cycle entry {a} for size {size}")
                seen.add(a)
            for a, b in zip(cycle, tuple(cycle[1:]) + tuple(cycle[:1])):
                images[a - 1] = b - 1
        return cls(tuple(images))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __len__(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        _check_sizes(self, other)
        return Permutation(tuple(self.images[x] for x in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles as 0-based tuples, each starting at its smallest element."""
        seen = [False] * self.size
        out = []
        for start in range(self.size):
            if seen[start]:
                continue
            cycle = []
            x = start
            while not seen[x]:
                seen[x] = True
                cycle.append(x)
                x = self.images[x]
            out.append(tuple(cycle))
        return out

    def cycle_count(self) -> int:
        return len(self.cycles())

    def length(self) -> int:
        """Cayley length: minimal number of transpositions multiplying to self."""
        return self.size - self.cycle_count()

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.images))

    def restrict(self, subset: Iterable[int]) -> "Permutation":
        """Restriction to an invariant subset, relabelled in increasing order."""
        points = sorted(subset)
        index = {x: i for i, x in enumerate(points)}
        try:
            return Permutation(tuple(index[self.images[x]] for x in points))
        except KeyError:
            raise ValueError("subset is not invariant under the permutation") from None

    def __repr__(self) -> str:
        nontrivial = [c for c in self.cycles() if len(c) > 1]
        if not nontrivial:
            return f"Permutation(id, size={self.size})"
        body = "".join("(" + " ".join(str(a + 1) for a in c) + ")" for c in nontrivial)
        return f"Permutation({body}, size={self.size})"


def _check_sizes(*perms: Permutation) -> None:
    sizes = {s.size for s in perms}
    if len(sizes) != 1:
        raise ValueError(f"permutation sizes differ: {sorted(sizes)}")


@dataclass(frozen=True)
class SetPartition:
    """Partition of ``range(ground_size)`` into blocks, kept in canonical order."""

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        flat = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")
        if sorted(flat) != list(range(self.ground_size)):
            raise ValueError("blocks must be disjoint and cover the ground set")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def singletons(cls, ground_size: int) -> "SetPartition":
        return cls(ground_size, tuple((x,) for x in range(ground_size)))

    def __len__(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def is_noncrossing(self) -> bool:
        """No a < b < c < d with a, c in one block and b, d in another."""
        owner = {}
        for i, b in enumerate(self.blocks):
            for x in b:
                owner[x] = i
        n = self.ground_size
        for a, b, c, d in itertools.combinations(range(n), 4):
            if owner[a] == owner[c] and owner[b] == owner[d] and owner[a] != owner[b]:
                return False
        return True


def cycle_structure(sigma: Permutation) -> tuple[SetPartition, int, int]:
    """Orbit partition, number of cycles and Cayley length of ``sigma``."""
    cycles = sigma.cycles()
    return SetPartition(sigma.size, tuple(cycles)), len(cycles), sigma.size - len(cycles)


def distance(sigma: Permutation, tau: Permutation) -> int:
    """Cayley distance ``|sigma^-1 tau|``."""
    _check_sizes(sigma, tau)
    return (sigma.inverse() * tau).length()


def geodesic_test(s1: Permutation, s2: Permutation, s3: Permutation) -> bool:
    """True iff ``s2`` lies on a geodesic from ``s1`` to ``s3``."""
    _check_sizes(s1, s2, s3)
    return distance(s1, s2) + distance(s2, s3) == distance(s1, s3)


def partition_join(P: SetPartition, Q: SetPartition) -> SetPartition:
    """Finest partition coarser than both ``P`` and ``Q``."""
    if P.ground_size != Q.ground_size:
        raise ValueError("ground sets differ")
    parent = list(range(P.ground_size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for block in itertools.chain(P.blocks, Q.blocks):
        root = find(block[0])
        for x in block[1:]:
            r = find(x)
            if r != root:
                parent[r] = root
    groups: dict[int, list[int]] = {}
    for x in range(P.ground_size):
        groups.setdefault(find(x), []).append(x)
    return SetPartition(P.ground_size, tuple(tuple(g) for g in groups.values()))


def _nc_blocks(points: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    # The block holding points[0] splits the rest into independent gaps.
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for r in range(len(rest) + 1):
        for chosen in itertools.combinations(range(len(rest)), r):
            block = (first,) + tuple(rest[i] for i in chosen)
            cuts = (-1,) + chosen + (len(rest),)
            gaps = [rest[a + 1:b] for a, b in zip(cuts, cuts[1:])]
            for parts in itertools.product(*(list(_nc_blocks(g)) for g in gaps)):
                yield [block] + [b for part in parts for b in part]


def noncrossing_partitions(p: int) -> list[SetPartition]:
    """All non-crossing partitions of ``range(p)`` (Catalan(p) of them)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return [SetPartition(p, tuple(blocks)) for blocks in _nc_blocks(tuple(range(p)))]


def all_permutations(p: int) -> Iterator[Permutation]:
    if p > MAX_ENUMERATION_ORDER:
        raise CapExceeded(f"enumerating S_{p} exceeds cap p <= {MAX_ENUMERATION_ORDER}")
    for images in itertools.permutations(range(p)):
        yield Permutation(images)


def canonical_wirings(p: int) -> tuple[Permutation, Permutation]:
    """Trace wiring ``gamma`` and transpose wiring ``delta`` on 2p points.

    gamma(i^T) = (i-1)^T and gamma(i^B) = (i+1)^B cyclically;
    delta swaps i^T and i^B.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    gamma = [0] * (2 * p)
    delta = [0] * (2 * p)
    for i in range(1, p + 1):
        gamma[top(i, p)] = top((i - 2) % p + 1, p)
        gamma[bottom(i, p)] = bottom(i % p + 1, p)
        delta[top(i, p)] = bottom(i, p)
        delta[bottom(i, p)] = top(i, p)
    return Permutation(tuple(gamma)), Permutation(tuple(delta))


def transpositions_product(p: int, subset: Iterable[int]) -> Permutation:
    """Product of the disjoint transpositions (i^T, i^B) for 1-based i in subset."""
    images = list(range(2 * p))
    for i in subset:
        a, b = top(i, p), bottom(i, p)
        images[a], images[b] = b, a
    return Permutation(tuple(images))


@dataclass(frozen=True)
class GeodesicPair:
    p: int
    A: frozenset[int]
    B: frozenset[int]
    alpha: Permutation
    beta: Permutation

    def __post_init__(self):
        if not self.A <= self.B:
            raise ValueError("A must be a subset of B")


def geodesic_pairs(p: int) -> list[GeodesicPair]:
    """All 3^p pairs A <= B <= {1..p} with alpha, beta the matching transposition products.

    These index the geodesics id -> alpha -> beta -> delta.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > MAX_GEODESIC_ORDER:
        raise CapExceeded(f"geodesic enumeration exceeds cap p <= {MAX_GEODESIC_ORDER}")
    out = []
    # state 0: i not in B; 1: i in B \ A; 2: i in A
    for states in itertools.product((0, 1, 2), repeat=p):
        A = frozenset(i + 1 for i, s in enumerate(states) if s == 2)
        B = frozenset(i + 1 for i, s in enumerate(states) if s >= 1)
        out.append(GeodesicPair(p, A, B, transpositions_product(p, A), transpositions_product(p, B)))
    return out
