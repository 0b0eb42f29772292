"""Unitary Weingarten functions and Haar moment integrals.

``Wg(n, .)`` is the convolution inverse on S_p of the class function
``sigma -> n ** #cycles(sigma)``. Because both are central, the inversion
is done on the space of class functions: one unknown per cycle type.
For ``n < p`` the convolution operator is singular and the Moore-Penrose
pseudo-inverse is used; results in that range are convention dependent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterator, Sequence

import numpy as np
import sympy

from .permkit import MAX_ENUMERATION_ORDER, CapExceeded, Permutation, catalan

PINV_RTOL = 1e-12


class EmptyLevelClass(ValueError):
    """The level sets of l and l' have different sizes, so S_p^{l->l'} is empty."""


class NotInLevelClass(ValueError):
    """A permutation does not map the level sets of l onto those of l'."""


def integer_partitions(p: int) -> list[tuple[int, ...]]:
    """Partitions of p as non-increasing tuples, identity class (1,...,1) first."""
    def parts(m: int, largest: int) -> Iterator[tuple[int, ...]]:
        if m == 0:
            yield ()
            return
        for first in range(min(m, largest), 0, -1):
            for rest in parts(m - first, first):
                yield (first,) + rest
    return sorted(parts(p, p), key=lambda lam: (len(lam), lam), reverse=True)


def _representative(cycle_type: tuple[int, ...]) -> np.ndarray:
    images = []
    start = 0
    for length in cycle_type:
        images.extend(range(start + 1, start + length))
        images.append(start)
        start += length
    return np.array(images, dtype=np.int64)


def _cycle_counts(perms: np.ndarray) -> np.ndarray:
    """Number of cycles of each row of a (N, p) array of permutations."""
    N, p = perms.shape
    label = np.broadcast_to(np.arange(p), (N, p)).copy()
    rows = np.arange(N)[:, None]
    for _ in range(max(p - 1, 0)):
        label = np.minimum(label, label[rows, perms])
    return (label == np.arange(p)).sum(axis=1)


@dataclass(frozen=True)
class _ClassData:
    p: int
    classes: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]
    # counts[a, b, c] = #{tau in class b : #cycles(rep_a tau^-1) = c}
    counts: np.ndarray = field(repr=False)


@lru_cache(maxsize=None)
def _class_data(p: int) -> _ClassData:
    if p > MAX_ENUMERATION_ORDER:
        raise CapExceeded(f"Weingarten tables are capped at p <= {MAX_ENUMERATION_ORDER}")
    classes = tuple(integer_partitions(p))
    index = {lam: i for i, lam in enumerate(classes)}
    perms = np.array(list(itertools.permutations(range(p))), dtype=np.int64).reshape(-1, p)
    inverses = np.argsort(perms, axis=1)
    class_of = np.array([index[Permutation(tuple(row)).cycle_type()] for row in perms])
    sizes = tuple(int(np.sum(class_of == b)) for b in range(len(classes)))
    counts = np.zeros((len(classes), len(classes), p + 1), dtype=np.int64)
    for a, lam in enumerate(classes):
        rep = _representative(lam)
        ncyc = _cycle_counts(rep[inverses])
        np.add.at(counts, (a, class_of, ncyc), 1)
    return _ClassData(p, classes, sizes, counts)


def _gram_integer_matrix(n: int, data: _ClassData) -> list[list[int]]:
    powers = [n ** c for c in range(data.p + 1)]
    return [[int(sum(int(x) * q for x, q in zip(row, powers))) for row in block]
            for block in data.counts]


@dataclass(frozen=True)
class WeingartenTable:
    """Values of Wg(n, .) on S_p, one per cycle type."""

    n: int
    p: int
    values: dict[tuple[int, ...], Fraction | float]
    exact: bool

    def __call__(self, sigma: Permutation) -> Fraction | float:
        if sigma.size != self.p:
            raise ValueError(f"permutation of size {sigma.size}, table is for S_{self.p}")
        return self.values[sigma.cycle_type()]

    @property
    def convention_dependent(self) -> bool:
        return self.n < self.p

    def convolution_residual(self) -> float:
        """Largest deviation of sum_tau n^#(sigma tau^-1) Wg(tau) from [sigma = id]."""
        data = _class_data(self.p)
        gram = _gram_integer_matrix(self.n, data)
        worst = Fraction(0) if self.exact else 0.0
        for a, lam in enumerate(data.classes):
            total = sum(gram[a][b] * self.values[mu] for b, mu in enumerate(data.classes))
            target = 1 if a == 0 else 0
            worst = max(worst, abs(total - target))
        return float(worst)

    def pseudo_inverse_residual(self) -> float:
        """Largest deviation of G * Wg * G from G, with G(sigma) = n^#sigma.

        This is the identity that survives when n < p and the convolution
        system is singular; for n >= p it follows from the convolution identity.
        """
        data = _class_data(self.p)
        gram = _gram_integer_matrix(self.n, data)
        h = [sum(gram[a][b] * self.values[mu] for b, mu in enumerate(data.classes))
             for a in range(len(data.classes))]
        worst = Fraction(0) if self.exact else 0.0
        for a, lam in enumerate(data.classes):
            total = sum(gram[a][b] * h[b] for b in range(len(data.classes)))
            worst = max(worst, abs(total - self.n ** len(lam)))
        return float(worst)


def _exact_solve(gram: list[list[int]]) -> list[Fraction]:
    M = sympy.Matrix(gram)
    e = sympy.zeros(M.rows, 1)
    e[0] = 1
    if M.det() != 0:
        x = M.LUsolve(e)
    else:
        # Group inverse M# = (M + P0)^-1 - P0, P0 the spectral projector on ker M.
        # M is self-adjoint for the class-size inner product, so M# is the pseudo-inverse.
        kernel = M.nullspace()
        image = M.columnspace()
        S = sympy.Matrix.hstack(*kernel, *image)
        D = sympy.diag(*([1] * len(kernel) + [0] * len(image)))
        P0 = S * D * S.inv()
        x = ((M + P0).inv() - P0) * e
    return [Fraction(int(sympy.numer(v)), int(sympy.denom(v))) for v in x]


def _float_solve(gram: list[list[int]], sizes: Sequence[int]) -> list[float]:
    M = np.array(gram, dtype=float)
    root = np.sqrt(np.array(sizes, dtype=float))
    S = root[:, None] * M / root[None, :]
    S = 0.5 * (S + S.T)
    S_pinv = np.linalg.pinv(S, rtol=PINV_RTOL, hermitian=True)
    M_pinv = S_pinv * root[None, :] / root[:, None]
    return list(M_pinv[:, 0])


@lru_cache(maxsize=256)
def weingarten_table(n: int, p: int, exact: bool = True) -> WeingartenTable:
    """Wg(n, .) on S_p; exact rationals by default, double precision otherwise."""
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    if p < 0:
        raise ValueError("p must be >= 0")
    if p == 0:
        return WeingartenTable(n, 0, {(): Fraction(1) if exact else 1.0}, exact)
    data = _class_data(p)
    gram = _gram_integer_matrix(n, data)
    values = _exact_solve(gram) if exact else _float_solve(gram, data.sizes)
    return WeingartenTable(n, p, dict(zip(data.classes, values)), exact)


def mobius(sigma: Permutation) -> int:
    """Product over cycles of (-1)^(len-1) * Catalan(len-1)."""
    out = 1
    for c in sigma.cycles():
        out *= (-1) ** (len(c) - 1) * catalan(len(c) - 1)
    return out


def wg_exact(n: int, sigma: Permutation, exact: bool = True) -> Fraction | float:
    return weingarten_table(n, sigma.size, exact)(sigma)


def wg_asymptotic(n: int, sigma: Permutation) -> Fraction:
    """Leading term n^-(p + |sigma|) Mob(sigma)."""
    return Fraction(mobius(sigma), n ** (sigma.size + sigma.length()))


def wg_full_cycle(n: int, d: int) -> Fraction:
    """Closed form of Wg(n, (1 ... d)), valid for n >= d."""
    if n < d:
        raise ValueError("closed form requires n >= d")
    denom = 1
    for j in range(-d + 1, d):
        denom *= n - j
    return Fraction((-1) ** (d - 1) * catalan(d - 1), denom)


@dataclass(frozen=True)
class LevelLabels:
    """Block labels for the plain (l) and conjugated (l') factors of a monomial."""

    l: tuple[Hashable, ...]
    lp: tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, "l", tuple(self.l))
        object.__setattr__(self, "lp", tuple(self.lp))

    @property
    def p(self) -> int:
        return len(self.l)

    def levels(self) -> list[Hashable]:
        return sorted(set(self.l) | set(self.lp), key=repr)

    @property
    def empty_class(self) -> bool:
        if len(self.l) != len(self.lp):
            return True
        return any(self.l.count(s) != self.lp.count(s) for s in self.levels())

    def contains(self, sigma: Permutation) -> bool:
        return sigma.size == self.p and all(
            self.l[t] == self.lp[sigma(t)] for t in range(self.p))


def wg_modified(n: int, alpha: Permutation, beta: Permutation, labels: LevelLabels,
                exact: bool = True) -> Fraction | float:
    """Product over levels s of Wg(n, alpha_s^-1 beta_s)."""
    if labels.empty_class:
        raise EmptyLevelClass(f"level sets of {labels.l} and {labels.lp} differ in size")
    for name, perm in (("alpha", alpha), ("beta", beta)):
        if not labels.contains(perm):
            raise NotInLevelClass(f"{name}={perm} does not map levels of l onto l'")
    rel = alpha.inverse() * beta
    out = Fraction(1) if exact else 1.0
    for s in labels.levels():
        block = [t for t in range(labels.p) if labels.l[t] == s]
        if block:
            out *= wg_exact(n, rel.restrict(block), exact)
    return out


def _matchings(p: int, keys: Sequence, conj_keys: Sequence) -> Iterator[Permutation]:
    """Permutations s with keys[t] == conj_keys[s(t)] for all t."""
    by_key: dict = {}
    for u, key in enumerate(conj_keys):
        by_key.setdefault(key, []).append(u)
    groups: dict = {}
    for t, key in enumerate(keys):
        groups.setdefault(key, []).append(t)
    if any(len(groups[key]) != len(by_key.get(key, [])) for key in groups):
        return
    order = list(groups)
    choices = [itertools.permutations(by_key[key]) for key in order]
    for combo in itertools.product(*choices):
        images = [0] * p
        for key, targets in zip(order, combo):
            for t, u in zip(groups[key], targets):
                images[t] = u
        yield Permutation(tuple(images))


def monomial_integral(n: int, i: Sequence[int], j: Sequence[int], ip: Sequence[int],
                      jp: Sequence[int], l: Sequence[Hashable] | None = None,
                      lp: Sequence[Hashable] | None = None,
                      exact: bool = True) -> Fraction | float:
    """E[prod_t U^(l_t)_{i_t j_t} prod_t conj(U^(l'_t)_{i'_t j'_t})] over independent Haar U^(s).

    Omitting the level labels integrates over a single Haar unitary.
    """
    p, pc = len(i), len(ip)
    if len(j) != p or len(jp) != pc:
        raise ValueError("row and column tuples must have matching lengths")
    l = tuple(l) if l is not None else (0,) * p
    lp = tuple(lp) if lp is not None else (0,) * pc
    if len(l) != p or len(lp) != pc:
        raise ValueError("level tuples must match the factor counts")
    zero = Fraction(0) if exact else 0.0
    labels = LevelLabels(l, lp)
    if p != pc or labels.empty_class:
        return zero
    if p > MAX_ENUMERATION_ORDER:
        raise CapExceeded(f"monomial degree {p} exceeds cap {MAX_ENUMERATION_ORDER}")
    alphas = list(_matchings(p, list(zip(l, i)), list(zip(lp, ip))))
    if not alphas:
        return zero
    betas = list(_matchings(p, list(zip(l, j)), list(zip(lp, jp))))
    total = zero
    for alpha in alphas:
        for beta in betas:
            total += wg_modified(n, alpha, beta, labels, exact)
    return total
