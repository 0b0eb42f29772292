import itertools

import pytest
from hypothesis import given, settings, strategies as st

from rucalc.permkit import (CapExceeded, Permutation, SetPartition, all_permutations, bottom,
                            canonical_wirings, catalan, cycle_structure, distance, geodesic_pairs,
                            geodesic_test, noncrossing_partitions, partition_join, top)

ID3 = Permutation.identity(3)
T12 = Permutation.from_cycles(3, (1, 2))
C123 = Permutation.from_cycles(3, (1, 2, 3))


def test_cycle_structure_examples():
    part, count, length = cycle_structure(ID3)
    assert part == SetPartition.singletons(3) and count == 3 and length == 0
    part, count, length = cycle_structure(T12)
    assert part.blocks == ((0, 1), (2,)) and length == 1
    part, count, length = cycle_structure(C123)
    assert part.blocks == ((0, 1, 2),) and count == 1 and length == 2


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))
    with pytest.raises(ValueError):
        Permutation.from_cycles(3, (1, 4))


def test_composition_order():
    a = Permutation.from_cycles(3, (1, 2))
    b = Permutation.from_cycles(3, (2, 3))
    # (a * b)(x) = a(b(x))
    assert all((a * b)(x) == a(b(x)) for x in range(3))
    assert (a * a.inverse()).is_identity()


def test_geodesic_test_examples():
    assert geodesic_test(ID3, T12, T12)
    assert geodesic_test(ID3, T12, C123)
    assert not geodesic_test(ID3, C123, T12)
    with pytest.raises(ValueError):
        geodesic_test(ID3, T12, Permutation.identity(4))


@pytest.mark.parametrize("p", range(1, 6))
def test_cayley_metric_axioms(p):
    perms = list(all_permutations(p))
    for s, t in itertools.product(perms, repeat=2):
        d = distance(s, t)
        assert d == distance(t, s)
        assert (d == 0) == (s == t)
        assert s.length() + s.cycle_count() == p
    assert max(distance(perms[0], t) for t in perms) == p - 1
    # translation invariance
    for s, t, u in itertools.islice(itertools.product(perms, repeat=3), 2000):
        assert distance(u * s, u * t) == distance(s, t) == distance(s * u, t * u)


@pytest.mark.parametrize("p", range(1, 5))
def test_parity_and_triangle(p):
    perms = list(all_permutations(p))
    for a, b, c in itertools.product(perms, repeat=3):
        assert (distance(a, b) + distance(a, c) - distance(b, c)) % 2 == 0
        assert distance(b, c) <= distance(b, a) + distance(a, c)


@pytest.mark.parametrize("p", range(1, 7))
def test_geodesics_to_full_cycle_are_catalan(p):
    full = Permutation.from_cycles(p, tuple(range(1, p + 1)))
    ident = Permutation.identity(p)
    assert sum(geodesic_test(ident, s, full) for s in all_permutations(p)) == catalan(p)


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        next(all_permutations(9))
    with pytest.raises(CapExceeded):
        geodesic_pairs(13)


def test_partition_join_examples():
    P = SetPartition(3, ((0, 1), (2,)))
    assert partition_join(SetPartition.singletons(3), P) == P
    Q = SetPartition(4, ((0, 1), (2, 3)))
    R = SetPartition(4, ((1, 2), (0,), (3,)))
    assert partition_join(Q, R).blocks == ((0, 1, 2, 3),)
    assert partition_join(Q, Q) == Q
    with pytest.raises(ValueError):
        partition_join(P, Q)


@st.composite
def partitions(draw, size):
    labels = draw(st.lists(st.integers(0, size - 1), min_size=size, max_size=size))
    blocks = {}
    for x, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(x)
    return SetPartition(size, tuple(tuple(b) for b in blocks.values()))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.tuples(partitions(n), partitions(n), partitions(n))))
def test_join_lattice_laws(triple):
    P, Q, R = triple
    assert partition_join(P, Q) == partition_join(Q, P)
    assert partition_join(partition_join(P, Q), R) == partition_join(P, partition_join(Q, R))
    assert partition_join(P, P) == P
    # every block of P sits inside a block of the join
    J = partition_join(P, Q)
    for b in P.blocks:
        assert any(set(b) <= set(c) for c in J.blocks)


def _all_set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _all_set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _crosses(blocks):
    for A, B in itertools.permutations(blocks, 2):
        for a1, a2 in itertools.combinations(sorted(A), 2):
            if any(a1 < b1 < a2 < b2 for b1 in B for b2 in B):
                return True
    return False


@pytest.mark.parametrize("p, count", [(1, 1), (2, 2), (3, 5), (4, 14), (5, 42)])
def test_noncrossing_counts_against_brute_force(p, count):
    got = noncrossing_partitions(p)
    assert len(got) == count == catalan(p)
    brute = {SetPartition(p, tuple(tuple(b) for b in part))
             for part in _all_set_partitions(list(range(p))) if not _crosses(part)}
    assert set(got) == brute
    assert all(P.is_noncrossing() for P in got)


def test_canonical_wirings():
    gamma, delta = canonical_wirings(2)
    assert delta(top(1, 2)) == bottom(1, 2)
    assert gamma(top(1, 2)) == top(2, 2)
    assert gamma(bottom(1, 2)) == bottom(2, 2)
    for p in range(1, 7):
        g, d = canonical_wirings(p)
        assert (d * d).is_identity()
        assert g.cycle_count() == 2


@pytest.mark.parametrize("p", range(1, 6))
def test_geodesic_pairs(p):
    pairs = geodesic_pairs(p)
    assert len(pairs) == 3 ** p
    _, delta = canonical_wirings(p)
    ident = Permutation.identity(2 * p)
    for pair in pairs:
        assert pair.A <= pair.B
        assert geodesic_test(ident, pair.alpha, pair.beta)
        assert geodesic_test(pair.alpha, pair.beta, delta)
    empty = [q for q in pairs if not q.B][0]
    assert empty.alpha.is_identity() and empty.beta.is_identity()
