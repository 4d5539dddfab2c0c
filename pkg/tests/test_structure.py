import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from addcomb import (AffineSubspace, GroupSet, GroupSpec, largest_affine_subspace, longest_ap, longest_ap_brute,
                     sumset, three_fold_sumset, xv_witness)
from addcomb.increment import Subspace


def subspace_oracle(S):
    """Largest d such that some coset of some d-dimensional subspace lies in S, by listing all subspaces."""
    g = S.group
    q, n = g.field_size, g.rank
    if S.size == 0:
        return -1
    best = 0
    vecs = [np.array(g.coords(i)) for i in range(g.order)]
    seen = set()
    for r in range(0, n + 1):
        # subspaces of codimension r are kernels of r-tuples of characters
        for chars in itertools.combinations(vecs[1:], r):
            V = Subspace(g, [tuple(c) for c in chars])
            if V.key in seen:
                continue
            seen.add(V.key)
            lab = V.labels()
            inside = np.bincount(lab[S.members], minlength=q ** V.codim)
            if (inside == V.size).any():
                best = max(best, V.dimension)
    return best


def test_three_fold_sumset():
    g = GroupSpec.cyclic(11)
    A = GroupSet.from_elements(g, [0, 1])
    assert three_fold_sumset(A, A, A) == GroupSet.from_elements(g, [0, 1, 2, 3])
    B = GroupSet.from_elements(g, [5])
    assert three_fold_sumset(A, B, B) == GroupSet.from_elements(g, [10, 0])


def test_ap_examples():
    g = GroupSpec.cyclic(31)
    assert longest_ap(GroupSet.empty(g)).size == 0
    assert longest_ap(GroupSet.full(g)).size == 31
    w = longest_ap(GroupSet.from_elements(g, [1, 2, 3, 5, 7, 9]))
    assert w.size == 5 and w.verified
    assert (w.ap.start, w.ap.step) == (1, 2)
    assert longest_ap(GroupSet.from_elements(g, [4])).size == 1


def test_ap_wraps_around():
    g = GroupSpec.cyclic(13)
    w = longest_ap(GroupSet.from_elements(g, [11, 12, 0, 1]))
    assert w.size == 4 and w.ap.step == 1 and w.ap.start == 11


def test_ap_needs_prime():
    with pytest.raises(ValueError):
        longest_ap(GroupSet.full(GroupSpec.cyclic(12)))


def test_ap_oracle_random(rng):
    primes = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101]
    for i in range(100):
        N = primes[i % len(primes)]
        S = GroupSet(GroupSpec.cyclic(N), rng.random(N) < rng.uniform(0.2, 0.9))
        w = longest_ap(S)
        assert w.verified and w.size == longest_ap_brute(S)


def test_subspace_examples():
    g = GroupSpec.vector_space(3, 2)
    assert largest_affine_subspace(GroupSet.full(g)).size == 2
    assert largest_affine_subspace(GroupSet.from_elements(g, [4])).size == 0
    assert largest_affine_subspace(GroupSet.empty(g)).size == -1
    h = GroupSpec.vector_space(2, 2)
    S = GroupSet.from_elements(h, [h.element(c) for c in [(0, 0), (0, 1), (1, 0)]])
    w = largest_affine_subspace(S)
    assert w.size == 1 and w.verified and w.subspace.members().issubset(S)


def test_affine_subspace_members():
    g = GroupSpec.vector_space(3, 3)
    A = AffineSubspace(g, g.element((1, 1, 1)), ((1, 0, 0), (0, 1, 0)))
    M = A.members()
    assert M.size == 9 and all(g.coords(int(x))[2] == 1 for x in M.elements())


@pytest.mark.parametrize("q,n", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)])
def test_subspace_oracle(q, n, rng):
    g = GroupSpec.vector_space(q, n)
    for _ in range(25 if g.order <= 9 else 12):
        S = GroupSet(g, rng.random(g.order) < rng.uniform(0.3, 0.95))
        w = largest_affine_subspace(S)
        assert w.complete and w.verified
        assert w.size == subspace_oracle(S)


def test_subspace_budget_incomplete():
    g = GroupSpec.vector_space(3, 4)
    S = GroupSet(g, np.random.default_rng(1).random(g.order) < 0.9)
    w = largest_affine_subspace(S, budget=3)
    assert not w.complete and w.verified


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(37,), (3, 3), (2, 2, 2), (5, 5)]))
def test_monotone_in_set(seed, shape):
    g = GroupSpec(shape)
    rng = np.random.default_rng(seed)
    big = GroupSet(g, rng.random(g.order) < 0.7)
    small = GroupSet(g, big.members & (rng.random(g.order) < 0.7))
    f = longest_ap if g.rank == 1 else largest_affine_subspace
    assert f(small).size <= f(big).size


def test_xv_trivial_V():
    g = GroupSpec.cyclic(31)
    A = GroupSet.from_elements(g, [0, 4, 9])
    B = GroupSet.from_elements(g, [1, 2, 20])
    C = GroupSet.from_elements(g, [3, 7])
    w = xv_witness(A, B, C, GroupSet.from_elements(g, [0]), 0.5)
    assert w.X.size == B.size and w.verified and w.info["certified"]
    assert w.X == B.translate(w.info["t"])


def test_xv_eta_one_keeps_translate():
    g = GroupSpec.vector_space(5, 2)
    rng = np.random.default_rng(5)
    A, B, C = (GroupSet(g, rng.random(25) < 0.3) | GroupSet.from_elements(g, [0]) for _ in range(3))
    V = GroupSet.full(g)
    w = xv_witness(A, B, C, V, 1)
    assert w.X == B.translate(w.info["t"]) and w.info["certified"] is None


def test_xv_f53_codim1():
    g = GroupSpec.vector_space(5, 3)
    rng = np.random.default_rng(20240611)
    A, B, C = (GroupSet(g, rng.random(g.order) < 0.3) for _ in range(3))
    V = Subspace(g, [(0, 0, 1)]).members
    w = xv_witness(A, B, C, V, 0.1)
    assert V.size == 25 and 0.1 * 25 >= 1
    host = sumset(sumset(A, B), C)
    for x in w.X.elements():
        covered = sum(1 for v in V.elements() if g.add(int(x), int(v)) in host)
        assert covered >= 0.9 * V.size
    assert w.X.issubset(B.translate(w.info["t"]))


def test_xv_certificate_rechecks(rng):
    g = GroupSpec.cyclic(61)
    for _ in range(10):
        A, B, C = (GroupSet(g, rng.random(61) < 0.15) | GroupSet.from_elements(g, [1]) for _ in range(3))
        V = GroupSet.from_elements(g, [0, 1, 2])
        w = xv_witness(A, B, C, V, 0.2)
        host = three_fold_sumset(A, B, C)
        if w.info["certified"]:
            for x in w.X.elements():
                for v in V.elements():
                    assert g.add(int(x), int(v)) in host


def test_xv_rejects_empty():
    g = GroupSpec.cyclic(7)
    one = GroupSet.from_elements(g, [0])
    with pytest.raises(ValueError):
        xv_witness(one, one, one, GroupSet.empty(g), 0.1)
