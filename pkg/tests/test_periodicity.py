import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from addcomb import (DenseFunction, GroupSet, GroupSpec, PeriodicityConfig, convolve, holder_domination,
                     interpolation_holds, iterated_difference_set, linfty_three_fold_periods, lp_almost_periods,
                     lp_period_report, shift_difference_norms, sumset)

from conftest import random_set


def naive_norm(f, t, p):
    g = f.group
    vals = np.asarray(f.values, dtype=float)
    diff = np.array([vals[g.add(x, t)] - vals[x] for x in range(g.order)])
    if p == "inf":
        return float(np.abs(diff).max())
    return float(np.sum(np.abs(diff) ** p) ** (1 / p))


def test_config_validation():
    PeriodicityConfig(p=4, eps=0.25, k=2)
    for bad in [dict(p=1.5), dict(eps=0), dict(eps=1), dict(k=0)]:
        with pytest.raises(ValueError):
            PeriodicityConfig(**bad)


def test_norms_match_naive(rng):
    for g in (GroupSpec.cyclic(23), GroupSpec.vector_space(3, 3)):
        f = convolve(DenseFunction.indicator(random_set(g, rng, 0.4)),
                     DenseFunction.indicator(random_set(g, rng, 0.4)))
        ts = np.arange(g.order)
        for p in (2, 3, 4.5, "inf"):
            got = shift_difference_norms(f, ts, p)
            want = [naive_norm(f, int(t), p) for t in ts]
            assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_lp_examples():
    g = GroupSpec.cyclic(7)
    G = GroupSet.full(g)
    assert lp_almost_periods(G, G, 2, 0.1, G).T == G
    z = GroupSet.from_elements(g, [0])
    assert lp_almost_periods(z, z, 2, 0.5, G).T == z
    with pytest.raises(ValueError):
        lp_almost_periods(GroupSet.empty(g), z, 2, 0.5, G)
    with pytest.raises(ValueError):
        lp_almost_periods(z, z, 1.5, 0.5, G)


def test_linf3_examples():
    g = GroupSpec.vector_space(3, 2)
    G = GroupSet.full(g)
    assert linfty_three_fold_periods(G, G, G, 0.1, G).T == G
    A = GroupSet.from_elements(g, [0, 1])
    assert 0 in linfty_three_fold_periods(A, A, A, 0.01, G).T
    with pytest.raises(ValueError):
        linfty_three_fold_periods(GroupSet.empty(g), A, A, 0.5, G)


def test_linf3_warns_when_M_larger():
    g = GroupSpec.cyclic(11)
    small, big = GroupSet.from_elements(g, [0]), GroupSet.from_elements(g, [0, 1, 2])
    with pytest.warns(UserWarning):
        linfty_three_fold_periods(small, big, small, 0.5, GroupSet.full(g))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        linfty_three_fold_periods(small, small, big, 0.5, GroupSet.full(g))


def test_exact_threshold_on_boundary():
    """A shift whose L^2 norm equals the threshold exactly is kept."""
    g = GroupSpec.cyclic(7)
    A, L = GroupSet.from_elements(g, [0, 1]), GroupSet.from_elements(g, [0, 2])
    f = convolve(DenseFunction.indicator(A), DenseFunction.indicator(L))
    assert round(naive_norm(f, 1, 2) ** 2) == 2  # equals (eps |A|)^2 |L| at eps = 1/2
    G = GroupSet.full(g)
    assert 1 in lp_almost_periods(A, L, 2, 0.5, G).T
    assert 1 not in lp_almost_periods(A, L, 2, 0.5 - 1e-12, G).T


def test_report_example(rng):
    g = GroupSpec.cyclic(101)
    A, L = random_set(g, rng, 0.25), random_set(g, rng, 0.25)
    G = GroupSet.full(g)
    rep = lp_period_report(A, L, G, 2, 0.5, k=1)
    assert rep.K == Fraction(sumset(A, G).size, A.size)
    assert rep.subset_of_S and rep.kfold_bound_holds and rep.interpolation_ok
    assert 0 in rep.T
    full = lp_period_report(G, G, G, 2, 0.5)
    assert full.density == 1 and full.T == G


def test_report_kfold_multi_step(rng):
    g = GroupSpec.vector_space(3, 4)
    A, L = random_set(g, rng, 0.3), random_set(g, rng, 0.5)
    for k in (1, 2, 3):
        rep = lp_period_report(A, L, GroupSet.full(g), 4, 0.6, k=k)
        assert rep.kfold_bound_holds and rep.kfold_max_ratio <= 2 * k + 1e-9
        assert rep.kfold_size == iterated_difference_set(rep.T, k).size


def test_iterated_difference_set():
    g = GroupSpec.cyclic(20)
    T = GroupSet.from_elements(g, [0, 1])
    assert iterated_difference_set(T, 1) == GroupSet.from_elements(g, [19, 0, 1])
    assert iterated_difference_set(T, 3) == GroupSet.from_elements(g, [17, 18, 19, 0, 1, 2, 3])


@given(st.sampled_from([(101,), (3, 3, 3, 3), (31,)]), st.integers(0, 2 ** 31), st.floats(0.05, 0.95),
       st.floats(0.05, 0.95), st.sampled_from([2, 3, 4, 6.5]))
def test_period_properties(shape, seed, e1, e2, p):
    g = GroupSpec(shape)
    rng = np.random.default_rng(seed)
    A, L, M = (random_set(g, rng, rng.uniform(0.1, 0.6)) | GroupSet.from_elements(g, [0]) for _ in range(3))
    if M.size > L.size:
        M, L = L, M
    G = GroupSet.full(g)
    lo, hi = sorted((e1, e2))
    T_lo, T_hi = lp_almost_periods(A, L, p, lo, G).T, lp_almost_periods(A, L, p, hi, G).T
    assert 0 in T_lo and T_lo.issubset(T_hi)
    assert T_lo.neg() == T_lo
    U_lo = linfty_three_fold_periods(A, M, L, lo, G).T
    U_hi = linfty_three_fold_periods(A, M, L, hi, G).T
    assert 0 in U_lo and U_lo.issubset(U_hi)
    lhs, rhs = holder_domination(A, M, L, p, G)
    assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-9)
    f = convolve(DenseFunction.indicator(A), DenseFunction.indicator(L))
    assert interpolation_holds(f, np.arange(g.order), p)


def test_scan_restricted_to_S(rng):
    g = GroupSpec.cyclic(61)
    A, L = random_set(g, rng, 0.3), random_set(g, rng, 0.3)
    S = GroupSet.from_elements(g, range(0, 61, 3))
    scan = lp_almost_periods(A, L, 2, 0.7, S)
    assert scan.T.issubset(S) and scan.S == S
    assert scan.max_norm_over_T <= scan.threshold * (1 + 1e-9)
