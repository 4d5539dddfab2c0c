"""Exact almost-period scans for two- and three-fold convolutions.

For ``f = 1_A * 1_L`` and a shift ``t`` write ``D_t = f(. + t) - f``.  The
scans evaluate ``||D_t||_p`` for every candidate shift from one precomputed
convolution; integer ``p`` is decided exactly (floats only screen the clear
cases), other exponents are compared in floating point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .group import GroupSet, GroupSpec, difference_set, sumset
from .parallel import chunks, pmap
from .spectral import DenseFunction, convolve

__all__ = [
    "PeriodicityConfig",
    "PeriodScan",
    "shift_difference_norms",
    "lp_almost_periods",
    "linfty_three_fold_periods",
    "LpPeriodReport",
    "lp_period_report",
    "iterated_difference_set",
    "holder_domination",
    "interpolation_holds",
]

ROW_BUDGET = 1 << 22
SCREEN = 1e-9


@dataclass(frozen=True)
class PeriodicityConfig:
    p: float = 2.0
    eps: float = 0.5
    k: int = 1
    K: Fraction | None = None
    eta: Fraction | None = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _nonempty(*sets: GroupSet) -> None:
    for X in sets:
        if X.size == 0:
            raise ValueError("sets must be nonempty")
    g = sets[0].group
    for X in sets[1:]:
        g.check_same(X.group)


def _shift_rows(g: GroupSpec, ts: np.ndarray) -> np.ndarray:
    """``rows[i, x] = x + ts[i]``."""
    ar = np.arange(g.order, dtype=np.int64)
    return g.add_indices(ar[None, :], np.asarray(ts, dtype=np.int64)[:, None])


def _as_float(p) -> float:
    return math.inf if p == "inf" else float(p)


def shift_difference_norms(f: DenseFunction, shifts, p) -> np.ndarray:
    """``||f(. + t) - f||_p`` for every ``t`` in ``shifts`` (float64)."""
    g = f.group
    vals = np.asarray(f.values, dtype=np.float64)
    shifts = np.asarray(shifts, dtype=np.int64)
    p = _as_float(p)
    rows_per = max(1, ROW_BUDGET // g.order)

    def work(rng: range) -> np.ndarray:
        D = np.abs(vals[_shift_rows(g, shifts[rng.start:rng.stop])] - vals[None, :])
        if math.isinf(p):
            return D.max(axis=1)
        if p == 2:
            return np.sqrt(np.einsum("ij,ij->i", D, D))
        scale = D.max(axis=1, keepdims=True)
        scale[scale == 0] = 1.0
        return scale[:, 0] * np.sum((D / scale) ** p, axis=1) ** (1.0 / p)

    parts = pmap(work, chunks(shifts.size, rows_per))
    return np.concatenate(parts) if parts else np.zeros(0)


def _exact_power_sum(f: DenseFunction, t: int, p: int) -> int:
    g = f.group
    vals = f.values
    tab = g.translation(t)
    return sum(abs(int(a) - int(b)) ** p for a, b in zip(vals[tab], vals) if a != b)


@dataclass(frozen=True)
class PeriodScan:
    """Shifts that pass, the norms of all scanned shifts and the threshold used."""

    T: GroupSet
    S: GroupSet
    norms: np.ndarray
    threshold: float

    @property
    def density(self) -> Fraction:
        return Fraction(self.T.size, self.S.size)

    @property
    def max_norm_over_T(self) -> float:
        sel = self.T.members[self.S.elements()]
        return float(self.norms[sel].max()) if sel.any() else 0.0


def lp_almost_periods(A: GroupSet, L: GroupSet, p, eps: float, S: GroupSet,
                      f: DenseFunction | None = None) -> PeriodScan:
    """``T = {t in S : ||1_A*1_L(. + t) - 1_A*1_L||_p <= eps |A| |L|^(1/p)}``."""
    _nonempty(A, L)
    A.group.check_same(S.group)
    pf = _as_float(p)
    if pf < 2:
        raise ValueError("p must be >= 2")
    f = f if f is not None else convolve(DenseFunction.indicator(A), DenseFunction.indicator(L))
    ts = S.elements()
    norms = shift_difference_norms(f, ts, pf)
    if math.isinf(pf):
        limit = Fraction(eps) * A.size
        keep = np.array([Fraction(int(round(v))) <= limit for v in norms], dtype=bool)
        thr = float(limit)
    else:
        thr = eps * A.size * L.size ** (1.0 / pf)
        keep = norms <= thr * (1 - SCREEN)
        unsure = np.flatnonzero(np.abs(norms - thr) <= thr * SCREEN)
        if unsure.size:
            if float(pf).is_integer():
                pi = int(pf)
                limit = (Fraction(eps) * A.size) ** pi * L.size
                for i in unsure:
                    keep[i] = _exact_power_sum(f, int(ts[i]), pi) <= limit
            else:
                keep[unsure] = norms[unsure] <= thr
    return PeriodScan(GroupSet.from_elements(A.group, ts[keep]), S, norms, thr)


def linfty_three_fold_periods(A: GroupSet, M: GroupSet, L: GroupSet, eps: float, S: GroupSet,
                              h: DenseFunction | None = None) -> PeriodScan:
    """``T = {t in S : ||h(. + t) - h||_inf <= eps |A| |M|}`` for ``h = 1_A*1_M*1_L``; exact."""
    _nonempty(A, M, L)
    A.group.check_same(S.group)
    if M.size > L.size:
        warnings.warn("|M| > |L|: the three-fold bound is stated for |M| <= |L|", stacklevel=2)
    if h is None:
        h = convolve(convolve(DenseFunction.indicator(A), DenseFunction.indicator(M)), DenseFunction.indicator(L))
    ts = S.elements()
    norms = shift_difference_norms(h, ts, "inf")
    limit = Fraction(eps) * A.size * M.size
    keep = np.array([int(round(v)) <= limit for v in norms], dtype=bool)
    return PeriodScan(GroupSet.from_elements(A.group, ts[keep]), S, norms, float(limit))


def iterated_difference_set(T: GroupSet, k: int) -> GroupSet:
    """``kT - kT``."""
    if T.size == 0:
        return T
    kT = T
    for _ in range(k - 1):
        kT = sumset(kT, T)
    return difference_set(kT, kT)


@dataclass(frozen=True)
class LpPeriodReport:
    K: Fraction
    scan: PeriodScan
    k: int
    kfold_size: int
    kfold_max_ratio: float
    kfold_bound_holds: bool
    subset_of_S: bool
    interpolation_ok: bool

    @property
    def T(self) -> GroupSet:
        return self.scan.T

    @property
    def density(self) -> Fraction:
        return self.scan.density


def lp_period_report(A: GroupSet, L: GroupSet, S: GroupSet, p, eps: float, k: int = 1) -> LpPeriodReport:
    """Scan the ``L^p`` almost-periods and check what holds without unknown constants.

    ``K = |A+S|/|A|`` is exact.  Every ``t`` in ``kT - kT`` is a sum of ``2k``
    elements of ``T`` or their negatives, each moving ``1_A*1_L`` by at most
    ``eps |A||L|^(1/p)``, so the triangle inequality allows ``2k`` times the
    single-step bound; the report gives the worst ratio actually seen.  The
    density ``|T|/|S|`` is recorded, never judged.
    """
    _nonempty(A, L, S)
    if k < 1:
        raise ValueError("k must be >= 1")
    K = Fraction(sumset(A, S).size, A.size)
    f = convolve(DenseFunction.indicator(A), DenseFunction.indicator(L))
    scan = lp_almost_periods(A, L, p, eps, S, f=f)
    W = iterated_difference_set(scan.T, k)
    pf = _as_float(p)
    norms = shift_difference_norms(f, W.elements(), pf)
    unit = eps * A.size * L.size ** (1.0 / pf) if not math.isinf(pf) else eps * A.size
    ratio = float(norms.max() / unit) if norms.size else 0.0
    interp = interpolation_holds(f, W.elements(), pf) if not math.isinf(pf) else True
    return LpPeriodReport(K, scan, k, W.size, ratio, ratio <= 2 * k * (1 + SCREEN),
                          scan.T.issubset(S), interp)


def interpolation_holds(f: DenseFunction, shifts, p: float) -> bool:
    """``||D_t||_p <= ||D_t||_inf^(1 - 2/p) ||D_t||_2^(2/p)`` for every shift."""
    if p < 2:
        raise ValueError("p must be >= 2")
    lp = shift_difference_norms(f, shifts, p)
    l2 = shift_difference_norms(f, shifts, 2)
    li = shift_difference_norms(f, shifts, "inf")
    rhs = li ** (1 - 2 / p) * l2 ** (2 / p)
    return bool(np.all(lp <= rhs * (1 + 1e-12) + 1e-9))


def holder_domination(A: GroupSet, M: GroupSet, L: GroupSet, p: float, S: GroupSet) -> tuple[np.ndarray, np.ndarray]:
    """Per shift: the three-fold ``L^inf`` difference and ``|M|^(1/r)`` times the two-fold ``L^p`` one.

    With ``1/r + 1/p = 1`` the first never exceeds the second.
    """
    _nonempty(A, M, L)
    f = convolve(DenseFunction.indicator(A), DenseFunction.indicator(L))
    h = convolve(DenseFunction.indicator(M), f)
    ts = S.elements()
    lhs = shift_difference_norms(h, ts, "inf")
    r_inv = 1 - 1 / p
    rhs = M.size ** r_inv * shift_difference_norms(f, ts, p)
    return lhs, rhs
