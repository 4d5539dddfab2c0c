"""Bohr sets, their rescalings, exact regularity and progressions inside them.

Every Bohr norm ``|gamma(x) - 1|`` equals ``2 sin(pi j / L)`` for an integer
``j`` in ``[0, L/2]``, where ``L`` is the group exponent.  A Bohr set stores
the integer key ``j(x) = max_gamma min(k_gamma(x), L - k_gamma(x))`` for every
element, so membership at any radius, set sizes as a function of the radius
and the regularity test are all driven by exact integer data; floats only
enter when a radius is converted to a key threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import NotFoundError
from .group import GroupSet, GroupSpec, character_phases, is_prime

__all__ = [
    "BohrSet",
    "Progression",
    "bohr_build",
    "scale",
    "is_regular",
    "regularity_violation",
    "regular_radius",
    "annihilator_bohr",
    "ap_in_bohr",
    "bohr_l1_defect",
    "RADIUS_TOL",
]

RADIUS_TOL = 1e-12


def _norm_table(L: int) -> np.ndarray:
    j = np.arange(L // 2 + 1, dtype=np.float64)
    return 2.0 * np.sin(np.pi * j / L)


def _radius_key(table: np.ndarray, radius: float) -> int:
    """Largest key whose norm is ``<= radius`` (within the tolerance); -1 if none."""
    return int(np.searchsorted(table, radius + RADIUS_TOL, side="right")) - 1


class BohrSet:
    """``Bohr(Gamma, rho) = {x : |gamma(x) - 1| <= rho for all gamma in Gamma}``.

    ``frequencies`` are character indices (deduplicated and sorted); the rank
    is their number.  Rescaled copies share the key vector.
    """

    def __init__(self, group: GroupSpec, frequencies: Iterable, radius: float, keys: np.ndarray | None = None):
        if radius < 0:
            raise ValueError("radius must be >= 0")
        freqs = tuple(sorted({group.element(f) for f in frequencies}))
        self.group = group
        self.frequencies = freqs
        self.radius = float(radius)
        if keys is None:
            keys = _bohr_keys(group, freqs)
        self.keys = keys

    def __repr__(self):
        return (f"BohrSet(group={self.group}, frequencies={list(self.frequencies)}, "
                f"radius={self.radius:.6g}, size={self.size})")

    @property
    def rank(self) -> int:
        return len(self.frequencies)

    @property
    def modulus(self) -> int:
        return self.group.exponent

    @cached_property
    def table(self) -> np.ndarray:
        return _norm_table(self.modulus)

    @cached_property
    def norms(self) -> np.ndarray:
        """``r(x) = max_gamma |gamma(x) - 1|`` for every element."""
        out = self.table[self.keys]
        out.flags.writeable = False
        return out

    @cached_property
    def _sorted_keys(self) -> np.ndarray:
        return np.sort(self.keys)

    @cached_property
    def key_threshold(self) -> int:
        return _radius_key(self.table, self.radius)

    @cached_property
    def members(self) -> GroupSet:
        return GroupSet(self.group, self.keys <= self.key_threshold)

    @property
    def size(self) -> int:
        return self.size_at(self.radius)

    def size_at(self, radius: float) -> int:
        """``|Bohr(Gamma, radius)|`` without building the set."""
        return int(np.searchsorted(self._sorted_keys, _radius_key(self.table, radius), side="right"))

    def count_below_key(self, key: int) -> int:
        """Number of elements with key strictly less than ``key``."""
        return int(np.searchsorted(self._sorted_keys, key, side="left"))

    def breakpoints(self) -> np.ndarray:
        """Distinct norm values, ascending: the jumps of ``t -> |B_t|``."""
        return self.table[np.unique(self.keys)]

    def scale(self, delta: float) -> "BohrSet":
        return BohrSet(self.group, self.frequencies, delta * self.radius, keys=self.keys)

    def __contains__(self, x) -> bool:
        return x in self.members

    def is_sub_bohr_of(self, other: "BohrSet") -> bool:
        """``Gamma' >= Gamma`` and ``rho' <= rho``."""
        return set(self.frequencies) >= set(other.frequencies) and self.radius <= other.radius + RADIUS_TOL


def _bohr_keys(group: GroupSpec, freqs: tuple[int, ...]) -> np.ndarray:
    L = group.exponent
    keys = np.zeros(group.order, dtype=np.int64)
    for gamma in freqs:
        k = character_phases(group, gamma)
        np.maximum(keys, np.minimum(k, L - k), out=keys)
    keys.flags.writeable = False
    return keys


def bohr_build(g: GroupSpec, frequencies: Iterable, radius: float) -> BohrSet:
    return BohrSet(g, frequencies, radius)


def scale(B: BohrSet, delta: float) -> BohrSet:
    """``B_delta = Bohr(Gamma, delta * rho)``."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return B.scale(delta)


def annihilator_bohr(g: GroupSpec, base: Iterable, spectrum: Iterable, radius: float) -> BohrSet:
    """``Bohr(Gamma u Lambda, rho')``: every member ``t`` has ``|1 - gamma(t)| <= rho'`` on ``Lambda``."""
    return BohrSet(g, tuple(base) + tuple(spectrum), radius)


# -- regularity -------------------------------------------------------------

def regularity_violation(B: BohrSet):
    """First ``(delta, ratio)`` breaking ``|B_{1+delta}| / |B| in [1 - 12d|delta|, 1 + 12d|delta|]``.

    Returns ``None`` for a regular set.  ``|B_t|`` is a step function of the
    radius, so only its jump points inside the window have to be inspected:
    growth is worst exactly at a jump above ``rho``, shrinkage worst just
    below a jump at or under ``rho``.
    """
    d = B.rank
    if d < 1:
        raise ValueError("regularity needs rank >= 1")
    rho = B.radius
    if rho == 0:
        return None
    size = B.size
    w = 1.0 / (12 * d)
    table = B.table
    keys = np.unique(B.keys)
    vals = table[keys]
    slack = 1e-12

    # radius grows: jumps v with rho < v <= rho (1 + w)
    up = keys[(vals > rho + RADIUS_TOL) & (vals <= rho * (1 + w) + RADIUS_TOL)]
    for k in up:
        delta = table[k] / rho - 1
        grown = B.count_below_key(k + 1)
        if grown > size * (1 + 12 * d * delta) + slack:
            return delta, Fraction(grown, size)

    # radius shrinks: sizes just below jumps v with rho (1 - w) < v <= rho
    down = keys[(vals <= rho + RADIUS_TOL) & (vals > rho * (1 - w))]
    for k in down:
        delta = 1 - table[k] / rho
        shrunk = B.count_below_key(k)
        if shrunk < size * (1 - 12 * d * delta) - slack:
            return -delta, Fraction(shrunk, size)
    return None


def is_regular(B: BohrSet) -> bool:
    return regularity_violation(B) is None


def regular_radius(B: BohrSet) -> float:
    """Largest ``delta`` in ``[1/2, 1]`` on the candidate grid with ``B_delta`` regular.

    The grid is ``{1/2, 1}``, every jump of ``t -> |B_t|`` with ``t/rho`` in
    ``[1/2, 1]``, and the midpoints between consecutive grid points.
    """
    if B.rank < 1:
        raise ValueError("regularity needs rank >= 1")
    rho = B.radius
    if rho == 0:
        return 1.0
    jumps = B.breakpoints() / rho
    grid = set(float(t) for t in jumps[(jumps >= 0.5) & (jumps <= 1.0)])
    grid.update((0.5, 1.0))
    grid = sorted(grid)
    grid = sorted(set(grid) | {(a + b) / 2 for a, b in zip(grid, grid[1:])}, reverse=True)
    for delta in grid:
        if is_regular(B.scale(delta)):
            return delta
    raise NotFoundError("no regular rescaling in [1/2, 1] on the candidate grid",
                        {"rank": B.rank, "radius": rho, "candidates": len(grid)})


def bohr_l1_defect(B: BohrSet, Bp: BohrSet | GroupSet) -> Fraction:
    """``||mu_B * mu_B' - mu_B||_1``, exactly."""
    from .spectral import DenseFunction, convolve

    small = Bp.members if isinstance(Bp, BohrSet) else Bp
    big = B.members
    conv = convolve(DenseFunction.indicator(big), DenseFunction.indicator(small)).values
    diff = np.abs(conv.astype(object) - small.size * big.members.astype(np.int64).astype(object))
    return Fraction(int(sum(int(v) for v in diff)), big.size * small.size)


# -- progressions -------------------------------------------------------------

@dataclass(frozen=True)
class Progression:
    """``{start + j * step : 0 <= j < length}`` in ``Z/N``."""

    start: int
    step: int
    length: int

    def elements(self, N: int) -> list[int]:
        return [(self.start + j * self.step) % N for j in range(self.length)]


def _walk(members: np.ndarray, step: int, N: int) -> tuple[int, int]:
    """Consecutive multiples of ``step`` in the set going forwards and backwards from 0."""
    fwd = 0
    while fwd < N - 1 and members[((fwd + 1) * step) % N]:
        fwd += 1
    if fwd == N - 1:
        return fwd, 0
    back = 0
    while fwd + back < N - 1 and members[(-(back + 1) * step) % N]:
        back += 1
    return fwd, back


def ap_in_bohr(B: BohrSet, max_steps: int | None = None) -> Progression:
    """A progression inside ``B`` of length at least ``ceil(rho N^(1/d) / 2 pi)``.

    Steps are tried in order of increasing Bohr norm (ties to the smallest
    index); the first, of minimal norm, already satisfies the bound by the
    triangle inequality.  Every returned progression is checked member by
    member.
    """
    g = B.group
    if g.rank != 1 or not is_prime(g.order):
        raise ValueError("ap_in_bohr needs Z/N with N prime")
    if B.rank < 1:
        raise ValueError("ap_in_bohr needs rank >= 1")
    N = g.order
    members = B.members.members
    required = min(N, math.ceil(B.radius / (2 * math.pi) * N ** (1.0 / B.rank) - 1e-12))

    order = np.lexsort((np.arange(N), B.keys))
    order = order[order != 0]
    if max_steps is not None:
        order = order[:max_steps]
    best = Progression(0, 1, 1)
    for s in order:
        s = int(s)
        if not members[s]:
            break
        fwd, back = _walk(members, s, N)
        length = min(N, fwd + back + 1)
        if length > best.length:
            best = Progression((-back * s) % N, s, length)
        if best.length >= required:
            break
    if not all(members[x] for x in best.elements(N)):
        raise NotFoundError("progression failed membership verification", {"progression": best})
    if best.length < required:
        raise NotFoundError("no progression of the guaranteed length",
                            {"required": required, "best": best})
    return best
