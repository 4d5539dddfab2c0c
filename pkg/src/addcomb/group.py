"""Finite abelian groups presented as products of cyclic groups.

Elements are plain integers in ``[0, order)``.  The integer ``x`` stands for
the coordinate vector ``(x_1, ..., x_r)`` under little-endian mixed radix,

    x = x_1 + m_1 * (x_2 + m_2 * (x_3 + ...)),

which is numpy's Fortran (``order="F"``) ravel of an array of shape
``factors``.  Characters are indexed by the same integers via the pairing
``gamma(x) = e(sum_i gamma_i x_i / m_i)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupMismatchError

__all__ = [
    "GroupSpec",
    "GroupSet",
    "IntervalEmbedding",
    "add",
    "dilate",
    "sumset",
    "difference_set",
    "embed_interval",
    "character_value",
    "character_phases",
    "is_prime",
    "next_prime",
]

COORD_TABLE_LIMIT = 1 << 20


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GroupSpec:
    """``Z/m_1 x ... x Z/m_r``."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(m) for m in self.factors)
        if not factors:
            raise ValueError("a group needs at least one cyclic factor")
        if any(m < 2 for m in factors):
            raise ValueError(f"cyclic factors must be >= 2, got {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def cyclic(cls, n: int) -> "GroupSpec":
        return cls((n,))

    @classmethod
    def vector_space(cls, q: int, n: int) -> "GroupSpec":
        """``F_q^n`` for a prime ``q``."""
        if not is_prime(q):
            raise ValueError(f"F_q^n is only supported for prime q, got q={q}")
        if n < 1:
            raise ValueError("dimension must be >= 1")
        return cls((q,) * n)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    def __str__(self) -> str:
        return ",".join(str(m) for m in self.factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.factors)

    @property
    def is_cyclic_prime(self) -> bool:
        return self.rank == 1 and is_prime(self.factors[0])

    @property
    def field_size(self) -> int | None:
        """``q`` if the group is ``F_q^n`` for a prime ``q``, else ``None``."""
        q = self.factors[0]
        if all(m == q for m in self.factors) and is_prime(q):
            return q
        return None

    @cached_property
    def _factor_array(self) -> np.ndarray:
        return _readonly(np.array(self.factors, dtype=np.int64))

    # -- element encoding -------------------------------------------------

    def element(self, x) -> int:
        """Normalise an index or coordinate vector to an index."""
        if isinstance(x, (int, np.integer)):
            x = int(x)
            if not 0 <= x < self.order:
                raise IndexError(f"element index {x} out of range for group of order {self.order}")
            return x
        coords = tuple(int(c) for c in x)
        if len(coords) != self.rank:
            raise IndexError(f"expected {self.rank} coordinates, got {len(coords)}")
        for c, m in zip(coords, self.factors):
            if not 0 <= c < m:
                raise IndexError(f"coordinate {c} out of range for factor {m}")
        return self.index(coords)

    def coords(self, x: int) -> tuple[int, ...]:
        x = self.element(x)
        out = []
        for m in self.factors:
            x, c = divmod(x, m)
            out.append(c)
        return tuple(out)

    def index(self, coords: Sequence[int]) -> int:
        x = 0
        for c, m in zip(reversed(tuple(coords)), reversed(self.factors)):
            x = x * m + int(c) % m
        return x

    @cached_property
    def coords_array(self) -> np.ndarray:
        """``(order, rank)`` array; row ``x`` holds the coordinates of ``x``."""
        cols = np.unravel_index(np.arange(self.order), self.factors, order="F")
        return _readonly(np.stack(cols, axis=1).astype(np.int64))

    def coords_of(self, idx) -> np.ndarray:
        """Coordinates of an index array, shape ``idx.shape + (rank,)``.

        Uses the cached table for groups up to ``2^20`` elements and computes
        digits on the fly beyond that, so huge groups never build the table.
        """
        idx = np.asarray(idx, dtype=np.int64)
        if self.order <= COORD_TABLE_LIMIT:
            return self.coords_array[idx]
        return np.stack(np.unravel_index(idx, self.factors, order="F"), axis=-1).astype(np.int64)

    def ravel(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised inverse of :attr:`coords_array` (reduces mod factors)."""
        coords = np.asarray(coords, dtype=np.int64) % self._factor_array
        return np.ravel_multi_index(tuple(np.moveaxis(coords, -1, 0)), self.factors, order="F")

    # -- arithmetic -------------------------------------------------------

    def add(self, a, b) -> int:
        a, b = self.element(a), self.element(b)
        if self.rank == 1:
            return (a + b) % self.order
        return self.index([x + y for x, y in zip(self.coords(a), self.coords(b))])

    def neg(self, a) -> int:
        return self.index([-c for c in self.coords(a)])

    def sub(self, a, b) -> int:
        return self.add(a, self.neg(b))

    def mul(self, c: int, a) -> int:
        return self.index([c * x for x in self.coords(a)])

    def add_indices(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.rank == 1:
            return (a + b) % self.order
        return self.ravel(self.coords_of(a) + self.coords_of(b))

    def neg_indices(self, a) -> np.ndarray:
        return self.scale_indices(a, -1)

    def scale_indices(self, a, c: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.rank == 1:
            return (a * (c % self.order)) % self.order
        return self.ravel(self.coords_of(a) * (c % self.exponent))

    def translation(self, t) -> np.ndarray:
        """Index table ``tab`` with ``tab[x] = x + t`` for every ``x``."""
        t = self.element(t)
        if self.rank == 1:
            return (np.arange(self.order, dtype=np.int64) + t) % self.order
        return self.ravel(self.coords_array + np.array(self.coords(t), dtype=np.int64))

    def check_same(self, other: "GroupSpec") -> None:
        if self != other:
            raise GroupMismatchError(f"group mismatch: {self} vs {other}")


class GroupSet:
    """An immutable subset of a :class:`GroupSpec`, stored as a dense bitset."""

    __slots__ = ("group", "members", "_size")

    def __init__(self, group: GroupSpec, members: np.ndarray):
        members = np.array(members, dtype=bool, copy=True).reshape(-1)
        if members.shape[0] != group.order:
            raise ValueError(f"bitset length {members.shape[0]} != group order {group.order}")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "members", _readonly(members))
        object.__setattr__(self, "_size", int(np.count_nonzero(members)))

    def __setattr__(self, name, value):
        raise AttributeError("GroupSet is immutable")

    @classmethod
    def from_elements(cls, group: GroupSpec, elements: Iterable) -> "GroupSet":
        bits = np.zeros(group.order, dtype=bool)
        if isinstance(elements, np.ndarray) and elements.ndim == 1 and elements.dtype.kind in "iu":
            idx = elements.astype(np.int64)
            if idx.size and (idx.min() < 0 or idx.max() >= group.order):
                raise IndexError("element index out of range")
            bits[idx] = True
        else:
            for x in elements:
                bits[group.element(x)] = True
        return cls(group, bits)

    @classmethod
    def empty(cls, group: GroupSpec) -> "GroupSet":
        return cls(group, np.zeros(group.order, dtype=bool))

    @classmethod
    def full(cls, group: GroupSpec) -> "GroupSet":
        return cls(group, np.ones(group.order, dtype=bool))

    @property
    def size(self) -> int:
        return self._size

    @property
    def density(self) -> Fraction:
        return Fraction(self._size, self.group.order)

    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def coordinates(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in row) for row in self.group.coords_of(self.elements())]

    def __len__(self) -> int:
        return self._size

    def __iter__(self):
        return iter(int(x) for x in self.elements())

    def __contains__(self, x) -> bool:
        try:
            return bool(self.members[self.group.element(x)])
        except IndexError:
            return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupSet):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash((self.group, self.members.tobytes()))

    def __repr__(self) -> str:
        shown = list(self)[:8]
        more = ", ..." if self._size > 8 else ""
        return f"GroupSet(group={self.group}, size={self._size}, elements={shown}{more})"

    def _check(self, other: "GroupSet") -> None:
        self.group.check_same(other.group)

    def __or__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.members | other.members)

    def __and__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.members & other.members)

    def __sub__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.members & ~other.members)

    def issubset(self, other: "GroupSet") -> bool:
        self._check(other)
        return not np.any(self.members & ~other.members)

    def isdisjoint(self, other: "GroupSet") -> bool:
        self._check(other)
        return not np.any(self.members & other.members)

    def complement(self) -> "GroupSet":
        return GroupSet(self.group, ~self.members)

    def translate(self, t) -> "GroupSet":
        """``A + t``."""
        g = self.group
        return GroupSet.from_elements(g, g.add_indices(self.elements(), np.full(self._size, g.element(t))))

    def neg(self) -> "GroupSet":
        return dilate(self.group, -1, self)


def add(g: GroupSpec, a, b) -> int:
    return g.add(a, b)


def dilate(g: GroupSpec, c: int, A: GroupSet) -> GroupSet:
    """``c.A = {c a : a in A}`` with ``c`` reduced modulo each factor."""
    g.check_same(A.group)
    return GroupSet.from_elements(g, g.scale_indices(A.elements(), c))


def _pairwise_sum(A: GroupSet, B: GroupSet) -> np.ndarray:
    g = A.group
    a = A.elements()
    b = B.elements()
    if g.rank == 1:
        return np.unique((a[:, None] + b[None, :]) % g.order)
    ca = g.coords_of(a)
    cb = g.coords_of(b)
    out = []
    # chunk to keep the (|A|, |B|, r) temporary small
    step = max(1, (1 << 20) // max(1, b.size * g.rank))
    for i in range(0, a.size, step):
        s = ca[i:i + step, None, :] + cb[None, :, :]
        out.append(np.unique(g.ravel(s.reshape(-1, g.rank))))
    return np.unique(np.concatenate(out)) if out else np.empty(0, dtype=np.int64)


def sumset(A: GroupSet, B: GroupSet) -> GroupSet:
    """``A + B = {a + b : a in A, b in B}``."""
    A._check(B)
    g = A.group
    if A.size == 0 or B.size == 0:
        return GroupSet.empty(g)
    if A.size * B.size <= (1 << 22):
        return GroupSet.from_elements(g, _pairwise_sum(A, B))
    from .spectral import DenseFunction, convolve

    conv = convolve(DenseFunction.indicator(A), DenseFunction.indicator(B))
    return GroupSet(g, np.asarray(conv.values) > 0)


def difference_set(A: GroupSet, B: GroupSet) -> GroupSet:
    """``A - B``."""
    return sumset(A, B.neg())


def character_phases(g: GroupSpec, gamma) -> np.ndarray:
    """Integer numerators ``k(x)`` with ``gamma(x) = e(k(x) / exponent)``, for all x."""
    gamma = g.coords(g.element(gamma))
    L = g.exponent
    weights = np.array([(c * (L // m)) % L for c, m in zip(gamma, g.factors)], dtype=np.int64)
    if g.rank == 1:
        return (np.arange(g.order, dtype=np.int64) * weights[0]) % L
    return (g.coords_array @ weights) % L


def character_value(g: GroupSpec, gamma, x) -> complex:
    """``gamma(x) = exp(2 pi i sum_i gamma_i x_i / m_i)``."""
    gc = g.coords(g.element(gamma))
    xc = g.coords(g.element(x))
    L = g.exponent
    k = sum(a * b * (L // m) for a, b, m in zip(gc, xc, g.factors)) % L
    return cmath.exp(2j * math.pi * k / L)


# -- primes and the interval embedding ------------------------------------

def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Least prime ``>= n``."""
    n = max(2, int(n))
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class IntervalEmbedding:
    """``[N] = {1, ..., N}`` placed inside ``Z/p`` with ``6N <= p <= 12N`` prime.

    Any solution of a four-variable equation with coefficients summing in
    absolute value to at most 6 that holds mod ``p`` on the image also holds
    over the integers.
    """

    N: int
    group: GroupSpec

    @property
    def modulus(self) -> int:
        return self.group.order

    def __call__(self, k: int) -> int:
        return int(k) % self.modulus

    def image(self, integers: Iterable[int]) -> GroupSet:
        ints = [int(k) for k in integers]
        for k in ints:
            if not 1 <= k <= self.N:
                raise ValueError(f"{k} is not in [1, {self.N}]")
        return GroupSet.from_elements(self.group, [k % self.modulus for k in ints])

    def interval(self) -> GroupSet:
        return self.image(range(1, self.N + 1))

    def preimage(self, A: GroupSet) -> list[int]:
        self.group.check_same(A.group)
        return [x for x in A if 1 <= x <= self.N]


def embed_interval(N: int, width: int = 6) -> IntervalEmbedding:
    """Place ``[N]`` in ``Z/p`` for the least prime ``p >= width * N``.

    The default ``width = 6`` covers the four-variable equations used
    throughout; equations whose positive coefficients sum to ``s`` need
    ``width > s`` for mod-``p`` solutions on the image to be integer ones.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if width < 2:
        raise ValueError("width must be >= 2")
    p = next_prime(width * N)
    assert p <= 2 * width * N  # Bertrand
    return IntervalEmbedding(N, GroupSpec.cyclic(p))
