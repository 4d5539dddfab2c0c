"""Translation-invariant linear equations ``c_1 x_1 + ... + c_k x_k = 0``.

Solutions are ordered ``k``-tuples.  A tuple is *trivial* when the index set
splits into parts on which the tuple is constant and the coefficients sum to
zero.  Because coarsening such a partition keeps every part's coefficient sum
zero, a tuple is trivial exactly when its own kernel partition
(``i ~ j`` iff ``x_i = x_j``) has zero-sum blocks; counting trivial tuples in
``A^k`` is then a sum of falling factorials of ``|A|`` over those partitions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .group import GroupSet, sumset
from .spectral import DenseFunction, convolve

__all__ = [
    "Equation",
    "SolutionCount",
    "XYZ3W",
    "set_partitions",
    "count_solutions",
    "count_trivial",
    "count_nontrivial",
    "has_nontrivial",
    "brute_force_count",
    "solution_free_identity",
    "dilate_weights",
]

MAX_TRIVIAL_K = 8
BRUTE_FORCE_LIMIT = 10 ** 9


@dataclass(frozen=True)
class Equation:
    coefficients: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coefficients)
        if len(cs) < 3:
            raise ValueError("an equation needs at least 3 variables")
        if any(c == 0 for c in cs):
            raise ValueError("coefficients must be nonzero")
        if sum(cs) != 0:
            raise ValueError(f"coefficients must sum to 0 (translation invariance), got {cs}")
        object.__setattr__(self, "coefficients", cs)

    @classmethod
    def parse(cls, text: str) -> "Equation":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def __str__(self):
        return ",".join(str(c) for c in self.coefficients)


XYZ3W = Equation((1, 1, 1, -3))


@dataclass(frozen=True)
class SolutionCount:
    total: int
    trivial: int

    @property
    def nontrivial(self) -> int:
        return self.total - self.trivial


def set_partitions(items):
    """All set partitions of ``items`` (a sequence), as lists of tuples."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1:]


@lru_cache(maxsize=None)
def _zero_sum_partition_sizes(coefficients: tuple[int, ...]) -> tuple[int, ...]:
    """Block counts of the partitions of the index set whose blocks all have zero coefficient sum."""
    out = []
    for part in set_partitions(range(len(coefficients))):
        if all(sum(coefficients[i] for i in block) == 0 for block in part):
            out.append(len(part))
    return tuple(out)


def _falling(n: int, r: int) -> int:
    out = 1
    for i in range(r):
        out *= n - i
    return out


def count_trivial(eq: Equation, A: GroupSet) -> int:
    if eq.k > MAX_TRIVIAL_K:
        raise ValueError(f"trivial-solution counting supports k <= {MAX_TRIVIAL_K}")
    n = A.size
    return sum(_falling(n, r) for r in _zero_sum_partition_sizes(eq.coefficients))


def dilate_weights(A: GroupSet, c: int) -> DenseFunction:
    """``y -> #{a in A : c a = y}``; the indicator of ``c.A`` when ``c`` is a unit."""
    g = A.group
    counts = np.bincount(g.scale_indices(A.elements(), c), minlength=g.order)
    return DenseFunction(g, counts.astype(np.int64))


def count_solutions(eq: Equation, A: GroupSet) -> int:
    """Number of ordered tuples in ``A^k`` with ``sum c_i x_i = 0`` in the group.

    Computed as ``(w_1 * ... * w_k)(0)`` where ``w_i`` counts the fibres of
    ``a -> c_i a`` on ``A``, so non-unit coefficients are handled exactly.
    """
    if A.size == 0:
        return 0
    weights = [dilate_weights(A, c) for c in eq.coefficients]
    acc = weights[0]
    for w in weights[1:-1]:
        acc = convolve(acc, w)
    # (acc * w_k)(0) = sum_y acc(y) w_k(-y)
    last = weights[-1].reflect().values
    vals = acc.values
    if vals.dtype == object or last.dtype == object:
        return int(sum(int(a) * int(b) for a, b in zip(vals, last) if a and b))
    nz = np.flatnonzero(last)
    return int(sum(int(vals[i]) * int(last[i]) for i in nz))


def count_nontrivial(eq: Equation, A: GroupSet) -> int:
    return count_solutions(eq, A) - count_trivial(eq, A)


def has_nontrivial(eq: Equation, A: GroupSet) -> bool:
    return count_nontrivial(eq, A) > 0


@lru_cache(maxsize=None)
def _pattern_is_trivial(coefficients: tuple[int, ...], pattern: tuple[int, ...]) -> bool:
    # straight from the definition: some zero-sum partition on whose blocks the tuple is constant
    for part in set_partitions(range(len(coefficients))):
        if all(sum(coefficients[i] for i in block) == 0 for block in part) and \
                all(len({pattern[i] for i in block}) == 1 for block in part):
            return True
    return False


def _is_trivial_tuple(coefficients, xs) -> bool:
    first = {}
    pattern = tuple(first.setdefault(x, len(first)) for x in xs)
    return _pattern_is_trivial(tuple(coefficients), pattern)


def brute_force_count(eq: Equation, A: GroupSet) -> SolutionCount:
    """Enumerate ``A^k`` and classify every solution; the independent oracle.

    The first ``k - 1`` variables are looped in Python; the last one is
    checked against all of ``A`` at once on coordinate vectors.
    """
    n = A.size
    k = eq.k
    if n ** k > BRUTE_FORCE_LIMIT:
        raise ValueError(f"|A|^k = {n ** k} exceeds the brute-force limit {BRUTE_FORCE_LIMIT}")
    if n == 0:
        return SolutionCount(0, 0)
    g = A.group
    factors = np.array(g.factors, dtype=np.int64)
    elems = [int(x) for x in A.elements()]
    coords = g.coords_of(np.array(elems))
    cs = eq.coefficients
    last_terms = (cs[-1] * coords) % factors
    total = trivial = 0
    for prefix in itertools.product(range(n), repeat=k - 1):
        partial = sum(cs[i] * coords[j] for i, j in enumerate(prefix)) % factors
        hits = np.flatnonzero(np.all((partial + last_terms) % factors == 0, axis=1))
        for h in hits:
            total += 1
            xs = tuple(elems[j] for j in prefix) + (elems[h],)
            if _is_trivial_tuple(cs, xs):
                trivial += 1
    return SolutionCount(total, trivial)


def solution_free_identity(A: GroupSet) -> int:
    """``1_{-3.A} * 1_A * 1_{A+A}(0)``; equals ``|A|`` when ``A`` has no nontrivial ``x+y+z=3w``."""
    if A.size == 0:
        return 0
    g = A.group
    minus3 = GroupSet.from_elements(g, g.scale_indices(A.elements(), -3))
    h = convolve(DenseFunction.indicator(minus3), DenseFunction.indicator(A))
    # (h * 1_{A+A})(0) = sum over y with -y in A+A of h(y)
    return int(np.sum(h.values[sumset(A, A).neg().members]))
