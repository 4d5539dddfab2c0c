"""Solution-free sets: Behrend spheres in ``[N]``, products in ``F_q^n`` and search.

Everything returned here has been checked against the equation after it was
built; nothing relies on the construction being correct by design.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .equations import XYZ3W, Equation, _is_trivial_tuple, brute_force_count, count_nontrivial, has_nontrivial
from .errors import VerificationError
from .group import GroupSet, GroupSpec, IntervalEmbedding, embed_interval

__all__ = [
    "BehrendParams",
    "behrend_params",
    "behrend_set",
    "ProductResult",
    "product_construction",
    "SearchResult",
    "search_extremal_exact",
    "search_extremal_greedy",
    "verify_solution_free",
    "ExtensionOracle",
]

BEHREND_LIMIT = 10 ** 7
EXACT_COUNT_LIMIT = 1 << 24
BRUTE_VERIFY_LIMIT = 10 ** 6
PRODUCT_SAMPLES = 10 ** 6


def verify_solution_free(eq: Equation, A: GroupSet) -> str:
    """Raise :class:`VerificationError` unless ``A`` is solution-free; return the method used."""
    if has_nontrivial(eq, A):
        raise VerificationError(f"set of size {A.size} has {count_nontrivial(eq, A)} nontrivial solutions")
    if A.size ** eq.k <= BRUTE_VERIFY_LIMIT:
        if brute_force_count(eq, A).nontrivial:
            raise VerificationError("brute-force enumeration disagrees with the convolution count")
        return "brute_force"
    return "exact_count"


# -- Behrend spheres ----------------------------------------------------------

@dataclass(frozen=True)
class BehrendParams:
    d: int
    n: int
    base: int
    level: int
    count: int

    @property
    def N(self) -> int:
        return self.base ** self.n


def _digit_vectors(d: int, n: int) -> np.ndarray:
    grids = np.indices((d,) * n).reshape(n, -1).T
    return grids.astype(np.int64)


def behrend_params(d: int, n: int) -> BehrendParams:
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    m = 3 * d - 2
    if m ** n > BEHREND_LIMIT:
        raise ValueError(f"m^n = {m ** n} exceeds {BEHREND_LIMIT}")
    norms = np.sum(_digit_vectors(d, n) ** 2, axis=1)
    counts = np.bincount(norms, minlength=n * (d - 1) ** 2 + 1)
    counts[0] = 0
    level = int(np.argmax(counts))  # argmax takes the first, i.e. the smallest level
    return BehrendParams(d, n, m, level, int(counts[level]))


def behrend_set(d: int, n: int, params: BehrendParams | None = None) -> tuple[GroupSet, IntervalEmbedding]:
    """Digit vectors in ``{0..d-1}^n`` on the fullest sphere, read in base ``3d - 2``.

    With that base a sum of three digits never carries, so ``x + y + z = 3w``
    holds digitwise and strict convexity of the sphere forces ``x = y = z = w``.
    The set is returned inside ``embed_interval(m^n)`` and re-verified.
    """
    params = params or behrend_params(d, n)
    vecs = _digit_vectors(d, n)
    chosen = vecs[np.sum(vecs ** 2, axis=1) == params.level]
    weights = params.base ** np.arange(n, dtype=np.int64)
    ints = sorted(int(v) for v in chosen @ weights)
    emb = embed_interval(params.N)
    A = emb.image(ints)
    verify_solution_free(XYZ3W, A)
    return A, emb


# -- products -----------------------------------------------------------------

@dataclass(frozen=True)
class ProductResult:
    set: GroupSet
    verification: str
    samples: int = 0


def _field_of(g: GroupSpec) -> int:
    q = g.field_size
    if q is None:
        raise ValueError(f"{g} is not F_q^n for a prime q")
    return q


def _sample_check(eq: Equation, A: GroupSet, samples: int, seed: int) -> None:
    """Draw tuples with all but one coordinate uniform in ``A`` and solve for the last."""
    g = A.group
    q = _field_of(g)
    cs = eq.coefficients
    units = [i for i, c in enumerate(cs) if c % q]
    if not units:
        return
    j = units[0]
    inv = pow(cs[j] % q, -1, q)
    rng = np.random.default_rng(seed)
    elems = A.elements()
    chunk = 1 << 16
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        picks = elems[rng.integers(0, elems.size, size=(size, len(cs)))]
        acc = np.zeros((size, g.rank), dtype=np.int64)
        for i, c in enumerate(cs):
            if i != j:
                acc += c * g.coords_of(picks[:, i])
        solved = g.ravel((-inv * acc) % q)
        picks[:, j] = solved
        hit = A.members[solved]
        for row in picks[hit]:
            xs = tuple(int(v) for v in row)
            if not _is_trivial_tuple(cs, xs):
                raise VerificationError(f"sampled nontrivial solution {xs}")
        done += size


def product_construction(S: GroupSet, k: int, eq: Equation = XYZ3W, seed: int = 0) -> ProductResult:
    """``S^k`` inside ``F_q^{mk}``; block ``i`` holds coordinates ``i*m .. i*m + m - 1``."""
    g = S.group
    q = _field_of(g)
    if k < 1:
        raise ValueError("k must be >= 1")
    if has_nontrivial(eq, S):
        raise ValueError("input set is not solution-free")
    m = g.rank
    big = GroupSpec.vector_space(q, m * k)
    elems = S.elements().astype(object) if q ** (m * k) >= 2 ** 62 else S.elements()
    block = q ** m
    idx = np.zeros(1, dtype=elems.dtype)
    for i in range(k):
        idx = (idx[:, None] + elems[None, :] * block ** i).ravel()
    P = GroupSet.from_elements(big, [int(v) for v in idx])
    if P.size != S.size ** k:
        raise VerificationError("product lost elements")
    if big.order <= EXACT_COUNT_LIMIT:
        return ProductResult(P, verify_solution_free(eq, P))
    _sample_check(eq, P, PRODUCT_SAMPLES, seed)
    return ProductResult(P, "sampled", PRODUCT_SAMPLES)


# -- extremal search ------------------------------------------------------------

class ExtensionOracle:
    """Incremental test for which elements can join a solution-free set.

    A nontrivial solution in ``S + {y}`` that uses ``y`` puts ``y`` on a
    nonempty set ``Q`` of positions and elements of ``S`` on the rest ``J``.
    If ``sum_Q c_i = 0`` the tuple with ``y`` replaced by any member of ``S``
    is a solution in ``S`` with the same block sums, so it cannot be
    nontrivial; otherwise every such tuple is nontrivial.  So ``y`` is
    blocked exactly when ``c_Q y`` lies in ``-(sum_{i in J} c_i S)`` for some
    ``Q`` with ``c_Q != 0``.  The same reasoning with a second new element
    ``x`` gives :meth:`forbidden`.
    """

    def __init__(self, eq: Equation, group: GroupSpec):
        self.eq = eq
        self.group = group
        cs = eq.coefficients
        k = eq.k
        full = (1 << k) - 1
        self._block: dict[int, set[int]] = {}
        self._pair: dict[int, set[tuple[int, int]]] = {}
        for mask_q in range(1, full + 1):
            cy = sum(cs[i] for i in range(k) if mask_q >> i & 1)
            rest = full ^ mask_q
            if cy:
                self._block.setdefault(rest, set()).add(cy)
            sub = rest
            while sub:
                cx = sum(cs[i] for i in range(k) if sub >> i & 1)
                if cx or cy:
                    self._pair.setdefault(rest ^ sub, set()).add((cx, cy))
                sub = (sub - 1) & rest
        ar = np.arange(group.order, dtype=np.int64)
        coeffs = {c for v in self._block.values() for c in v}
        coeffs |= {c for v in self._pair.values() for pair in v for c in pair}
        self._scale = {c: group.scale_indices(ar, c) for c in coeffs}

    def dilate_sums(self, S) -> dict[int, np.ndarray]:
        """``mask -> indices of sum_{i in mask} c_i S`` for every subset mask of positions."""
        g = self.group
        cs = self.eq.coefficients
        S = np.asarray(S, dtype=np.int64)
        out = {0: np.zeros(1, dtype=np.int64)}
        for mask in range(1, 1 << self.eq.k):
            low = (mask & -mask).bit_length() - 1
            prev = out[mask & (mask - 1)]
            if S.size == 0:
                out[mask] = np.zeros(0, dtype=np.int64)
                continue
            term = g.scale_indices(S, cs[low])
            out[mask] = np.unique(g.add_indices(prev[:, None], term[None, :]))
        return out

    def _hits(self, target: np.ndarray, cy: int) -> np.ndarray:
        bits = np.zeros(self.group.order, dtype=bool)
        bits[target] = True
        return bits[self._scale[cy]]

    def blocked(self, S, sums=None) -> np.ndarray:
        """Boolean mask of ``y`` for which ``S + {y}`` has a nontrivial solution using ``y``."""
        g = self.group
        sums = sums if sums is not None else self.dilate_sums(S)
        out = np.zeros(g.order, dtype=bool)
        for J, cys in self._block.items():
            if sums[J].size == 0:
                continue
            target = g.neg_indices(sums[J])
            for cy in cys:
                out |= self._hits(target, cy)
        return out

    def forbidden(self, S, x: int, sums=None) -> np.ndarray:
        """Mask of ``y`` whose addition to ``S + {x}`` creates a solution using both ``x`` and ``y``."""
        g = self.group
        sums = sums if sums is not None else self.dilate_sums(S)
        out = np.zeros(g.order, dtype=bool)
        for J, pairs in self._pair.items():
            base = sums[J]
            if base.size == 0:
                continue
            for cx, cy in pairs:
                shift = int(self._scale[cx][x])
                target = g.neg_indices(g.add_indices(base, shift))
                out |= self._hits(target, cy)
        return out


@dataclass
class SearchResult:
    size: int
    witness: GroupSet
    complete: bool
    nodes: int
    mode: str
    embedding: IntervalEmbedding | None = None
    verification: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def integers(self) -> list[int] | None:
        return None if self.embedding is None else sorted(self.embedding.preimage(self.witness))


def _universe(eq: Equation, g) -> tuple[GroupSpec, np.ndarray, IntervalEmbedding | None]:
    if isinstance(g, GroupSpec):
        return g, np.arange(g.order, dtype=np.int64), None
    N = int(g)
    width = max(6, sum(c for c in eq.coefficients if c > 0) + 1)
    emb = embed_interval(N, width)
    return emb.group, np.arange(1, N + 1, dtype=np.int64), emb


class _Budget(Exception):
    pass


def _greedy_fill(oracle: ExtensionOracle, S: list[int], order, blocked: np.ndarray) -> tuple[list[int], np.ndarray]:
    S = list(S)
    blocked = blocked.copy()
    taken = set(S)
    sums = oracle.dilate_sums(S)
    for y in order:
        y = int(y)
        if blocked[y] or y in taken:
            continue
        blocked |= oracle.forbidden(S, y, sums)
        S.append(y)
        taken.add(y)
        sums = oracle.dilate_sums(S)
    return S, blocked


def search_extremal_greedy(eq: Equation, g, seed: int = 0, restarts: int = 8,
                           moves: int = 200, tenure: int = 5) -> SearchResult:
    """Random-order greedy insertion followed by tabu drop-one/refill moves.

    Each restart draws a fresh insertion order; a move removes one element
    that is not tabu and greedily refills, and is kept unless it shrinks the
    set.  Deterministic for a given seed.
    """
    group, universe, emb = _universe(eq, g)
    oracle = ExtensionOracle(eq, group)
    rng = np.random.default_rng(seed)
    outside = np.ones(group.order, dtype=bool)
    outside[universe] = False
    best: list[int] = []
    for _ in range(max(1, restarts)):
        S, _ = _greedy_fill(oracle, [], rng.permutation(universe), outside)
        if len(S) > len(best):
            best = S
        tabu: deque[int] = deque(maxlen=tenure)
        for _ in range(moves):
            choices = [s for s in S if s not in tabu]
            if not choices:
                break
            drop = choices[int(rng.integers(len(choices)))]
            kept = [s for s in S if s != drop]
            blocked = oracle.blocked(kept) | outside
            blocked[drop] = True
            T, _ = _greedy_fill(oracle, kept, rng.permutation(universe), blocked)
            if len(T) >= len(S):
                S = T
                tabu.append(drop)
            if len(S) > len(best):
                best = S
    witness = GroupSet.from_elements(group, best)
    how = verify_solution_free(eq, witness)
    return SearchResult(len(best), witness, False, 0, "greedy", emb, how)


def search_extremal_exact(eq: Equation, g, budget: int | None = None) -> SearchResult:
    """Largest solution-free subset of ``[N]`` (``g`` an int) or of a group.

    Branch and bound over elements in increasing order; the first element is
    fixed by translation invariance (the minimum of a subset of ``[N]`` can be
    moved to 1, any subset of a group can be moved to contain 0).  A branch
    is cut when its size plus the number of still-addable elements cannot
    beat the incumbent, which starts from a greedy run.  When the node budget
    runs out the result is marked incomplete and holds the best set found.
    """
    budget = budget if budget is not None else 1 << 30
    group, universe, emb = _universe(eq, g)
    oracle = ExtensionOracle(eq, group)
    greedy = search_extremal_greedy(eq, g, seed=0, restarts=2, moves=50)
    best = [int(x) for x in greedy.witness.elements()]
    nodes = 0

    def expand(S: list[int], cands: np.ndarray):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise _Budget
        if len(S) > len(best):
            best = list(S)
        if cands.size == 0:
            return
        sums = oracle.dilate_sums(S)
        for i in range(cands.size):
            if len(S) + cands.size - i <= len(best):
                return
            x = int(cands[i])
            rest = cands[i + 1:]
            child = rest[~oracle.forbidden(S, x, sums)[rest]]
            if len(S) + 1 + child.size > len(best):
                expand(S + [x], child)

    root = int(universe[0])
    rest = universe[1:]
    complete = True
    try:
        expand([root], rest[~oracle.blocked([root])[rest]])
    except _Budget:
        complete = False
    witness = GroupSet.from_elements(group, best)
    how = verify_solution_free(eq, witness)
    return SearchResult(len(best), witness, complete, min(nodes, budget), "exact", emb, how)
