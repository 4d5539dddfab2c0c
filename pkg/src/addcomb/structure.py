"""Arithmetic progressions and affine subspaces inside three-fold sumsets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bohr import Progression
from .group import GroupSet, GroupSpec, is_prime, sumset
from .parallel import chunks, pmap
from .spectral import DenseFunction, convolve

__all__ = [
    "AffineSubspace",
    "StructureWitness",
    "three_fold_sumset",
    "longest_ap",
    "longest_ap_brute",
    "largest_affine_subspace",
    "xv_witness",
]


def three_fold_sumset(A: GroupSet, B: GroupSet, C: GroupSet) -> GroupSet:
    return sumset(sumset(A, B), C)


@dataclass(frozen=True)
class AffineSubspace:
    """``shift + span(basis)`` in ``F_q^n``; ``dimension = -1`` encodes the empty set."""

    group: GroupSpec
    shift: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return -1 if self.shift < 0 else len(self.basis)

    def members(self) -> GroupSet:
        g = self.group
        if self.shift < 0:
            return GroupSet.empty(g)
        q = g.field_size
        pts = np.array([g.coords(self.shift)], dtype=np.int64)
        for v in self.basis:
            v = np.array(v, dtype=np.int64)
            pts = (pts[None, :, :] + np.arange(q)[:, None, None] * v[None, None, :]).reshape(-1, g.rank)
        return GroupSet.from_elements(g, g.ravel(pts))


@dataclass
class StructureWitness:
    kind: str  # "ap" | "subspace" | "xv"
    host: GroupSet
    ap: Progression | None = None
    subspace: AffineSubspace | None = None
    X: GroupSet | None = None
    verified: bool = False
    complete: bool = True
    info: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        if self.kind == "ap":
            return self.ap.length
        if self.kind == "subspace":
            return self.subspace.dimension
        return self.X.size


# -- progressions -------------------------------------------------------------

def _runs_for_step(bits: np.ndarray, N: int, s: int) -> tuple[int, int]:
    """Longest cyclic run of members along ``0, s, 2s, ...``: (length, smallest start element)."""
    orbit = (np.arange(N, dtype=np.int64) * s) % N
    b = bits[orbit]
    if b.all():
        return N, 0
    if not b.any():
        return 0, -1
    # rotate so the walk starts just after a non-member; runs then never wrap
    r = int(np.flatnonzero(~b)[0])
    rot = np.roll(b, -(r + 1))
    orb = np.roll(orbit, -(r + 1))
    padded = np.concatenate(([False], rot, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    lengths = ends - starts
    L = int(lengths.max())
    return L, int(orb[starts[lengths == L]].min())


def longest_ap(S: GroupSet) -> StructureWitness:
    """Longest progression contained in ``S`` over ``Z/N``, ``N`` prime.

    Steps ``s`` and ``N - s`` give the same progressions reversed, so only
    ``1 <= s <= (N-1)/2`` is scanned.  Ties go to the smallest step, then the
    smallest start.
    """
    g = S.group
    if g.rank != 1 or not is_prime(g.order):
        raise ValueError("longest_ap needs Z/N with N prime")
    N = g.order
    bits = S.members
    if S.size == 0:
        return StructureWitness("ap", S, Progression(0, 1, 0), verified=True)
    if S.size == N:
        return StructureWitness("ap", S, Progression(0, 1, N), verified=True)
    steps = np.arange(1, max(2, (N - 1) // 2 + 1))

    def work(rng: range):
        return [(_runs_for_step(bits, N, int(steps[i])), int(steps[i])) for i in rng]

    best = (1, int(S.elements()[0]), 1)
    for part in pmap(work, chunks(steps.size, 256)):
        for (L, start), s in part:
            if L > best[0]:
                best = (L, start, s)
    L, start, s = best
    ap = Progression(start, s, L)
    ok = all(bits[x] for x in ap.elements(N))
    return StructureWitness("ap", S, ap, verified=ok)


def longest_ap_brute(S: GroupSet) -> int:
    """Independent oracle: walk from every (start, step) until leaving ``S``."""
    N = S.group.order
    bits = S.members
    best = 0
    for a in range(N):
        if not bits[a]:
            continue
        best = max(best, 1)
        for s in range(1, N):
            L = 0
            x = a
            while L < N and bits[x]:
                L += 1
                x = (x + s) % N
            best = max(best, L)
    return best


# -- affine subspaces ------------------------------------------------------------

class _Budget(Exception):
    pass


def largest_affine_subspace(S: GroupSet, budget: int = 200_000) -> StructureWitness:
    """Largest affine subspace contained in ``S`` over ``F_q^n``.

    From each shift ``s`` the admissible directions are the ``w`` with the
    whole line ``s + F_q w`` in ``S``; a subspace through ``s`` must have all
    its nonzero vectors admissible, which bounds its dimension by
    ``log_q(#admissible + 1)`` and restricts the depth-first extension.
    """
    g = S.group
    q = g.field_size
    if q is None:
        raise ValueError("largest_affine_subspace needs F_q^n")
    if S.size == 0:
        return StructureWitness("subspace", S, subspace=AffineSubspace(g, -1, ()), verified=True)
    order = g.order
    coords = g.coords_array
    scale = [g.scale_indices(np.arange(order), c) for c in range(q)]
    bits = S.members
    best_dim, best = 0, AffineSubspace(g, int(S.elements()[0]), ())
    nodes = 0
    complete = True

    def span_members(W: np.ndarray, v: int) -> np.ndarray:
        cols = [g.add_indices(W, scale[c][v]) for c in range(q)]
        return np.concatenate(cols)

    def extra_dims(n_cand: int, t: int) -> int:
        # W' of dimension t + r has q^t (q^r - 1) vectors outside W, all candidates
        return int(math.floor(math.log(n_cand / q ** t + 1, q) + 1e-9))

    ceiling = int(math.floor(math.log(S.size, q) + 1e-9))
    idx = np.arange(order, dtype=np.int64)
    try:
        for s in S.elements():
            s = int(s)
            if best_dim >= ceiling:
                break
            moved = g.add_indices(idx, s)
            # only subspaces whose smallest element is s are searched from s
            allowed = bits[moved] & (moved >= s)
            allowed[0] = True
            ok = np.ones(order, dtype=bool)
            for c in range(1, q):
                ok &= allowed[scale[c]]
            ok[0] = False
            if extra_dims(int(ok.sum()), 0) <= best_dim:
                continue

            def dfs(W: np.ndarray, basis: list[int], cand: np.ndarray):
                nonlocal nodes, best_dim, best
                nodes += 1
                if nodes > budget:
                    raise _Budget
                t = len(basis)
                if t > best_dim:
                    best_dim = t
                    best = AffineSubspace(g, s, tuple(tuple(int(a) for a in coords[b]) for b in basis))
                cand = cand.copy()
                while t + extra_dims(int(cand.sum()), t) > best_dim:
                    v = int(np.argmax(cand))
                    new = span_members(W, v)
                    # v' stays a candidate only if every W' + c v' is admissible
                    nxt = cand.copy()
                    nxt[new] = False
                    live = np.flatnonzero(nxt)
                    for c in range(1, q):
                        if live.size == 0:
                            break
                        live = live[allowed[g.add_indices(new[:, None], scale[c][live][None, :])].all(axis=0)]
                    nxt[:] = False
                    nxt[live] = True
                    dfs(new, basis + [v], nxt)
                    if best_dim >= ceiling:
                        return
                    cand[new] = False  # every subspace through span(W, v) has been explored

            dfs(np.zeros(1, dtype=np.int64), [], ok)
    except _Budget:
        complete = False
    members = best.members()
    return StructureWitness("subspace", S, subspace=best, verified=members.issubset(S),
                            complete=complete, info={"nodes": nodes})


# -- X + V containment -------------------------------------------------------------

def xv_witness(A: GroupSet, B: GroupSet, C: GroupSet, V: GroupSet, eta: float) -> StructureWitness:
    """``X = {x in B + t : |(x + V) cap (A+B+C)| >= (1 - eta)|V|}`` for the best shift ``t``.

    ``t`` maximises ``|A cap (t - C)|`` (smallest such ``t``).  When
    ``eta < 1/|V|`` every ``x`` in ``X`` has all of ``x + V`` inside the
    sumset; that containment is then re-checked element by element.
    """
    for Y in (A, B, C, V):
        if Y.size == 0:
            raise ValueError("inputs must be nonempty")
    g = A.group
    for Y in (B, C, V):
        g.check_same(Y.group)
    eta = Fraction(str(eta)) if isinstance(eta, float) else Fraction(eta)
    ac = np.asarray(convolve(DenseFunction.indicator(A), DenseFunction.indicator(C)).values, dtype=np.int64)
    t = int(np.argmax(ac))
    host = three_fold_sumset(A, B, C)
    cover = np.asarray(convolve(DenseFunction.indicator(host), DenseFunction.indicator(V.neg())).values,
                       dtype=np.int64)  # cover[x] = |(x + V) cap host|
    Bt = B.translate(t)
    need = (1 - eta) * V.size
    good = cover * need.denominator >= need.numerator
    X = GroupSet(g, Bt.members & good)
    info = {"t": t, "overlap": int(ac[t]), "X_size": X.size, "B_size": B.size,
            "large": 100 * X.size >= 99 * B.size, "eta": eta}
    certified = None
    if eta * V.size < 1:
        certified = sumset(X, V).issubset(host) if X.size else True
    info["certified"] = certified
    return StructureWitness("xv", host, X=X, verified=certified is not False, info=info)
