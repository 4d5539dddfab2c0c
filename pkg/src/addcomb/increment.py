"""Density increments for solution-free sets and the iteration that drives them.

Two engines share the bookkeeping:

* ``ff``: ``A`` in ``F_q^n``.  Candidate subspaces are joint annihilators of
  a few characters from the large spectra of ``A``, ``A+A`` and ``-3.A``;
  every coset is counted exactly and the first coset (by smallest element)
  with density at least ``target * alpha`` wins.  The iteration restricts
  ``A - x`` to the subspace and re-coordinatises it as ``F_q^(n - codim)``.
* ``bohr``: ``A`` inside a Bohr set ``B`` of ``Z/N``.  A two-scale selection
  either finds an increment on a narrow rescaling directly or produces a
  translate on which ``A`` is dense at two scales; the sumset of the two
  pieces then decides which sets' spectra seed the candidate sub-Bohr sets.

Whatever the search claims, the returned step carries the set it was
computed on and :meth:`IncrementStep.recount` recomputes its density from
scratch.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .bohr import BohrSet, _bohr_keys, is_regular, regular_radius
from .equations import XYZ3W, has_nontrivial
from .errors import NeitherCaseError, NotFoundError
from .group import GroupSet, GroupSpec, dilate, is_prime, sumset
from .linalg import normalize_projective, nullspace_mod, rref_mod
from .spectral import DenseFunction, convolve, fourier_coefficients

__all__ = [
    "SumsetCase",
    "Termination",
    "Subspace",
    "IncrementStep",
    "IncrementTrace",
    "TwoScaleResult",
    "BohrParams",
    "classify_case",
    "increment_step_ff",
    "two_scale_select",
    "increment_step_bohr",
    "iterate",
    "step_bound",
]

SPEC_LEVELS_FF = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
SPEC_LEVELS_BOHR = (Fraction(1, 2), Fraction(1, 4))


class SumsetCase(str, enum.Enum):
    LARGE_SUMSET = "LARGE_SUMSET"
    SMALL_SUMSET = "SMALL_SUMSET"


class Termination(str, enum.Enum):
    DENSITY_CAP = "DENSITY_CAP"
    STRUCTURE_EXHAUSTED = "STRUCTURE_EXHAUSTED"
    STEP_FAILED = "STEP_FAILED"
    BUDGET = "BUDGET"


def classify_case(A: GroupSet) -> SumsetCase:
    """``LARGE_SUMSET`` iff ``mu(A+A) >= 1/2``."""
    if A.size == 0:
        raise ValueError("A must be nonempty")
    S = sumset(A, A)
    return SumsetCase.LARGE_SUMSET if 2 * S.size >= A.group.order else SumsetCase.SMALL_SUMSET


# -- subspaces of F_q^n ---------------------------------------------------------

class Subspace:
    """``V = {x : <gamma, x> = 0 for every annihilated character gamma}`` in ``F_q^n``."""

    def __init__(self, group: GroupSpec, characters):
        q = group.field_size
        if q is None:
            raise ValueError(f"{group} is not F_q^n")
        self.group = group
        self.q = q
        chars = np.array(characters, dtype=np.int64).reshape(-1, group.rank) if len(characters) else \
            np.zeros((0, group.rank), dtype=np.int64)
        if chars.shape[0]:
            R, _ = rref_mod(chars, q)
        else:
            R = chars
        self.annihilated = R
        self.basis, self.free_columns = nullspace_mod(R, q, group.rank)

    @classmethod
    def from_indices(cls, group: GroupSpec, gammas) -> "Subspace":
        return cls(group, [group.coords(int(gm)) for gm in gammas])

    @property
    def codim(self) -> int:
        return int(self.annihilated.shape[0])

    @property
    def dimension(self) -> int:
        return self.group.rank - self.codim

    @property
    def size(self) -> int:
        return self.q ** self.dimension

    @property
    def key(self) -> tuple:
        return tuple(map(tuple, self.annihilated.tolist()))

    def labels(self) -> np.ndarray:
        """Coset label of every element: ``x`` and ``y`` share a label iff ``x - y`` is in ``V``."""
        if self.codim == 0:
            return np.zeros(self.group.order, dtype=np.int64)
        vals = (self.group.coords_array @ self.annihilated.T) % self.q
        return vals @ (self.q ** np.arange(self.codim, dtype=np.int64))

    @property
    def members(self) -> GroupSet:
        return GroupSet(self.group, self.labels() == 0)

    def coset(self, x: int) -> GroupSet:
        lab = self.labels()
        return GroupSet(self.group, lab == lab[x])

    def coordinates(self, elems) -> np.ndarray:
        """Coordinates of members of ``V`` in :attr:`basis`."""
        return self.group.coords_of(elems)[..., self.free_columns]

    def __repr__(self):
        return f"Subspace(F_{self.q}^{self.group.rank}, codim={self.codim})"


Structure = Union[Subspace, BohrSet]


@dataclass
class IncrementStep:
    """``A`` has density ``alpha_new`` on ``x - structure`` (``alpha`` was its density before)."""

    structure: Structure
    x: int
    alpha: Fraction
    alpha_new: Fraction
    source: GroupSet
    case: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def structure_size(self) -> int:
        return self.structure.size

    @property
    def codim(self) -> int | None:
        return self.structure.codim if isinstance(self.structure, Subspace) else None

    @property
    def rank(self) -> int | None:
        return self.structure.rank if isinstance(self.structure, BohrSet) else None

    @property
    def radius(self) -> float | None:
        return self.structure.radius if isinstance(self.structure, BohrSet) else None

    def piece(self) -> GroupSet:
        """``x - structure``."""
        g = self.source.group
        members = self.structure.members.elements()
        return GroupSet.from_elements(g, g.add_indices(g.neg_indices(members), self.x))

    def recount(self) -> Fraction:
        """``|A intersect (x - structure)| / |structure|`` from scratch."""
        piece = self.piece()
        return Fraction((self.source & piece).size, self.structure.members.size)

    def verify(self) -> bool:
        return self.recount() == self.alpha_new


def _threshold_hit(counts: np.ndarray, size: int, alpha: Fraction, target: Fraction) -> np.ndarray:
    """Exact ``counts / size >= target * alpha`` elementwise."""
    bound = target * alpha * size
    return counts * bound.denominator >= bound.numerator


def _ff_pool(A: GroupSet, levels=SPEC_LEVELS_FF) -> list[int]:
    """Character indices, one per projective class, in candidate order."""
    g = A.group
    q = g.field_size
    sources = []
    for W in (A, sumset(A, A), dilate(g, -3, A)):
        if all(W != V for V in sources):
            sources.append(W)
    mags = [np.abs(fourier_coefficients(W)) / W.size for W in sources]
    seen: set[tuple] = set()
    pool: list[int] = []
    for delta in levels:
        for mag in mags:
            hits = np.flatnonzero(mag ** 2 >= float(delta) ** 2 - 1e-12)
            hits = hits[hits != 0]
            order = hits[np.lexsort((hits, -mag[hits]))]
            for gm in order:
                key = normalize_projective(g.coords(int(gm)), q)
                if key not in seen:
                    seen.add(key)
                    pool.append(g.index(key))
    return pool


def increment_step_ff(A: GroupSet, target=Fraction(3, 2), max_codim: int = 4,
                      max_candidates: int = 20000) -> IncrementStep:
    """First ``(V, x)`` in candidate order with ``|A cap (x - V)| >= target alpha |V|``."""
    g = A.group
    q = g.field_size
    if q is None:
        raise ValueError("increment_step_ff needs F_q^n")
    if q % 3 == 0:
        raise ValueError("q must not be divisible by 3")
    if A.size == 0:
        raise ValueError("A must be nonempty")
    target = Fraction(target)
    alpha = A.density
    max_codim = min(max_codim, g.rank - 1)
    case = classify_case(A).value
    pool = _ff_pool(A)
    members = A.members
    tried = 0
    seen: set[tuple] = set()
    best = Fraction(0)
    for r in range(1, max_codim + 1):
        for combo in itertools.combinations(pool, r):
            if tried >= max_candidates:
                break
            V = Subspace.from_indices(g, combo)
            if V.codim != r or V.key in seen:
                continue
            seen.add(V.key)
            tried += 1
            lab = V.labels()
            counts = np.bincount(lab[members], minlength=q ** r)
            per_x = counts[lab]
            hit = _threshold_hit(per_x, V.size, alpha, target)
            top = Fraction(int(counts.max()), V.size)
            best = max(best, top)
            if hit.any():
                x = int(np.argmax(hit))
                return IncrementStep(V, x, alpha, Fraction(int(per_x[x]), V.size), A, case,
                                     {"candidates": tried, "characters": [int(c) for c in combo]})
    raise NotFoundError("no subspace reaches the target density",
                        {"case": case, "candidates": tried, "pool": len(pool),
                         "best_density": best, "alpha": alpha})


# -- Bohr sets -----------------------------------------------------------------

@dataclass(frozen=True)
class BohrParams:
    C: float = 100.0
    target: Fraction = Fraction(5, 4)
    min_structure_size: int = 2
    max_extra_rank: int = 2
    radius_steps: int = 12
    max_candidates: int = 4000
    max_pool: int = 32


@dataclass
class TwoScaleResult:
    case: str  # "CASE1" or "CASE2"
    x: int
    structure: BohrSet | None
    density_1: Fraction
    density_2: Fraction
    precondition_held: bool


def _relative_counts(A: GroupSet, T: GroupSet) -> np.ndarray:
    """``x -> |A cap (x - T)|``."""
    vals = convolve(DenseFunction.indicator(A), DenseFunction.indicator(T)).values
    return np.asarray(vals, dtype=np.int64)


def _within(Bp: BohrSet, B: BohrSet, delta: float) -> bool:
    return set(Bp.frequencies) >= set(B.frequencies) and Bp.radius <= delta * B.radius * (1 + 1e-12)


def two_scale_select(A: GroupSet, B: BohrSet, B1: BohrSet, B2: BohrSet, C: float = 100.0) -> TwoScaleResult:
    """Either a translate of ``B1`` or ``B2`` carrying density ``>= 5/4 alpha`` (the better one),
    or the first ``x`` in ``B`` with both ``1_A * mu_Bi(x) >= 7/10 alpha``.

    Raises :class:`NeitherCaseError` when the exhaustive scan finds neither.
    """
    Bm = B.members
    if not A.issubset(Bm):
        raise ValueError("A must be a subset of B")
    if A.size == 0:
        raise ValueError("A must be nonempty")
    alpha = Fraction(A.size, Bm.size)
    d = max(B.rank, 1)
    delta = float(alpha) / (C * d)
    pre = _within(B1, B, delta) and _within(B2, B, delta) and is_regular(B)
    sets = (B1.members, B2.members)
    counts = [_relative_counts(A, S) for S in sets]
    best = None
    for i, (c, S) in enumerate(zip(counts, sets)):
        x = int(np.argmax(c))
        dens = Fraction(int(c[x]), S.size)
        if dens >= Fraction(5, 4) * alpha and (best is None or dens > best[1]):
            best = (i, dens, x)
    if best is not None:
        i, dens, x = best
        d1 = Fraction(int(counts[0][x]), sets[0].size)
        d2 = Fraction(int(counts[1][x]), sets[1].size)
        return TwoScaleResult("CASE2", x, (B1, B2)[i], d1, d2, pre)
    ok = Bm.members.copy()
    for c, S in zip(counts, sets):
        ok &= _threshold_hit(c, S.size, alpha, Fraction(7, 10))
    if ok.any():
        x = int(np.argmax(ok))
        return TwoScaleResult("CASE1", x, None, Fraction(int(counts[0][x]), sets[0].size),
                              Fraction(int(counts[1][x]), sets[1].size), pre)
    raise NeitherCaseError("neither outcome of the two-scale selection holds",
                           {"alpha": alpha, "precondition_held": pre,
                            "max_density_1": Fraction(int(counts[0].max()), sets[0].size),
                            "max_density_2": Fraction(int(counts[1].max()), sets[1].size)})


def _clamped_scale(B: BohrSet, delta: float, min_size: int) -> tuple[BohrSet, dict]:
    """``B_delta`` made regular, widened to at least ``min_size`` elements when it degenerates."""
    info = {"delta": delta, "clamped": False, "regular": False}
    Bs = B.scale(delta)
    if Bs.size < min_size:
        need = np.sort(B.keys)[min(min_size, B.group.order) - 1]
        Bs = BohrSet(B.group, B.frequencies, float(B.table[need]), keys=B.keys)
        info["clamped"] = True
    try:
        Br = Bs.scale(regular_radius(Bs))
    except NotFoundError:
        Br = None
    if Br is not None and Br.size >= min_size:
        Bs = Br
        info["regular"] = True
    info["radius"] = Bs.radius
    info["size"] = Bs.size
    return Bs, info


def _best_translate(A: GroupSet, T: BohrSet) -> tuple[int, Fraction]:
    c = _relative_counts(A, T.members)
    x = int(np.argmax(c))
    return x, Fraction(int(c[x]), T.size)


def _bohr_pool(sources: list[GroupSet], N: int) -> list[int]:
    seen: set[int] = set()
    pool: list[int] = []
    for delta in SPEC_LEVELS_BOHR:
        for X in sources:
            if X.size == 0:
                continue
            mag = np.abs(fourier_coefficients(X)) / X.size
            hits = np.flatnonzero(mag ** 2 >= float(delta) ** 2 - 1e-12)
            hits = hits[hits != 0]
            for gm in hits[np.lexsort((hits, -mag[hits]))]:
                key = min(int(gm), N - int(gm))  # gamma and -gamma give the same constraint
                if key not in seen:
                    seen.add(key)
                    pool.append(key)
    return pool


def increment_step_bohr(A: GroupSet, B: BohrSet, params: BohrParams | None = None) -> IncrementStep:
    """A translate of a sub-Bohr set of ``B`` on which ``A`` has density ``>= target * alpha``."""
    params = params or BohrParams()
    g = A.group
    if g.rank != 1 or not is_prime(g.order) or g.order == 3:
        raise ValueError("increment_step_bohr needs Z/N with N prime and N != 3")
    Bm = B.members
    if A.size == 0 or not A.issubset(Bm):
        raise ValueError("A must be a nonempty subset of B")
    alpha = Fraction(A.size, Bm.size)
    target = Fraction(params.target)
    d = max(B.rank, 1)
    C = params.C
    diag: dict = {"alpha": alpha, "regular_B": is_regular(B), "solution_free": not has_nontrivial(XYZ3W, A)}
    diag["size_hypothesis"] = math.log(Bm.size) >= 3 * d * math.log(C * d / float(alpha))

    B1, info1 = _clamped_scale(B, float(alpha) / (C * d), params.min_structure_size)
    B2, info2 = _clamped_scale(B1, 1.0 / (C * d), params.min_structure_size)
    diag["B1"], diag["B2"] = info1, info2
    diag["B1_growth_ok"] = B1.size_at(B1.radius * (1 + 3.0 / (C * d))) <= 1.01 * B1.size

    def step(T: BohrSet, x: int, dens: Fraction, case: str) -> IncrementStep:
        return IncrementStep(T, x, alpha, dens, A, case, diag)

    try:
        sel = two_scale_select(A, B, B1, B2, C)
    except NeitherCaseError as exc:
        diag["two_scale"] = "NEITHER"
        diag.update(exc.diagnostics)
        sel = None
    best_seen = Fraction(0)
    if sel is not None:
        diag["two_scale"] = sel.case
        diag["precondition_held"] = sel.precondition_held
        if sel.case == "CASE2":
            dens = sel.density_1 if sel.structure is B1 else sel.density_2
            if sel.structure.size < Bm.size and dens >= target * alpha:
                return step(sel.structure, sel.x, dens, "CASE2")

    # designated sets for the spectrum, by branch
    sources: list[GroupSet] = []
    branch = "NONE"
    if sel is not None and sel.case == "CASE1":
        x = sel.x
        shifted = A.translate(g.neg(x))
        A1 = shifted & B1.members
        A2 = shifted & B2.members
        a1 = Fraction(7, 10) * alpha
        S12 = sumset(A1, A2) if A1.size and A2.size else A1
        if A1.size and A2.size:
            if S12.size * 2 * a1 <= A1.size:
                branch = "SMALL_SUMSET"
                sources = [A2, A1, sumset(A1, A2).neg()]
            else:
                branch = "LARGE_SUMSET"
                wide = B1.scale(1 + 3.0 / (C * d)).members
                sources = [dilate(g, -3, A2), A1, wide - S12]
    sources.append(A)
    diag["branch"] = branch

    pool = _bohr_pool(sources, g.order)[:params.max_pool]
    diag["pool"] = len(pool)
    tried = built = 0
    # spectrum-derived candidates first, then plain rescalings of B
    candidates = itertools.chain.from_iterable(
        itertools.combinations(pool, extra) for extra in range(1, params.max_extra_rank + 1))
    candidates = itertools.chain(candidates, [()])
    scanned: set[bytes] = set()
    for lam in candidates:
        built += 1
        if built > params.max_candidates:
            break
        keys = B.keys if not lam else np.maximum(B.keys, _bohr_keys(g, tuple(lam)))
        T0 = BohrSet(g, B.frequencies + tuple(lam), B.radius, keys=keys)
        for i in range(params.radius_steps):
            if tried >= params.max_candidates:
                break
            T = T0.scale(0.5 ** i)
            if T.size < params.min_structure_size:
                break
            sig = T.members.members.tobytes()
            if T.size >= Bm.size or sig in scanned:
                continue
            scanned.add(sig)
            tried += 1
            x, dens = _best_translate(A, T)
            best_seen = max(best_seen, dens)
            if dens >= target * alpha:
                diag["candidates"] = tried
                return step(T, x, dens, branch if lam else "RESCALE")
    diag["candidates"] = tried
    diag["best_density"] = best_seen
    raise NotFoundError("no sub-Bohr set reaches the target density", diag)


# -- iteration ---------------------------------------------------------------------

@dataclass
class IncrementTrace:
    engine: str
    target: Fraction
    initial_density: Fraction
    steps: list[IncrementStep] = field(default_factory=list)
    termination: Termination = Termination.DENSITY_CAP
    sets: list[GroupSet] = field(default_factory=list)
    failure: dict = field(default_factory=dict)

    @property
    def densities(self) -> list[Fraction]:
        return [self.initial_density] + [s.alpha_new for s in self.steps]


def step_bound(alpha: Fraction, target: Fraction) -> int:
    """Most steps a trace can take: ``ceil(log(1/alpha) / log(target))``."""
    if alpha >= 1:
        return 0
    return math.ceil(math.log(1 / float(alpha)) / math.log(float(target)) - 1e-12)


def _require_free(A: GroupSet, where: str) -> None:
    if has_nontrivial(XYZ3W, A):
        raise ValueError(f"{where}: set is not solution-free")


def iterate(A: GroupSet, engine: str = "ff", target=None, budget: int = 50,
            max_codim: int = 4, params: BohrParams | None = None) -> IncrementTrace:
    """Repeat the increment step on ``(A_j - x_j) cap V_j`` until it can no longer run.

    Each ``A_j`` is checked to be solution-free before its step; steps are
    recounted and must raise the density by ``target``; structures must
    shrink.  All endings are recorded as the trace's termination.
    """
    if engine not in ("ff", "bohr"):
        raise ValueError("engine must be 'ff' or 'bohr'")
    params = params or BohrParams()
    target = Fraction(target) if target is not None else (Fraction(3, 2) if engine == "ff" else params.target)
    if engine == "bohr" and target != params.target:
        params = BohrParams(**{**params.__dict__, "target": target})
    g = A.group
    _require_free(A, "input")
    if engine == "bohr":
        B = BohrSet(g, (1,), 2.0)
        rel = Fraction(A.size, B.members.size)
    else:
        B = None
        rel = A.density
    trace = IncrementTrace(engine, target, rel, sets=[A])
    cur = A
    while True:
        if rel * target > 1:
            trace.termination = Termination.DENSITY_CAP
            break
        if len(trace.steps) >= budget:
            trace.termination = Termination.BUDGET
            break
        size = cur.group.order if engine == "ff" else B.size
        if engine == "ff" and cur.group.rank < 2 or engine == "bohr" and size <= params.min_structure_size:
            trace.termination = Termination.STRUCTURE_EXHAUSTED
            break
        try:
            if engine == "ff":
                st = increment_step_ff(cur, target, max_codim)
            else:
                st = increment_step_bohr(cur, B, params)
        except NotFoundError as exc:
            trace.termination = Termination.STEP_FAILED
            trace.failure = exc.diagnostics
            break
        if not st.verify():
            raise AssertionError("increment step failed its recount")
        if st.alpha_new < target * rel or st.structure_size >= size:
            raise AssertionError("increment step broke the trace invariants")
        trace.steps.append(st)
        piece = st.piece()
        if engine == "ff":
            V = st.structure
            moved = (cur & piece).translate(cur.group.neg(st.x))
            sub = GroupSpec.vector_space(cur.group.field_size, V.dimension)
            coords = V.coordinates(moved.elements())
            cur = GroupSet.from_elements(sub, sub.ravel(coords) if coords.size else [])
            rel = cur.density
        else:
            B = st.structure
            cur = (cur & piece).translate(g.neg(st.x))
            rel = Fraction(cur.size, B.size)
        if rel != st.alpha_new:
            raise AssertionError("restricted set disagrees with the recount")
        _require_free(cur, f"step {len(trace.steps)}")
        trace.sets.append(cur)
    return trace
