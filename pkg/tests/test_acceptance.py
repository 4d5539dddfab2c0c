"""End-to-end acceptance checks; each prints one PASS/FAIL line with its runtime."""

import functools
import inspect
import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from addcomb import (XYZ3W, BohrSet, DenseFunction, GroupSet, GroupSpec, Termination, ap_in_bohr, behrend_set,
                     bohr_l1_defect, brute_force_count, convolve, convolve_naive, count_solutions, count_trivial,
                     dft, embed_interval, has_nontrivial, holder_domination, idft, is_regular, iterate,
                     largest_affine_subspace, linfty_three_fold_periods, longest_ap, longest_ap_brute,
                     lp_almost_periods, product_construction, regular_radius, search_extremal_exact,
                     search_extremal_greedy, solution_free_identity, step_bound, sumset, three_fold_sumset,
                     xv_witness)
from addcomb.cli import main
from addcomb.increment import Subspace

from cli_matrix import make_inputs, matrix
from test_structure import subspace_oracle

SEED = 20240611


def criterion(number, title, budget_s):
    """Run the body, print one result line and fail if it raised or overran its time budget."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, capsys, **kwargs):
            t = time.perf_counter()
            err = None
            try:
                detail = fn(*args, **kwargs) or ""
            except Exception as exc:  # noqa: BLE001 - reported, then re-raised
                err = exc
                detail = f"{type(exc).__name__}: {exc}"
            dt = time.perf_counter() - t
            if err is None and dt > budget_s:
                detail = f"over budget ({dt:.1f}s > {budget_s}s)"
                err = AssertionError(detail)
            status = "PASS" if err is None else "FAIL"
            with capsys.disabled():
                print(f"\n[criterion {number:2d}] {status} {title} ({dt:.1f}s) {detail}")
            if err is not None:
                raise err
        params = list(inspect.signature(fn).parameters.values())
        params.append(inspect.Parameter("capsys", inspect.Parameter.KEYWORD_ONLY))
        run.__signature__ = inspect.Signature(params)
        return run

    return wrap


def random_function(g, rng, kind):
    if kind == "int":
        return DenseFunction(g, rng.integers(-50, 51, g.order))
    if kind == "real":
        return DenseFunction(g, rng.normal(size=g.order))
    return DenseFunction(g, rng.normal(size=g.order) + 1j * rng.normal(size=g.order))


@criterion(1, "fast convolution equals the naive double sum", 30)
def test_convolution_oracle():
    rng = np.random.default_rng(SEED)
    shapes = [(int(n),) for n in rng.integers(32, 4097, 100)] + [(3,) * int(n) for n in rng.integers(1, 8, 100)]
    for shape in shapes:
        g = GroupSpec(shape)
        f = DenseFunction(g, rng.integers(-9, 10, g.order))
        h = DenseFunction.indicator(GroupSet(g, rng.random(g.order) < 0.3))
        fast = convolve(f, h)
        assert fast.is_integer and fast == convolve_naive(f, h), shape
    return f"{len(shapes)} pairs"


@criterion(2, "Parseval and the convolution theorem", 10)
def test_fourier_identities():
    rng = np.random.default_rng(SEED)
    shapes = [(97,), (256,), (3, 3, 3, 3), (4, 6), (2,) * 7, (5, 25)]
    worst_p = worst_c = 0.0
    for shape in shapes:
        g = GroupSpec(shape)
        for i in range(100):
            kind = ("int", "real", "complex")[i % 3]
            f, h = random_function(g, rng, kind), random_function(g, rng, kind)
            F, H = dft(f).coefficients, dft(h).coefficients
            lhs = np.sum(np.abs(np.asarray(f.values, dtype=complex)) ** 2) * g.order
            rhs = np.sum(np.abs(F) ** 2)
            worst_p = max(worst_p, abs(lhs - rhs) / rhs)
            conv = dft(convolve(f, h)).coefficients
            worst_c = max(worst_c, np.max(np.abs(conv - F * H)) / max(np.max(np.abs(F * H)), 1e-300))
            back = np.asarray(idft(dft(f)).values, dtype=complex)
            assert np.allclose(back, np.asarray(f.values, dtype=complex), rtol=1e-9, atol=1e-9)
    assert worst_p <= 1e-9 and worst_c <= 1e-8
    return f"max rel err {worst_p:.1e} / {worst_c:.1e}"


@criterion(3, "equation counts match brute force", 60)
def test_counting_matches_brute_force():
    emb = embed_interval(6)
    checked = 0
    for mask in range(64):
        A = emb.image([i + 1 for i in range(6) if mask >> i & 1])
        bf = brute_force_count(XYZ3W, A)
        assert count_solutions(XYZ3W, A) == bf.total and count_trivial(XYZ3W, A) == bf.trivial
        checked += 1
    rng = np.random.default_rng(SEED)
    g = GroupSpec.vector_space(5, 2)
    for _ in range(50):
        A = GroupSet(g, rng.random(25) < rng.uniform(0.05, 0.6))
        bf = brute_force_count(XYZ3W, A)
        assert count_solutions(XYZ3W, A) == bf.total and count_trivial(XYZ3W, A) == bf.trivial
        checked += 1
    return f"{checked} sets in Z/{emb.modulus} and F_5^2"


@criterion(4, "solution-free identity on subsets of [8]", 60)
def test_solution_free_identity_sweep():
    emb = embed_interval(8)
    free = 0
    for mask in range(1, 256):
        A = emb.image([i + 1 for i in range(8) if mask >> i & 1])
        if has_nontrivial(XYZ3W, A):
            continue
        free += 1
        assert solution_free_identity(A) == A.size
    return f"{free} solution-free sets"


def criterion5_sets():
    sets = []
    for d in (2, 3, 4):
        for n in (1, 2, 3):
            A, _ = behrend_set(d, n)
            sets.append(("behrend", d, n, A))
    S = GroupSet.from_elements(GroupSpec.cyclic(5), [0, 1])
    for k in (1, 2, 3):
        sets.append(("product", k, None, product_construction(S, k).set))
    return sets


@criterion(5, "constructions are solution-free by brute force", 300)
def test_constructions_verified():
    sets = criterion5_sets()
    for kind, a, b, A in sets:
        assert brute_force_count(XYZ3W, A).nontrivial == 0, (kind, a, b)
        assert not has_nontrivial(XYZ3W, A)
    return f"{len(sets)} sets"


def largest_free_subset(N):
    emb = embed_interval(N)
    for r in range(N, 0, -1):
        for combo in itertools.combinations(range(1, N + 1), r):
            if brute_force_count(XYZ3W, emb.image(combo)).nontrivial == 0:
                return r
    return 0


@criterion(6, "exact extremal search, confirmed by subset enumeration", 600)
def test_extremal_exactness():
    sizes = {}
    for N in range(1, 17):
        r = search_extremal_exact(XYZ3W, N)
        assert r.complete and not has_nontrivial(XYZ3W, r.witness)
        sizes[N] = r.size
        if N <= 10:
            assert r.size == largest_free_subset(N), N
    assert sizes[4] == 2
    return "sizes " + ",".join(str(sizes[N]) for N in range(1, 17))


def small_primes(lo, hi):
    return [n for n in range(lo, hi + 1) if all(n % p for p in range(2, int(n ** 0.5) + 1))]


@criterion(7, "Bohr-set size, doubling, regularity and progression bounds on 50 random Bohr sets", 300)
def test_bohr_estimates():
    rng = np.random.default_rng(SEED)
    primes = small_primes(101, 20011)
    for i in range(50):
        N = int(rng.choice(primes))
        d = int(rng.integers(1, 5))
        g = GroupSpec.cyclic(N)
        freqs = sorted(set(int(x) for x in rng.integers(1, N, d)))
        d = len(freqs)
        rho = float(rng.uniform(0.05, 2.0))
        B = BohrSet(g, freqs, rho)
        # size, doubling and decay estimates
        assert B.size >= (rho / (2 * math.pi)) ** d * N
        assert B.size_at(2 * rho) <= 6 ** d * B.size
        for delta in rng.uniform(0, 1, 10):
            assert B.size_at(delta * rho) >= (delta / 2) ** (3 * d) * B.size
        # triangle inclusion
        a, b = rng.uniform(0, 1, 2)
        assert sumset(B.scale(a).members, B.scale(b).members).issubset(B.scale(a + b).members)
        # regular rescaling
        delta = regular_radius(B)
        assert 0.5 <= delta <= 1
        R = B.scale(delta)
        assert is_regular(R)
        # L^1 bound for a narrow sub-Bohr set of a regular one
        for eps in (0.1, 0.5):
            assert bohr_l1_defect(R, R.scale(eps / (24 * d))) <= eps
        # progression of the guaranteed length
        P = ap_in_bohr(B)
        assert P.length >= min(N, math.ceil(rho / (2 * math.pi) * N ** (1 / d) - 1e-12))
        assert all(x in B.members for x in P.elements(N))
    return "50 instances"


@criterion(8, "almost-period scans: zero, monotonicity, Hoelder domination", 120)
def test_periodicity_scans():
    rng = np.random.default_rng(SEED)
    for shape in [(101,)] * 10 + [(3, 3, 3, 3)] * 10:
        g = GroupSpec(shape)
        G = GroupSet.full(g)
        A, M, L = (GroupSet(g, rng.random(g.order) < rng.uniform(0.1, 0.5)) | GroupSet.from_elements(g, [0])
                   for _ in range(3))
        if M.size > L.size:
            M, L = L, M
        p = float(rng.choice([2, 3, 4, 8]))
        e1, e2 = sorted(rng.uniform(0.05, 0.95, 2))
        T1, T2 = lp_almost_periods(A, L, p, e1, G).T, lp_almost_periods(A, L, p, e2, G).T
        U1, U2 = (linfty_three_fold_periods(A, M, L, e, G).T for e in (e1, e2))
        assert 0 in T1 and 0 in U1 and T1.issubset(T2) and U1.issubset(U2)
        lhs, rhs = holder_domination(A, M, L, p, G)
        assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-9)
    return "20 instances"


def check_trace(A, engine, target=None):
    tr = iterate(A, engine, target)
    dens = tr.densities
    for a, b in zip(dens, dens[1:]):
        assert b > a and b >= tr.target * a
    assert len(tr.steps) <= step_bound(dens[0], tr.target)
    for st in tr.steps:
        assert st.verify()
    for S in tr.sets:
        assert not has_nontrivial(XYZ3W, S)
    return tr


@criterion(9, "increment steps recount and traces stay solution-free", 600)
def test_increment_soundness():
    steps = 0
    for kind, a, b, A in criterion5_sets():
        tr = check_trace(A, "bohr" if kind == "behrend" else "ff")
        steps += len(tr.steps)
    g = GroupSpec.vector_space(5, 3)
    for seed in range(20):
        A = GroupSet.from_elements(g, search_extremal_greedy(XYZ3W, g, seed=seed, restarts=1).witness)
        for target in (Fraction(3, 2), Fraction(5, 4)):
            steps += len(check_trace(A, "ff", target).steps)
    return f"{steps} steps verified"


@criterion(10, "structure finders match their oracles", 300)
def test_structure_oracles():
    rng = np.random.default_rng(SEED)
    primes = small_primes(5, 101)
    for i in range(100):
        N = primes[i % len(primes)]
        S = GroupSet(GroupSpec.cyclic(N), rng.random(N) < rng.uniform(0.2, 0.9))
        w = longest_ap(S)
        assert w.verified and w.size == longest_ap_brute(S)
    for q, n in itertools.product((2, 3), (1, 2, 3)):
        g = GroupSpec.vector_space(q, n)
        for _ in range(10):
            S = GroupSet(g, rng.random(g.order) < rng.uniform(0.3, 0.95))
            w = largest_affine_subspace(S)
            assert w.complete and w.size == subspace_oracle(S)
    certified = 0
    for shape in [(61,), (5, 5, 5), (3, 3, 3, 3)]:
        g = GroupSpec(shape)
        for _ in range(10):
            A, B, C = (GroupSet(g, rng.random(g.order) < 0.12) | GroupSet.from_elements(g, [0]) for _ in range(3))
            V = Subspace(g, [g.coords(1)]).members if g.rank > 1 else GroupSet.from_elements(g, [0, 1, 60])
            w = xv_witness(A, B, C, V, 0.01)
            if w.info["certified"]:
                certified += 1
                host = three_fold_sumset(A, B, C)
                for x in w.X.elements():
                    for v in V.elements():
                        assert g.add(int(x), int(v)) in host
    return f"{certified} certified X+V containments"


@criterion(11, "CLI output is byte-identical across thread counts and reruns", 300)
def test_cli_determinism(tmp_path):
    paths = make_inputs(tmp_path)
    outputs = {}
    for run_id, threads in enumerate(["1", "8", "1", "8"]):
        for i, argv in enumerate(matrix(paths)):
            for fmt in ("json", "csv"):
                out = tmp_path / f"r{run_id}_{i}.{fmt}"
                code = main(argv + ["--threads", threads, "--format", fmt, "--out", str(out)])
                assert code == 0, argv
                data = out.read_bytes()
                key = (i, fmt)
                if key in outputs:
                    assert data == outputs[key], (argv, threads, fmt)
                else:
                    outputs[key] = data
                    if fmt == "json":
                        json.loads(data)
    return f"{len(outputs)} outputs x 4 runs"
