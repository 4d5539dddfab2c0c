"""``addcomb`` command line: one subcommand per module, JSON or CSV reports.

Exit codes: 0 success, 2 usage error or unreadable input, 3 verification
failure, 4 search budget exhausted before completion.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io as files
from .bohr import BohrSet, is_regular, regular_radius
from .constructions import behrend_set, product_construction, search_extremal_exact, search_extremal_greedy
from .equations import XYZ3W, Equation, count_solutions, count_trivial
from .errors import NotFoundError, VerificationError
from .group import GroupSet, GroupSpec, sumset
from .increment import BohrParams, IncrementStep, iterate, increment_step_bohr, increment_step_ff
from .parallel import set_threads
from .periodicity import linfty_three_fold_periods, lp_almost_periods
from .spectral import DenseFunction, convolve, convolve_naive, dft, spec_delta
from .structure import largest_affine_subspace, longest_ap, three_fold_sumset, xv_witness

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_INCOMPLETE = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- report serialisation ------------------------------------------------------

def _plain(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, enum.Enum):
        return _plain(v.value)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return str(v)


def emit_report(result: dict, fmt: str = "json") -> bytes:
    """Serialise a report; keys keep insertion order, floats get 12 significant digits."""
    data = _plain(result)
    if fmt == "json":
        return (json.dumps(data, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(data))
        w.writerow([json.dumps(v, separators=(",", ":")) if isinstance(v, (list, dict)) else
                    ("" if v is None else str(v).lower() if isinstance(v, bool) else v) for v in data.values()])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")


# -- inputs -----------------------------------------------------------------------

def _read_set(path: str) -> GroupSet:
    try:
        return files.read_set(path)
    except OSError as exc:
        raise UsageError(f"cannot read set file {path}: {exc.strerror or exc}") from None
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad set file {path}: {exc}") from None


def _read_function(path: str) -> DenseFunction:
    """A function file, or a set file read as its indicator."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read file {path}: {exc.strerror or exc}") from None
    body = [ln.split("#", 1)[0] for ln in text.splitlines()[1:]]
    try:
        if any(":" in ln for ln in body):
            return files.parse_function(text)
        return DenseFunction.indicator(files.parse_set(text))
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad file {path}: {exc}") from None


def _check_N(A: GroupSet, N: int | None) -> None:
    if N is not None and A.group != GroupSpec.cyclic(N):
        raise UsageError(f"set lives in {A.group}, not Z/{N}")


def _same_group(*sets: GroupSet) -> None:
    g = sets[0].group
    for X in sets[1:]:
        if X.group != g:
            raise UsageError(f"group mismatch: {g} vs {X.group}")


def _coords(A: GroupSet) -> list:
    if A.group.rank == 1:
        return [int(x) for x in A.elements()]
    return [list(c) for c in A.coordinates()]


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _equation(text: str) -> Equation:
    try:
        return Equation.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _group(text: str) -> GroupSpec:
    try:
        return GroupSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- subcommands ---------------------------------------------------------------------

def cmd_count(a):
    A = _read_set(a.set)
    total = count_solutions(a.eq, A)
    trivial = count_trivial(a.eq, A)
    return {"equation": list(a.eq.coefficients), "group": str(A.group), "size": A.size,
            "total": total, "trivial": trivial, "nontrivial": total - trivial}, EXIT_OK


def cmd_construct(a):
    if a.kind == "behrend":
        A, emb = behrend_set(a.d, a.n)
        _write_set(a, A)
        return {"kind": "behrend", "d": a.d, "n": a.n, "N": emb.N, "modulus": emb.modulus,
                "size": A.size, "density": Fraction(A.size, emb.N), "verified": True,
                "elements": sorted(emb.preimage(A))}, EXIT_OK
    S = _read_set(a.set)
    res = product_construction(S, a.k, a.eq, seed=a.seed)
    _write_set(a, res.set)
    return {"kind": "product", "k": a.k, "group": str(res.set.group), "size": res.set.size,
            "density": res.set.density, "verified": True, "verification": res.verification,
            "samples": res.samples}, EXIT_OK


def cmd_search(a):
    if (a.N is None) == (a.group is None):
        raise UsageError("give exactly one of --N and --group")
    target = a.N if a.N is not None else a.group
    if a.mode == "exact":
        res = search_extremal_exact(a.eq, target, budget=a.budget)
    else:
        res = search_extremal_greedy(a.eq, target, seed=a.seed, restarts=a.restarts)
    _write_set(a, res.witness)
    ambient = a.N if a.N is not None else a.group.order
    out = {"mode": res.mode, "equation": list(a.eq.coefficients), "size": res.size,
           "density": Fraction(res.size, ambient), "complete": res.complete, "nodes": res.nodes,
           "verified": bool(res.verification), "verification": res.verification,
           "witness": res.integers if res.integers is not None else _coords(res.witness)}
    return out, EXIT_OK if res.complete or a.mode == "greedy" else EXIT_INCOMPLETE


def cmd_bohr(a):
    if (a.N is None) == (a.group is None):
        raise UsageError("give exactly one of --N and --group")
    g = GroupSpec.cyclic(a.N) if a.N is not None else a.group
    try:
        freqs = [g.element(tuple(int(c) for c in f.split(",")) if g.rank > 1 else int(f))
                 for f in a.freqs.split(";" if g.rank > 1 else ",") if f.strip()]
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad --freqs: {exc}") from None
    B = BohrSet(g, freqs, a.radius)
    delta = None
    if a.regularize:
        delta = regular_radius(B)
        B = B.scale(delta)
    _write_set(a, B.members)
    return {"group": str(g), "frequencies": list(B.frequencies), "radius": B.radius,
            "rank": B.rank, "size": B.size, "regular": is_regular(B) if B.rank else None,
            "regular_delta": delta}, EXIT_OK


def _S(arg: str, g: GroupSpec) -> GroupSet:
    if arg == "all":
        return GroupSet.full(g)
    S = _read_set(arg)
    _same_group(GroupSet.empty(g), S)
    return S


def cmd_periods(a):
    A, L = _read_set(a.A), _read_set(a.L)
    _same_group(A, L)
    S = _S(a.S, A.group)
    if A.size == 0 or L.size == 0:
        raise UsageError("A and L must be nonempty")
    if a.mode == "lp":
        scan = lp_almost_periods(A, L, a.p, a.eps, S)
        K = Fraction(sumset(A, S).size, A.size)
    else:
        if a.M is None:
            raise UsageError("--mode linf3 needs --M")
        M = _read_set(a.M)
        _same_group(A, M)
        scan = linfty_three_fold_periods(A, M, L, a.eps, S)
        K = Fraction(sumset(A, S).size, A.size)
    _write_set(a, scan.T)
    return {"mode": a.mode, "K": K, "T_size": scan.T.size, "S_size": S.size, "density": scan.density,
            "max_norm_over_T": scan.max_norm_over_T, "threshold": scan.threshold,
            "contains_zero": 0 in scan.T}, EXIT_OK


def _step_report(st: IncrementStep) -> dict:
    out = {"x": st.x, "alpha": st.alpha, "alpha_new": st.alpha_new, "structure_size": st.structure_size}
    if st.codim is not None:
        out["codim"] = st.codim
    else:
        out["rank"] = st.rank
        out["radius"] = st.radius
    out["case"] = st.case
    out["verified"] = st.verify()
    return out


def _params(a) -> BohrParams:
    return BohrParams(C=a.C)


def cmd_increment(a):
    A = _read_set(a.set)
    try:
        if a.engine == "ff":
            if A.group.field_size is None:
                raise UsageError("the ff engine needs F_q^n")
            st = increment_step_ff(A, a.target if a.target is not None else Fraction(3, 2), a.max_codim)
        else:
            if not A.group.is_cyclic_prime:
                raise UsageError("the bohr engine needs Z/N with N prime")
            p = _params(a)
            if a.target is not None:
                p = BohrParams(C=a.C, target=a.target)
            st = increment_step_bohr(A, BohrSet(A.group, (1,), 2.0), p)
    except NotFoundError as exc:
        return {"engine": a.engine, "found": False, "diagnostics": exc.diagnostics}, EXIT_OK
    if not st.verify():
        return {"engine": a.engine, "found": True, "verified": False}, EXIT_VERIFY
    _write_set(a, st.piece())
    return {"engine": a.engine, "found": True, **_step_report(st)}, EXIT_OK


def cmd_iterate(a):
    A = _read_set(a.set)
    _check_N(A, a.N)
    if a.engine == "ff" and A.group.field_size is None:
        raise UsageError("the ff engine needs F_q^n")
    if a.engine == "bohr" and not A.group.is_cyclic_prime:
        raise UsageError("the bohr engine needs Z/N with N prime")
    try:
        tr = iterate(A, a.engine, a.target, budget=a.budget, max_codim=a.max_codim, params=_params(a))
    except ValueError as exc:
        raise VerificationError(str(exc)) from None
    _write_set(a, tr.sets[-1])
    return {"engine": tr.engine, "target": tr.target, "initial_density": tr.initial_density,
            "densities": tr.densities, "steps": [_step_report(s) for s in tr.steps],
            "termination": tr.termination}, EXIT_OK


def cmd_structure(a):
    A, B, C = _read_set(a.A), _read_set(a.B), _read_set(a.C)
    _same_group(A, B, C)
    g = A.group
    if a.kind == "ap":
        _check_N(A, a.N)
        if not g.is_cyclic_prime:
            raise UsageError("structure ap needs Z/N with N prime")
        w = longest_ap(three_fold_sumset(A, B, C))
        out = {"kind": "ap", "host_size": w.host.size, "start": w.ap.start, "step": w.ap.step,
               "length": w.ap.length, "verified": w.verified}
        code = EXIT_OK
    elif a.kind == "subspace":
        if g.field_size is None:
            raise UsageError("structure subspace needs F_q^n")
        w = largest_affine_subspace(three_fold_sumset(A, B, C), budget=a.budget)
        sub = w.subspace
        out = {"kind": "subspace", "host_size": w.host.size, "dimension": sub.dimension,
               "shift": list(g.coords(sub.shift)) if sub.shift >= 0 else None,
               "basis": [list(v) for v in sub.basis], "complete": w.complete,
               "verified": w.verified, "nodes": w.info["nodes"]}
        code = EXIT_OK if w.complete else EXIT_INCOMPLETE
    else:
        if a.V is None:
            raise UsageError("structure xv needs --V")
        V = _read_set(a.V)
        _same_group(A, V)
        if min(A.size, B.size, C.size, V.size) == 0:
            raise UsageError("A, B, C and V must be nonempty")
        w = xv_witness(A, B, C, V, a.eta)
        info = w.info
        out = {"kind": "xv", "host_size": w.host.size, "t": info["t"], "overlap": info["overlap"],
               "X_size": info["X_size"], "B_size": info["B_size"], "large": info["large"],
               "eta": info["eta"], "certified": info["certified"], "X": _coords(w.X)}
        _write_set(a, w.X)
        code = EXIT_OK
    if not w.verified:
        code = EXIT_VERIFY
    return out, code


def cmd_spectrum(a):
    X = _read_set(a.set)
    if X.size == 0:
        raise UsageError("the set must be nonempty")
    spec = spec_delta(X, a.delta)
    mags = np.abs(dft(DenseFunction.indicator(X)).coefficients) / X.size
    g = X.group
    return {"group": str(g), "size": X.size, "delta": a.delta, "count": len(spec),
            "characters": [int(c) if g.rank == 1 else list(g.coords(c)) for c in spec],
            "magnitudes": [float(mags[c]) for c in spec]}, EXIT_OK


def cmd_convolve(a):
    f, h = _read_function(a.f), _read_function(a.g)
    if f.group != h.group:
        raise UsageError(f"group mismatch: {f.group} vs {h.group}")
    out = convolve_naive(f, h) if a.method == "naive" else convolve(f, h, method=a.method)
    if a.func_out:
        files.write_function(out, a.func_out)
    vals = out.values
    total = out.total()
    rep = {"group": str(out.group), "method": a.method, "support_size": int(out.support().size)}
    if out.is_integer:
        rep.update(total=int(total), max=int(max(vals)), min=int(min(vals)))
    elif np.iscomplexobj(vals):
        rep.update(total=[float(np.real(total)), float(np.imag(total))])
    else:
        rep.update(total=float(total), max=float(vals.max()), min=float(vals.min()))
    return rep, EXIT_OK


def _write_set(a, A: GroupSet) -> None:
    if getattr(a, "set_out", None):
        files.write_set(A, a.set_out)


# -- parser --------------------------------------------------------------------------------

def _common(defaults: bool) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand."""
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=d(None), help="worker threads (default $ADDCOMB_THREADS or 1)")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--out", default=d(None), help="write the report here instead of stdout")
    p.add_argument("--set-out", dest="set_out", default=d(None), help="write the witness set file here")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    parser = argparse.ArgumentParser(prog="addcomb", parents=[_common(True)],
                                     description="Exact additive-combinatorics computations on finite abelian groups.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_, fn):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=fn)
        return p

    p = add("count", "count solutions of an equation in a set", cmd_count)
    p.add_argument("--eq", type=_equation, default=XYZ3W, help="coefficients, e.g. 1,1,1,-3")
    p.add_argument("--set", required=True)

    p = add("construct", "build a verified solution-free set", cmd_construct)
    csub = p.add_subparsers(dest="kind", required=True)
    b = csub.add_parser("behrend", parents=[common])
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    b = csub.add_parser("product", parents=[common])
    b.add_argument("--set", required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--eq", type=_equation, default=XYZ3W)

    p = add("search", "largest solution-free set in [N] or a group", cmd_search)
    p.add_argument("--eq", type=_equation, default=XYZ3W)
    p.add_argument("--N", type=int)
    p.add_argument("--group", type=_group)
    p.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    p.add_argument("--budget", type=int, default=None, help="node budget for exact mode")
    p.add_argument("--restarts", type=int, default=8)

    p = add("bohr", "build a Bohr set", cmd_bohr)
    p.add_argument("--N", type=int)
    p.add_argument("--group", type=_group)
    p.add_argument("--freqs", required=True, help="characters: 1,5 in Z/N, or 0,1;1,1 in products")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--regularize", action="store_true", help="rescale to a regular radius in [1/2, 1]")

    p = add("periods", "almost-period scans", cmd_periods)
    p.add_argument("--mode", choices=("lp", "linf3"), default="lp")
    p.add_argument("--A", required=True)
    p.add_argument("--L", required=True)
    p.add_argument("--M")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--S", default="all", help="'all' or a set file")

    for name, fn, help_ in (("increment", cmd_increment, "one density-increment step"),
                            ("iterate", cmd_iterate, "iterate the density increment")):
        p = add(name, help_, fn)
        p.add_argument("--engine", choices=("ff", "bohr"), default="ff")
        p.add_argument("--set", required=True)
        p.add_argument("--target", type=_fraction, default=None)
        p.add_argument("--max-codim", dest="max_codim", type=int, default=4)
        p.add_argument("--C", type=float, default=100.0, help="regularity constant for the bohr engine")
        if name == "iterate":
            p.add_argument("--N", type=int)
            p.add_argument("--budget", type=int, default=50)

    p = add("structure", "structure inside A+B+C", cmd_structure)
    ssub = p.add_subparsers(dest="kind", required=True)
    for kind in ("ap", "subspace", "xv"):
        s = ssub.add_parser(kind, parents=[common])
        s.add_argument("--A", required=True)
        s.add_argument("--B", required=True)
        s.add_argument("--C", required=True)
        if kind == "ap":
            s.add_argument("--N", type=int)
        if kind == "subspace":
            s.add_argument("--budget", type=int, default=200_000)
        if kind == "xv":
            s.add_argument("--V", required=True)
            s.add_argument("--eta", type=float, required=True)

    p = add("spectrum", "large spectrum of a set", cmd_spectrum)
    p.add_argument("--set", required=True)
    p.add_argument("--delta", type=float, required=True)

    p = add("convolve", "exact convolution of two function or set files", cmd_convolve)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--method", choices=("auto", "fft", "kronecker", "direct", "naive"), default="auto")
    p.add_argument("--func-out", dest="func_out")
    return parser


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.threads is not None and a.threads < 1:
        parser.print_usage(sys.stderr)
        print("addcomb: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    set_threads(a.threads)
    try:
        report, code = a.func(a)
    except UsageError as exc:
        print(f"addcomb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as exc:
        print(f"addcomb: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    finally:
        set_threads(None)
    data = emit_report(report, a.format)
    if a.out:
        Path(a.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return code


def main(argv: list[str] | None = None) -> int:
    return parse_and_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
