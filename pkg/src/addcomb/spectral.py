"""Convolution, Fourier transform and large spectra on finite abelian groups.

Conventions (counting measure throughout)::

    f * g(x)    = sum_y f(y) g(x - y)
    fhat(gamma) = sum_x f(x) conj(gamma(x))
    f(x)        = E_gamma fhat(gamma) gamma(x)
    ||f||_p^p   = sum_x |f(x)|^p

Integer-valued functions convolve exactly.  The fast path is a floating point
FFT whose rounding is accepted only when an a-priori error bound is below
1/4; otherwise the product is computed exactly by Kronecker substitution
(one big-integer multiplication).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .group import GroupSet, GroupSpec

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

__all__ = [
    "DenseFunction",
    "Spectrum",
    "convolve",
    "convolve_naive",
    "convolve_many",
    "dft",
    "idft",
    "lp_norm",
    "lp_norm_power",
    "spec_delta",
    "fourier_coefficients",
]

_INT64_SAFE = 1 << 62
_U = 2.0 ** -53


def _readonly(arr):
    arr.flags.writeable = False
    return arr


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        if all(isinstance(v, (int, np.integer)) for v in arr.ravel()):
            return _shrink(np.array([int(v) for v in arr.ravel()], dtype=object))
        return arr.astype(np.complex128)
    if arr.dtype.kind == "b":
        return arr.astype(np.int64)
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    if arr.dtype.kind == "f":
        return arr.astype(np.float64)
    return arr.astype(np.complex128)


def _shrink(arr: np.ndarray) -> np.ndarray:
    """Downcast an object array of Python ints to int64 when it fits."""
    if arr.dtype != object:
        return arr
    if arr.size == 0 or max(abs(int(v)) for v in arr) < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


class DenseFunction:
    """A function ``G -> Z`` or ``G -> C`` stored as a dense vector over element indices.

    Integer functions use ``int64`` values, or an object array of Python ints
    when entries may exceed 62 bits.
    """

    __slots__ = ("group", "values")

    def __init__(self, group: GroupSpec, values):
        vals = _as_values(values).reshape(-1).copy()
        if vals.shape[0] != group.order:
            raise ValueError(f"expected {group.order} values, got {vals.shape[0]}")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "values", _readonly(vals))

    def __setattr__(self, name, value):
        raise AttributeError("DenseFunction is immutable")

    @classmethod
    def indicator(cls, A: GroupSet) -> "DenseFunction":
        return cls(A.group, A.members.astype(np.int64))

    @classmethod
    def delta(cls, group: GroupSpec, x=0) -> "DenseFunction":
        v = np.zeros(group.order, dtype=np.int64)
        v[group.element(x)] = 1
        return cls(group, v)

    @classmethod
    def uniform(cls, A: GroupSet) -> "DenseFunction":
        """``mu_A = 1_A / |A|`` (floating point)."""
        if A.size == 0:
            raise ValueError("mu_A is undefined for empty A")
        return cls(A.group, A.members / A.size)

    @property
    def is_integer(self) -> bool:
        return self.values.dtype == object or self.values.dtype.kind in "iu"

    def __call__(self, x):
        return self.values[self.group.element(x)]

    def __repr__(self):
        return f"DenseFunction(group={self.group}, dtype={self.values.dtype})"

    def __eq__(self, other):
        if not isinstance(other, DenseFunction):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.group, self.values.tobytes()))

    def __add__(self, other: "DenseFunction") -> "DenseFunction":
        self.group.check_same(other.group)
        return DenseFunction(self.group, self.values + other.values)

    def __sub__(self, other: "DenseFunction") -> "DenseFunction":
        self.group.check_same(other.group)
        return DenseFunction(self.group, self.values - other.values)

    def __neg__(self):
        return DenseFunction(self.group, -self.values)

    def scale(self, c) -> "DenseFunction":
        return DenseFunction(self.group, self.values * c)

    def shift(self, t) -> "DenseFunction":
        """``x -> f(x + t)``."""
        return DenseFunction(self.group, self.values[self.group.translation(t)])

    def reflect(self) -> "DenseFunction":
        """``x -> f(-x)``."""
        g = self.group
        return DenseFunction(g, self.values[g.neg_indices(np.arange(g.order))])

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0)

    def total(self):
        if self.values.dtype == object:
            return sum(int(v) for v in self.values)
        if self.is_integer:
            return int(self.values.sum())
        return self.values.sum()

    def to_nd(self) -> np.ndarray:
        return np.asarray(self.values).reshape(self.group.factors, order="F")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All ``|G|`` Fourier coefficients, indexed by character index."""

    group: GroupSpec
    coefficients: np.ndarray

    def __getitem__(self, gamma) -> complex:
        return complex(self.coefficients[self.group.element(gamma)])

    def __len__(self):
        return self.group.order

    def items(self):
        return ((int(i), complex(c)) for i, c in enumerate(self.coefficients))

    def __mul__(self, other: "Spectrum") -> "Spectrum":
        self.group.check_same(other.group)
        return Spectrum(self.group, self.coefficients * other.coefficients)

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)


# -- Fourier transform ----------------------------------------------------

def dft(f: DenseFunction) -> Spectrum:
    g = f.group
    vals = f.to_nd()
    if vals.dtype == object:
        vals = vals.astype(np.float64)
    coeffs = np.fft.fftn(vals).reshape(-1, order="F")
    return Spectrum(g, _readonly(coeffs))


def idft(s: Spectrum) -> DenseFunction:
    g = s.group
    nd = np.asarray(s.coefficients).reshape(g.factors, order="F")
    return DenseFunction(g, np.fft.ifftn(nd).reshape(-1, order="F"))


def fourier_coefficients(A: GroupSet) -> np.ndarray:
    """``hat(1_A)`` as a dense complex vector."""
    return dft(DenseFunction.indicator(A)).coefficients


def spec_delta(X: GroupSet, delta: float) -> tuple[int, ...]:
    """``{gamma : |hat(mu_X)(gamma)| >= delta}``, sorted by character index."""
    if X.size == 0:
        raise ValueError("the large spectrum of an empty set is undefined")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    mags2 = np.abs(fourier_coefficients(X) / X.size) ** 2
    hits = np.flatnonzero(mags2 >= delta * delta - 1e-12)
    return tuple(int(i) for i in hits)


# -- norms ----------------------------------------------------------------

def lp_norm_power(f: DenseFunction, p: int) -> int | float:
    """``||f||_p^p``; exact (a Python int) when ``f`` is integer and ``p`` a positive integer."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if f.is_integer and float(p).is_integer():
        p = int(p)
        vals = f.values
        if vals.dtype != object:
            m = int(np.abs(vals).max()) if vals.size else 0
            if m == 0:
                return 0
            if p * math.log2(m + 1) + math.log2(vals.size + 1) < 62:
                return int(np.sum(np.abs(vals) ** p))
        return sum(abs(int(v)) ** p for v in vals if v)
    return float(np.sum(np.abs(f.values.astype(np.complex128)) ** p))


def lp_norm(f: DenseFunction, p: float) -> float:
    """Unnormalised ``||f||_p``; ``p = inf`` gives ``max |f|``."""
    if p == math.inf:
        if f.values.size == 0:
            return 0.0
        if f.values.dtype == object:
            return float(max(abs(int(v)) for v in f.values))
        return float(np.abs(f.values).max())
    if p < 1:
        raise ValueError("p must be >= 1")
    s = lp_norm_power(f, p)
    if isinstance(s, int):
        return _int_root(s, p)
    return s ** (1.0 / p)


def _int_root(s: int, p: float) -> float:
    if s == 0:
        return 0.0
    try:
        return float(s) ** (1.0 / p)
    except OverflowError:
        return math.exp(math.log(s) / p)


# -- convolution ----------------------------------------------------------

def _abs_stats(vals: np.ndarray):
    if vals.dtype == object:
        ints = [abs(int(v)) for v in vals]
        return max(ints, default=0), sum(ints), math.sqrt(float(sum(v * v for v in ints)))
    if vals.size == 0:
        return 0, 0, 0.0
    absv = np.abs(vals)
    m = int(absv.max())
    l1 = int(absv.sum()) if m * vals.size < _INT64_SAFE else sum(int(v) for v in absv)
    a = absv.astype(np.float64)
    return m, l1, float(np.sqrt((a * a).sum()))


def _fft_error_bound(n: int, l1f, l2f, l1g, l2g) -> float:
    # Conservative forward-error estimate for fft -> pointwise product -> ifft:
    # each transform contributes O(u log n) relative error in l2, and the
    # output error in sup norm is at most that times ||f||_1 ||g||_2 + ||g||_1 ||f||_2.
    # The factor 16 covers Bluestein-type prime-length transforms.
    logn = math.log2(max(n, 2))
    return 16.0 * _U * (2.0 * logn + 8.0) * (l1f * l2g + l1g * l2f)


def _convolve_fft_float(f: DenseFunction, g: DenseFunction) -> np.ndarray:
    shape = f.group.factors
    a = np.asarray(f.values, dtype=np.float64).reshape(shape, order="F")
    b = np.asarray(g.values, dtype=np.float64).reshape(shape, order="F")
    prod = np.fft.rfftn(a) * np.fft.rfftn(b)
    return np.fft.irfftn(prod, s=shape, axes=tuple(range(len(shape)))).reshape(-1, order="F")


def _convolve_complex(f: DenseFunction, g: DenseFunction) -> np.ndarray:
    shape = f.group.factors
    a = np.asarray(f.values, dtype=np.complex128).reshape(shape, order="F")
    b = np.asarray(g.values, dtype=np.complex128).reshape(shape, order="F")
    out = np.fft.ifftn(np.fft.fftn(a) * np.fft.fftn(b)).reshape(-1, order="F")
    if np.isrealobj(f.values) and np.isrealobj(g.values):
        return out.real
    return out


def _split_sign(vals: np.ndarray):
    if vals.dtype == object:
        pos = np.array([max(int(v), 0) for v in vals], dtype=object)
        neg = np.array([max(-int(v), 0) for v in vals], dtype=object)
        return pos, neg
    return np.maximum(vals, 0), np.maximum(-vals, 0)


def _kronecker_layout(shape):
    # Pad every axis except the slowest to 2m-1 so per-axis sums never carry;
    # the slowest axis wraps for free because we multiply mod 2^K - 1.
    padded = [2 * m - 1 for m in shape[:-1]] + [shape[-1]]
    strides = [1]
    for p in padded[:-1]:
        strides.append(strides[-1] * p)
    return padded, strides, strides[-1] * padded[-1]


def _pack(vals: np.ndarray, slots_of: np.ndarray, nslots: int, width: int) -> int:
    if vals.dtype != object and width <= 8:
        buf = np.zeros((nslots, 8), dtype=np.uint8)
        buf[slots_of] = vals.astype("<u8").view(np.uint8).reshape(-1, 8)
        return int.from_bytes(buf[:, :width].tobytes(), "little")
    out = 0
    for s, v in sorted(zip(slots_of.tolist(), vals.tolist()), reverse=True):
        if v:
            out |= int(v) << (8 * width * s)
    return out


def _unpack(value: int, nslots: int, width: int) -> np.ndarray:
    raw = value.to_bytes(nslots * width, "little")
    if width <= 8:
        buf = np.zeros((nslots, 8), dtype=np.uint8)
        buf[:, :width] = np.frombuffer(raw, dtype=np.uint8).reshape(nslots, width)
        return buf.view("<u8").reshape(-1).astype(object)
    return np.array([int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(nslots)],
                    dtype=object)


def _kronecker_nonneg(group: GroupSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = group.factors
    padded, strides, nslots = _kronecker_layout(shape)
    coords = group.coords_array
    slots_of = coords @ np.array(strides, dtype=np.int64)
    amax = max((int(v) for v in a), default=0) if a.dtype == object else int(a.max(initial=0))
    bmax = max((int(v) for v in b), default=0) if b.dtype == object else int(b.max(initial=0))
    asum = sum(int(v) for v in a) if a.dtype == object else int(a.sum())
    bsum = sum(int(v) for v in b) if b.dtype == object else int(b.sum())
    bound = min(asum * bmax, bsum * amax)
    if bound == 0:
        return np.zeros(group.order, dtype=object)
    width = (bound.bit_length() + 1 + 7) // 8
    K = 8 * width * nslots
    x = _pack(a, slots_of, nslots, width)
    y = _pack(b, slots_of, nslots, width)
    if gmpy2 is not None:
        prod = int(gmpy2.mpz(x) * gmpy2.mpz(y))
    else:  # pragma: no cover
        prod = x * y
    mask = (1 << K) - 1
    while prod > mask:
        prod = (prod & mask) + (prod >> K)
    if prod == mask:
        prod = 0
    slots = _unpack(prod, nslots, width)
    # fold the padded axes back onto the cyclic factors
    nd = slots.reshape(padded[::-1]).transpose()  # axis i <-> factor i
    for axis, m in enumerate(shape[:-1]):
        head = np.take(nd, range(m), axis=axis)
        tail = np.take(nd, range(m, 2 * m - 1), axis=axis)
        sl = [slice(None)] * nd.ndim
        sl[axis] = slice(0, m - 1)
        head[tuple(sl)] = head[tuple(sl)] + tail
        nd = head
    return nd.transpose().reshape(-1)


def _convolve_kronecker(f: DenseFunction, g: DenseFunction) -> np.ndarray:
    fp, fn = _split_sign(f.values)
    gp, gn = _split_sign(g.values)
    out = _kronecker_nonneg(f.group, fp, gp)
    if np.any(fn != 0) or np.any(gn != 0):
        out = (out - _kronecker_nonneg(f.group, fp, gn) - _kronecker_nonneg(f.group, fn, gp)
               + _kronecker_nonneg(f.group, fn, gn))
    return _shrink(np.array([int(v) for v in out], dtype=object))


def _convolve_direct(f: DenseFunction, g: DenseFunction, bound: int) -> np.ndarray:
    """Shift-and-accumulate over the support of ``f``."""
    group = f.group
    dtype = np.int64 if bound < _INT64_SAFE else object
    gnd = np.asarray(g.values).astype(dtype).reshape(group.factors, order="F")
    out = np.zeros(group.factors, dtype=dtype)
    for y in f.support():
        shift = group.coords(int(y))
        out = out + int(f.values[y]) * np.roll(gnd, shift, axis=tuple(range(group.rank)))
    return _shrink(out.reshape(-1, order="F"))


def convolve(f: DenseFunction, g: DenseFunction, method: str = "auto") -> DenseFunction:
    """``f * g``; exact for integer inputs.

    ``method`` is one of ``"auto"``, ``"fft"``, ``"kronecker"``, ``"direct"``.
    ``"fft"`` on integer inputs still falls back to an exact method when the
    rounding bound cannot be certified.
    """
    f.group.check_same(g.group)
    group = f.group
    if not (f.is_integer and g.is_integer):
        return DenseFunction(group, _convolve_complex(f, g))

    n = group.order
    fmax, fl1, fl2 = _abs_stats(f.values)
    gmax, gl1, gl2 = _abs_stats(g.values)
    bound = min(fl1 * gmax, gl1 * fmax)
    if bound == 0:
        return DenseFunction(group, np.zeros(n, dtype=np.int64))

    if method == "auto":
        nnz = min(np.count_nonzero(f.values), np.count_nonzero(g.values))
        if nnz * n <= (1 << 16):
            method = "direct"
        else:
            method = "fft"

    if method == "direct":
        if np.count_nonzero(g.values) < np.count_nonzero(f.values):
            f, g = g, f
        return DenseFunction(group, _convolve_direct(f, g, bound))
    if method == "fft":
        if bound < (1 << 52) and _fft_error_bound(n, fl1, fl2, gl1, gl2) < 0.25:
            vals = np.rint(_convolve_fft_float(f, g)).astype(np.int64)
            return DenseFunction(group, vals)
        method = "kronecker"
    if method == "kronecker":
        return DenseFunction(group, _convolve_kronecker(f, g))
    raise ValueError(f"unknown convolution method {method!r}")


def convolve_many(*fs: DenseFunction, method: str = "auto") -> DenseFunction:
    if not fs:
        raise ValueError("need at least one function")
    out = fs[0]
    for h in fs[1:]:
        out = convolve(out, h, method=method)
    return out


def convolve_naive(f: DenseFunction, g: DenseFunction) -> DenseFunction:
    """The O(|G|^2) double sum ``sum_y f(y) g(x - y)``, one output point at a time.

    Independent of every fast path; used as the test oracle.
    """
    f.group.check_same(g.group)
    group = f.group
    n = group.order
    integer = f.is_integer and g.is_integer
    fv, gv = f.values, g.values
    if integer:
        fmax, fl1, _ = _abs_stats(fv)
        gmax, gl1, _ = _abs_stats(gv)
        if min(fl1 * gmax, gl1 * fmax) >= _INT64_SAFE:
            fv = np.array([int(v) for v in fv], dtype=object)
            gv = np.array([int(v) for v in gv], dtype=object)
    coords = group.coords_array
    factors = np.array(group.factors, dtype=np.int64)
    strides = np.cumprod([1] + list(group.factors[:-1])).astype(np.int64)
    out = []
    for x in range(n):
        # index of x - y for every y, computed coordinatewise
        diff = coords[x][None, :] - coords
        diff += factors * (diff < 0)
        out.append(np.dot(fv, gv[diff @ strides]))
    if integer:
        return DenseFunction(group, _shrink(np.array([int(v) for v in out], dtype=object)))
    return DenseFunction(group, np.array(out))

