"""Row reduction over the prime field F_p."""

from __future__ import annotations

import numpy as np

__all__ = ["rref_mod", "nullspace_mod", "rank_mod", "normalize_projective"]


def rref_mod(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``M`` over ``F_p``; zero rows dropped."""
    R = np.array(M, dtype=np.int64, ndmin=2) % p
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        R[[r, i]] = R[[i, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        others = np.flatnonzero(R[:, c])
        others = others[others != r]
        if others.size:
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rank_mod(M, p: int) -> int:
    return len(rref_mod(M, p)[1])


def nullspace_mod(M, p: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Basis of ``{x : M x = 0}`` and the free columns.

    Basis vector ``i`` has a 1 in free column ``free[i]`` and 0 in the other
    free columns, so a kernel element's coordinates in this basis are just
    its entries at the free columns.
    """
    M = np.array(M, dtype=np.int64, ndmin=2)
    n = M.shape[1] if ncols is None else ncols
    if M.size == 0:
        return np.eye(n, dtype=np.int64), list(range(n))
    R, pivots = rref_mod(M, p)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, c in enumerate(pivots):
            basis[i, c] = (-R[r, f]) % p
    return basis, free


def normalize_projective(v, p: int) -> tuple[int, ...]:
    """Scale ``v`` so its first nonzero entry is 1."""
    v = np.asarray(v, dtype=np.int64) % p
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return tuple(int(a) for a in v)
    inv = pow(int(v[nz[0]]), -1, p)
    return tuple(int(a) for a in (v * inv) % p)
