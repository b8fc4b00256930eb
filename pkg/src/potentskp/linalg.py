"""Dense linear algebra over a prime field F_p on small integer numpy arrays."""

from __future__ import annotations

import numpy as np


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = np.array(M, dtype=np.int64) % p
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        col = A[:, c].copy()
        col[r] = 0
        A = (A - np.outer(col, A[r])) % p
        pivots.append(c)
        r += 1
    return A, pivots


def row_basis(M, p: int, dim: int | None = None) -> np.ndarray:
    """A basis (as rows) of the row space of M."""
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return np.zeros((0, dim if dim is not None else M.shape[-1]), np.int64)
    R, piv = rref(M, p)
    return R[:len(piv)]


def rank(M, p: int) -> int:
    M = np.asarray(M)
    return 0 if M.size == 0 else len(rref(M, p)[1])


def nullspace(M, p: int, dim: int) -> np.ndarray:
    """Rows spanning {x : M x = 0}."""
    M = np.asarray(M, dtype=np.int64).reshape(-1, dim)
    if M.shape[0] == 0:
        return np.eye(dim, dtype=np.int64)
    R, piv = rref(M, p)
    free = [c for c in range(dim) if c not in piv]
    out = np.zeros((len(free), dim), np.int64)
    for i, f in enumerate(free):
        out[i, f] = 1
        for r, c in enumerate(piv):
            out[i, c] = (-R[r, f]) % p
    return out


def check_matrix(span_rows, p: int, dim: int) -> np.ndarray:
    """H with H v = 0 exactly when v lies in the row space of ``span_rows``."""
    return nullspace(np.asarray(span_rows, dtype=np.int64).reshape(-1, dim), p, dim)


def inverse(M, p: int) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64) % p
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("expected a square matrix")
    R, piv = rref(np.concatenate([M, np.eye(n, dtype=np.int64)], axis=1), p)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:, n:]


def complement(span_rows, p: int, dim: int) -> np.ndarray:
    """Standard basis vectors completing the row space of ``span_rows`` to F_p^dim."""
    B = row_basis(np.asarray(span_rows, dtype=np.int64).reshape(-1, dim), p, dim)
    extra = []
    cur = B
    for i in range(dim):
        e = np.zeros((1, dim), np.int64)
        e[0, i] = 1
        cand = np.concatenate([cur, e]) if cur.size else e
        if rank(cand, p) > cur.shape[0]:
            extra.append(e[0])
            cur = cand
    return np.array(extra, dtype=np.int64).reshape(-1, dim)


def solve(B, v, p: int) -> np.ndarray | None:
    """x with x B = v (B's rows as the spanning vectors), or None."""
    B = np.asarray(B, dtype=np.int64)
    k, dim = B.shape
    aug = np.concatenate([B.T % p, np.asarray(v, dtype=np.int64).reshape(dim, 1) % p], axis=1)
    R, piv = rref(aug, p)
    if k in piv:
        return None
    x = np.zeros(k, np.int64)
    for r, c in enumerate(piv):
        x[c] = R[r, -1]
    return x
