"""Exact Gaussian elimination over finite fields.

Two execution paths behind one API: a vectorized numpy int64 kernel for
prime fields with p < 2^31 (pivot products stay below 2^62, so signed
64-bit arithmetic is exact), and a generic entry-wise path over
FieldElement values for extension fields and larger characteristics.
Callers pass matrices as lists of lists of FieldElement.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularSystem
from .fields import FieldCtx, FieldElement

_NP_LIMIT = 1 << 31


def _use_numpy(ctx: FieldCtx) -> bool:
    return ctx.r == 1 and ctx.p < _NP_LIMIT


def _to_np(rows, p) -> np.ndarray:
    return np.array([[e.coeffs[0] for e in row] for row in rows], dtype=np.int64) % p


def _np_forward(M: np.ndarray, p: int, ncols: int):
    """Forward elimination on the first ncols columns; returns pivot columns."""
    n = M.shape[0]
    row = 0
    pivots = []
    for col in range(ncols):
        if row == n:
            break
        nz = np.flatnonzero(M[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            M[[row, piv]] = M[[piv, row]]
        inv = pow(int(M[row, col]), -1, p)
        M[row] = M[row] * inv % p
        below = M[row + 1:, col]
        mask = below != 0
        if mask.any():
            M[row + 1:][mask] = (M[row + 1:][mask] - below[mask, None] * M[row]) % p
        pivots.append(col)
        row += 1
    return pivots


def solve(rows, rhs, ctx: FieldCtx, counter=None):
    """Solve A X = B exactly; B has one or more columns.

    A may have more rows than columns; the system must then be consistent
    (as interpolation systems built from genuine evaluations are) and A must
    have full column rank. Returns X as a list of lists of FieldElement.
    Raises SingularSystem when the column rank is deficient. Passing a
    MultCounter forces the entry-wise path and tallies its field
    multiplications.
    """
    n = len(rows)
    m = len(rows[0]) if rows else 0
    k = len(rhs[0]) if rhs else 0
    if n < m:
        raise SingularSystem("fewer equations than unknowns")
    if k == 0:
        if rank(rows, ctx) < m:
            raise SingularSystem("coefficient matrix is rank deficient")
        return [[] for _ in range(m)]
    if counter is None and _use_numpy(ctx):
        p = ctx.p
        M = np.concatenate([_to_np(rows, p), _to_np(rhs, p)], axis=1)
        pivots = _np_forward(M, p, m)
        if len(pivots) < m:
            raise SingularSystem("coefficient matrix is rank deficient")
        for row in range(m - 1, 0, -1):
            above = M[:row, row]
            mask = above != 0
            if mask.any():
                M[:row][mask] = (M[:row][mask] - above[mask, None] * M[row]) % p
        return [[ctx.element(int(v)) for v in M[i, m:]] for i in range(m)]
    # generic entry-wise path; full column rank puts pivot col at row col
    M = [list(rows[i]) + list(rhs[i]) for i in range(n)]
    width = m + k
    for col in range(m):
        piv = next((i for i in range(col, n) if not M[i][col].is_zero()), None)
        if piv is None:
            raise SingularSystem("coefficient matrix is rank deficient")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inv()
        M[col] = [inv * v for v in M[col]]
        if counter is not None:
            counter.add(width)
        for i in range(n):
            if i != col and not M[i][col].is_zero():
                f = M[i][col]
                M[i] = [vi - f * vc for vi, vc in zip(M[i], M[col])]
                if counter is not None:
                    counter.add(width)
    return [row[m:] for row in M[:m]]


def rank(rows, ctx: FieldCtx) -> int:
    """Rank of an arbitrary (possibly non-square) matrix."""
    if not rows or not rows[0]:
        return 0
    if _use_numpy(ctx):
        M = _to_np(rows, ctx.p)
        return len(_np_forward(M, ctx.p, M.shape[1]))
    M = [list(r) for r in rows]
    n, m = len(M), len(M[0])
    row = 0
    for col in range(m):
        if row == n:
            break
        piv = next((i for i in range(row, n) if not M[i][col].is_zero()), None)
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = M[row][col].inv()
        M[row] = [inv * v for v in M[row]]
        for i in range(row + 1, n):
            if not M[i][col].is_zero():
                f = M[i][col]
                M[i] = [vi - f * vc for vi, vc in zip(M[i], M[row])]
        row += 1
    return row


def is_invertible(rows, ctx: FieldCtx) -> bool:
    """True iff the square matrix has a nonzero determinant."""
    n = len(rows)
    return rank(rows, ctx) == n


def batch_is_invertible(mats: np.ndarray, p: int) -> np.ndarray:
    """Vectorized invertibility test for a stack of square int64 matrices.

    mats has shape (batch, n, n) with entries already reduced mod p; returns
    a boolean array of length batch. Only valid for p < 2^31.
    """
    M = mats % p
    batch, n, _ = M.shape
    alive = np.ones(batch, dtype=bool)
    idx = np.arange(batch)
    for col in range(n):
        nz = M[:, col:, col] != 0
        alive &= nz.any(axis=1)
        if not alive.any():
            return alive
        piv_row = col + nz.argmax(axis=1)
        tmp = M[idx, piv_row].copy()
        M[idx, piv_row] = M[idx, col]
        M[idx, col] = tmp
        # division-free update: row_i <- piv*row_i - lead_i*row_piv keeps
        # invertibility and, with p < 2^31, all products below 2^62
        piv = M[:, col, col]
        below = M[:, col + 1:, col]
        M[:, col + 1:] = (piv[:, None, None] * M[:, col + 1:]
                          - below[:, :, None] * M[:, col][:, None, :]) % p
    return alive
