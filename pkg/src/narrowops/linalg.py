"""Dense elimination helpers: null vectors and rank factorizations.

Both routines use Gaussian elimination with partial pivoting and a fixed
relative tolerance for rank decisions.  They are deliberately small and
self-contained so that tests can cross-check them against brute force.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateNullspace

RANK_TOL = 1e-10


def _rref(a: np.ndarray, tol: float) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting; returns pivot columns."""
    u = np.array(a, dtype=float, copy=True)
    rows, cols = u.shape
    scale = max(1.0, float(np.max(np.abs(u))) if u.size else 0.0)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        i = int(np.argmax(np.abs(u[r:, c]))) + r
        if abs(u[i, c]) <= tol * scale:
            continue
        if i != r:
            u[[r, i]] = u[[i, r]]
        u[r] /= u[r, c]
        for k in range(rows):
            if k != r and u[k, c] != 0.0:
                u[k] -= u[k, c] * u[r]
        pivots.append(c)
        r += 1
    return u, pivots


def null_vector(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """A nonzero vector u with a @ u ~ 0, for a matrix with more columns
    than numerical rank.

    Retries once with unit column rescaling before giving up.
    """
    a = np.asarray(a, dtype=float)
    rows, cols = a.shape
    for rescale in (False, True):
        col_scale = np.ones(cols)
        m = a
        if rescale:
            col_scale = np.linalg.norm(a, axis=0)
            col_scale[col_scale == 0.0] = 1.0
            m = a / col_scale
        u_rref, pivots = _rref(m, tol)
        free = [c for c in range(cols) if c not in pivots]
        if not free:
            continue
        f = free[0]
        u = np.zeros(cols)
        u[f] = 1.0
        for r, c in enumerate(pivots):
            u[c] = -u_rref[r, f]
        u = u / col_scale
        residual = np.linalg.norm(a @ u)
        bound = 1e-6 * max(1.0, float(np.max(np.abs(a)))) * np.linalg.norm(u)
        if residual <= bound:
            return u
    raise DegenerateNullspace("no numerically reliable null vector found")


def rank_factorization(
    m: np.ndarray, tol: float = RANK_TOL
) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Factor m = b @ c with b a well-conditioned set of pivot columns of m.

    Pivots are selected greedily by largest residual norm (column-pivoted
    Gram-Schmidt elimination), which keeps the least-squares coefficients c
    small even when the leading columns are nearly dependent.  Returns
    (pivot_columns, b, c) with b of shape (rows, rank) and c (rank, cols).
    """
    m = np.asarray(m, dtype=float)
    resid = np.array(m, copy=True)
    norms0 = np.linalg.norm(m, axis=0)
    scale = float(np.max(norms0)) if m.size else 0.0
    pivots: list[int] = []
    for _ in range(min(m.shape)):
        norms = np.linalg.norm(resid, axis=0)
        j = int(np.argmax(norms))
        if norms[j] <= tol * max(scale, 1.0):
            break
        q = resid[:, j] / norms[j]
        pivots.append(j)
        resid -= np.outer(q, q @ resid)
        resid[:, j] = 0.0
    if not pivots:
        return [], np.zeros((m.shape[0], 0)), np.zeros((0, m.shape[1]))
    b = m[:, pivots]
    c, *_ = np.linalg.lstsq(b, m, rcond=None)
    return pivots, b, c


def numerical_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    return len(_rref(np.asarray(m, dtype=float), tol)[1])
