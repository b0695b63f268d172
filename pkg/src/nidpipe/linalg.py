"""Dense linear algebra helpers: condition/rank estimates and a
double-double Gaussian elimination used by high-precision refinement."""

from __future__ import annotations

import numpy as np

from .dd import CDD

SINGULARITY_TOL = 1e-8


def condition_and_rank(J, tol: float = SINGULARITY_TOL) -> tuple[float, int]:
    """Condition estimate and numerical rank from singular values.

    Rank counts singular values above ``tol`` times the largest one;
    the relative threshold makes the rank invariant under uniform row
    or column scaling.
    """
    J = np.asarray(J, dtype=np.complex128)
    if J.size == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(J.view(np.float64))):
        return float("inf"), 0
    s = np.linalg.svd(J, compute_uv=False)
    smax = float(s[0])
    if smax == 0.0:
        return float("inf"), 0
    rank = int(np.sum(s > tol * smax))
    smin = float(s[min(J.shape) - 1])
    cond = float("inf") if smin == 0.0 else smax / smin
    return cond, rank


def newton_step(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve J dx = -r; least squares when J is singular or rectangular.

    The minimum-norm solution keeps Newton stable near rank-deficient
    Jacobians (it moves transversally to a solution set instead of
    blowing up along near-null directions).
    """
    n, m = J.shape
    if n == m:
        try:
            dx = np.linalg.solve(J, -r)
            if np.all(np.isfinite(dx.view(np.float64))):
                return dx
        except np.linalg.LinAlgError:
            pass
    dx, *_ = np.linalg.lstsq(J, -r, rcond=1e-14)
    return dx


def solve_dd(A: list[list[CDD]], b: list[CDD]) -> list[CDD]:
    """Gaussian elimination with partial pivoting in CDD arithmetic."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for k in range(n):
        piv = max(range(k, n), key=lambda i: abs(M[i][k]))
        if abs(M[piv][k]) == 0.0:
            raise ZeroDivisionError("singular matrix in double-double solve")
        M[k], M[piv] = M[piv], M[k]
        inv = M[k][k]
        for i in range(k + 1, n):
            f = M[i][k] / inv
            if f.re.hi == 0.0 and f.im.hi == 0.0:
                continue
            for j in range(k, n + 1):
                M[i][j] = M[i][j] - f * M[k][j]
    x: list[CDD] = [CDD(0.0, 0.0)] * n
    for k in range(n - 1, -1, -1):
        s = M[k][n]
        for j in range(k + 1, n):
            s = s - M[k][j] * x[j]
        x[k] = s / M[k][k]
    return x
