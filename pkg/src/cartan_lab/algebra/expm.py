"""Matrix exponential: exact series for nilpotents, Pade scaling-and-squaring otherwise."""
from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from .matrix import Mat
from .scalars import Field

DEFAULT_PADE_DEGREE = 13


@lru_cache(maxsize=None)
def pade_coefficients(q: int) -> tuple[float, ...]:
    """Coefficients of the diagonal [q/q] Pade numerator of exp."""
    return tuple(
        factorial(2 * q - j) * factorial(q) / (factorial(2 * q) * factorial(j) * factorial(q - j))
        for j in range(q + 1)
    )


def nilpotency_index(X: Mat) -> int | None:
    """Smallest ``j`` with ``X**j == 0`` exactly, or ``None`` when no power up to ``n`` vanishes."""
    # the complex embedding of an H-matrix has exactly the same zero pattern of powers
    A = X.to_complex().data if X.field is Field.QUATERNION else X.data
    if not A.any():
        return 1
    P = A
    for j in range(2, A.shape[0] + 1):
        P = P @ A
        if not P.any():
            return j
    return None


def _nilpotent_series(X: Mat, index: int) -> Mat:
    out = Mat.eye_like(X.rows, X.field)
    P = Mat.eye_like(X.rows, X.field)
    for j in range(1, index):
        P = P @ X
        out = out + P.scale(1.0 / factorial(j))
    return out


def _pade_expm(A: np.ndarray, q: int) -> np.ndarray:
    n = A.shape[0]
    norm1 = np.max(np.sum(np.abs(A), axis=0)) if n else 0.0
    s = max(0, int(np.ceil(np.log2(norm1))) + 1) if norm1 > 0.5 else 0
    A = A / (2.0**s)
    c = pade_coefficients(q)
    # split into even and odd parts: N = V + U, D = V - U
    A2 = A @ A
    P = np.eye(n, dtype=A.dtype)
    V = c[0] * P
    W = c[1] * P
    for j in range(2, q + 1, 2):
        P = P @ A2
        V = V + c[j] * P
        if j + 1 <= q:
            W = W + c[j + 1] * P
    U = A @ W
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def mat_exp(X: Mat, pade_degree: int = DEFAULT_PADE_DEGREE) -> Mat:
    """Matrix exponential of a square :class:`Mat`.

    Nilpotent inputs (some power vanishes exactly, as for strictly
    block-triangular matrices) are summed with the terminating series.
    Everything else goes through scaling and squaring with a diagonal
    Pade approximant of the given degree.  Quaternionic matrices are
    exponentiated through their complex embedding, which is an algebra
    homomorphism.
    """
    if not X.is_square:
        raise ValueError("mat_exp requires a square matrix")
    idx = nilpotency_index(X)
    if idx is not None:
        return _nilpotent_series(X, idx)
    if X.field is Field.QUATERNION:
        E = _pade_expm(X.to_complex().data, pade_degree)
        return Mat.from_complex_embedding(E, X.rows, X.cols)
    return Mat(_pade_expm(X.data, pade_degree), X.field)


def mat_log(X: Mat) -> Mat:
    """Principal matrix logarithm (scipy ``logm``, via the embedding for H)."""
    from scipy.linalg import logm

    if X.field is Field.QUATERNION:
        L = logm(X.to_complex().data)
        return Mat.from_complex_embedding(L, X.rows, X.cols)
    L = logm(X.data)
    if X.field is Field.REAL:
        L = np.real_if_close(L, tol=1e6)
        if np.iscomplexobj(L):
            raise ValueError("real logarithm does not exist")
    return Mat(L, X.field)
