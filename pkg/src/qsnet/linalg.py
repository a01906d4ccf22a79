"""Small dense linear-algebra helpers shared by the analysis modules.

All functions accept stacks of matrices with shape ``(..., r, r)``.
LU solves, Hermitian eigensolves and the matrix exponential are delegated to
LAPACK through numpy/scipy.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

__all__ = [
    "expm",
    "kron_batch",
    "lyapunov_operator",
    "vec",
    "unvec",
    "solve_lyapunov",
    "hermitian_defect",
    "min_eigvalsh",
    "pinv_hermitian",
    "principal_minors",
    "doubled_real",
]

# bound on elements per Kronecker chunk, keeps (K, r^2, r^2) stacks small
_CHUNK_ELEMENTS = 1 << 22


def kron_batch(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Kronecker product ``P (x) Q`` broadcast over leading axes."""
    p, q = P.shape[-1], Q.shape[-1]
    out = np.einsum("...ij,...kl->...ikjl", P, Q)
    return out.reshape(out.shape[:-4] + (p * q, p * q))


def lyapunov_operator(Az: np.ndarray, Av: np.ndarray | None = None) -> np.ndarray:
    """Matrix of ``S -> Az S + S Av^*`` acting on column-major ``vec(S)``.

    Equals the Kronecker sum ``I (x) Az + conj(Av) (x) I``.
    """
    Av = Az if Av is None else Av
    r = Az.shape[-1]
    eye = np.broadcast_to(np.eye(r), Az.shape)
    return kron_batch(eye, Az) + kron_batch(np.conj(Av), eye)


def vec(X: np.ndarray) -> np.ndarray:
    """Column-major vectorisation of the trailing two axes."""
    return np.swapaxes(X, -1, -2).reshape(X.shape[:-2] + (-1,))


def unvec(v: np.ndarray, r: int) -> np.ndarray:
    return np.swapaxes(v.reshape(v.shape[:-1] + (r, r)), -1, -2)


def _solve_stack(L: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``L x = rhs``; returns (x, singular_mask)."""
    singular = np.zeros(L.shape[:-2], dtype=bool)
    try:
        x = np.linalg.solve(L, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        x = np.full(rhs.shape, np.nan, dtype=np.result_type(L, rhs))
        for idx in np.ndindex(L.shape[:-2]):
            try:
                x[idx] = np.linalg.solve(L[idx], rhs[idx])
            except np.linalg.LinAlgError:
                singular[idx] = True
    return x, singular


def solve_lyapunov(Az: np.ndarray, F: np.ndarray, Av: np.ndarray | None = None,
                   with_cond: bool = False):
    """Solve ``Az S + S Av^* + F = 0`` by Kronecker vectorisation.

    ``Az`` may be a stack ``(K, r, r)``; ``F`` is broadcast against it.
    Rows whose Kronecker system is exactly singular come back as NaN and are
    flagged in the returned mask.

    Returns
    -------
    S : ndarray
    singular : ndarray of bool
    cond : ndarray, only when ``with_cond`` is true
    """
    Az = np.asarray(Az, dtype=complex)
    single = Az.ndim == 2
    if single:
        Az = Az[None]
        Av = None if Av is None else np.asarray(Av, dtype=complex)[None]
    r = Az.shape[-1]
    F = np.broadcast_to(np.asarray(F, dtype=complex), Az.shape)
    chunk = max(1, _CHUNK_ELEMENTS // r**4)
    S = np.empty(Az.shape, dtype=complex)
    singular = np.zeros(Az.shape[0], dtype=bool)
    cond = np.empty(Az.shape[0]) if with_cond else None
    for lo in range(0, Az.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        L = lyapunov_operator(Az[sl], None if Av is None else Av[sl])
        x, sing = _solve_stack(L, -vec(F[sl]))
        S[sl] = unvec(x, r)
        singular[sl] = sing
        if with_cond:
            with np.errstate(divide="ignore"):
                cond[sl] = np.linalg.cond(L)
    if single:
        S, singular = S[0], singular[0]
        cond = None if cond is None else cond[0]
    if with_cond:
        return S, singular, cond
    return S, singular


def hermitian_defect(X: np.ndarray) -> np.ndarray:
    """Max-entry distance ``|X - X^*|`` over the trailing two axes."""
    return np.max(np.abs(X - np.conj(np.swapaxes(X, -1, -2))), axis=(-2, -1))


def min_eigvalsh(X: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of the Hermitian part of ``X``."""
    H = 0.5 * (X + np.conj(np.swapaxes(X, -1, -2)))
    return np.linalg.eigvalsh(H)[..., 0]


def pinv_hermitian(X: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse of a Hermitian matrix via eigendecomposition.

    Eigenvalues with ``|w| <= rcond * max|w|`` are treated as zero.
    """
    w, U = np.linalg.eigh(0.5 * (X + X.conj().T))
    top = np.max(np.abs(w)) if w.size else 0.0
    keep = np.abs(w) > rcond * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (U * inv) @ U.conj().T


def principal_minors(X: np.ndarray, max_order: int) -> dict:
    """All principal minors of ``X`` up to ``max_order``, keyed by index tuple."""
    from itertools import combinations

    out = {}
    for k in range(1, max_order + 1):
        for idx in combinations(range(X.shape[0]), k):
            out[idx] = np.linalg.det(X[np.ix_(idx, idx)])
    return out


def doubled_real(S: np.ndarray) -> np.ndarray:
    """Real embedding ``[[Re S, -Im S], [Im S, Re S]]`` of a complex matrix."""
    return np.block([[S.real, -S.imag], [S.imag, S.real]])
