"""Sufficient stability condition via a block LMI certificate.

The network is stable if there are ``S, Q > 0`` with

    [[A0 S + S A0^T + Q,  S,     At          ],
     [S,                  -I,    0           ],
     [At^T,               0,     -I / (2d)   ]]  <= 0,

where ``At = [A_{-d} ... A_{-1} A_1 ... A_d]``. By a Schur complement this is
``A0 S + S A0^T + Q + S^2 + 2d At At^T <= 0``. Fixing ``Q = eps I`` and
demanding equality gives an algebraic Riccati equation, solved here by
Newton-Kleinman iteration (one Lyapunov solve per step).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import A0NotHurwitz, DimensionMismatch, NoCertificateFound
from .linalg import solve_lyapunov
from .model import NodeBlocks
from .spectral import is_hurwitz

log = logging.getLogger(__name__)

SLACK_TOL = 1e-9
PD_TOL = 1e-10
MAX_ITER = 60
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class LmiCertificate:
    S: np.ndarray
    Q: np.ndarray
    slack: float
    iterations: int = 0
    residuals: tuple = field(default=(), repr=False)


def coupling_stack(blocks: NodeBlocks) -> np.ndarray:
    """``[A_{-d} ... A_{-1} A_1 ... A_d]`` as a ``2n x 4nd`` real matrix."""
    d = blocks.d
    lags = [*range(-d, 0), *range(1, d + 1)]
    if not lags:
        return np.zeros((blocks.dim, 0))
    return np.hstack([np.real(blocks.block(k)) for k in lags])


def assemble_lmi(blocks: NodeBlocks, S, Q) -> np.ndarray:
    """Assemble the symmetric block matrix of the stability LMI."""
    S = np.asarray(S, dtype=float)
    Q = np.asarray(Q, dtype=float)
    r = blocks.dim
    if S.shape != (r, r) or Q.shape != (r, r):
        raise DimensionMismatch(f"S and Q must be {r}x{r}, got {S.shape} and {Q.shape}")
    A0 = np.real(blocks.A[0])
    At = coupling_stack(blocks)
    w = At.shape[1]
    top = [A0 @ S + S @ A0.T + Q, S]
    mid = [S, -np.eye(r)]
    if w == 0:
        return np.block([top, mid])
    d = blocks.d
    return np.block([
        [*top, At],
        [*mid, np.zeros((r, w))],
        [At.T, np.zeros((w, r)), -np.eye(w) / (2 * d)],
    ])


def verify_certificate(blocks: NodeBlocks, S, Q) -> tuple[bool, float]:
    """Check ``S > 0``, ``Q > 0`` and that the assembled LMI is NSD.

    Returns ``(ok, slack)`` where ``slack`` is the largest eigenvalue of the
    assembled matrix.
    """
    S = np.asarray(S, dtype=float)
    Q = np.asarray(Q, dtype=float)
    L = assemble_lmi(blocks, S, Q)
    slack = float(np.linalg.eigvalsh(0.5 * (L + L.T))[-1])
    sym = max(np.max(np.abs(S - S.T)), np.max(np.abs(Q - Q.T))) <= 1e-12 * max(1.0, np.max(np.abs(S)))
    pd = (np.linalg.eigvalsh(0.5 * (S + S.T))[0] >= PD_TOL
          and np.linalg.eigvalsh(0.5 * (Q + Q.T))[0] >= PD_TOL)
    return bool(sym and pd and slack <= SLACK_TOL), slack


def riccati_residual(A0, S, C) -> float:
    return float(np.max(np.abs(A0 @ S + S @ A0.T + S @ S + C)))


def find_certificate(blocks: NodeBlocks, epsilon: float = 1e-6) -> LmiCertificate:
    """Search for an LMI certificate with ``Q = epsilon I``.

    Solves ``A0 S + S A0^T + S^2 + 2d sum_{j!=0} A_j A_j^T + eps I = 0`` by
    Newton-Kleinman, starting from the Lyapunov solution with ``S^2``
    dropped.

    Raises
    ------
    A0NotHurwitz
        the LMI cannot be feasible.
    NoCertificateFound
        the iteration left the stabilising region or did not converge. The
        condition is only sufficient, so the network may still be stable.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    A0 = np.real(np.asarray(blocks.A[0]))
    r = blocks.dim
    ok, absc = is_hurwitz(A0)
    if not ok:
        raise A0NotHurwitz(f"A_0 has spectral abscissa {absc:.3e}")
    At = coupling_stack(blocks)
    C = 2 * blocks.d * (At @ At.T) + epsilon * np.eye(r)
    tol = RESIDUAL_TOL * max(1.0, float(np.max(np.abs(C))))

    S, _ = solve_lyapunov(A0, C)
    S = np.real(0.5 * (S + S.T))
    residuals = [riccati_residual(A0, S, C)]
    for it in range(1, MAX_ITER + 1):
        closed = A0 + S
        if not is_hurwitz(closed)[0]:
            raise NoCertificateFound(
                f"A0 + S_k lost the Hurwitz property at iteration {it}",
                residual=residuals[-1], iterations=it,
            )
        S_next, singular = solve_lyapunov(closed, C - S @ S)
        if singular:
            raise NoCertificateFound("singular Newton step", residual=residuals[-1], iterations=it)
        S = np.real(0.5 * (S_next + S_next.T))
        res = riccati_residual(A0, S, C)
        residuals.append(res)
        log.debug("newton-kleinman iteration %d residual %.3e", it, res)
        if res < tol:
            Q = epsilon * np.eye(r)
            good, slack = verify_certificate(blocks, S, Q)
            if not good:
                raise NoCertificateFound(
                    f"converged Riccati solution fails verification (slack {slack:.3e})",
                    residual=res, iterations=it,
                )
            return LmiCertificate(S=S, Q=Q, slack=slack, iterations=it, residuals=tuple(residuals))
        if not np.isfinite(res):
            break
    raise NoCertificateFound(
        f"no convergence after {MAX_ITER} iterations", residual=residuals[-1], iterations=MAX_ITER
    )
