"""Bipartite Gaussian entanglement between nodes of a one-mode ring.

For nodes ``j != k`` with lag ``a = j - k`` the invariant state is separable
iff the partially transposed covariance

    Lambda = [[S_0,      C_a       ],
              [C_a^*,    conj(S_0) ]]

is positive semidefinite, where ``C_a`` is the lag-``a`` Fourier coefficient
of the covariance spectrum. All principal minors of order <= 3 are inherited
from a genuine covariance matrix, so only the sign of ``det Lambda`` decides.
The infinite chain uses the same construction with ``C_a`` computed by
quadrature over the whole unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidCovariance, MinorViolation, NotOneMode, SamePair
from .linalg import min_eigvalsh, pinv_hermitian, principal_minors
from .model import NodeBlocks
from .spectral import SpatialSpectrum, grid_moment, steady_spectrum

TOL_DET = 1e-9
TOL_LN = 1e-9
MINOR_FLOOR = -1e-6
FACTOR_RTOL = 1e-8

_PT = np.diag([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True)
class BipartiteLambda:
    """Partially transposed 4x4 covariance of a node pair."""

    lam: np.ndarray
    lag: int
    Theta: np.ndarray
    source: str = "finite"
    pair: tuple | None = None

    @property
    def L11(self) -> np.ndarray:
        return self.lam[:2, :2]

    @property
    def L12(self) -> np.ndarray:
        return self.lam[:2, 2:]

    @property
    def L21(self) -> np.ndarray:
        return self.lam[2:, :2]

    @property
    def L22(self) -> np.ndarray:
        return self.lam[2:, 2:]

    @property
    def covariance(self) -> np.ndarray:
        """Real covariance ``V = Re S(inf)`` of the pair."""
        V = self.lam.real
        return 0.5 * (V + V.T)


@dataclass(frozen=True)
class EntanglementReport:
    lag: int
    det_lambda: float
    log_negativity: float
    separable: bool
    ambiguous: bool
    det_factored: tuple
    factored_agree: bool
    source: str = "finite"
    pair: tuple | None = None
    tol_det: float = TOL_DET
    tol_ln: float = TOL_LN

    @property
    def consistent(self) -> bool:
        """Whether the determinant and log-negativity tests agree."""
        return (self.det_lambda < -self.tol_det) == (self.log_negativity > self.tol_ln)


def _lambda_from_spectrum(spectrum: SpatialSpectrum, a: int, source: str, pair=None) -> BipartiteLambda:
    if spectrum.S.shape[-1] != 2:
        raise NotOneMode("entanglement test requires one-mode nodes (2n = 2)")
    if a == 0:
        raise SamePair("nodes of a pair must differ")
    S0 = spectrum.moment(0)
    lam = np.block([[S0, spectrum.moment(a)], [spectrum.moment(-a), np.conj(S0)]])
    defect = np.max(np.abs(lam - lam.conj().T))
    if defect > 1e-10 * max(1.0, np.max(np.abs(lam))):
        raise ArithmeticError(f"Lambda is not Hermitian (defect {defect:.3e})")
    lam = 0.5 * (lam + lam.conj().T)
    return BipartiteLambda(lam=lam, lag=a, Theta=np.array(spectrum.Theta), source=source, pair=pair)


def bipartite_lambda(spectrum: SpatialSpectrum, j: int, k: int, N: int) -> BipartiteLambda:
    """``Lambda(inf)`` for nodes ``j`` and ``k`` of a ring of ``N`` nodes."""
    if spectrum.K != N:
        raise GridMismatch(f"spectrum sampled on {spectrum.K} points, ring has N={N}")
    if j == k:
        raise SamePair("nodes of a pair must differ")
    if not (0 <= j < N and 0 <= k < N):
        raise IndexError(f"node indices ({j}, {k}) outside 0..{N - 1}")
    return _lambda_from_spectrum(spectrum, j - k, "finite", pair=(j, k))


def factored_determinants(lam: np.ndarray, rcond: float = 1e-10) -> tuple[float, float]:
    """Both Schur-complement forms of ``det Lambda`` using generalised inverses."""
    L11, L12, L21, L22 = lam[:2, :2], lam[:2, 2:], lam[2:, :2], lam[2:, 2:]
    f1 = np.linalg.det(L11) * np.linalg.det(L22 - L21 @ pinv_hermitian(L11, rcond) @ L12)
    f2 = np.linalg.det(L22) * np.linalg.det(L11 - L12 @ pinv_hermitian(L22, rcond) @ L21)
    return float(f1.real), float(f2.real)


def check_minors(lam: np.ndarray, floor: float = MINOR_FLOOR) -> float:
    """Smallest principal minor of order <= 3; raises below ``floor``."""
    minors = principal_minors(lam, 3)
    idx, worst = min(minors.items(), key=lambda kv: kv[1].real)
    if worst.real < floor:
        raise MinorViolation(f"principal minor {idx} = {worst.real:.3e} is negative")
    return float(worst.real)


def log_negativity(V, Theta) -> float:
    """Base-2 log-negativity of a two-mode Gaussian covariance ``V``.

    The CCR scale is ``[X, X^T] = 2i Theta`` so that the vacuum has ``V = I``
    under canonical ``Theta``. Symplectic eigenvalues of the partial transpose
    are the moduli of the eigenvalues of ``blockdiag(Theta, Theta)^{-1} V~``.
    """
    V = np.asarray(V, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    if V.shape != (4, 4) or Theta.shape != (2, 2):
        raise InvalidCovariance("expected a 4x4 covariance and a 2x2 Theta")
    if np.max(np.abs(V - V.T)) > 1e-10 * max(1.0, np.max(np.abs(V))):
        raise InvalidCovariance("covariance is not symmetric")
    T2 = np.kron(np.eye(2), Theta)
    if min_eigvalsh(V + 1j * T2) < -1e-8:
        raise InvalidCovariance("V + i blockdiag(Theta, Theta) is not PSD")
    Vt = _PT @ V @ _PT
    nu = np.sort(np.abs(np.linalg.eigvals(np.linalg.solve(T2, Vt))))[::2]
    return float(np.sum(np.maximum(0.0, -np.log2(nu))))


def separability_verdict(L: BipartiteLambda, tol_det: float = TOL_DET, tol_ln: float = TOL_LN) -> EntanglementReport:
    """Determinant test (with log-negativity alongside) for one node pair."""
    lam = L.lam
    if np.max(np.abs(lam - lam.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(lam))):
        raise ArithmeticError("Lambda is not Hermitian")
    check_minors(lam)
    det_c = np.linalg.det(lam)
    det = float(det_c.real)
    f = factored_determinants(lam)
    scale = max(abs(det), *map(abs, f))
    floor = 1e-13 * max(1.0, np.max(np.abs(lam))) ** 4
    agree = all(abs(x - det) <= FACTOR_RTOL * scale + floor for x in f)
    ln = log_negativity(L.covariance, L.Theta)
    return EntanglementReport(
        lag=L.lag,
        det_lambda=det,
        log_negativity=ln,
        separable=det >= -tol_det,
        ambiguous=abs(det) <= tol_det,
        det_factored=f,
        factored_agree=agree,
        source=L.source,
        pair=L.pair,
        tol_det=tol_det,
        tol_ln=tol_ln,
    )


def fourier_coefficient(blocks: NodeBlocks, lag: int, K: int = 512, return_error: bool = False):
    """``S_lag = (2 pi)^{-1} int e^{i lag t} S(e^{it}) dt`` by the trapezoidal rule.

    The error estimate (``return_error=True``) compares against the rule on
    every other grid point.
    """
    if K < 64 or K % 2:
        raise ValueError("K must be an even integer >= 64")
    spec = steady_spectrum(blocks, K)
    value = spec.moment(lag)
    if not return_error:
        return value
    half = grid_moment(spec.points[::2], spec.S[::2], lag)
    return value, float(np.max(np.abs(value - half)))


def infinite_chain_lambda(blocks: NodeBlocks, a: int, K: int = 2048,
                          spectrum: SpatialSpectrum | None = None) -> BipartiteLambda:
    """``Lambda`` of the infinite chain for lag ``a`` (quadrature on ``K`` points)."""
    if blocks.dim != 2:
        raise NotOneMode("entanglement test requires one-mode nodes (2n = 2)")
    if a == 0:
        raise SamePair("nodes of a pair must differ")
    spec = steady_spectrum(blocks, K) if spectrum is None else spectrum
    return _lambda_from_spectrum(spec, a, "infinite")


def entanglement_profile(blocks: NodeBlocks, N: int, a_range, K: int | None = None,
                         infinite: bool = False, spectrum: SpatialSpectrum | None = None) -> list:
    """Reports for each nonzero lag in ``a_range``, ordered by lag.

    Finite-ring reports come first for each lag, followed by the
    infinite-chain report when ``infinite`` is set. Lag 0 is skipped.
    """
    if blocks.dim != 2:
        raise NotOneMode("entanglement test requires one-mode nodes (2n = 2)")
    lags = sorted(int(a) for a in a_range if int(a) != 0)
    finite = steady_spectrum(blocks, N) if spectrum is None else spectrum
    if finite.K != N:
        raise GridMismatch(f"spectrum sampled on {finite.K} points, ring has N={N}")
    inf_spec = None
    if infinite:
        inf_spec = steady_spectrum(blocks, K or 2048)
    out = []
    for a in lags:
        pair = (a % N, 0)
        out.append(separability_verdict(_lambda_from_spectrum(finite, a, "finite", pair=pair)))
        if inf_spec is not None:
            out.append(separability_verdict(_lambda_from_spectrum(inf_spec, a, "infinite")))
    return out
