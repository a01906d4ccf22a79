"""Spatial symbol, stability and the covariance spectrum of the ring.

The DFT over node indices block-diagonalises the circulant dynamics: at each
root of unity ``z`` the transformed variables evolve with the symbol

    A(z) = sum_{k=-d}^{d} A_k z^{-k}

and the steady-state covariance spectrum ``S_z`` solves the algebraic
Lyapunov equation ``A(z) S_z + S_z A(z)^* + B Omega B^T = 0``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDenominator,
    GridMismatch,
    NegativeTime,
    NotOnUnitCircle,
    NotStable,
)
from .linalg import (
    expm,
    hermitian_defect,
    lyapunov_operator,
    min_eigvalsh,
    solve_lyapunov,
    unvec,
    vec,
)
from .model import NodeBlocks

log = logging.getLogger(__name__)

HURWITZ_MARGIN = 1e-9
UNIT_TOL = 1e-12
ILL_CONDITIONED = 1e12


def unit_grid(K: int) -> np.ndarray:
    """The ``K``-th roots of unity ``exp(2 pi i k / K)``, ``k = 0..K-1``.

    Conjugate pairs are exact: ``grid[K - k] == conj(grid[k])``.
    """
    if K < 1:
        raise ValueError("grid size must be positive")
    k = np.arange(K)
    half = np.exp(2j * np.pi * k[: K // 2 + 1] / K)
    z = np.empty(K, dtype=complex)
    z[: K // 2 + 1] = half
    z[K // 2 + 1:] = np.conj(half[K - k[K // 2 + 1:]])
    z[0] = 1.0
    if K % 2 == 0:
        z[K // 2] = -1.0
    if K % 4 == 0:
        z[K // 4], z[3 * K // 4] = 1j, -1j
    return z


def grid_power(points: np.ndarray, a: int) -> np.ndarray:
    """``z_k ** a`` on a standard grid, by exact index lookup."""
    K = len(points)
    return points[(np.arange(K) * a) % K]


def grid_moment(points: np.ndarray, values: np.ndarray, a: int) -> np.ndarray:
    """Trapezoidal mean ``K^{-1} sum_k z_k^a values_k`` on a standard grid."""
    w = grid_power(points, a)
    return np.tensordot(w, values, axes=(0, 0)) / len(points)


@dataclass(frozen=True)
class SymbolGrid:
    """Symbol values on the standard ``K``-point grid (values may be absent
    for spectra re-imported from CSV)."""

    points: np.ndarray
    values: np.ndarray | None

    @property
    def K(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SpatialSpectrum:
    grid: SymbolGrid
    S: np.ndarray
    residuals: np.ndarray
    Theta: np.ndarray
    ill_conditioned: np.ndarray
    closed_form_deviation: np.ndarray | None = None
    closed_form_fallback: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.grid.K

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def moment(self, a: int) -> np.ndarray:
        """``K^{-1} sum_z z^a S_z`` (lag-``a`` covariance on a ring of size K)."""
        return grid_moment(self.points, self.S, a)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    worst_abscissa: float
    argmax_z: complex
    grid_size: int
    refined: bool = False

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "worst_abscissa": self.worst_abscissa,
            "argmax_z": [self.argmax_z.real, self.argmax_z.imag],
            "grid_size": self.grid_size,
            "refined": self.refined,
        }


def _check_unit(z) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > UNIT_TOL:
        raise NotOnUnitCircle(f"|z| = {abs(z)!r} is not 1")
    return z


def symbol(blocks: NodeBlocks, z) -> np.ndarray:
    """Evaluate ``A(z) = sum_k A_k z^{-k}`` at a point of the unit circle."""
    z = _check_unit(z)
    out = np.zeros((blocks.dim, blocks.dim), dtype=complex)
    for k in blocks.lags:
        out += blocks.A[k] * z ** (-k)
    return out


def symbol_grid(blocks: NodeBlocks, K: int) -> SymbolGrid:
    """Symbol values at all ``K``-th roots of unity."""
    points = unit_grid(K)
    values = np.zeros((K, blocks.dim, blocks.dim), dtype=complex)
    for k in blocks.lags:
        values += grid_power(points, -k)[:, None, None] * blocks.A[k]
    return SymbolGrid(points=points, values=values)


def _hurwitz_batch(Az: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lyapunov-certificate Hurwitz test over a stack of matrices.

    ``A P + P A^* + I = 0`` is solved by Kronecker vectorisation; the matrix
    is Hurwitz iff ``P`` is Hermitian positive definite. A singular Kronecker
    system means an eigenvalue pair with zero sum, hence not Hurwitz.
    """
    Az = np.asarray(Az, dtype=complex)
    r = Az.shape[-1]
    P, singular = solve_lyapunov(Az, np.eye(r))
    certified = np.zeros(Az.shape[0], dtype=bool)
    good = ~singular & np.all(np.isfinite(P), axis=(-2, -1))
    if np.any(good):
        Pg = P[good]
        scale = np.max(np.abs(Pg), axis=(-2, -1))
        herm = hermitian_defect(Pg) <= 1e-8 * np.maximum(scale, 1.0)
        certified[good] = herm & (min_eigvalsh(Pg) > 0.0)
    abscissa = np.max(np.linalg.eigvals(Az).real, axis=-1)
    return certified & (abscissa < -HURWITZ_MARGIN), abscissa


def is_hurwitz(Az) -> tuple[bool, float]:
    """Return ``(hurwitz, spectral_abscissa)`` for a square matrix."""
    ok, absc = _hurwitz_batch(np.asarray(Az, dtype=complex)[None])
    return bool(ok[0]), float(absc[0])


def default_grid_size(d: int) -> int:
    return max(256, 16 * (2 * d + 1))


def stability_sweep(blocks: NodeBlocks, K: int | None = None) -> StabilityReport:
    """Test ``A(z)`` for the Hurwitz property at all ``K``-th roots of unity.

    With ``K=None`` the grid is ``max(256, 16(2d+1))`` and is doubled once
    if the worst abscissa falls within 1e-3 of zero.
    """
    refine = K is None
    if K is None:
        K = default_grid_size(blocks.d)
    if K < 4 * (2 * blocks.d + 1):
        raise ValueError(f"grid size {K} below 4(2d+1) = {4 * (2 * blocks.d + 1)}")
    report = _sweep(blocks, K)
    if refine and abs(report.worst_abscissa) < 1e-3:
        report = _sweep(blocks, 2 * K)
        report = StabilityReport(report.stable, report.worst_abscissa,
                                 report.argmax_z, report.grid_size, refined=True)
    return report


def _sweep(blocks: NodeBlocks, K: int) -> StabilityReport:
    grid = symbol_grid(blocks, K)
    ok, absc = _hurwitz_batch(grid.values)
    worst = int(np.argmax(absc))
    return StabilityReport(
        stable=bool(np.all(ok)),
        worst_abscissa=float(absc[worst]),
        argmax_z=complex(grid.points[worst]),
        grid_size=K,
    )


def _closed_form_batch(Az: np.ndarray, F: np.ndarray):
    """One-mode closed-form Lyapunov solution over a stack of 2x2 symbols.

    With ``v = tr A`` and ``u = det A`` the Cayley-Hamilton reduction gives
    ``D = 2 Re(v) A - 2i Im(u) I`` and ``E1 = conj(A) - tr(conj A) I``, and
    ``S = -D^{-1} (A F - F E1^T)``. Returns ``(S, degenerate_mask)``.
    """
    Az = np.asarray(Az, dtype=complex)
    eye = np.eye(2)
    v = np.trace(Az, axis1=-2, axis2=-1)
    u = np.linalg.det(Az)
    D = 2.0 * v.real[:, None, None] * Az - 2j * u.imag[:, None, None] * eye
    det_D = 4.0 * (v.real**2 * u - 1j * v * v.real * u.imag - u.imag**2)
    scale = np.max(np.abs(D), axis=(-2, -1)) ** 2
    degenerate = (np.abs(v.real) <= 1e-14 * np.max(np.abs(Az), axis=(-2, -1))) | (
        np.abs(det_D) <= 1e-12 * np.maximum(scale, 1e-300)
    )
    trD = np.trace(D, axis1=-2, axis2=-1)
    safe = np.where(degenerate, 1.0, det_D)
    D_inv = (trD[:, None, None] * eye - D) / safe[:, None, None]
    E1 = np.conj(Az) - np.trace(np.conj(Az), axis1=-2, axis2=-1)[:, None, None] * eye
    S = -D_inv @ (Az @ F - F @ np.swapaxes(E1, -1, -2))
    S[degenerate] = np.nan
    return S, degenerate


def one_mode_closed_form(Az, forcing) -> np.ndarray:
    """Closed-form solution of ``A S + S A^* + F = 0`` for 2x2 matrices.

    Raises
    ------
    DegenerateDenominator
        when ``Re tr A`` or ``det D`` vanishes; callers should fall back to
        the Kronecker solve.
    """
    Az = np.asarray(Az, dtype=complex)
    if Az.shape != (2, 2):
        raise ValueError("closed form applies to 2x2 symbols only")
    S, degenerate = _closed_form_batch(Az[None], np.asarray(forcing, dtype=complex))
    if degenerate[0]:
        raise DegenerateDenominator("closed-form denominator vanishes")
    return S[0]


def lyapunov_residual(Az: np.ndarray, S: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Induced infinity-norm of ``A S + S A^* + F`` (stack-aware)."""
    R = Az @ S + S @ np.conj(np.swapaxes(Az, -1, -2)) + F
    return np.max(np.sum(np.abs(R), axis=-1), axis=-1)


def steady_spectrum(blocks: NodeBlocks, K: int) -> SpatialSpectrum:
    """Solve the per-frequency algebraic Lyapunov equation on the K-grid.

    Every ``A(z)`` on the grid must be Hurwitz. For one-mode nodes the
    closed-form solution is evaluated too and its relative deviation from
    the Kronecker solution is recorded (NaN where it degenerates).
    """
    grid = symbol_grid(blocks, K)
    ok, absc = _hurwitz_batch(grid.values)
    if not np.all(ok):
        bad = int(np.argmax(absc))
        raise NotStable(
            f"symbol not Hurwitz at z={complex(grid.points[bad]):.6g} "
            f"(abscissa {absc[bad]:.3e})"
        )
    F = blocks.forcing
    S, _, cond = solve_lyapunov(grid.values, F, with_cond=True)
    S = 0.5 * (S + np.conj(np.swapaxes(S, -1, -2)))
    residuals = lyapunov_residual(grid.values, S, F)
    ill = cond > ILL_CONDITIONED
    if np.any(ill):
        log.warning("%d grid points have Kronecker condition > %.0e", int(ill.sum()), ILL_CONDITIONED)

    deviation = fallback = None
    if blocks.dim == 2:
        S_cf, fallback = _closed_form_batch(grid.values, F)
        norm = np.maximum(np.max(np.abs(S), axis=(-2, -1)), np.finfo(float).tiny)
        deviation = np.max(np.abs(S_cf - S), axis=(-2, -1)) / norm
        deviation[fallback] = np.nan
    return SpatialSpectrum(
        grid=grid,
        S=S,
        residuals=residuals,
        Theta=np.array(blocks.Theta),
        ill_conditioned=ill,
        closed_form_deviation=deviation,
        closed_form_fallback=fallback,
    )


def _is_root_of_unity(z: complex, N: int) -> bool:
    return abs(abs(z) - 1.0) <= UNIT_TOL and abs(z**N - 1.0) <= 1e-9 * max(N, 1)


def transient_spectrum(blocks: NodeBlocks, N: int, S0, z, v, t: float) -> np.ndarray:
    """Cross-moment ``S_{z,v}(t)`` of the DFT variables at time ``t``.

    Solves the differential Lyapunov equation

        dS/dt = A(z) S + S A(v)^* + N delta_{zv} B Omega B^T,  S(0) = S0

    in closed form. The forcing integral uses the Kronecker system
    ``K^{-1}(e^{tK} - I) vec(F)`` with ``K = conj(A(v)) (+) A(z)``, or an
    augmented exponential when ``K`` is close to singular.
    """
    if not t >= 0.0:
        raise NegativeTime(f"t = {t!r} must be non-negative")
    z, v = _check_unit(z), _check_unit(v)
    for w in (z, v):
        if not _is_root_of_unity(w, N):
            raise GridMismatch(f"{w!r} is not an {N}-th root of unity")
    Az, Av = symbol(blocks, z), symbol(blocks, v)
    S0 = np.asarray(S0, dtype=complex)
    out = expm(t * Az) @ S0 @ expm(t * Av).conj().T
    if abs(z - v) > UNIT_TOL or t == 0.0:
        return out
    r = blocks.dim
    f = vec(N * blocks.forcing)
    L = lyapunov_operator(Az, Av)
    if np.linalg.cond(L) < 1e8:
        integral = np.linalg.solve(L, (expm(t * L) - np.eye(r * r)) @ f)
    else:
        aug = np.zeros((r * r + 1, r * r + 1), dtype=complex)
        aug[: r * r, : r * r] = L
        aug[: r * r, -1] = f
        integral = expm(t * aug)[: r * r, -1]
    return out + unvec(integral, r)


def cross_covariance(spectrum: SpatialSpectrum, j: int, k: int, N: int) -> np.ndarray:
    """Steady-state ``E(X_j X_k^T) = N^{-1} sum_z z^{j-k} S_z``."""
    if spectrum.K != N:
        raise GridMismatch(f"spectrum sampled on {spectrum.K} points, ring has N={N}")
    if not (0 <= j < N and 0 <= k < N):
        raise IndexError(f"node indices ({j}, {k}) outside 0..{N - 1}")
    return spectrum.moment(j - k)


# --------------------------------------------------------------------------
# CSV export


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def spectrum_header(r: int) -> list:
    cols = ["k", "Re(z)", "Im(z)"]
    for a in range(r):
        for b in range(r):
            cols += [f"S[{a}][{b}].re", f"S[{a}][{b}].im"]
    return cols + ["residual"]


def write_spectrum_csv(spectrum: SpatialSpectrum, target) -> None:
    """Write the spectrum to a path or an open text stream."""
    if not hasattr(target, "write"):
        with open(target, "w", newline="") as fh:
            write_spectrum_csv(spectrum, fh)
        return
    r = spectrum.S.shape[-1]
    w = csv.writer(target, lineterminator="\n")
    w.writerow(spectrum_header(r))
    for k, z in enumerate(spectrum.points):
        row = [str(k), _fmt(z.real), _fmt(z.imag)]
        for x in spectrum.S[k].reshape(-1):
            row += [_fmt(x.real), _fmt(x.imag)]
        row.append(_fmt(spectrum.residuals[k]))
        w.writerow(row)


def read_spectrum_csv(path, Theta) -> SpatialSpectrum:
    """Load a spectrum written by :func:`write_spectrum_csv`.

    ``Theta`` is not part of the CSV and must be supplied by the caller.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n_entries = (len(header) - 4) // 2
    r = int(round(np.sqrt(n_entries)))
    if header != spectrum_header(r):
        raise GridMismatch(f"unexpected spectrum CSV header in {Path(path).name}")
    K = len(body)
    points = np.array([complex(float(row[1]), float(row[2])) for row in body])
    if np.max(np.abs(points - unit_grid(K))) > 1e-12:
        raise GridMismatch("CSV points are not the standard roots-of-unity grid")
    vals = np.array([[float(x) for x in row[3:-1]] for row in body])
    S = (vals[:, 0::2] + 1j * vals[:, 1::2]).reshape(K, r, r)
    residuals = np.array([float(row[-1]) for row in body])
    return SpatialSpectrum(
        grid=SymbolGrid(points=unit_grid(K), values=None),
        S=S,
        residuals=residuals,
        Theta=np.asarray(Theta, dtype=float),
        ill_conditioned=np.zeros(K, dtype=bool),
    )
