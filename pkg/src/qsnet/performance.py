"""Mean-square performance of a stable ring and its thermodynamic limit.

The cost weights node pairs with a block Toeplitz sequence ``sigma_k``
(``sigma_{-k} = sigma_k^T``). On a ring of ``N`` nodes the steady value is

    E_N = N^{-1} sum_{z in U_N} tr(Sigma_N(z) S_z),
    Sigma_N(z) = sum_{|k|<N} (1 - |k|/N) z^{-k} sigma_k,

and as ``N -> inf`` it tends to the unit-circle average of
``tr(Sigma_z S_z)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatch, NotOnUnitCircle, NotStable, ParseError
from .model import NodeBlocks, _as_matrix
from .spectral import SpatialSpectrum, UNIT_TOL, stability_sweep, steady_spectrum, unit_grid

REAL_TOL = 1e-10


@dataclass(frozen=True)
class WeightingSequence:
    """Finite-support weighting sequence ``sigma_0 .. sigma_kmax``."""

    sigma: tuple

    def __post_init__(self):
        sig = tuple(np.array(s, dtype=float) for s in self.sigma)
        if not sig:
            raise ValueError("weighting sequence needs at least sigma_0")
        shape = sig[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(s.shape != shape for s in sig):
            raise ValueError("all sigma_k must be square and of equal size")
        if np.max(np.abs(sig[0] - sig[0].T)) > 1e-12:
            raise ValueError("sigma_0 must be symmetric")
        for s in sig:
            s.setflags(write=False)
        object.__setattr__(self, "sigma", sig)

    @property
    def k_max(self) -> int:
        return len(self.sigma) - 1

    @property
    def dim(self) -> int:
        return self.sigma[0].shape[0]

    def lag(self, k: int) -> np.ndarray:
        """``sigma_k`` for any integer ``k`` (zero beyond the support)."""
        if abs(k) > self.k_max:
            return np.zeros_like(self.sigma[0])
        return self.sigma[k] if k >= 0 else self.sigma[-k].T

    def total_norm(self) -> float:
        """``sum_k ||sigma_k||_2`` over both signs of ``k``."""
        norms = [np.linalg.norm(s, 2) for s in self.sigma]
        return norms[0] + 2 * sum(norms[1:])

    def is_psd(self, K: int = 512, tol: float = 1e-12) -> bool:
        """Whether ``Sigma_z >= 0`` at all ``K``-th roots of unity."""
        return all(
            np.linalg.eigvalsh(spectral_weight(self, z))[0] >= -tol for z in unit_grid(K)
        )


def _check_unit(z) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > UNIT_TOL:
        raise NotOnUnitCircle(f"|z| = {abs(z)!r} is not 1")
    return z


def _weighted_symbol(w: WeightingSequence, z: complex, weights) -> np.ndarray:
    out = np.array(w.sigma[0], dtype=complex) * weights(0)
    for k in range(1, w.k_max + 1):
        c = weights(k)
        if c:
            out = out + c * (z ** (-k) * w.sigma[k] + z**k * w.sigma[k].T)
    return out


def spectral_weight(w: WeightingSequence, z) -> np.ndarray:
    """``Sigma_z = sum_k z^{-k} sigma_k`` (Hermitian on the unit circle)."""
    z = _check_unit(z)
    out = _weighted_symbol(w, z, lambda k: 1.0)
    if np.max(np.abs(out - out.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(out))):
        raise ArithmeticError("Sigma_z is not Hermitian")
    return out


def fejer_density(w: WeightingSequence, N: int, z) -> np.ndarray:
    """Triangular-kernel truncation ``sum_{|k|<N} (1-|k|/N) z^{-k} sigma_k``."""
    if N < 1:
        raise ValueError("N must be positive")
    z = _check_unit(z)
    return _weighted_symbol(w, z, lambda k: max(0.0, 1.0 - k / N))


def _trace_average(points, S, densities) -> complex:
    return np.einsum("kij,kji->", densities, S) / len(points)


def finite_cost(spectrum: SpatialSpectrum, w: WeightingSequence, N: int) -> float:
    """Steady cost ``E_N`` of the ring from its spectrum on the N-grid."""
    if spectrum.K != N:
        raise GridMismatch(f"spectrum sampled on {spectrum.K} points, ring has N={N}")
    if w.dim != spectrum.S.shape[-1]:
        raise ValueError("weighting and spectrum dimensions differ")
    dens = np.array([fejer_density(w, N, z) for z in spectrum.points])
    value = _trace_average(spectrum.points, spectrum.S, dens)
    if abs(value.imag) > REAL_TOL:
        raise ArithmeticError(f"cost has imaginary residue {value.imag:.3e}")
    return float(value.real)


def thermodynamic_cost(blocks: NodeBlocks, w: WeightingSequence, K: int = 512) -> tuple[float, float]:
    """Infinite-chain cost by the trapezoidal rule on ``K`` points.

    Returns ``(value, error_estimate)`` where the error estimate is the
    difference from the ``K/2``-point rule (every other node of the grid).
    """
    if K < 2 or K % 2:
        raise ValueError("K must be an even integer >= 2")
    report = stability_sweep(blocks)
    if not report.stable:
        raise NotStable(f"worst abscissa {report.worst_abscissa:.3e} at z={report.argmax_z:.6g}")
    spec = steady_spectrum(blocks, K)
    dens = np.array([spectral_weight(w, z) for z in spec.points])
    terms = np.einsum("kij,kji->k", dens, spec.S)
    full = terms.mean()
    half = terms[::2].mean()
    for v in (full, half):
        if abs(v.imag) > REAL_TOL:
            raise ArithmeticError(f"cost has imaginary residue {v.imag:.3e}")
    return float(full.real), float(abs(full.real - half.real))


# --------------------------------------------------------------------------
# weighting files: {"k_max": 1, "sigma": [S0, S1]}


def weights_from_dict(data) -> WeightingSequence:
    if not isinstance(data, dict):
        raise ParseError("weighting file must contain a JSON object")
    unknown = sorted(set(data) - {"k_max", "sigma"})
    if unknown:
        raise ParseError(f"unknown keys in weighting file: {unknown}")
    if "k_max" not in data or "sigma" not in data:
        raise ParseError("weighting file needs k_max and sigma")
    k_max, sigma = data["k_max"], data["sigma"]
    if isinstance(k_max, bool) or not isinstance(k_max, int) or k_max < 0:
        raise ParseError("k_max must be a non-negative integer")
    if not isinstance(sigma, list) or len(sigma) != k_max + 1:
        raise ParseError(f"sigma must list k_max + 1 = {k_max + 1} matrices")
    try:
        return WeightingSequence(tuple(_as_matrix(s, f"sigma[{i}]") for i, s in enumerate(sigma)))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_weights(path) -> WeightingSequence:
    def _bad(name):
        raise ParseError(f"non-finite number {name!r} in input")

    try:
        data = json.loads(Path(path).read_text(), parse_constant=_bad)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return weights_from_dict(data)
