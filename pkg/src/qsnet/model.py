"""Network parameters and the derived block-circulant QSDE matrices.

A ring of ``N`` identical nodes, each carrying ``2n`` canonical variables and
driven by ``2m`` field channels, is described by a CCR matrix ``Theta``,
Hamiltonian blocks ``R_0 ... R_d`` (with ``R_{-l} = R_l^T``) and a coupling
matrix ``M``. The node dynamics are

    dX_j = sum_{l=-d}^{d} A_l X_{j-l mod N} dt + B dW_j

with ``B = 2 Theta M^T``, ``A_0 = 2 Theta R_0 - 1/2 B J B^T Theta^{-1}`` and
``A_l = 2 Theta R_l`` otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    ParseError,
    R0NotSymmetric,
    RingTooShort,
    ThetaNotAntisymmetric,
    ThetaSingular,
)

STRUCT_TOL = 1e-12

_NETWORK_KEYS = ("n", "m", "N", "d", "theta", "R", "M")


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def symplectic_unit(k: int) -> np.ndarray:
    """Return ``I_k (x) [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(k), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class NetworkSpec:
    """Raw network parameters.

    Only ``R_0 ... R_d`` are stored; the negative-lag blocks follow from
    ``R_{-l} = R_l^T``.
    """

    n: int
    m: int
    N: int
    d: int
    theta: np.ndarray
    R: tuple
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen(self.theta))
        object.__setattr__(self, "R", tuple(_frozen(r) for r in self.R))
        object.__setattr__(self, "M", _frozen(self.M))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "N": self.N,
            "d": self.d,
            "theta": self.theta.tolist(),
            "R": [r.tolist() for r in self.R],
            "M": self.M.tolist(),
        }

    def replace(self, **changes) -> "NetworkSpec":
        data = dict(
            n=self.n, m=self.m, N=self.N, d=self.d, theta=self.theta, R=self.R, M=self.M
        )
        data.update(changes)
        return NetworkSpec(**data)


@dataclass(frozen=True)
class NodeBlocks:
    """Per-node matrices of the circulant QSDE.

    ``A`` maps each lag ``l`` in ``-d..d`` to the real ``2n x 2n`` block
    ``A_l``. Blocks may be built from a :class:`NetworkSpec` with
    :func:`build_blocks` or assembled directly for synthetic studies.
    """

    B: np.ndarray
    A: Mapping[int, np.ndarray]
    Omega: np.ndarray
    Theta: np.ndarray
    _lags: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = {int(k): _frozen(v, dtype=np.result_type(v, float)) for k, v in self.A.items()}
        if 0 not in A:
            raise DimensionMismatch("NodeBlocks requires the lag-0 block A_0")
        dim = A[0].shape
        for k, v in A.items():
            if v.shape != dim or dim[0] != dim[1]:
                raise DimensionMismatch(f"block A_{k} has shape {v.shape}, expected {dim}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", _frozen(self.B))
        object.__setattr__(self, "Omega", _frozen(self.Omega, dtype=complex))
        object.__setattr__(self, "Theta", _frozen(self.Theta))
        object.__setattr__(self, "_lags", tuple(sorted(A)))
        if self.B.shape[0] != dim[0]:
            raise DimensionMismatch(f"B has {self.B.shape[0]} rows, expected {dim[0]}")

    @property
    def dim(self) -> int:
        """Number of real variables per node (``2n``)."""
        return self.A[0].shape[0]

    @property
    def d(self) -> int:
        """Interaction range: the largest lag carried by ``A``."""
        return max(abs(k) for k in self._lags)

    @property
    def lags(self) -> tuple:
        return self._lags

    def block(self, lag: int) -> np.ndarray:
        """Return ``A_lag`` (zero outside the stored range)."""
        if lag in self.A:
            return self.A[lag]
        return np.zeros_like(self.A[0])

    @property
    def forcing(self) -> np.ndarray:
        """The diffusion term ``B Omega B^T`` (complex Hermitian)."""
        return self.B @ self.Omega @ self.B.T


def noise_ito_matrix(m: int) -> np.ndarray:
    """Ito matrix ``Omega = I_{2m} + iJ`` of ``m`` vacuum field channels."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    return np.eye(2 * m) + 1j * symplectic_unit(m)


def validate_spec(raw: NetworkSpec) -> NetworkSpec:
    """Check every structural invariant of ``raw`` and return it unchanged.

    Raises
    ------
    DimensionMismatch, ThetaNotAntisymmetric, ThetaSingular, R0NotSymmetric,
    RingTooShort
    """
    n, m, N, d = raw.n, raw.m, raw.N, raw.d
    for name, value in (("n", n), ("m", m), ("N", N), ("d", d)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
            raise DimensionMismatch(f"{name} must be a positive integer, got {value!r}")
    nn, mm = 2 * n, 2 * m
    if raw.theta.shape != (nn, nn):
        raise DimensionMismatch(f"theta has shape {raw.theta.shape}, expected {(nn, nn)}")
    if len(raw.R) != d + 1:
        raise DimensionMismatch(f"expected {d + 1} Hamiltonian blocks R_0..R_d, got {len(raw.R)}")
    for ell, r in enumerate(raw.R):
        if r.shape != (nn, nn):
            raise DimensionMismatch(f"R_{ell} has shape {r.shape}, expected {(nn, nn)}")
    if raw.M.shape != (mm, nn):
        raise DimensionMismatch(f"M has shape {raw.M.shape}, expected {(mm, nn)}")
    for name, arr in (("theta", raw.theta), ("M", raw.M), *((f"R_{i}", r) for i, r in enumerate(raw.R))):
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatch(f"{name} contains non-finite entries")

    if np.max(np.abs(raw.theta + raw.theta.T)) > STRUCT_TOL:
        raise ThetaNotAntisymmetric("theta + theta^T != 0")
    if abs(np.linalg.det(raw.theta)) < STRUCT_TOL:
        raise ThetaSingular("|det(theta)| < 1e-12")
    if np.max(np.abs(raw.R[0] - raw.R[0].T)) > STRUCT_TOL:
        raise R0NotSymmetric("R_0 - R_0^T != 0")
    if N <= 2 * d:
        raise RingTooShort(f"N={N} must exceed 2d={2 * d}")
    return raw


def build_blocks(spec: NetworkSpec) -> NodeBlocks:
    """Derive ``B``, ``A_{-d..d}`` and ``Omega`` from a network spec."""
    spec = validate_spec(spec)
    theta = spec.theta
    J = symplectic_unit(spec.m)
    B = 2.0 * theta @ spec.M.T
    # A_0 drift: -1/2 B J B^T Theta^{-1}, applied as a right solve against Theta
    bjb = B @ J @ B.T
    decoherence = np.linalg.solve(theta.T, bjb.T).T
    A = {0: 2.0 * theta @ spec.R[0] - 0.5 * decoherence}
    for ell in range(1, spec.d + 1):
        A[ell] = 2.0 * theta @ spec.R[ell]
        A[-ell] = 2.0 * theta @ spec.R[ell].T
    return NodeBlocks(B=B, A=A, Omega=noise_ito_matrix(spec.m), Theta=theta)


# --------------------------------------------------------------------------
# JSON network files


def _reject_constant(name):
    raise ParseError(f"non-finite number {name!r} in input")


def _as_matrix(value, name) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError(f"{name} must be a non-empty array of arrays")
    width = len(value[0])
    for row in value:
        if len(row) != width:
            raise ParseError(f"{name} is ragged")
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ParseError(f"{name} entries must be finite decimals")
    return np.array(value, dtype=float)


def spec_from_dict(data: Mapping) -> NetworkSpec:
    """Build a :class:`NetworkSpec` from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, Mapping):
        raise ParseError("network file must contain a JSON object")
    unknown = sorted(set(data) - set(_NETWORK_KEYS))
    if unknown:
        raise ParseError(f"unknown keys in network file: {unknown}")
    missing = [k for k in _NETWORK_KEYS if k not in data]
    if missing:
        raise ParseError(f"missing keys in network file: {missing}")
    ints = {}
    for k in ("n", "m", "N", "d"):
        v = data[k]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParseError(f"{k} must be an integer")
        ints[k] = v
    R = data["R"]
    if not isinstance(R, list):
        raise ParseError("R must be an array of matrices")
    return NetworkSpec(
        theta=_as_matrix(data["theta"], "theta"),
        R=tuple(_as_matrix(r, f"R[{i}]") for i, r in enumerate(R)),
        M=_as_matrix(data["M"], "M"),
        **ints,
    )


def loads_network(text: str) -> NetworkSpec:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return spec_from_dict(data)


def load_network(path) -> NetworkSpec:
    """Read a network JSON file (strict parsing; no validation)."""
    return loads_network(Path(path).read_text())


def dump_network(spec: NetworkSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=1) + "\n")


def canonical_spec(n: int = 1, m: int = 1, N: int = 4, d: int = 1,
                   R: Sequence | None = None, M=None, theta=None) -> NetworkSpec:
    """Convenience constructor with canonical ``Theta`` and zero defaults."""
    theta = symplectic_unit(n) if theta is None else theta
    if R is None:
        R = [np.zeros((2 * n, 2 * n)) for _ in range(d + 1)]
    M = np.zeros((2 * m, 2 * n)) if M is None else M
    return NetworkSpec(n=n, m=m, N=N, d=d, theta=theta, R=tuple(R), M=M)
