import numpy as np
import pytest

from qsnet.model import NodeBlocks, build_blocks, canonical_spec, noise_ito_matrix, symplectic_unit

THETA = symplectic_unit(1)
I2 = np.eye(2)


def decoupled_spec(N=4):
    """One-mode nodes, R = 0, M = I: A_0 = -2I, B = 2 Theta, no coupling."""
    return canonical_spec(n=1, m=1, N=N, d=1, M=np.eye(2))


def rotation_spec(r, N=4):
    """Decoupled gauge example plus nearest-neighbour R_1 = r I."""
    R = [np.zeros((2, 2)), r * np.eye(2)]
    return canonical_spec(n=1, m=1, N=N, d=1, R=R, M=np.eye(2))


def synthetic_blocks(A, B=None):
    """NodeBlocks from an explicit lag -> matrix map (m = 1 unless B given)."""
    A = {k: np.asarray(v, dtype=float) for k, v in A.items()}
    r = A[0].shape[0]
    if B is None:
        B = 2 * symplectic_unit(r // 2)
    B = np.asarray(B, dtype=float)
    return NodeBlocks(B=B, A=A, Omega=noise_ito_matrix(B.shape[1] // 2), Theta=symplectic_unit(r // 2))


def random_hurwitz_2x2(rng, scale=1.0):
    """Random complex 2x2 matrix shifted to be Hurwitz with margin."""
    A = scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    shift = np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 2.0)
    return A - shift * np.eye(2)


def random_psd(rng, r=2, complex_=True):
    G = rng.standard_normal((r, r)) + (1j * rng.standard_normal((r, r)) if complex_ else 0)
    return G @ G.conj().T


@pytest.fixture
def decoupled():
    return build_blocks(decoupled_spec())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criterion -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
