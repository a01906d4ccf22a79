import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_continuous_lyapunov

from qsnet.ensemble import EnsembleConfig, random_network
from qsnet.errors import DegenerateDenominator, GridMismatch, NegativeTime, NotOnUnitCircle, NotStable
from qsnet.linalg import solve_lyapunov
from qsnet.model import build_blocks
from qsnet.spectral import (
    cross_covariance,
    default_grid_size,
    is_hurwitz,
    one_mode_closed_form,
    read_spectrum_csv,
    stability_sweep,
    steady_spectrum,
    symbol,
    symbol_grid,
    transient_spectrum,
    unit_grid,
    write_spectrum_csv,
)

from conftest import I2, THETA, decoupled_spec, random_hurwitz_2x2, random_psd, rotation_spec, synthetic_blocks

GAUGE = I2 + 1j * THETA


def _random_stable(index, d=3, seed=5):
    cfg = EnsembleConfig(count=max(index + 1, 1), N=64, d=d, seed=seed)
    return build_blocks(random_network(cfg, index))


# -- grid -------------------------------------------------------------------


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5, 8, 9, 64, 400])
def test_unit_grid_matches_exp_and_pairs_exactly(K):
    z = unit_grid(K)
    np.testing.assert_allclose(z, np.exp(2j * np.pi * np.arange(K) / K), atol=1e-15)
    for k in range(1, K):
        assert z[K - k] == np.conj(z[k])


# -- symbol -----------------------------------------------------------------


def test_symbol_rotation_at_one():
    b = build_blocks(rotation_spec(0.25))
    np.testing.assert_allclose(symbol(b, 1.0), -2 * I2 + THETA, atol=1e-15)


def test_symbol_rotation_at_i_cancels():
    b = build_blocks(rotation_spec(0.25))
    np.testing.assert_allclose(symbol(b, 1j), -2 * I2, atol=1e-15)


def test_symbol_without_coupling_is_constant():
    b = synthetic_blocks({0: -2 * I2})
    for z in unit_grid(7):
        np.testing.assert_array_equal(symbol(b, z), -2 * I2)


def test_symbol_off_circle():
    b = build_blocks(decoupled_spec())
    with pytest.raises(NotOnUnitCircle):
        symbol(b, 1.0 + 1e-9)


def test_symbol_grid_matches_pointwise_and_conjugation():
    b = _random_stable(0)
    grid = symbol_grid(b, 16)
    for k, z in enumerate(grid.points):
        np.testing.assert_allclose(grid.values[k], symbol(b, z), atol=1e-12)
        # conj(A_z) = A_{1/z}
        np.testing.assert_allclose(np.conj(grid.values[k]), grid.values[(-k) % 16], atol=1e-12)


def test_symbol_linear_in_blocks(rng):
    A1 = {k: rng.standard_normal((2, 2)) for k in (-1, 0, 1)}
    A2 = {k: rng.standard_normal((2, 2)) for k in (-1, 0, 1)}
    z = np.exp(0.7j)
    lhs = symbol(synthetic_blocks({k: 2 * A1[k] - A2[k] for k in A1}), z)
    rhs = 2 * symbol(synthetic_blocks(A1), z) - symbol(synthetic_blocks(A2), z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


# -- Hurwitz ----------------------------------------------------------------


def test_hurwitz_diagonal():
    ok, absc = is_hurwitz(-2 * I2)
    assert ok and absc == pytest.approx(-2)


def test_hurwitz_rotation_generator_is_not():
    ok, absc = is_hurwitz(THETA)
    assert not ok
    assert absc == pytest.approx(0, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 2 * np.pi))
def test_hurwitz_rotation_family(r, theta):
    ok, absc = is_hurwitz(-2 * I2 + 4 * r * np.cos(theta) * THETA)
    assert ok
    assert absc == pytest.approx(-2, abs=1e-12)


def test_hurwitz_margin():
    assert not is_hurwitz(-1e-10 * I2)[0]
    assert is_hurwitz(-1e-8 * I2)[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hurwitz_agrees_with_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    ok, absc = is_hurwitz(A)
    oracle = np.max(np.linalg.eigvals(A).real)
    assert absc == pytest.approx(oracle)
    if abs(oracle) > 1e-6:
        assert ok == (oracle < 0)


# -- stability sweep --------------------------------------------------------


@pytest.mark.parametrize("r", [0.0, 0.25, 0.6, 3.0])
def test_sweep_rotation_chain_stable(r):
    rep = stability_sweep(build_blocks(rotation_spec(r)), 256)
    assert rep.stable
    assert rep.worst_abscissa == pytest.approx(-2, abs=1e-12)
    assert rep.grid_size == 256


def test_sweep_positive_a0_unstable():
    rep = stability_sweep(synthetic_blocks({0: I2}), 64)
    assert not rep.stable
    assert rep.worst_abscissa == pytest.approx(1)


def test_sweep_synthetic_unstable_at_one():
    rep = stability_sweep(synthetic_blocks({0: -2 * I2, 1: 2 * I2, -1: 2 * I2}), 256)
    assert not rep.stable
    assert rep.worst_abscissa == pytest.approx(2)
    assert rep.argmax_z == 1


def test_sweep_grid_floor():
    b = synthetic_blocks({0: -2 * I2, 1: I2, -1: I2, 2: I2, -2: I2})
    with pytest.raises(ValueError):
        stability_sweep(b, 19)
    stability_sweep(b, 20)


def test_sweep_default_grid_and_refinement():
    assert default_grid_size(1) == 256
    assert default_grid_size(20) == 16 * 41
    # symbol -2I + eps... abscissa -2 + 4 cos t * 0.4999... worst near zero forces refinement
    b = synthetic_blocks({0: -2 * I2, 1: 0.9999 * I2, -1: 0.9999 * I2})
    rep = stability_sweep(b)
    assert rep.refined and rep.grid_size == 512
    assert rep.stable


# -- steady spectrum --------------------------------------------------------


def test_gauge_spectrum_is_not_conjugation_symmetric():
    # S_z = I + i Theta at every z, so S_{1/z} != conj(S_z) with complex forcing
    spec = steady_spectrum(build_blocks(decoupled_spec()), 8)
    assert np.max(np.abs(spec.S[7] - np.conj(spec.S[1]))) == pytest.approx(2.0)


def test_steady_decoupled_gauge():
    spec = steady_spectrum(build_blocks(decoupled_spec()), 16)
    np.testing.assert_allclose(spec.S, np.broadcast_to(GAUGE, (16, 2, 2)), atol=1e-14)


@pytest.mark.parametrize("r", [0.1, 0.25, 0.6, 2.0])
def test_steady_rotation_chain_is_gauge(r):
    spec = steady_spectrum(build_blocks(rotation_spec(r, N=64)), 64)
    assert np.max(np.abs(spec.S - GAUGE)) <= 1e-11


def test_steady_zero_forcing():
    b = synthetic_blocks({0: -2 * I2, 1: 0.3 * THETA, -1: 0.3 * THETA}, B=np.zeros((2, 2)))
    spec = steady_spectrum(b, 8)
    np.testing.assert_array_equal(spec.S, 0)


def test_steady_requires_stability():
    with pytest.raises(NotStable):
        steady_spectrum(synthetic_blocks({0: I2}), 8)


@pytest.mark.parametrize("index", range(5))
def test_steady_matches_scipy_and_invariants(index):
    b = _random_stable(index)
    spec = steady_spectrum(b, 64)
    for k in range(0, 64, 7):
        Az = spec.grid.values[k]
        oracle = solve_continuous_lyapunov(Az, -b.forcing)
        np.testing.assert_allclose(spec.S[k], oracle, rtol=1e-9, atol=1e-9 * np.max(np.abs(oracle)))
    assert np.max(spec.residuals) <= 1e-10
    assert np.max(np.abs(spec.S - np.conj(np.swapaxes(spec.S, 1, 2)))) <= 1e-10
    assert np.min(np.linalg.eigvalsh(spec.S)) >= -1e-10
    # conjugation pairs z <-> 1/z with the forcing conjugated too
    S_bar, _ = solve_lyapunov(spec.grid.values, np.conj(b.forcing))
    np.testing.assert_allclose(spec.S[(-np.arange(64)) % 64], np.conj(S_bar), atol=1e-10)
    # steady CCR: imaginary part of the single-node covariance is Theta
    np.testing.assert_allclose(spec.moment(0).imag, THETA, atol=2e-8)
    assert np.nanmax(spec.closed_form_deviation) <= 1e-9


# -- closed form ------------------------------------------------------------


def test_closed_form_gauge():
    np.testing.assert_allclose(one_mode_closed_form(-2 * I2, 4 * GAUGE), GAUGE, atol=1e-14)


def test_closed_form_rotation():
    np.testing.assert_allclose(one_mode_closed_form(-2 * I2 + THETA, 4 * GAUGE), GAUGE, atol=1e-14)


def test_closed_form_random_against_kronecker(rng):
    worst = 0.0
    for _ in range(100):
        A = random_hurwitz_2x2(rng)
        F = random_psd(rng)
        oracle = solve_continuous_lyapunov(A, -F)
        S = one_mode_closed_form(A, F)
        worst = max(worst, np.max(np.abs(S - oracle)) / np.max(np.abs(oracle)))
    assert worst <= 1e-9


def test_closed_form_degenerate():
    # pure imaginary trace: Re tr A = 0
    with pytest.raises(DegenerateDenominator):
        one_mode_closed_form(np.diag([-1.0 + 0j, 1.0]), I2)


# -- transient --------------------------------------------------------------


def test_transient_at_zero_is_identity():
    b = build_blocks(decoupled_spec())
    S0 = np.array([[2.0, 0.3j], [-0.3j, 1.0]])
    np.testing.assert_array_equal(transient_spectrum(b, 4, S0, 1, 1, 0.0), S0)


@pytest.mark.parametrize("t", [0.0, 0.5, 2.0])
def test_transient_gauge_scalar_ode(t):
    b = build_blocks(decoupled_spec())
    out = transient_spectrum(b, 4, np.zeros((2, 2)), 1j, 1j, t)
    # s' = -4 s + 16, s(0) = 0
    np.testing.assert_allclose(out, 4 * (1 - np.exp(-4 * t)) * GAUGE, atol=1e-10)


def test_transient_gauge_half_value():
    b = build_blocks(decoupled_spec())
    out = transient_spectrum(b, 4, np.zeros((2, 2)), 1, 1, 0.5)
    assert out[0, 0].real == pytest.approx(3.4587, abs=1e-4)


def test_transient_off_diagonal_zero():
    b = build_blocks(decoupled_spec())
    out = transient_spectrum(b, 4, np.zeros((2, 2)), 1, -1, 3.0)
    np.testing.assert_array_equal(out, 0)


def test_transient_negative_time():
    with pytest.raises(NegativeTime):
        transient_spectrum(build_blocks(decoupled_spec()), 4, I2, 1, 1, -0.1)


def test_transient_requires_ring_frequency():
    with pytest.raises(GridMismatch):
        transient_spectrum(build_blocks(decoupled_spec()), 4, I2, np.exp(0.1j), 1, 1.0)


def test_transient_matches_ode_integration(rng):
    from scipy.integrate import solve_ivp

    b = _random_stable(1)
    N = 8
    z = unit_grid(N)[3]
    Az = symbol(b, z)
    S0 = random_psd(rng)
    F = N * b.forcing

    def rhs(_, y):
        S = y.reshape(2, 2)
        return (Az @ S + S @ Az.conj().T + F).reshape(-1)

    t = 0.05
    sol = solve_ivp(rhs, (0, t), S0.reshape(-1).astype(complex), rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(transient_spectrum(b, N, S0, z, z, t), sol.y[:, -1].reshape(2, 2),
                               rtol=1e-7, atol=1e-7 * np.max(np.abs(sol.y[:, -1])))


def test_transient_converges_to_steady():
    b = _random_stable(2)
    N = 16
    spec = steady_spectrum(b, N)
    absc = stability_sweep(b, N * 16).worst_abscissa
    for k in (0, 5):
        z = spec.points[k]
        res = [np.max(np.abs(transient_spectrum(b, N, np.zeros((2, 2)), z, z, t) - N * spec.S[k]))
               for t in (1 / abs(absc), 10 / abs(absc), 40 / abs(absc))]
        assert res[0] >= res[1] >= res[2]
        assert res[2] <= 1e-8 * max(1.0, np.max(np.abs(N * spec.S[k])))


# -- cross covariance -------------------------------------------------------


def test_cross_covariance_gauge():
    spec = steady_spectrum(build_blocks(decoupled_spec(N=6)), 6)
    np.testing.assert_allclose(cross_covariance(spec, 2, 2, 6), GAUGE, atol=1e-14)
    np.testing.assert_allclose(cross_covariance(spec, 1, 4, 6), 0, atol=1e-14)


def test_cross_covariance_translation_invariance():
    b = _random_stable(3)
    N = 24
    spec = steady_spectrum(b, N)
    for j, k in [(0, 5), (3, 1), (20, 7)]:
        np.testing.assert_allclose(cross_covariance(spec, j, k, N),
                                   cross_covariance(spec, (j + 1) % N, (k + 1) % N, N), atol=1e-12)
    np.testing.assert_allclose(cross_covariance(spec, 4, 4, N).imag, THETA, atol=2e-8)


def test_cross_covariance_grid_mismatch():
    spec = steady_spectrum(build_blocks(decoupled_spec()), 8)
    with pytest.raises(GridMismatch):
        cross_covariance(spec, 0, 1, 6)


# -- CSV --------------------------------------------------------------------


def test_spectrum_csv_round_trip(tmp_path):
    b = _random_stable(4)
    spec = steady_spectrum(b, 32)
    path = tmp_path / "s.csv"
    write_spectrum_csv(spec, path)
    back = read_spectrum_csv(path, b.Theta)
    assert back.K == 32
    np.testing.assert_array_equal(back.S, spec.S)
    np.testing.assert_array_equal(back.residuals, spec.residuals)
    header = path.read_text().splitlines()[0]
    assert header == "k,Re(z),Im(z),S[0][0].re,S[0][0].im,S[0][1].re,S[0][1].im," \
                     "S[1][0].re,S[1][0].im,S[1][1].re,S[1][1].im,residual"
