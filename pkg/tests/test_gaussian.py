import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.linalg import expm

from acoustomech import gaussian as gs
from acoustomech.gaussian import (
    CovarianceState,
    IntegrationError,
    LindbladChannel,
    NotHurwitzError,
    QuadraticModel,
    SpectrumResult,
    build_drift_diffusion,
    evolve_covariance,
    evolve_periods,
    hurwitz_margin,
    lyapunov_steady_state,
    mode_occupations,
    period_map,
    spectral_density,
    spectrum,
    symplectic_form,
)

SETTINGS = settings(max_examples=25, deadline=None,
                    suppress_health_check=[HealthCheck.filter_too_much])


# ---------------------------------------------------------------------------
# strategies


@st.composite
def damped_models(draw, max_modes=3):
    """Random stable quadratic models with thermal damping on every mode."""
    n = draw(st.integers(1, max_modes))
    freqs = draw(st.lists(st.floats(0.5, 5.0), min_size=n, max_size=n))
    W = np.zeros((2 * n, 2 * n))
    for i, w in enumerate(freqs):
        W[2 * i, 2 * i] = W[2 * i + 1, 2 * i + 1] = w
    for i in range(n):
        for j in range(i + 1, n):
            c = draw(st.floats(-0.3, 0.3))
            W[2 * i, 2 * j] = W[2 * j, 2 * i] = c
    gammas = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    nbars = draw(st.lists(st.floats(0.0, 5.0), min_size=n, max_size=n))
    chans = [LindbladChannel.thermal(i, g, nb) for i, (g, nb) in enumerate(zip(gammas, nbars))]
    model = QuadraticModel(n, W)
    A, _ = build_drift_diffusion(model, chans)
    assume(hurwitz_margin(A) > 1e-2)
    return model, chans


def damped_oscillator(omega=1.0, gamma=0.1, nbar=2.0):
    model = QuadraticModel(1, np.diag([omega, omega]))
    return model, [LindbladChannel.thermal(0, gamma, nbar)]


# ---------------------------------------------------------------------------
# construction and validation


def test_symplectic_form_is_antisymmetric_and_squares_to_minus_one():
    om = symplectic_form(3)
    assert np.allclose(om, -om.T)
    assert np.allclose(om @ om, -np.eye(6))


def test_quadratic_model_symmetrizes_and_is_read_only():
    W = np.array([[1.0, 0.2], [0.0, 1.0]])
    m = QuadraticModel(1, W)
    assert np.allclose(m.W0, m.W0.T)
    with pytest.raises(ValueError):
        m.W0[0, 0] = 3.0


@pytest.mark.parametrize("bad", [np.eye(3), np.full((2, 2), np.nan)])
def test_quadratic_model_rejects_bad_matrices(bad):
    with pytest.raises(ValueError):
        QuadraticModel(1, bad)


def test_channel_rates_must_be_non_negative():
    with pytest.raises(ValueError):
        LindbladChannel(0, -1.0)
    ch = LindbladChannel.thermal(0, 2.0, 3.0)
    assert ch.down_rate == pytest.approx(8.0)
    assert ch.up_rate == pytest.approx(6.0)


def test_drift_and_diffusion_of_damped_oscillator():
    model, chans = damped_oscillator(omega=2.0, gamma=0.4, nbar=1.5)
    A, D = build_drift_diffusion(model, chans)
    assert np.allclose(A, [[-0.2, 2.0], [-2.0, -0.2]])
    assert np.allclose(D, np.eye(2) * 0.4 * (1.5 + 0.5))


def test_channel_on_missing_mode_raises():
    model, _ = damped_oscillator()
    with pytest.raises(ValueError):
        build_drift_diffusion(model, [LindbladChannel(3, 1.0)])


def test_hurwitz_margin_examples():
    assert hurwitz_margin(np.diag([-1.0, -3.0])) == pytest.approx(1.0)
    assert hurwitz_margin(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0, abs=1e-14)
    assert hurwitz_margin(np.diag([-1.0, 0.5])) < 0


def test_vacuum_and_thermal_states_are_physical():
    assert CovarianceState.vacuum(2).is_physical()
    th = CovarianceState.thermal([0.0, 3.0])
    assert np.allclose(mode_occupations(th), [0.0, 3.0])
    squeezed_below_vacuum = CovarianceState(np.zeros(2), np.diag([0.1, 0.1]))
    assert not squeezed_below_vacuum.is_physical()


def test_spectrum_result_validates_grid():
    with pytest.raises(ValueError):
        SpectrumResult(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        SpectrumResult(np.array([0.0, 1.0]), np.array([1.0, np.inf]))


# ---------------------------------------------------------------------------
# steady state


def test_lyapunov_damped_oscillator_is_thermal():
    model, chans = damped_oscillator(nbar=2.5)
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    assert np.allclose(ss.sigma, np.eye(2) * 3.0, atol=1e-12)


def test_lyapunov_rejects_unstable_drift():
    with pytest.raises(NotHurwitzError):
        lyapunov_steady_state(np.diag([-1.0, 0.1]), np.eye(2))


def test_lyapunov_residual_on_widely_separated_frequencies():
    # frequencies spanning ten decades, as in the physical model
    W = np.diag([1.0, 1.0, 1e10, 1e10])
    W[0, 2] = W[2, 0] = 1e3
    model = QuadraticModel(2, W)
    chans = [LindbladChannel.thermal(0, 1e-3, 1e4), LindbladChannel.thermal(1, 1e6, 0.1)]
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    res = A @ ss.sigma + ss.sigma @ A.T + D
    assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(D)


@SETTINGS
@given(damped_models())
def test_lyapunov_residual_and_physicality(case):
    model, chans = case
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    res = A @ ss.sigma + ss.sigma @ A.T + D
    assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(D)
    assert ss.is_physical()
    assert np.all(mode_occupations(ss) >= -1e-9)


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(damped_models(max_modes=2), st.floats(0.0, 3.0))
def test_long_time_integration_reaches_lyapunov(case, n0):
    model, chans = case
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    t_end = 20.0 / hurwitz_margin(A)
    start = CovarianceState.thermal([n0] * model.n_modes)
    final = evolve_covariance(model, chans, start, [0.0, t_end], rtol=1e-10)[-1]
    err = np.linalg.norm(final.sigma - ss.sigma) / np.linalg.norm(ss.sigma)
    assert err < 1e-6


def test_evolve_matches_matrix_exponential():
    model, chans = damped_oscillator(omega=1.3, gamma=0.2, nbar=0.7)
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D).sigma
    s0 = np.diag([4.0, 0.3])
    t = 3.7
    E = expm(A * t)
    expected = E @ (s0 - ss) @ E.T + ss
    got = evolve_covariance(model, chans, CovarianceState(np.zeros(2), s0), [0.0, t],
                            rtol=1e-11, method="DOP853")[-1]
    assert np.allclose(got.sigma, expected, atol=1e-9)


def test_symplectic_eigenvalues_preserved_without_noise():
    W = np.diag([1.0, 1.0, 1.7, 1.7])
    W[0, 2] = W[2, 0] = 0.3
    W[1, 3] = W[3, 1] = -0.2
    model = QuadraticModel(2, W)
    rng = np.random.default_rng(4)
    S = expm(symplectic_form(2) @ (lambda M: M + M.T)(rng.normal(size=(4, 4)) * 0.3))
    sigma0 = S @ np.diag([1.5, 1.5, 0.5, 0.5]) @ S.T

    def nu(s):
        return np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ s)))

    traj = evolve_covariance(model, [], CovarianceState(np.zeros(4), sigma0),
                             np.linspace(0, 30, 7), rtol=1e-12, method="DOP853")
    for state in traj:
        assert np.allclose(nu(state.sigma), nu(sigma0), atol=1e-8)


def test_time_grid_validation():
    model, chans = damped_oscillator()
    state = CovarianceState.vacuum(1)
    with pytest.raises(ValueError):
        evolve_covariance(model, chans, state, [1.0, 0.5])
    with pytest.raises(ValueError):
        evolve_covariance(model, chans, CovarianceState.vacuum(2), [0.0, 1.0])


def test_integration_failure_reports_stiffness(monkeypatch):
    class Failed:
        success = False
        message = "Required step size is less than spacing between numbers."

    monkeypatch.setattr(gs, "solve_ivp", lambda *a, **k: Failed())
    model, chans = damped_oscillator(omega=1e6, gamma=1e-3)
    with pytest.raises(IntegrationError, match="stiffness ratio"):
        evolve_covariance(model, chans, CovarianceState.vacuum(1), [0.0, 1.0])


def test_period_map_of_static_drive_equals_exponential():
    model, chans = damped_oscillator(omega=1.0, gamma=0.3, nbar=1.0)
    driven = QuadraticModel(1, model.W0, np.zeros((2, 2)), drive_frequency=2.0)
    F, Q = period_map(driven, chans)
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D).sigma
    assert np.allclose(F, expm(A * driven.period), atol=1e-10)
    assert np.allclose(F @ ss @ F.T + Q, ss, atol=1e-10)
    start = CovarianceState.thermal([5.0])
    late = evolve_periods(F, Q, start, 2**10)
    assert np.allclose(late.sigma, ss, atol=1e-10)
    assert evolve_periods(F, Q, start, 0).sigma == pytest.approx(start.sigma)


# ---------------------------------------------------------------------------
# spectra


def test_single_mode_spectrum_matches_lorentzian():
    omega0, gamma, nbar = 5.0, 0.2, 3.0
    model, chans = damped_oscillator(omega0, gamma, nbar)
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    v = np.array([np.sqrt(2.0), 0.0])  # o + o^dag
    w = np.linspace(-8, 8, 801)
    S = spectral_density(A, ss.sigma, v, w)

    def lor(x):
        return (gamma / 2) / np.pi / ((x) ** 2 + (gamma / 2) ** 2)

    # with e^{+i omega tau}, <o^dag o> sits at +omega0 and <o o^dag> at -omega0
    expected = nbar * lor(w - omega0) + (nbar + 1) * lor(w + omega0)
    assert np.allclose(S, expected, rtol=1e-9)
    sym = spectral_density(A, ss.sigma, v, w, symmetrized=True)
    assert np.allclose(sym, 0.5 * (S + S[::-1]), rtol=1e-9, atol=1e-12)


def _sum_rule(A, sigma, v):
    eig = np.linalg.eigvals(A)
    marks = sorted(set(np.round(np.concatenate([eig.imag, -eig.imag]), 12)))
    pts = [-np.inf] + marks + [np.inf]

    def f(w):
        return float(spectral_density(A, sigma, v, w)[0])

    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += quad(f, a, b, limit=500, epsabs=0, epsrel=1e-8)[0]
    return total


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(damped_models(max_modes=2))
def test_psd_sum_rule(case):
    model, chans = case
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    v = np.zeros(model.dim)
    v[0] = np.sqrt(2.0)
    total = _sum_rule(A, ss.sigma, v)
    assert total == pytest.approx(v @ ss.sigma @ v, rel=5e-3)


def _fft_spectrum(A, sigma, v, dt, n):
    """One-sided FFT of C(tau) = v^T M e^{A^T tau} v, folded to both signs."""
    M = sigma + 0.5j * symplectic_form(A.shape[0] // 2)
    step = expm(A.T * dt)
    u = v.astype(complex)
    C = np.empty(n, dtype=complex)
    left = v @ M
    for k in range(n):
        C[k] = left @ u
        u = step @ u
    weights = np.ones(n)
    weights[0] = 0.5
    # S(w) = Re[int_0^inf C(tau) e^{i w tau} dtau] / pi
    series = n * np.fft.ifft(C * weights) * dt
    w = 2 * np.pi * np.fft.fftfreq(n, d=dt)
    order = np.argsort(w)
    return w[order], (series.real / np.pi)[order]


def test_resolvent_matches_fft_of_regression_correlation():
    # two coupled modes in the normal-mode-splitting regime
    W = np.diag([4.0, 4.0, 4.0, 4.0])
    W[0, 2] = W[2, 0] = 0.6
    model = QuadraticModel(2, W)
    chans = [LindbladChannel.thermal(0, 0.05, 10.0), LindbladChannel.thermal(1, 0.6, 0.2)]
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    v = np.zeros(4)
    v[0] = np.sqrt(2.0)
    dt = 0.02
    n = 2**16
    assert np.exp(-hurwitz_margin(A) * n * dt) < 1e-12
    w, S_fft = _fft_spectrum(A, ss.sigma, v, dt, n)
    S = spectral_density(A, ss.sigma, v, w)
    keep = S > 0.01 * S.max()
    assert keep.sum() > 100
    assert np.max(np.abs(S_fft[keep] / S[keep] - 1)) < 1e-2


def test_spectrum_wrapper_requires_hurwitz():
    with pytest.raises(NotHurwitzError):
        spectrum(np.diag([0.1, -1.0]), np.eye(2), np.eye(2), np.array([1.0, 0.0]), [0.0, 1.0])
    model, chans = damped_oscillator()
    A, D = build_drift_diffusion(model, chans)
    ss = lyapunov_steady_state(A, D)
    res = spectrum(A, D, ss, np.array([1.0, 0.0]), np.linspace(-2, 2, 5))
    assert res.values.shape == (5,)
