"""Quadratic open-system dynamics of bosonic modes in the quadrature picture.

Conventions: r = (q1, p1, ..., qn, pn) with q = (o + o^dag)/sqrt(2),
p = i(o^dag - o)/sqrt(2), [q, p] = i. The Hamiltonian is H/hbar = r^T W r / 2
(plus an optional cos(omega_d t) r^T W1 r / 2 drive) and each mode may carry a
pair of Lindblad rates (down: L[o], up: L[o^dag]). Covariances are the
symmetrized second moments, so the vacuum has sigma = I/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_lyapunov

__all__ = [
    "NotHurwitzError",
    "IntegrationError",
    "QuadraticModel",
    "LindbladChannel",
    "CovarianceState",
    "SpectrumResult",
    "symplectic_form",
    "build_drift_diffusion",
    "hurwitz_margin",
    "lyapunov_steady_state",
    "evolve_covariance",
    "period_map",
    "evolve_periods",
    "time_averaged_occupations",
    "mode_occupations",
    "spectral_density",
    "spectrum",
]

PHYSICALITY_TOL = 1e-9


class NotHurwitzError(ValueError):
    """Raised when a drift matrix has an eigenvalue with Re >= 0."""


class IntegrationError(RuntimeError):
    """Raised when the covariance integrator cannot make progress."""


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form, one [[0, 1], [-1, 0]] block per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _symmetric(mat, size: int, name: str) -> NDArray[np.float64]:
    arr = np.array(mat, dtype=float)
    if arr.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr = 0.5 * (arr + arr.T)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadraticModel:
    """Real symmetric quadratic Hamiltonian over ``n_modes`` bosonic modes.

    ``W0`` and ``W1`` are in rad/s and are symmetrized on construction.
    """

    n_modes: int
    W0: NDArray[np.float64]
    W1: NDArray[np.float64] | None = None
    drive_frequency: float = 0.0

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError("n_modes must be a positive integer")
        size = 2 * self.n_modes
        object.__setattr__(self, "W0", _symmetric(self.W0, size, "W0"))
        if self.W1 is not None:
            object.__setattr__(self, "W1", _symmetric(self.W1, size, "W1"))
        if not (self.drive_frequency >= 0.0 and np.isfinite(self.drive_frequency)):
            raise ValueError("drive_frequency must be finite and >= 0")

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    @property
    def is_static(self) -> bool:
        return self.W1 is None

    @property
    def period(self) -> float:
        if self.is_static or self.drive_frequency == 0.0:
            raise ValueError("model has no drive period")
        return 2.0 * np.pi / self.drive_frequency

    def quadratic_form(self, t=None) -> NDArray[np.float64]:
        if self.W1 is None:
            return self.W0
        if t is None or t == "static":
            raise ValueError("time-dependent model needs an explicit time t")
        return self.W0 + np.cos(self.drive_frequency * t) * self.W1


@dataclass(frozen=True)
class LindbladChannel:
    """Incoherent rate pair on one mode: ``down_rate`` on o, ``up_rate`` on o^dag."""

    mode: int
    down_rate: float
    up_rate: float = 0.0

    def __post_init__(self):
        for name in ("down_rate", "up_rate"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {val}")

    @classmethod
    def thermal(cls, mode: int, gamma: float, nbar: float) -> "LindbladChannel":
        """Single thermal bath: down = gamma (nbar + 1), up = gamma nbar."""
        return cls(mode, gamma * (nbar + 1.0), gamma * nbar)


@dataclass(frozen=True)
class CovarianceState:
    mean: NDArray[np.float64]
    sigma: NDArray[np.float64]

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        size = mean.shape[0]
        if mean.ndim != 1 or size % 2:
            raise ValueError("mean must be a vector of even length")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", _symmetric(self.sigma, size, "sigma"))

    @property
    def n_modes(self) -> int:
        return self.mean.shape[0] // 2

    @classmethod
    def vacuum(cls, n_modes: int) -> "CovarianceState":
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, nbars: Sequence[float]) -> "CovarianceState":
        diag = np.repeat(np.asarray(nbars, dtype=float) + 0.5, 2)
        return cls(np.zeros(diag.size), np.diag(diag))

    def physicality(self) -> float:
        """Smallest eigenvalue of sigma + i Omega / 2 (>= 0 for a physical state)."""
        herm = self.sigma + 0.5j * symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(herm).min())

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        return self.physicality() >= -tol


@dataclass(frozen=True)
class SpectrumResult:
    frequencies: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.values, dtype=float)
        if w.shape != s.shape:
            raise ValueError("frequencies and values must have equal shapes")
        if w.size > 1 and np.any(np.diff(w) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(s)):
            raise ValueError("spectrum contains non-finite values")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "values", s)


def _damping_and_noise(n_modes: int, channels: Sequence[LindbladChannel]):
    kappa = np.zeros(n_modes)
    noise = np.zeros(n_modes)
    for ch in channels:
        if not 0 <= ch.mode < n_modes:
            raise ValueError(f"channel mode {ch.mode} outside 0..{n_modes - 1}")
        kappa[ch.mode] += ch.down_rate - ch.up_rate
        noise[ch.mode] += 0.5 * (ch.down_rate + ch.up_rate)
    return np.repeat(kappa, 2), np.repeat(noise, 2)


def build_drift_diffusion(model: QuadraticModel, channels: Sequence[LindbladChannel], t="static"):
    """Drift and diffusion of the moment equations.

    Returns ``(A, D)`` with d<r>/dt = A <r> and
    d(sigma)/dt = A sigma + sigma A^T + D.
    """
    W = model.quadratic_form(t)
    kappa, noise = _damping_and_noise(model.n_modes, channels)
    A = symplectic_form(model.n_modes) @ W - 0.5 * np.diag(kappa)
    D = np.diag(noise)
    return A, D


def hurwitz_margin(A) -> float:
    """Return -max Re(eig(A)); positive iff A is Hurwitz."""
    return float(-np.max(np.linalg.eigvals(np.asarray(A, dtype=float)).real))


def _lyapunov_residual(A, sigma, D):
    return A @ sigma + sigma @ A.T + D


def lyapunov_steady_state(A, D, refine: int = 2) -> CovarianceState:
    """Solve A sigma + sigma A^T + D = 0 for a Hurwitz drift.

    Uses Bartels-Stewart followed by ``refine`` steps of iterative refinement,
    which keeps the residual near 1e-12 ||D|| even when the mode frequencies
    span ten decades.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    margin = hurwitz_margin(A)
    if margin <= 0.0:
        raise NotHurwitzError(f"drift is not Hurwitz (max Re eig = {-margin:.3e})")
    sigma = solve_continuous_lyapunov(A, -D)
    for _ in range(refine):
        sigma = sigma + solve_continuous_lyapunov(A, -_lyapunov_residual(A, sigma, D))
        sigma = 0.5 * (sigma + sigma.T)
    return CovarianceState(np.zeros(A.shape[0]), sigma)


def _stiffness_ratio(model, channels) -> float:
    A, _ = build_drift_diffusion(model, channels, 0.0 if model.W1 is not None else "static")
    eig = np.linalg.eigvals(A)
    damping = np.abs(eig.real)
    damping = damping[damping > 0]
    fastest = np.abs(eig).max()
    if model.W1 is not None:
        fastest = max(fastest, model.drive_frequency)
    return float(fastest / damping.min()) if damping.size else np.inf


def _moment_rhs(model, channels):
    dim = model.dim
    eye = np.eye(dim)
    static = model.W1 is None
    if static:
        A0, D0 = build_drift_diffusion(model, channels)

    def operators(t):
        if static:
            return A0, D0
        return build_drift_diffusion(model, channels, t)

    def rhs(t, y):
        A, D = operators(t)
        mean = y[:dim]
        sigma = y[dim:].reshape(dim, dim)
        dsig = A @ sigma + sigma @ A.T + D
        return np.concatenate([A @ mean, dsig.ravel()])

    def jac(t, y):
        A, _ = operators(t)
        full = np.zeros((dim + dim * dim, dim + dim * dim))
        full[:dim, :dim] = A
        full[dim:, dim:] = np.kron(A, eye) + np.kron(eye, A)
        return full

    return rhs, jac


def evolve_covariance(
    model: QuadraticModel,
    channels: Sequence[LindbladChannel],
    initial: CovarianceState,
    t_grid,
    rtol: float = 1e-8,
    atol: float | None = None,
    method: str = "Radau",
    t0: float | None = None,
) -> list[CovarianceState]:
    """Integrate first and second moments and return the state at each time.

    The initial state is taken at ``t0`` (default ``t_grid[0]``). The default
    implicit Radau scheme with the exact Jacobian handles the stiff lab-frame
    models; pass ``method="DOP853"`` for mildly stiff periodic problems.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1D array")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if initial.n_modes != model.n_modes:
        raise ValueError("initial state and model have different mode counts")
    start = float(t_grid[0] if t0 is None else t0)
    if start > t_grid[0]:
        raise ValueError("t0 must not exceed the first grid time")
    dim = model.dim
    y0 = np.concatenate([initial.mean, initial.sigma.ravel()])
    if atol is None:
        atol = rtol * max(1.0, float(np.abs(y0).max()))
    rhs, jac = _moment_rhs(model, channels)
    kwargs = {"jac": jac} if method in ("Radau", "BDF", "LSODA") else {}
    if start == t_grid[-1]:
        return [CovarianceState(initial.mean, initial.sigma)]
    sol = solve_ivp(rhs, (start, t_grid[-1]), y0, method=method, t_eval=t_grid,
                    rtol=rtol, atol=atol, **kwargs)
    if not sol.success:
        ratio = _stiffness_ratio(model, channels)
        raise IntegrationError(f"{sol.message} (stiffness ratio max|omega|/min damping = {ratio:.3e})")
    out = []
    for y in sol.y.T:
        out.append(CovarianceState(y[:dim], y[dim:].reshape(dim, dim)))
    return out


def period_map(model: QuadraticModel, channels: Sequence[LindbladChannel],
               rtol: float = 1e-11, method: str = "DOP853"):
    """One-drive-period affine map of the covariance, sigma -> F sigma F^T + Q.

    Obtained by integrating the fundamental matrix and the noise accumulated
    from a zero covariance over t in [0, period].
    """
    dim = model.dim
    T = model.period
    Fm = evolve_covariance(model, channels, CovarianceState(np.zeros(dim), np.zeros((dim, dim))),
                           [T], rtol=rtol, atol=rtol * 1e-3, method=method, t0=0.0)[-1]
    Q = Fm.sigma

    def fundamental_rhs(t, y):
        A, _ = build_drift_diffusion(model, channels, t)
        return (A @ y.reshape(dim, dim)).ravel()

    sol = solve_ivp(fundamental_rhs, (0.0, T), np.eye(dim).ravel(), method=method,
                    rtol=rtol, atol=rtol * 1e-3)
    if not sol.success:
        raise IntegrationError(sol.message)
    F = sol.y[:, -1].reshape(dim, dim)
    return F, Q


def evolve_periods(F, Q, initial: CovarianceState, n_periods: int) -> CovarianceState:
    """Apply the one-period map ``n_periods`` times (by repeated squaring)."""
    if n_periods < 0:
        raise ValueError("n_periods must be non-negative")
    mean = np.array(initial.mean)
    sigma = np.array(initial.sigma)
    Fp, Qp = np.array(F), np.array(Q)
    k = int(n_periods)
    while k:
        if k & 1:
            mean = Fp @ mean
            sigma = Fp @ sigma @ Fp.T + Qp
        Qp = Fp @ Qp @ Fp.T + Qp
        Fp = Fp @ Fp
        k >>= 1
    return CovarianceState(mean, sigma)


def time_averaged_occupations(model, channels, state: CovarianceState, n_samples: int = 257,
                              rtol: float = 1e-10, method: str = "DOP853") -> NDArray[np.float64]:
    """Average mode occupations over one drive period starting from ``state`` at t=0."""
    t = np.linspace(0.0, model.period, n_samples)
    traj = evolve_covariance(model, channels, state, t, rtol=rtol, method=method)
    occ = np.array([mode_occupations(s) for s in traj])
    return np.trapezoid(occ, t, axis=0) / model.period


def mode_occupations(state: CovarianceState) -> NDArray[np.float64]:
    """<o^dag o> = (sigma_qq + sigma_pp)/2 - 1/2 for every mode."""
    d = np.diag(state.sigma)
    return 0.5 * (d[0::2] + d[1::2]) - 0.5


def _correlation_matrix(sigma, symmetrized: bool):
    sigma = np.asarray(sigma, dtype=float)
    if symmetrized:
        return sigma.astype(complex)
    return sigma + 0.5j * symplectic_form(sigma.shape[0] // 2)


def spectral_density(A, sigma_ss, v, omega, symmetrized: bool = False) -> NDArray[np.float64]:
    """S_vv(omega) = (2 pi)^-1 int dtau <v.r(0) v.r(tau)> e^{i omega tau}.

    For tau >= 0 the regression theorem gives C(tau) = v^T M e^{A^T tau} v with
    M = sigma + i Omega/2, and C(-tau) = conj(C(tau)). Hence
    S(omega) = -Re[v^T M (A^T + i omega)^{-1} v] / pi.
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    M = _correlation_matrix(sigma_ss, symmetrized)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    mats = A.T[None, :, :] + 1j * omega[:, None, None] * np.eye(A.shape[0])[None, :, :]
    rhs = np.broadcast_to(v.astype(complex), (omega.size, v.size))[..., None]
    sol = np.linalg.solve(mats, rhs)[..., 0]
    return -np.real(sol @ (M.T @ v)) / np.pi


def spectrum(A, D, sigma_ss, observable, omega_grid, symmetrized: bool = False) -> SpectrumResult:
    """Stationary power spectral density of the observable v.r on ``omega_grid``."""
    A = np.asarray(A, dtype=float)
    margin = hurwitz_margin(A)
    if margin <= 0.0:
        raise NotHurwitzError(f"drift is not Hurwitz (max Re eig = {-margin:.3e})")
    sigma = sigma_ss.sigma if isinstance(sigma_ss, CovarianceState) else sigma_ss
    w = np.asarray(omega_grid, dtype=float)
    values = spectral_density(A, sigma, observable, w, symmetrized=symmetrized)
    return SpectrumResult(w, values)
