"""Micromagnet acoustomechanics: center of mass (b), Kittel magnon (s), acoustic phonon (a).

Physical formulas for the couplings, the magnon-phonon normal modes, their
rates, and builders of the lab-frame (time-periodic) and rotating-frame (RWA)
three-mode quadratic models consumed by :mod:`acoustomech.gaussian`.
All frequencies and rates are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.constants import hbar, k as k_B
from scipy.optimize import least_squares

from .gaussian import LindbladChannel, QuadraticModel

TWO_PI = 2.0 * math.pi

# YIG
YIG_DENSITY = 5170.0
YIG_MS = 5.87e5
YIG_GYRO = 1.76e11

# Magnon-phonon coupling and S_121 frequency at R_REF, fitted by
# calibrate_reference() to the tuning fields B0 = 5.4, 0.45, 0.018 T at
# R = 10, 100, 1000 nm for chi = 1e-2 (see tests/test_model.py).
R_REF = 1e-7
OMEGA_P_REF = 1.016762316663e11
G_REF = 2.214103901424e8
CALIBRATION_RADII = (1e-8, 1e-7, 1e-6)
CALIBRATION_FIELDS = (5.4, 0.45, 0.018)

L12_MAX_RADIUS = 10e-6


@dataclass(frozen=True)
class MagnetParams:
    """Spherical micromagnet.

    ``g_ref`` and ``omega_p_ref`` are given at radius ``R_ref``; at radius R
    the coupling scales as R^-1/2 and the phonon frequency as R^-1.
    """

    R: float = 1e-7
    rho_m: float = YIG_DENSITY
    M_S: float = YIG_MS
    gamma_gyro: float = YIG_GYRO
    g_ref: float = G_REF
    omega_p_ref: float = OMEGA_P_REF
    R_ref: float = R_REF
    effective_mass: float | None = None

    def __post_init__(self):
        for name in ("R", "rho_m", "M_S", "gamma_gyro", "g_ref", "omega_p_ref", "R_ref"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        if self.effective_mass is not None and not self.effective_mass > 0:
            raise ValueError("effective_mass must be positive")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.R**3

    @property
    def mass(self) -> float:
        if self.effective_mass is not None:
            return self.effective_mass
        return self.rho_m * self.volume

    @property
    def g(self) -> float:
        return self.g_ref * math.sqrt(self.R_ref / self.R)

    @property
    def omega_p(self) -> float:
        return self.omega_p_ref * self.R_ref / self.R

    def with_radius(self, R: float) -> "MagnetParams":
        return replace(self, R=R)

    def with_acoustic_mode(self, omega_p: float, R_mode: float | None = None) -> "MagnetParams":
        """Use a phonon frequency computed at radius ``R_mode`` (default: own R)."""
        R_mode = self.R if R_mode is None else R_mode
        return replace(self, omega_p_ref=omega_p * R_mode / self.R_ref)


@dataclass(frozen=True)
class FieldDrive:
    B0: float
    b_g: float = 0.0
    omega_d: float = 0.0

    def __post_init__(self):
        if not self.B0 > 0:
            raise ValueError(f"B0 must be positive, got {self.B0}")
        if not self.b_g >= 0:
            raise ValueError(f"b_g must be non-negative, got {self.b_g}")
        if not self.omega_d >= 0:
            raise ValueError(f"omega_d must be non-negative, got {self.omega_d}")


@dataclass(frozen=True)
class BathParams:
    omega_x: float = TWO_PI * 200e3
    Q_x: float = 1e5
    gamma_m: float = TWO_PI * 1e6
    Q_p: float = 1e6
    T_x: float = 300.0
    T_m: float = 300.0
    T_p: float = 300.0

    def __post_init__(self):
        for name in ("omega_x", "Q_x", "gamma_m", "Q_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("T_x", "T_m", "T_p"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def gamma_x(self) -> float:
        return self.omega_x / self.Q_x

    def gamma_p(self, omega_p: float) -> float:
        return omega_p / self.Q_p

    def with_temperature(self, T: float) -> "BathParams":
        return replace(self, T_x=T, T_m=T, T_p=T)


# ---------------------------------------------------------------------------
# single-formula quantities


def kittel_frequency(B0, gamma_gyro=YIG_GYRO):
    """omega_m = |gamma| B0."""
    return abs(gamma_gyro) * B0


def zero_point_motion(magnet: MagnetParams, omega_x: float) -> float:
    return (2.0 * magnet.mass * omega_x / hbar) ** -0.5


def zero_point_magnetization(magnet: MagnetParams) -> float:
    return math.sqrt(hbar * magnet.gamma_gyro * magnet.M_S / (2.0 * magnet.volume))


def coupling_Gx(magnet: MagnetParams, drive: FieldDrive, omega_x: float) -> float:
    """Parametric center-of-mass / Kittel coupling b_g V M_K x0 / (2 hbar).

    R cancels when the mass is rho_m V.
    """
    return (drive.b_g * magnet.volume * zero_point_magnetization(magnet)
            * zero_point_motion(magnet, omega_x) / (2.0 * hbar))


def thermal_occupation(omega, T):
    """Bose-Einstein occupation; 0 at T = 0, series expansion for hbar omega << k_B T."""
    omega = np.asarray(omega, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("thermal_occupation needs omega > 0")
    if np.any(T < 0):
        raise ValueError("temperature must be non-negative")
    with np.errstate(divide="ignore"):
        x = np.where(T > 0, hbar * omega / (k_B * np.where(T > 0, T, 1.0)), np.inf)
    small = x < 1e-6
    xs = np.where(small, x, 1.0)
    series = 1.0 / xs - 0.5 + xs / 12.0
    with np.errstate(over="ignore"):
        exact = 1.0 / np.expm1(np.where(small, 1.0, x))
    out = np.where(small, series, exact)
    return float(out) if out.ndim == 0 else out


def temperature_from_occupation(n, omega_x):
    """k_B T_x ~ hbar omega_x <b^dag b>."""
    return hbar * omega_x * np.asarray(n) / k_B


def cooperativity(G_x2, gamma_2, gamma_x):
    """Single-phonon cooperativity 4 G_x2^2 / (gamma_2 gamma_x)."""
    if gamma_2 <= 0 or gamma_x <= 0:
        raise ValueError("linewidths must be positive")
    return 4.0 * G_x2**2 / (gamma_2 * gamma_x)


def quantum_cooperativity(C, n_x, n_p):
    return C / (n_x * n_p)


# ---------------------------------------------------------------------------
# magnon-phonon normal modes


@dataclass(frozen=True)
class Hybridization:
    """Beam-splitter diagonalization of the magnon-phonon block.

    c1 = (s - chi a)/N, c2 = -(chi s + a)/N with omega_1 <= omega_2.
    """

    chi: float
    N_norm: float
    omega_1: float
    omega_2: float
    detuning: float
    splitting: float

    def phonon_fraction(self, alpha: int) -> float:
        mix = (self.chi / self.N_norm) ** 2
        return mix if alpha == 1 else 1.0 - mix

    def magnon_fraction(self, alpha: int) -> float:
        return 1.0 - self.phonon_fraction(alpha)


def bogoliubov(omega_m: float, omega_p: float, g: float) -> Hybridization:
    detuning = omega_m - omega_p
    if g < 0:
        raise ValueError("g must be non-negative")
    if g == 0:
        if detuning < 0:
            chi = 0.0
        elif detuning == 0:
            raise ValueError("degenerate magnon-phonon pair with g = 0")
        else:
            raise ValueError("g = 0 with omega_m > omega_p gives chi -> infinity; unsupported")
        splitting = abs(detuning)
    else:
        splitting = math.hypot(detuning, 2.0 * g)
        if detuning <= 0:
            chi = -2.0 * g / (detuning - splitting)
        else:
            # same expression, rationalized to avoid cancellation in Delta - s
            chi = (detuning + splitting) / (2.0 * g)
    mean = 0.5 * (omega_m + omega_p)
    return Hybridization(chi=chi, N_norm=math.sqrt(1.0 + chi * chi),
                         omega_1=mean - 0.5 * splitting, omega_2=mean + 0.5 * splitting,
                         detuning=detuning, splitting=splitting)


def detuning_for_chi(g: float, chi: float) -> float:
    """Magnon-phonon detuning omega_m - omega_p that yields mixing factor ``chi``."""
    return g * (chi - 1.0 / chi)


@dataclass(frozen=True)
class NormalModeRates:
    gamma_1p: float
    gamma_1m: float
    gamma_2p: float
    gamma_2m: float
    gamma_1: float
    gamma_2: float


def normal_mode_rates(gamma_m, gamma_p, n_m, n_p, chi) -> NormalModeRates:
    """Lindblad rates of the hybrid modes; the incoherent c1-c2 cross term is dropped."""
    if min(gamma_m, gamma_p, n_m, n_p, chi) < 0:
        raise ValueError("rates, occupations and chi must be non-negative")
    n2 = 1.0 + chi * chi
    Gm = {"+": gamma_m * n_m / n2, "-": gamma_m * (n_m + 1.0) / n2}
    Gp = {"+": gamma_p * n_p / n2, "-": gamma_p * (n_p + 1.0) / n2}
    c2 = chi * chi
    return NormalModeRates(
        gamma_1p=Gm["+"] + c2 * Gp["+"],
        gamma_1m=Gm["-"] + c2 * Gp["-"],
        gamma_2p=c2 * Gm["+"] + Gp["+"],
        gamma_2m=c2 * Gm["-"] + Gp["-"],
        gamma_1=(gamma_m + gamma_p * c2) / n2,
        gamma_2=(gamma_m * c2 + gamma_p) / n2,
    )


@dataclass(frozen=True)
class NormalModeSystem:
    chi: float
    N_norm: float
    omega_1: float
    omega_2: float
    Delta_1: float
    Delta_2: float
    G_x1: float
    G_x2: float
    rates: NormalModeRates

    @property
    def gamma_1(self) -> float:
        return self.rates.gamma_1

    @property
    def gamma_2(self) -> float:
        return self.rates.gamma_2


# ---------------------------------------------------------------------------
# field tuning and calibration


def tune_fields(magnet: MagnetParams, target_chi: float, omega_x: float, b_g: float = 0.0) -> FieldDrive:
    """Static field and drive frequency placing c2 on resonance (Delta_2 = omega_x).

    Uses the omega_m < omega_p branch, where c2 is mostly phonon for chi < 1.
    """
    if not 0.0 < target_chi < 1.0:
        raise ValueError("target_chi must lie in (0, 1)")
    g = magnet.g
    omega_m = magnet.omega_p + detuning_for_chi(g, target_chi)
    B0 = omega_m / magnet.gamma_gyro
    if B0 <= 0:
        raise ValueError(f"tuning requires B0 = {B0:.4g} T <= 0; coupling too large for chi={target_chi}")
    hyb = bogoliubov(omega_m, magnet.omega_p, g)
    return FieldDrive(B0=B0, b_g=b_g, omega_d=hyb.omega_2 - omega_x)


def calibrate_reference(radii: Sequence[float] = CALIBRATION_RADII,
                        fields: Sequence[float] = CALIBRATION_FIELDS,
                        chi: float = 1e-2, gamma_gyro: float = YIG_GYRO, R_ref: float = R_REF):
    """Fit omega_p = a/R and g = b/sqrt(R) to the tuning fields B0(R).

    Returns ``(omega_p_ref, g_ref, relative_residuals)`` at ``R_ref``. The
    residuals are B0_fit/B0_target - 1.
    """
    radii = np.asarray(radii, dtype=float)
    fields = np.asarray(fields, dtype=float)
    shift = chi - 1.0 / chi

    def model_fields(p):
        omega_p_ref, g_ref = p
        omega_p = omega_p_ref * R_ref / radii
        g = g_ref * np.sqrt(R_ref / radii)
        return (omega_p + g * shift) / gamma_gyro

    # initial guess from the two smallest radii (exact linear solve)
    lhs = np.column_stack([R_ref / radii, np.sqrt(R_ref / radii) * shift])
    guess = np.linalg.lstsq(lhs[:2], fields[:2] * gamma_gyro, rcond=None)[0]
    scale = np.abs(guess)
    fit = least_squares(lambda u: np.log(model_fields(u * scale) / fields), np.ones(2),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    omega_p_ref, g_ref = fit.x * scale
    resid = model_fields((omega_p_ref, g_ref)) / fields - 1.0
    return float(omega_p_ref), float(g_ref), resid


# ---------------------------------------------------------------------------
# full parameter record and model builders


@dataclass(frozen=True)
class ThreeModeParameters:
    """Bare numbers entering both Hamiltonians; any consistent unit system works."""

    omega_x: float
    omega_m: float
    omega_p: float
    g: float
    G_x: float
    omega_d: float
    gamma_x: float
    gamma_m: float
    gamma_p: float
    n_x: float
    n_m: float
    n_p: float

    def __post_init__(self):
        for name in ("gamma_x", "gamma_m", "gamma_p", "n_x", "n_m", "n_p"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class SystemParams:
    """Complete physical configuration: magnet, baths and fields.

    ``B0`` and ``omega_d`` default to the values tuned for ``target_chi`` with
    c2 resonant with the trap; setting only ``B0`` still resonates c2.
    """

    magnet: MagnetParams = field(default_factory=MagnetParams)
    bath: BathParams = field(default_factory=BathParams)
    target_chi: float = 1e-2
    b_g: float = 2e3
    B0: float | None = None
    omega_d: float | None = None

    def __post_init__(self):
        if not self.b_g >= 0:
            raise ValueError("b_g must be non-negative")

    def resolved_drive(self) -> FieldDrive:
        if self.B0 is None:
            drive = tune_fields(self.magnet, self.target_chi, self.bath.omega_x, b_g=self.b_g)
            omega_d = drive.omega_d if self.omega_d is None else self.omega_d
            return FieldDrive(drive.B0, self.b_g, omega_d)
        if self.omega_d is not None:
            return FieldDrive(self.B0, self.b_g, self.omega_d)
        hyb = bogoliubov(kittel_frequency(self.B0, self.magnet.gamma_gyro), self.magnet.omega_p,
                         self.magnet.g)
        return FieldDrive(self.B0, self.b_g, hyb.omega_2 - self.bath.omega_x)

    def mode_parameters(self) -> ThreeModeParameters:
        mag, bath = self.magnet, self.bath
        drive = self.resolved_drive()
        omega_m = kittel_frequency(drive.B0, mag.gamma_gyro)
        omega_p = mag.omega_p
        return ThreeModeParameters(
            omega_x=bath.omega_x, omega_m=omega_m, omega_p=omega_p, g=mag.g,
            G_x=coupling_Gx(mag, drive, bath.omega_x), omega_d=drive.omega_d,
            gamma_x=bath.gamma_x, gamma_m=bath.gamma_m, gamma_p=bath.gamma_p(omega_p),
            n_x=thermal_occupation(bath.omega_x, bath.T_x),
            n_m=thermal_occupation(omega_m, bath.T_m),
            n_p=thermal_occupation(omega_p, bath.T_p),
        )

    def normal_modes(self) -> NormalModeSystem:
        return normal_mode_system(self.mode_parameters())

    def x0(self) -> float:
        return zero_point_motion(self.magnet, self.bath.omega_x)


def normal_mode_system(p: ThreeModeParameters) -> NormalModeSystem:
    hyb = bogoliubov(p.omega_m, p.omega_p, p.g)
    G_x1 = p.G_x / (2.0 * hyb.N_norm)
    rates = normal_mode_rates(p.gamma_m, p.gamma_p, p.n_m, p.n_p, hyb.chi)
    return NormalModeSystem(
        chi=hyb.chi, N_norm=hyb.N_norm, omega_1=hyb.omega_1, omega_2=hyb.omega_2,
        Delta_1=hyb.omega_1 - p.omega_d, Delta_2=hyb.omega_2 - p.omega_d,
        G_x1=G_x1, G_x2=-hyb.chi * G_x1, rates=rates,
    )


def _as_mode_parameters(params) -> ThreeModeParameters:
    return params if isinstance(params, ThreeModeParameters) else params.mode_parameters()


def build_rwa_model(params):
    """Rotating-frame model in the (b, c1, c2) basis.

    Returns ``(QuadraticModel, channels, NormalModeSystem)``.
    """
    p = _as_mode_parameters(params)
    nm = normal_mode_system(p)
    if nm.Delta_1 > nm.Delta_2:
        raise ValueError("normal-mode detunings out of order")
    W = np.diag([p.omega_x, p.omega_x, nm.Delta_1, nm.Delta_1, nm.Delta_2, nm.Delta_2])
    # (b^dag + b)(G c^dag + G c) = 2 G q_b q_c
    W[0, 2] = W[2, 0] = 2.0 * nm.G_x1
    W[0, 4] = W[4, 0] = 2.0 * nm.G_x2
    r = nm.rates
    channels = [
        LindbladChannel.thermal(0, p.gamma_x, p.n_x),
        LindbladChannel(1, r.gamma_1m, r.gamma_1p),
        LindbladChannel(2, r.gamma_2m, r.gamma_2p),
    ]
    return QuadraticModel(3, W), channels, nm


def build_full_model(params):
    """Lab-frame time-periodic model in the (b, s, a) basis.

    Returns ``(QuadraticModel, channels)``; the drive term sits in ``W1``.
    """
    p = _as_mode_parameters(params)
    W0 = np.diag([p.omega_x, p.omega_x, p.omega_m, p.omega_m, p.omega_p, p.omega_p])
    # g (s^dag a + a^dag s) = g (q_s q_a + p_s p_a)
    W0[2, 4] = W0[4, 2] = p.g
    W0[3, 5] = W0[5, 3] = p.g
    W1 = np.zeros((6, 6))
    W1[0, 2] = W1[2, 0] = 2.0 * p.G_x
    channels = [
        LindbladChannel.thermal(0, p.gamma_x, p.n_x),
        LindbladChannel.thermal(1, p.gamma_m, p.n_m),
        LindbladChannel.thermal(2, p.gamma_p, p.n_p),
    ]
    return QuadraticModel(3, W0, W1, p.omega_d), channels


def mechanical_observable(x0: float = 1.0, n_modes: int = 3):
    """Vector v with v.r = x0 (b + b^dag) = sqrt(2) x0 q_b."""
    v = np.zeros(2 * n_modes)
    v[0] = math.sqrt(2.0) * x0
    return v


# ---------------------------------------------------------------------------
# regime validation


class RegimeError(RuntimeError):
    """Raised in strict mode when an approximation's validity condition fails."""


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    ratio: float
    threshold: float
    description: str

    @property
    def passed(self) -> bool:
        return bool(self.ratio <= self.threshold)


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> RegimeCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [f"{c.name}: ratio={c.ratio:.3e} threshold={c.threshold:.3e} "
                f"{'PASS' if c.passed else 'FAIL'} ({c.description})" for c in self.checks]

    def raise_if_failed(self):
        if not self.ok:
            raise RegimeError("; ".join(self.lines()[i] for i, c in enumerate(self.checks)
                                        if not c.passed))


def validate_regime(params: SystemParams, margin: float = 10.0, strict: bool = False) -> RegimeReport:
    """Evaluate the validity conditions of the model.

    Each check stores a ratio that must not exceed its threshold; "<<" and ">>"
    translate to a factor ``margin``. Never raises unless ``strict``.
    """
    mag, bath = params.magnet, params.bath
    drive = params.resolved_drive()
    p = params.mode_parameters()
    hyb = bogoliubov(p.omega_m, p.omega_p, p.g)
    small = 1.0 / margin
    x0 = zero_point_motion(mag, bath.omega_x)
    x_rms = x0 * math.sqrt(2.0 * p.n_x + 1.0)
    omega_d = drive.omega_d if drive.omega_d > 0 else math.nan
    checks = (
        RegimeCheck("gradient_vs_static_field", drive.b_g * mag.R / drive.B0, small, "b_g R << B0"),
        RegimeCheck("drive_vs_coupling", abs(p.G_x) / 4.0 / omega_d, small, "omega_d >> |G_x|/4"),
        RegimeCheck("drive_vs_trap", bath.omega_x / omega_d, small, "omega_d >> omega_x"),
        RegimeCheck("magnetoelastic_rwa", p.g / (p.omega_m + p.omega_p), small,
                    "g << omega_m + omega_p"),
        RegimeCheck("normal_mode_separation", bath.omega_x / hyb.splitting, small,
                    "|Delta_1 - Delta_2| >> omega_x"),
        RegimeCheck("cross_dissipator", mag.R / L12_MAX_RADIUS, 1.0, "R <= 10 um"),
        RegimeCheck("motional_amplitude", x_rms * drive.b_g / drive.B0, small,
                    "thermal amplitude << B0/b_g"),
    )
    report = RegimeReport(checks)
    if strict:
        report.raise_if_failed()
    return report
