"""Spheroidal eigenfrequencies of a free homogeneous elastic sphere.

The traction-free boundary condition for spheroidal modes of angular index l
reduces to a 2x2 determinant in the spherical Bessel functions j_l, j_{l+1}
evaluated at xi = omega R / c_l and eta = omega R / c_t. Roots depend only on
eta and c_l/c_t, so omega_p scales as 1/R.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import spherical_jn

__all__ = [
    "ElasticMaterial",
    "AcousticMode",
    "ModeSearchError",
    "YIG_ELASTIC",
    "spheroidal_determinant",
    "dimensionless_determinant",
    "find_modes",
    "modes_to_csv",
]


class ModeSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ElasticMaterial:
    c_l: float
    c_t: float
    rho: float

    def __post_init__(self):
        if min(self.c_l, self.c_t, self.rho) <= 0:
            raise ValueError("sound speeds and density must be positive")
        if self.c_l <= self.c_t * math.sqrt(4.0 / 3.0):
            raise ValueError("c_l must exceed c_t*sqrt(4/3) (positive bulk modulus)")

    @property
    def speed_ratio(self) -> float:
        return self.c_l / self.c_t


# YIG-like sound speeds from the ultrasonics literature; editable configuration input.
YIG_ELASTIC = ElasticMaterial(c_l=7209.0, c_t=3843.0, rho=5170.0)


@dataclass(frozen=True)
class AcousticMode:
    n: int
    l: int
    m: int
    omega_p: float
    dimensionless_root: float


def dimensionless_determinant(eta, speed_ratio: float, l: int = 2):
    """Frequency-equation determinant as a function of eta = omega R / c_t."""
    eta = np.asarray(eta, dtype=float)
    xi = eta / speed_ratio
    jl_eta = spherical_jn(l, eta)
    jl1_eta = spherical_jn(l + 1, eta)
    jl_xi = spherical_jn(l, xi)
    jl1_xi = spherical_jn(l + 1, xi)
    eta2 = eta * eta
    first = 4.0 * (eta2 * jl_eta + (l - 1) * (l + 2) * (eta * jl1_eta - (l + 1) * jl_eta)) * xi * jl1_xi
    second = ((-eta2 * eta2 + 2.0 * (l - 1) * (2 * l + 1) * eta2) * jl_eta
              + 2.0 * (eta2 - 2.0 * l * (l - 1) * (l + 2)) * eta * jl1_eta) * jl_xi
    return first + second


def spheroidal_determinant(material: ElasticMaterial, R: float, omega, l: int = 2):
    """Boundary determinant at angular frequency ``omega``; zeros are eigenfrequencies."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    return dimensionless_determinant(omega * R / material.c_t, material.speed_ratio, l)


def find_modes(material: ElasticMaterial, R: float, n_max: int, l: int = 2, m: int = 1,
               step: float = 1.0 / 40.0, rtol: float = 1e-10) -> list[AcousticMode]:
    """First ``n_max`` spheroidal S_{n l m} modes, ascending.

    Sign changes of the determinant are located on a uniform grid in
    eta = omega R / c_t with spacing ``step`` (at most 1/40), then refined by
    bracketing root search. ``m`` only labels the mode.
    """
    if not 1 <= n_max <= 50:
        raise ValueError("n_max must lie in 1..50")
    if R <= 0:
        raise ValueError("R must be positive")
    step = min(step, 1.0 / 40.0)
    ratio = material.speed_ratio
    # roots are spaced by roughly pi in eta, the scan budget is generous
    eta_max = math.pi * (n_max + 4) * 2.0
    grid = np.arange(step, eta_max + step, step)
    values = dimensionless_determinant(grid, ratio, l)
    flips = np.nonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))[0]
    if flips.size < n_max:
        raise ModeSearchError(
            f"found {flips.size} sign changes for n_max={n_max} "
            f"(scan eta in [{grid[0]:.3g}, {grid[-1]:.3g}], step {step:.3g}, c_l/c_t={ratio:.4g})")
    modes = []
    for n, i in enumerate(flips[:n_max], start=1):
        lo, hi = grid[i], grid[i + 1]
        if values[i] == 0.0:
            root = lo
        else:
            root = brentq(lambda e: float(dimensionless_determinant(e, ratio, l)), lo, hi,
                          xtol=1e-14, rtol=min(rtol, 1e-10) * 1e-2, maxiter=200)
        modes.append(AcousticMode(n=n, l=l, m=m, omega_p=root * material.c_t / R,
                                  dimensionless_root=root))
    return modes


def modes_to_csv(modes, header_lines=()) -> str:
    """Mode table with columns n, l, m, omega_p_rad_s, dimensionless_root."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "l", "m", "omega_p_rad_s", "dimensionless_root"])
    for mode in modes:
        writer.writerow([mode.n, mode.l, mode.m, f"{mode.omega_p:.9g}", f"{mode.dimensionless_root:.9g}"])
    return buf.getvalue()
