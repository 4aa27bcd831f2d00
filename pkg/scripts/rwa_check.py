"""Compare the rotating-frame steady state with the lab-frame periodic model.

Uses a dimensionless set (omega_x = 1, omega_d = 1e3) where the lab-frame
dynamics can be integrated; the period map is composed 2^24 times from a
thermal state and the occupation is averaged over the last period.
"""

import argparse
import math
import time

from acoustomech.gaussian import (
    CovarianceState,
    build_drift_diffusion,
    evolve_periods,
    lyapunov_steady_state,
    mode_occupations,
    period_map,
    time_averaged_occupations,
)
from acoustomech.model import ThreeModeParameters, build_full_model, build_rwa_model, detuning_for_chi


def scaled_parameters(G_x2, gamma_x, omega_d=1000.0, chi=1e-2, g=2.0):
    omega_2 = omega_d + 1.0
    omega_p = omega_2 - g * chi
    omega_m = omega_p + detuning_for_chi(g, chi)
    G_x = 2.0 * math.sqrt(1 + chi**2) * G_x2 / chi
    return ThreeModeParameters(omega_x=1.0, omega_m=omega_m, omega_p=omega_p, g=g, G_x=G_x,
                               omega_d=omega_d, gamma_x=gamma_x, gamma_m=5.0, gamma_p=0.1,
                               n_x=100.0, n_m=0.2, n_p=0.1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--G-x2", type=float, default=0.005)
    ap.add_argument("--gamma-x", type=float, default=1e-4)
    ap.add_argument("--log2-periods", type=int, default=24)
    args = ap.parse_args()
    p = scaled_parameters(args.G_x2, args.gamma_x)
    model, channels, nm = build_rwa_model(p)
    A, D = build_drift_diffusion(model, channels)
    n_rwa = mode_occupations(lyapunov_steady_state(A, D))[0]
    t0 = time.perf_counter()
    full, full_channels = build_full_model(p)
    F, Q = period_map(full, full_channels)
    state = evolve_periods(F, Q, CovarianceState.thermal([p.n_x, p.n_m, p.n_p]),
                           2**args.log2_periods)
    n_full = time_averaged_occupations(full, full_channels, state)[0]
    print(f"|G_x|/4/omega_d = {abs(p.G_x) / 4 / p.omega_d:.3g}, "
          f"c1 pull 2G_x1^2/|Delta_1| / gamma_2 = {2 * nm.G_x1**2 / abs(nm.Delta_1) / nm.gamma_2:.3g}")
    print(f"RWA  <b^dag b> = {n_rwa:.6g}")
    print(f"full <b^dag b> = {n_full:.6g}  ({n_full / n_rwa - 1:+.2%}, {time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
