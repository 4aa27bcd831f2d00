"""Coupling, linewidth and cooperativity versus Q_p for the three anchor radii.

Writes one CSV per radius (Q_x = 1e8, b_g = 2e3 T/m, 100 mK) and prints the
tuned static fields.
"""

import argparse
from pathlib import Path

from acoustomech import config as cfg
from acoustomech.model import SystemParams
from acoustomech.sweep import Axis, SweepSpec, run_sweep

RADII = (1e-8, 1e-7, 1e-6)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for R in RADII:
        base = cfg.apply_overrides(SystemParams(), {"magnet.R": R, "bath.Q_x": 1e8, "bath.T": 0.1})
        spec = SweepSpec(base=base, axes=(Axis("bath.Q_p", 1e4, 1e10, args.points, True),),
                         observables=("G_ratio", "omega_x_over_gamma2", "cooperativity",
                                      "quantum_cooperativity"),
                         output=str(out / f"fig2_R{R:g}.csv"))
        run_sweep(spec, args.workers)
        print(f"R = {R:g} m: B0 = {base.resolved_drive().B0:.4g} T -> {spec.output}")


if __name__ == "__main__":
    main()
