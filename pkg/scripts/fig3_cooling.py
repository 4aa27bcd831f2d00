"""Steady center-of-mass occupation versus Q_p at R = 100 nm and 1 um.

Three gradients, 100 mK and 300 K, Q_x = 1e8; the minima are printed and
appended to each CSV as comments.
"""

import argparse
from pathlib import Path

from acoustomech import config as cfg
from acoustomech.model import SystemParams
from acoustomech.sweep import run_cooling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for tag, R in (("a", 1e-7), ("b", 1e-6)):
        base = cfg.apply_overrides(SystemParams(), {"magnet.R": R, "bath.Q_x": 1e8})
        result = run_cooling(base, points=args.points, workers=args.workers,
                             output=str(out / f"fig3{tag}_R{R:g}.csv"))
        print(f"R = {R:g} m")
        for line in result.footer:
            print("  " + line)


if __name__ == "__main__":
    main()
