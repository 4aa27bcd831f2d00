"""Command-line entry point: ``acoustomech <command> [options]``.

Commands: sweep, cool, psd, tune, modes, report. Every command accepts
``--config``, repeatable ``--set key=value``, ``--out``, ``--workers`` and
``--strict``. The default worker count comes from $ACOUSTOMECH_WORKERS.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import config as cfg
from .lamb import ElasticMaterial, ModeSearchError, YIG_ELASTIC, find_modes, modes_to_csv
from .model import RegimeError, tune_fields, validate_regime
from .sweep import (
    OBSERVABLES,
    Axis,
    SweepSpec,
    default_workers,
    fmt,
    header_lines,
    run_cooling,
    run_psd,
    run_sweep,
    write_text,
)

EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_INPUT = 1

PLOT_TEMPLATE = '''"""Plot {csv_name} (generated by acoustomech)."""
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt("{csv_name}", delimiter=",", names=True, comments="#", dtype=None, encoding="utf-8")
names = data.dtype.names
x = data[names[{x_index}]]
fig, ax = plt.subplots()
for name in {y_names!r}:
    ax.plot(x, data[name], label=name)
ax.set_xlabel(names[{x_index}])
{scale}
ax.legend()
fig.savefig("{png_name}", dpi=150)
'''


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter, e.g. bath.Q_p=1e7 (repeatable)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--workers", type=int, default=None, help="worker processes")
    p.add_argument("--strict", action="store_true", help="fail when a regime check fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acoustomech",
                                     description="Micromagnet acoustomechanics simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="grid sweep of observables")
    _common(p)
    p.add_argument("--axis", action="append", default=[],
                   help="key:start:stop:num[:log|lin] or key=v1,v2 (up to two)")
    p.add_argument("--observables", default=None,
                   help=f"comma separated subset of {','.join(OBSERVABLES)}")
    p.add_argument("--plot", action="store_true", help="write a matplotlib script next to --out")

    p = sub.add_parser("cool", help="steady occupation versus Q_p")
    _common(p)
    p.add_argument("--temperatures", default=None, help="default 0.1,300 (K)")
    p.add_argument("--b-g", default=None, help="default 2e2,2e3,2e4 (T/m)")
    p.add_argument("--qp-range", default=None, help="default 1e4,1e10")
    p.add_argument("--points", type=int, default=None, help="default 200")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("psd", help="center-of-mass displacement spectrum")
    _common(p)
    p.add_argument("--b-g", default="0,2e3,2e4")
    p.add_argument("--points", type=int, default=4001)
    p.add_argument("--span", type=float, default=None, help="half width of the grid (rad/s)")
    p.add_argument("--symmetrized", action="store_true")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("tune", help="static field and drive frequency for a target chi")
    _common(p)
    p.add_argument("--chi", type=float, default=None)

    p = sub.add_parser("modes", help="spheroidal S_n21 acoustic ladder")
    _common(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--c-l", type=float, default=YIG_ELASTIC.c_l)
    p.add_argument("--c-t", type=float, default=YIG_ELASTIC.c_t)
    p.add_argument("--rho", type=float, default=YIG_ELASTIC.rho)

    p = sub.add_parser("report", help="regime validity report")
    _common(p)
    p.add_argument("--margin", type=float, default=10.0)
    return parser


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise cfg.ConfigError(f"expected comma separated numbers, got '{text}'") from exc


def _emit(args, text: str):
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _write_plot(args, columns, x_index, y_names, logx=True, logy=False):
    if not args.out:
        return
    out = Path(args.out)
    scale = "\n".join(s for s in ("ax.set_xscale('log')" if logx else "",
                                  "ax.set_yscale('log')" if logy else "") if s)
    script = PLOT_TEMPLATE.format(csv_name=out.name, x_index=x_index, y_names=list(y_names),
                                  scale=scale, png_name=out.with_suffix(".png").name)
    write_text(out.with_suffix(".plot.py"), script)


def _check_regime(params, args, margin=10.0):
    report = validate_regime(params, margin=margin)
    if args.strict:
        report.raise_if_failed()
    return report


def cmd_sweep(args, params, raw):
    table = raw.get("sweep", {})
    axes = [Axis.from_mapping(a) for a in table.get("axes", [])]
    axes += [Axis.parse(a) for a in args.axis]
    observables = table.get("observables")
    if args.observables:
        observables = [o.strip() for o in args.observables.split(",") if o.strip()]
    kwargs = {"observables": tuple(observables)} if observables else {}
    spec = SweepSpec(base=params, axes=tuple(axes), output=args.out, **kwargs)
    _check_regime(params, args)
    result = run_sweep(spec, args.workers)
    if not args.out:
        sys.stdout.write(result.to_csv())
    if args.plot and axes:
        _write_plot(args, result.columns, 0, spec.observables, logx=axes[0].log)
    return 0


def cmd_cool(args, params, raw):
    table = raw.get("cool", {})

    def pick(flag, key, default):
        if flag is not None:
            return _floats(flag)
        return tuple(float(v) for v in table.get(key, default))

    temps = pick(args.temperatures, "temperatures", (0.1, 300.0))
    b_g = pick(args.b_g, "b_g", (2e2, 2e3, 2e4))
    qp = pick(args.qp_range, "Q_p_range", (1e4, 1e10))
    points = args.points if args.points is not None else int(table.get("points", 200))
    if len(qp) != 2:
        raise cfg.ConfigError("--qp-range needs two values")
    _check_regime(params, args)
    result = run_cooling(params, temps, b_g, qp, points, args.workers, output=args.out)
    if not args.out:
        sys.stdout.write(result.to_csv())
    else:
        for line in result.footer:
            print(line)
    if args.plot:
        _write_plot(args, result.columns, 2, ["occupation_ss"], logx=True, logy=True)
    return 0


def cmd_psd(args, params, raw):
    from .sweep import psd_grid

    b_g = _floats(args.b_g)
    _check_regime(cfg.apply_overrides(params, {"drive.b_g": max(b_g)}), args)
    omega = psd_grid(params, b_g, points=args.points, span=args.span)
    result = run_psd(params, b_g, omega=omega, symmetrized=args.symmetrized,
                     workers=args.workers, output=args.out)
    if not args.out:
        sys.stdout.write(result.to_csv())
    else:
        for c in result.curves:
            print(f"b_g={fmt(c.b_g)}: {len(c.peaks)} peak(s), splitting={fmt(c.splitting)} rad/s, "
                  f"2|G_x2|={fmt(2 * abs(c.G_x2))} rad/s")
    if args.plot:
        _write_plot(args, None, 0, [f"S_xx_bg_{fmt(b)}" for b in b_g], logx=False, logy=True)
    return 0


def cmd_tune(args, params, raw):
    chi = params.target_chi if args.chi is None else args.chi
    drive = tune_fields(params.magnet, chi, params.bath.omega_x, b_g=params.b_g)
    tuned = cfg.apply_overrides(params, {"drive.target_chi": chi})
    _check_regime(tuned, args)
    print(f"R = {fmt(params.magnet.R)} m, chi = {fmt(chi)}: B0 = {drive.B0:.4g} T, "
          f"omega_d = {drive.omega_d:.6g} rad/s (omega_d/2pi = {drive.omega_d / (2 * math.pi):.6g} Hz)",
          file=sys.stderr if not args.out else sys.stdout)
    lines = header_lines(tuned)
    text = "".join(f"# {line}\n" for line in lines)
    text += "R,chi,B0_T,omega_d_rad_s,omega_m_rad_s,omega_p_rad_s,g_rad_s\n"
    omega_m = drive.B0 * params.magnet.gamma_gyro
    text += ",".join(fmt(v) for v in (params.magnet.R, chi, drive.B0, drive.omega_d, omega_m,
                                      params.magnet.omega_p, params.magnet.g)) + "\n"
    _emit(args, text)
    return 0


def cmd_modes(args, params, raw):
    try:
        material = ElasticMaterial(args.c_l, args.c_t, args.rho)
    except ValueError as exc:
        raise cfg.ConfigError(str(exc)) from exc
    R = params.magnet.R
    modes = find_modes(material, R, args.n_max)
    header = [f"R = {fmt(R)} m", f"c_l = {fmt(material.c_l)} m/s", f"c_t = {fmt(material.c_t)} m/s",
              f"rho = {fmt(material.rho)} kg/m^3", "sound speeds: external provenance (config input)"]
    _emit(args, modes_to_csv(modes, header))
    return 0


def cmd_report(args, params, raw):
    report = validate_regime(params, margin=args.margin)
    lines = header_lines(params)
    text = "".join(f"# {line}\n" for line in lines[:-len(report.checks)])
    text += "check,ratio,threshold,passed,condition\n"
    for c in report.checks:
        text += f"{c.name},{fmt(c.ratio)},{fmt(c.threshold)},{c.passed},{c.description}\n"
    _emit(args, text)
    for line in report.lines():
        print(line, file=sys.stderr)
    if args.strict and not report.ok:
        return EXIT_REGIME
    return 0


COMMANDS = {"sweep": cmd_sweep, "cool": cmd_cool, "psd": cmd_psd, "tune": cmd_tune,
            "modes": cmd_modes, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is None:
        args.workers = default_workers()
    try:
        params, raw = cfg.resolve(args.config, args.set)
        return COMMANDS[args.command](args, params, raw)
    except RegimeError as exc:
        print(f"regime check failed: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (cfg.ConfigError, ModeSearchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
