"""Parameter sweeps, cooling maps and displacement spectra as CSV tables."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import find_peaks

from . import config as cfg
from .gaussian import (
    NotHurwitzError,
    build_drift_diffusion,
    lyapunov_steady_state,
    mode_occupations,
    spectral_density,
)
from .model import (
    SystemParams,
    build_rwa_model,
    cooperativity,
    mechanical_observable,
    quantum_cooperativity,
    temperature_from_occupation,
    validate_regime,
)

WORKERS_ENV = "ACOUSTOMECH_WORKERS"
OBSERVABLES = ("G_ratio", "omega_x_over_gamma2", "cooperativity", "quantum_cooperativity",
               "occupation_ss", "T_x", "psd")
_DYNAMIC = {"occupation_ss", "T_x", "psd"}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return f"{float(x):.9g}"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Axis:
    key: str
    start: float = 0.0
    stop: float = 0.0
    num: int = 1
    log: bool = True
    explicit: tuple | None = None

    def __post_init__(self):
        if self.key not in cfg.PARAM_KEYS:
            raise cfg.ConfigError(f"unknown sweep parameter '{self.key}'")
        if self.explicit is not None and len(self.explicit) == 0:
            raise cfg.ConfigError(f"axis '{self.key}' has no values")
        if self.explicit is None:
            if int(self.num) != self.num or self.num < 1:
                raise cfg.ConfigError("axis num must be a positive integer")
            if self.log and (self.start <= 0 or self.stop <= 0):
                raise cfg.ConfigError(f"log axis '{self.key}' needs positive limits")

    def values(self) -> np.ndarray:
        if self.explicit is not None:
            return np.asarray(self.explicit, dtype=float)
        # a zero-length range collapses to a single point
        if self.num == 1 or self.start == self.stop:
            return np.array([self.start], dtype=float)
        if self.log:
            return np.logspace(math.log10(self.start), math.log10(self.stop), int(self.num))
        return np.linspace(self.start, self.stop, int(self.num))

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``key:start:stop:num[:log|lin]`` or ``key=v1,v2,...``."""
        if "=" in text:
            key, vals = text.split("=", 1)
            try:
                values = tuple(float(v) for v in vals.split(","))
            except ValueError as exc:
                raise cfg.ConfigError(f"bad axis values in '{text}'") from exc
            return cls(key.strip(), explicit=values)
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise cfg.ConfigError(f"axis must be key:start:stop:num[:log|lin], got '{text}'")
        try:
            start, stop, num = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise cfg.ConfigError(f"bad axis '{text}'") from exc
        spacing = parts[4] if len(parts) == 5 else "log"
        if spacing not in ("log", "lin"):
            raise cfg.ConfigError(f"axis spacing must be log or lin, got '{spacing}'")
        return cls(parts[0], start, stop, num, spacing == "log")

    @classmethod
    def from_mapping(cls, table: dict) -> "Axis":
        if "values" in table:
            return cls(table["key"], explicit=tuple(float(v) for v in table["values"]))
        return cls(table["key"], float(table["start"]), float(table["stop"]),
                   int(table.get("num", 1)), bool(table.get("log", True)))


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams = field(default_factory=SystemParams)
    axes: tuple = ()
    observables: tuple = ("G_ratio", "omega_x_over_gamma2", "cooperativity", "occupation_ss")
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if len(self.axes) > 2:
            raise cfg.ConfigError("at most two sweep axes are supported")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad:
            raise cfg.ConfigError(f"unknown observables {bad}; choose from {OBSERVABLES}")
        if self.format != "csv":
            raise cfg.ConfigError("only csv output is supported")

    def grid(self):
        """Parameter points in row order (first axis outermost)."""
        if not self.axes:
            return [()]
        return list(product(*(a.values() for a in self.axes)))


def evaluate_point(params: SystemParams, observables) -> dict:
    """Observables at one parameter point; ``status`` flags unstable drifts."""
    model, channels, nm = build_rwa_model(params)
    p = params.mode_parameters()
    row = {"status": "ok"}
    for name in observables:
        if name == "G_ratio":
            row[name] = abs(nm.G_x2) / nm.gamma_2
        elif name == "omega_x_over_gamma2":
            row[name] = p.omega_x / nm.gamma_2
        elif name == "cooperativity":
            row[name] = cooperativity(nm.G_x2, nm.gamma_2, p.gamma_x)
        elif name == "quantum_cooperativity":
            C = cooperativity(nm.G_x2, nm.gamma_2, p.gamma_x)
            row[name] = quantum_cooperativity(C, p.n_x, p.n_p)
    dynamic = [o for o in observables if o in _DYNAMIC]
    if dynamic:
        A, D = build_drift_diffusion(model, channels)
        try:
            ss = lyapunov_steady_state(A, D)
        except NotHurwitzError:
            row["status"] = "not_hurwitz"
            for name in dynamic:
                row[name] = math.nan
            return row
        n_b = float(mode_occupations(ss)[0])
        for name in dynamic:
            if name == "occupation_ss":
                row[name] = n_b
            elif name == "T_x":
                row[name] = float(temperature_from_occupation(n_b, p.omega_x))
            elif name == "psd":
                v = mechanical_observable(params.x0())
                row[name] = float(spectral_density(A, ss.sigma, v, p.omega_x)[0])
    return row


def _point_params(base: SystemParams, keys, values) -> SystemParams:
    return cfg.apply_overrides(base, dict(zip(keys, values)))


def _evaluate_task(task):
    base, keys, values, observables = task
    return evaluate_point(_point_params(base, keys, values), observables)


def _parallel_map(func, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


def header_lines(params: SystemParams, extra=()) -> list[str]:
    """Resolved parameters and regime report for embedding as ``#`` comments."""
    lines = ["acoustomech output"]
    lines += [f"{k} = {fmt(v)}" for k, v in cfg.flatten(params).items()]
    lines += list(extra)
    lines += ["regime: " + line for line in validate_regime(params).lines()]
    return lines


def _render(lines, columns, rows) -> str:
    buf = io.StringIO()
    for line in lines:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


@dataclass
class SweepResult:
    columns: list
    rows: list
    header: list
    footer: list = field(default_factory=list)

    def to_csv(self) -> str:
        text = _render(self.header, self.columns, self.rows)
        return text + "".join(f"# {line}\n" for line in self.footer)

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([np.nan if r[i] == "" else r[i] for r in self.rows], dtype=object)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate the observables on the sweep grid; row order follows the grid."""
    workers = default_workers() if workers is None else workers
    keys = [a.key for a in spec.axes]
    grid = spec.grid()
    tasks = [(spec.base, keys, values, tuple(spec.observables)) for values in grid]
    results = _parallel_map(_evaluate_task, tasks, workers)
    columns = keys + list(spec.observables) + ["status"]
    rows = [list(values) + [r[o] for o in spec.observables] + [r["status"]]
            for values, r in zip(grid, results)]
    axes_desc = [f"axis {a.key}: " + ",".join(fmt(v) for v in a.values()) for a in spec.axes]
    result = SweepResult(columns, rows, header_lines(spec.base, axes_desc))
    if spec.output:
        write_text(spec.output, result.to_csv())
    return result


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# cooling maps


def run_cooling(base: SystemParams, temperatures=(0.1, 300.0), b_g_values=(2e2, 2e3, 2e4),
                Q_p_range=(1e4, 1e10), points: int = 200, workers: int | None = None,
                output=None) -> SweepResult:
    """Steady center-of-mass occupation versus Q_p for several gradients and temperatures."""
    columns = ["bath.T", "drive.b_g", "bath.Q_p", "occupation_ss", "T_x", "status"]
    rows, footer = [], []
    for T in temperatures:
        spec = SweepSpec(
            base=cfg.apply_overrides(base, {"bath.T": T}),
            axes=(Axis("drive.b_g", explicit=tuple(b_g_values)),
                  Axis("bath.Q_p", Q_p_range[0], Q_p_range[1], points, True)),
            observables=("occupation_ss", "T_x"),
        )
        res = run_sweep(spec, workers)
        for r in res.rows:
            rows.append([T] + r)
        for b_g in b_g_values:
            sel = [r for r in res.rows if r[0] == b_g and r[-1] == "ok"]
            if sel:
                best = min(sel, key=lambda r: r[2])
                footer.append(f"minimum T={fmt(T)} b_g={fmt(b_g)}: occupation_ss={fmt(best[2])} "
                              f"at Q_p={fmt(best[1])}")
    extra = [f"temperatures: {','.join(fmt(t) for t in temperatures)}",
             f"b_g values: {','.join(fmt(b) for b in b_g_values)}",
             f"Q_p log grid: {fmt(Q_p_range[0])}..{fmt(Q_p_range[1])} ({points} points)"]
    result = SweepResult(columns, rows, header_lines(base, extra), footer)
    if output:
        write_text(output, result.to_csv())
    return result


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


@dataclass
class PSDCurve:
    b_g: float
    values: np.ndarray
    peaks: list
    G_x2: float
    gamma_2: float
    status: str = "ok"

    @property
    def splitting(self) -> float:
        """Distance between the two tallest peaks (nan if fewer than two)."""
        if len(self.peaks) < 2:
            return math.nan
        top = sorted(self.peaks, key=lambda p: p.height, reverse=True)[:2]
        return abs(top[0].position - top[1].position)


@dataclass
class PSDResult:
    omega: np.ndarray
    curves: list
    header: list

    def to_csv(self) -> str:
        columns = ["omega"] + [f"S_xx_bg_{fmt(c.b_g)}" for c in self.curves]
        rows = [[w] + [c.values[i] for c in self.curves] for i, w in enumerate(self.omega)]
        footer = []
        for c in self.curves:
            if c.status != "ok":
                footer.append(f"peaks b_g={fmt(c.b_g)}: {c.status}")
                continue
            desc = "; ".join(f"position={fmt(p.position)} height={fmt(p.height)} fwhm={fmt(p.fwhm)}"
                             for p in c.peaks)
            footer.append(f"peaks b_g={fmt(c.b_g)}: {desc}")
            footer.append(f"splitting b_g={fmt(c.b_g)}: {fmt(c.splitting)} "
                          f"(2|G_x2| = {fmt(2 * abs(c.G_x2))}, 2|G_x2|/gamma_2 = "
                          f"{fmt(2 * abs(c.G_x2) / c.gamma_2)})")
        return _render(self.header, columns, rows) + "".join(f"# {line}\n" for line in footer)


def psd_grid(params: SystemParams, b_g_values, points: int = 4001, span: float | None = None):
    """Frequency grid around omega_x: a uniform window plus a dense core for narrow peaks."""
    nm = params.normal_modes()
    omega_x = params.bath.omega_x
    G_per_gradient = abs(cfg.apply_overrides(params, {"drive.b_g": 1.0}).normal_modes().G_x2)
    G_max = G_per_gradient * max(b_g_values, default=0.0)
    if span is None:
        span = max(10.0 * nm.gamma_2, 3.0 * G_max) * 1.05
    wide = np.linspace(omega_x - span, omega_x + span, points)
    core_half = 50.0 * params.bath.gamma_x
    core = np.linspace(omega_x - core_half, omega_x + core_half, 801)
    return np.unique(np.concatenate([wide, core]))


def _refine_peaks(func, grid, values, rel_prominence=1e-3):
    idx, _ = find_peaks(values, prominence=rel_prominence * values.max())
    peaks = []
    for i in idx:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        opt = minimize_scalar(lambda w: -func(w), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-9 * abs(grid[i]) + 1e-12})
        pos, height = float(opt.x), float(-opt.fun)
        if height < values[i]:
            pos, height = float(grid[i]), float(values[i])
        half = 0.5 * height
        edges = []
        for direction in (-1, 1):
            j = i
            while 0 < j < grid.size - 1 and values[j] > half:
                j += direction
            if values[j] > half:
                edges.append(math.nan)
                continue
            a, b = sorted((grid[j], pos))
            edges.append(brentq(lambda w: func(w) - half, a, b, xtol=1e-12 * abs(pos)))
        peaks.append(Peak(pos, height, edges[1] - edges[0]))
    return peaks


def psd_curve(params: SystemParams, omega, symmetrized: bool = False) -> PSDCurve:
    model, channels, nm = build_rwa_model(params)
    A, D = build_drift_diffusion(model, channels)
    try:
        ss = lyapunov_steady_state(A, D)
    except NotHurwitzError:
        nan = np.full(np.size(omega), math.nan)
        return PSDCurve(params.b_g, nan, [], nm.G_x2, nm.gamma_2, status="not_hurwitz")
    v = mechanical_observable(params.x0())
    values = spectral_density(A, ss.sigma, v, omega, symmetrized=symmetrized)

    def func(w):
        return float(spectral_density(A, ss.sigma, v, w, symmetrized=symmetrized)[0])

    peaks = _refine_peaks(func, np.asarray(omega), values)
    return PSDCurve(params.b_g, values, peaks, nm.G_x2, nm.gamma_2)


def _psd_task(task):
    params, omega, symmetrized = task
    return psd_curve(params, omega, symmetrized)


def run_psd(base: SystemParams, b_g_values=(0.0, 2e3, 2e4), omega=None, symmetrized=False,
            workers: int | None = None, output=None) -> PSDResult:
    """S_xx(omega) of the center of mass for each gradient, with peak summary."""
    workers = default_workers() if workers is None else workers
    if omega is None:
        omega = psd_grid(base, b_g_values)
    omega = np.asarray(omega, dtype=float)
    nm = base.normal_modes()
    need = (base.bath.omega_x - 10.0 * nm.gamma_2, base.bath.omega_x + 10.0 * nm.gamma_2)
    if omega.min() > need[0] or omega.max() < need[1]:
        raise ValueError("omega grid must span at least omega_x -/+ 10 gamma_2")
    tasks = [(cfg.apply_overrides(base, {"drive.b_g": b}), omega, symmetrized) for b in b_g_values]
    curves = _parallel_map(_psd_task, tasks, workers)
    extra = [f"b_g values: {','.join(fmt(b) for b in b_g_values)}",
             f"spectrum: {'symmetrized' if symmetrized else 'asymmetric'} S_xx in m^2 s"]
    result = PSDResult(omega, curves, header_lines(base, extra))
    if output:
        write_text(output, result.to_csv())
    return result
