import math

import numpy as np
import pytest

from acoustomech import config as cfg
from acoustomech.model import SystemParams
from acoustomech.sweep import (
    OBSERVABLES,
    Axis,
    SweepSpec,
    default_workers,
    evaluate_point,
    fmt,
    psd_grid,
    run_cooling,
    run_psd,
    run_sweep,
)


def small_spec(**kw):
    base = cfg.apply_overrides(SystemParams(), {"bath.Q_x": 1e8, "bath.T": 0.1})
    axes = (Axis("drive.b_g", explicit=(2e2, 2e3, 2e4)), Axis("bath.Q_p", 1e4, 1e10, 7, True))
    return SweepSpec(base=base, axes=axes, observables=OBSERVABLES, **kw)


def test_fmt_uses_nine_significant_digits():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(math.nan) == "nan"
    assert fmt("ok") == "ok"


def test_axis_parsing():
    a = Axis.parse("bath.Q_p:1e4:1e10:7")
    assert a.log and a.values()[0] == pytest.approx(1e4) and len(a.values()) == 7
    lin = Axis.parse("bath.T:0.1:0.3:3:lin")
    assert np.allclose(lin.values(), [0.1, 0.2, 0.3])
    explicit = Axis.parse("drive.b_g=0,2e3")
    assert list(explicit.values()) == [0.0, 2e3]
    for bad in ("bath.Q_p:1:2", "nope.key:1:2:3", "bath.Q_p:1:2:3:cubic", "bath.Q_p:0:1:3:log",
                "bath.Q_p:1:2:0", "drive.b_g=a,b"):
        with pytest.raises(cfg.ConfigError):
            Axis.parse(bad)


def test_zero_length_axis_is_single_row():
    spec = SweepSpec(axes=(Axis.parse("bath.Q_p:1e6:1e6:5"),), observables=("G_ratio",))
    result = run_sweep(spec, workers=1)
    assert len(result.rows) == 1
    no_axes = run_sweep(SweepSpec(observables=("G_ratio",)), workers=1)
    assert len(no_axes.rows) == 1


def test_spec_validation():
    with pytest.raises(cfg.ConfigError):
        SweepSpec(observables=("bogus",))
    with pytest.raises(cfg.ConfigError):
        SweepSpec(axes=(Axis("bath.T"),) * 3)
    with pytest.raises(cfg.ConfigError):
        SweepSpec(format="json")


def test_one_row_per_grid_point_in_grid_order():
    spec = small_spec()
    result = run_sweep(spec, workers=1)
    assert len(result.rows) == 21
    assert [r[0] for r in result.rows[:7]] == [2e2] * 7
    assert result.columns[:2] == ["drive.b_g", "bath.Q_p"]
    assert result.columns[-1] == "status"


def test_sweep_is_deterministic_and_worker_independent(tmp_path):
    a = run_sweep(small_spec(output=str(tmp_path / "a.csv")), workers=1)
    b = run_sweep(small_spec(output=str(tmp_path / "b.csv")), workers=1)
    c = run_sweep(small_spec(output=str(tmp_path / "c.csv")), workers=3)
    bytes_a = (tmp_path / "a.csv").read_bytes()
    assert bytes_a == (tmp_path / "b.csv").read_bytes()
    assert bytes_a == (tmp_path / "c.csv").read_bytes()
    assert a.to_csv() == c.to_csv()


def test_header_embeds_parameters_and_regime_report():
    text = run_sweep(small_spec(), workers=1).to_csv()
    header = [line for line in text.splitlines() if line.startswith("#")]
    for key in cfg.PARAM_KEYS:
        if key != "bath.T":
            assert any(line.startswith(f"# {key} = ") for line in header), key
    assert sum("regime:" in line for line in header) == 7
    assert any("axis bath.Q_p" in line for line in header)


def test_unstable_points_are_flagged_not_fatal():
    spec = SweepSpec(axes=(Axis("drive.b_g", explicit=(2e3, 1e6)),),
                     observables=("G_ratio", "occupation_ss"))
    result = run_sweep(spec, workers=1)
    statuses = [r[-1] for r in result.rows]
    assert statuses == ["ok", "not_hurwitz"]
    assert math.isnan(result.rows[1][2])
    assert not math.isnan(result.rows[1][1])


def test_observables_at_default_point():
    row = evaluate_point(SystemParams(), OBSERVABLES)
    assert row["status"] == "ok"
    assert row["T_x"] == pytest.approx(row["occupation_ss"] * 1.0546e-34 * 2 * math.pi * 2e5
                                       / 1.380649e-23, rel=1e-3)
    C = row["cooperativity"]
    assert row["quantum_cooperativity"] < C
    assert row["psd"] > 0


def test_default_workers_reads_environment(monkeypatch):
    monkeypatch.setenv("ACOUSTOMECH_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("ACOUSTOMECH_WORKERS", "junk")
    assert default_workers() == 1
    monkeypatch.delenv("ACOUSTOMECH_WORKERS")
    assert default_workers() == 1


def test_cooling_map_has_minima_footer(tmp_path):
    out = tmp_path / "cool.csv"
    result = run_cooling(SystemParams(), temperatures=(0.1,), b_g_values=(2e3,),
                         Q_p_range=(1e4, 1e10), points=13, workers=1, output=str(out))
    assert len(result.rows) == 13
    assert result.columns == ["bath.T", "drive.b_g", "bath.Q_p", "occupation_ss", "T_x", "status"]
    assert any(line.startswith("minimum T=0.1 b_g=2000") for line in result.footer)
    assert out.read_text().splitlines()[-1].startswith("# minimum")


def test_psd_peaks_and_csv():
    base = SystemParams()
    omega = psd_grid(base, (0.0, 2e4), points=1501)
    result = run_psd(base, (0.0, 2e4), omega=omega, workers=1)
    single, split = result.curves
    assert len(single.peaks) == 1
    assert single.peaks[0].position == pytest.approx(base.bath.omega_x, rel=1e-9)
    assert len(split.peaks) == 2
    text = result.to_csv()
    assert "omega,S_xx_bg_0,S_xx_bg_20000" in text
    assert "# splitting b_g=20000" in text


def test_psd_grid_must_cover_cooling_linewidth():
    base = SystemParams()
    w = base.bath.omega_x
    with pytest.raises(ValueError, match="10 gamma_2"):
        run_psd(base, (0.0,), omega=np.linspace(w - 10, w + 10, 11), workers=1)


def test_psd_flags_unstable_curve():
    base = SystemParams()
    result = run_psd(base, (1e6,), omega=psd_grid(base, (2e4,), points=201), workers=1)
    assert result.curves[0].status == "not_hurwitz"
    assert "not_hurwitz" in result.to_csv()
