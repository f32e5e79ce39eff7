import json
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from ddsim.cli import CSV_HEADERS, format_float, main
from ddsim.experiments import ScanResult
from ddsim.svg import render_svg

MAP = """[run]
command = fidelity-map
output = {out}
seed = 4
spacing = edge
[sequence]
unit = xy8
pulse_duration = 15 ns
pulse_spacing = 200 ns
repetitions = 6
[protocol]
kind = correlated
elimination_size = 3
realizations = 8
[grid]
detuning_points = 5
amplitude_points = 4
"""

SPECTRO = """[run]
command = spectroscopy
output = {out}
[sequence]
unit = xy8
pulse_duration = 100 ns
total_pulses = 200
[protocol]
kind = randomized
realizations = 3
[system]
b_field = 400 G
[nucleus 1H]
a_perp = 2 kHz
a_par = 4 kHz
[scan]
f_min = 1690 kHz
f_max = 1710 kHz
f_step = 5 kHz
"""


def _write(tmp_path, template, name):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(template.format(out=tmp_path / name))
    return cfg


def test_fidelity_map_outputs(tmp_path):
    cfg = _write(tmp_path, MAP, "map")
    assert main(["fidelity-map", "--config", str(cfg)]) == 0
    lines = (tmp_path / "map.csv").read_text().splitlines()
    assert lines[0] == "detuning_over_omega,relative_amp_error,fidelity,stderr"
    assert len(lines) == 1 + 5 * 4
    ET.fromstring((tmp_path / "map.svg").read_text())
    meta = json.loads((tmp_path / "map.meta.json").read_text())
    assert meta["seed"] == 4 and meta["spacing_convention"] == "edge"


def test_meta_round_trip_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, MAP, "map")
    main(["fidelity-map", "--config", str(cfg), "--seed", "9", "--no-plot"])
    first = (tmp_path / "map.csv").read_bytes()
    assert not (tmp_path / "map.svg").exists()
    out2 = tmp_path / "again"
    assert main(["fidelity-map", "--config", str(tmp_path / "map.meta.json"), "--output", str(out2),
                 "--threads", "3", "--no-plot"]) == 0
    assert (tmp_path / "again.csv").read_bytes() == first
    meta = json.loads((tmp_path / "again.meta.json").read_text())
    assert meta["seed"] == 9


def test_spectroscopy_outputs(tmp_path):
    cfg = _write(tmp_path, SPECTRO, "sp")
    assert main(["spectroscopy", "--config", str(cfg)]) == 0
    lines = (tmp_path / "sp.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADERS["spectroscopy"]) == "dd_frequency_khz,signal,signal_ideal,stderr"
    assert len(lines) == 6
    svg = (tmp_path / "sp.svg").read_text()
    assert svg.count("<polyline") == 2


def test_zstats_and_unit_check(tmp_path, capsys):
    z = tmp_path / "z.ini"
    z.write_text(f"[run]\ncommand = zstats\noutput = {tmp_path / 'z'}\n[protocol]\nkind = randomized\n"
                 "[zstats]\nrepetitions = 4\nsamples = 5000\nbins = 8\n")
    assert main(["zstats", "--config", str(z)]) == 0
    summary = (tmp_path / "z.summary.csv").read_text().splitlines()
    assert summary[0] == "M,samples,mean_abs_z2,stderr,inverse_m"
    assert summary[1].startswith("4,5000,")
    u = tmp_path / "u.ini"
    u.write_text(f"[run]\ncommand = unit-check\noutput = {tmp_path / 'u'}\n[sequence]\nunit = cp\nn_pulses = 2\n"
                 "pulse_duration = 15 ns\ntau = 215 ns\nrepetitions = 3\n[errors]\ndetuning = 0.002\n")
    assert main(["unit-check", "--config", str(u)]) == 0
    rows = dict(line.split(",") for line in (tmp_path / "u.csv").read_text().splitlines()[1:])
    assert float(rows["relative_deviation"]) < 5 * float(rows["epsilon"])


def test_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\ncommand = fidelity-map\n")
    assert main(["fidelity-map", "--config", str(bad)]) == 2
    assert "missing required key" in capsys.readouterr().err
    assert main(["fidelity-map", "--config", str(tmp_path / "nope.ini")]) == 1
    blocked = tmp_path / "file"
    blocked.write_text("")
    cfg = tmp_path / "m.ini"
    cfg.write_text(MAP.format(out=blocked / "sub" / "x"))
    assert main(["fidelity-map", "--config", str(cfg)]) == 1


def test_format_float_locale_free():
    assert format_float(0.1) == "0.1" and format_float(np.float64(1e-20)) == "1e-20"
    assert format_float(np.int64(3)) == "3"


def test_svg_edge_cases():
    axes = {"detuning_over_omega": np.array([0.0, 1.0]), "relative_amp_error": np.array([0.0, 1.0, 2.0])}
    const = ScanResult(axes, np.full((2, 3), 0.7), np.zeros((2, 3)), {})
    svg = render_svg(const)
    ET.fromstring(svg)
    assert "detuning (Ω)" in svg and "amplitude error" in svg
    clipped = render_svg(ScanResult(axes, np.array([[0.5, 0.95, 1.0], [0.9, 0.99, 0.2]]), np.zeros((2, 3)), {}),
                         clip=(0.9, 1.0))
    assert clipped.count('fill="#ffffff"') >= 2
    single = ScanResult({"detuning_over_omega": np.array([0.0]), "relative_amp_error": np.array([0.0])},
                        np.ones((1, 1)), np.zeros((1, 1)), {})
    ET.fromstring(render_svg(single))
    assert render_svg(ScanResult({}, np.zeros(0), np.zeros(0), {})) is None
