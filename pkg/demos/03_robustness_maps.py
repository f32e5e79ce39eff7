"""
XY8 robustness maps: 48 pulses of 15 ns, 200 ns between pulse edges.

Prints the fraction of the (detuning, amplitude) grid with fidelity above
0.99 for each protocol and writes SVG heatmaps next to this script.
"""
from pathlib import Path

import numpy as np

from ddsim.experiments import FidelityMapSpec, high_fidelity_area, run_fidelity_map
from ddsim.phases import PhaseProtocol
from ddsim.sequence import build_unit, center_spacing
from ddsim.svg import render_svg

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
unit = build_unit("xy8", center_spacing(200e-9, 15e-9, "edge"), 15e-9)

for M in (6, 24):
    maps = {}
    for name, proto in (("standard", PhaseProtocol()), ("randomized", PhaseProtocol("randomized")),
                        ("G=2", PhaseProtocol("correlated", 2)), ("G=3", PhaseProtocol("correlated", 3))):
        maps[name] = run_fidelity_map(FidelityMapSpec(unit, M, proto), threads=4)
        (out / f"map_M{M}_{name.replace('=', '')}.svg").write_text(
            render_svg(maps[name], f"XY8 M={M} {name}", clip=(0.9, 1.0)))
    print(f"M = {M}")
    for name, res in maps.items():
        gain = np.median(res.values - maps["randomized"].values)
        print(f"    {name:>10s}: area(F > 0.99) = {high_fidelity_area(res):.3f}, median gain over randomized = {gain:+.2e}")
