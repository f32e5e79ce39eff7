"""
First-order error of a repeated unit.

A unit with small pulse errors has an off-diagonal entry i C eps. Repeating it
M times with unit phases Phi_m gives i Z M C eps. We check this against exact
propagation for a Carr-Purcell unit under amplitude error, where C stays O(1),
and note that XY8 already cancels the first-order term.
"""
import numpy as np

from ddsim.analysis import measured_offdiag, predict_sequence_offdiag, unit_error_constant
from ddsim.dynamics import ControlError, SpinSystem, sequence_propagator
from ddsim.phases import PhaseProtocol, generate_phases
from ddsim.sequence import assemble, build_unit

T = 15e-9
omega = np.pi / T
err = ControlError.relative(0.0, 1e-3 / (np.pi / 2), omega)  # eps close to 1e-3

for kind, n in (("cp", 8), ("xy8", None)):
    unit = build_unit(kind, 215e-9, T, n_pulses=n)
    c = unit_error_constant(unit, err, omega)
    print(f"{unit.label}: eps = {c.epsilon:.3e}, C = {c.c:.4g}")
    for name, proto in (("standard", PhaseProtocol()), ("randomized", PhaseProtocol("randomized", seed=2)),
                        ("correlated G=2", PhaseProtocol("correlated", 2, seed=2))):
        ph = generate_phases(proto, 6)
        u = sequence_propagator(SpinSystem(), assemble(unit, 6, ph), err, omega)
        num, pred = measured_offdiag(u), predict_sequence_offdiag(c, c.epsilon, ph)
        print(f"    {name:>15s}: |U01| = {abs(num):.3e}, predicted {abs(pred):.3e}")
