"""Dynamical-decoupling simulation with standard, randomized and correlated random unit phases."""

__version__ = "0.1.0"

from .sequence import PulseEvent, PulseUnit, SequenceProgram, assemble, build_unit, shift_unit_phase  # noqa: E402
from .phases import PhaseProtocol, generate_phases, z_statistic  # noqa: E402
from .dynamics import ControlError, NuclearSpin, SpinSystem, sequence_propagator, sensing_signal  # noqa: E402
from .analysis import extract_pulse_params, predict_sequence_offdiag, unit_error_constant  # noqa: E402
from .experiments import (  # noqa: E402
    FidelityMapSpec, ScanResult, SpectroscopySpec,
    run_difference_map, run_fidelity_map, run_spectroscopy,
)
