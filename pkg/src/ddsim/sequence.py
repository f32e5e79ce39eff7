"""
Basic DD pulse units and their repetition into full sequences.

A unit of ``N`` pulses with center-to-center spacing ``tau`` uses CPMG timing:
pulse centers sit at ``tau/2, 3*tau/2, ..., (2N-1)*tau/2`` and the unit lasts
``N*tau``. A pulse of finite width is centered on its slot.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "PulseEvent", "PulseUnit", "SequenceProgram",
    "load_presets", "parse_presets", "center_spacing",
    "build_unit", "shift_unit_phase", "assemble",
]

TWO_PI = 2 * np.pi
# tolerance on event ordering, well below any physical timescale here
_TIME_TOL = 1e-15


@dataclass(frozen=True)
class PulseEvent:
    start: float
    duration: float
    phase: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"pulse duration must be >= 0, got {self.duration}")
        if self.start < 0:
            raise ValueError(f"pulse start must be >= 0, got {self.start}")

    @property
    def center(self):
        return self.start + 0.5 * self.duration

    @property
    def end(self):
        return self.start + self.duration


@dataclass(frozen=True)
class PulseUnit:
    events: tuple
    total_duration: float
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for a, b in zip(self.events, self.events[1:]):
            if b.start < a.end - _TIME_TOL:
                raise ValueError(f"overlapping or unordered pulses in unit {self.label!r}")
        if self.events and self.events[-1].end > self.total_duration + _TIME_TOL:
            raise ValueError("last pulse ends after the unit duration")

    @property
    def n_pulses(self):
        return len(self.events)

    @property
    def phases(self):
        return np.array([e.phase for e in self.events])


@dataclass(frozen=True)
class SequenceProgram:
    """``M`` repetitions of ``unit``; repetition ``m`` is shifted by ``unit_phases[m]``."""

    unit: PulseUnit
    unit_phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "unit_phases", tuple(float(p) for p in self.unit_phases))
        if not self.unit_phases:
            raise ValueError("a program needs at least one unit")

    @property
    def M(self):
        return len(self.unit_phases)

    @property
    def n_pulses(self):
        return self.M * self.unit.n_pulses

    @property
    def total_duration(self):
        return self.M * self.unit.total_duration

    def units(self):
        """The phase-shifted units in time order."""
        return [shift_unit_phase(self.unit, p) for p in self.unit_phases]


def parse_presets(text):
    """Parse preset lines ``label N phase_1 ... phase_N`` into a dict of phase tuples."""
    presets = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            n = int(fields[1])
            phases = tuple(float(x) for x in fields[2:])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed preset at line {lineno}: {raw!r}") from exc
        if n < 1 or len(phases) != n:
            raise ValueError(f"preset {fields[0]!r} at line {lineno}: expected {n} phases, got {len(phases)}")
        presets[fields[0].lower()] = phases
    return presets


def load_presets(path=None):
    """Load unit presets from ``path``, or the presets shipped with the package."""
    if path is None:
        text = resources.files("ddsim").joinpath("data/units.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_presets(text)


def center_spacing(spacing, pulse_duration, convention="center"):
    """
    Convert a quoted pulse spacing to the center-to-center ``tau``.

    ``convention="edge"`` treats ``spacing`` as the free gap between pulse
    edges, so ``tau = spacing + pulse_duration``.
    """
    if convention == "center":
        return float(spacing)
    if convention == "edge":
        return float(spacing) + float(pulse_duration)
    raise ValueError(f"unknown spacing convention {convention!r} (use 'edge' or 'center')")


def build_unit(kind, tau, pulse_duration, n_pulses=None, phases=None, presets=None):
    """
    Build one basic DD unit.

    Parameters
    ----------
    kind : str
        ``"cp"``, ``"custom"`` or a preset label (``"xy8"``; ``"yy8"`` once supplied).
    tau : float
        Center-to-center pulse spacing in seconds.
    pulse_duration : float
        Width of each rectangular pulse in seconds; 0 gives ideal instantaneous pulses.
    n_pulses : int, optional
        Pulses per unit. Required to be even for built-in kinds.
    phases : sequence of float, optional
        Pulse phases for ``kind="custom"``.
    presets : dict, optional
        Label to phase-tuple mapping; defaults to the shipped presets.
    """
    kind = kind.lower()
    if pulse_duration < 0:
        raise ValueError("pulse_duration must be >= 0")
    if tau <= pulse_duration or tau <= 0:
        raise ValueError(f"pulse overlap: tau={tau!r} must exceed pulse_duration={pulse_duration!r}")

    if kind == "custom":
        if phases is None:
            raise ValueError("custom units need an explicit phase list")
        phases = tuple(float(p) for p in phases)
        if n_pulses is not None and n_pulses != len(phases):
            raise ValueError(f"custom unit: {len(phases)} phases given for n_pulses={n_pulses}")
        label = "custom"
    elif kind == "cp":
        n = 2 if n_pulses is None else int(n_pulses)
        if n < 2 or n % 2:
            raise ValueError(f"built-in units need an even number of pulses, got {n}")
        phases = (0.0,) * n
        label = "cp"
    else:
        table = load_presets() if presets is None else presets
        if kind not in table:
            hint = " (yy8 must be added to a preset file)" if kind == "yy8" else ""
            raise ValueError(f"unknown unit kind {kind!r}{hint}")
        phases = table[kind]
        if n_pulses is not None and n_pulses != len(phases):
            raise ValueError(f"{kind} has {len(phases)} pulses, n_pulses={n_pulses} requested")
        if len(phases) % 2:
            raise ValueError(f"built-in units need an even number of pulses, got {len(phases)}")
        label = kind

    events = []
    for k, phi in enumerate(phases):
        center = (k + 0.5) * tau
        events.append(PulseEvent(center - 0.5 * pulse_duration, float(pulse_duration), phi))
    return PulseUnit(tuple(events), len(phases) * tau, label)


def shift_unit_phase(unit, phi):
    """Add a global phase ``phi`` to every pulse of ``unit`` (phases kept in [0, 2pi))."""
    events = tuple(
        PulseEvent(e.start, e.duration, float(np.mod(e.phase + phi, TWO_PI))) for e in unit.events
    )
    return PulseUnit(events, unit.total_duration, unit.label)


def assemble(unit, M, phases):
    if M < 1:
        raise ValueError("M must be a positive integer")
    phases = tuple(phases)
    if len(phases) != M:
        raise ValueError(f"expected {M} unit phases, got {len(phases)}")
    return SequenceProgram(unit, phases)
