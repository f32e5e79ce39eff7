"""
Drivers for robustness maps, difference maps, spectroscopy scans and Z statistics.

Monte-Carlo protocols average the survival probability (or sensing signal)
over phase realizations ``0..R-1``. The realization streams depend only on
the protocol seed, so every grid point sees the same set of phase lists.
Work is split into fixed tasks (one detuning row, or one frequency) and
reduced in task order, so results are bit-identical for any thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import __version__
from . import smallmat as sm
from .dynamics import ControlError, SpinSystem, phased_products, free_hamiltonian, signal_from_propagator, unit_propagator
from .phases import RNG_ID, SAMPLER_ID, PhaseProtocol, generate_phase_matrix, z_statistic
from .sequence import PulseUnit, build_unit

__all__ = [
    "FidelityMapSpec", "SpectroscopySpec", "ScanResult",
    "resolve_threads", "default_axis",
    "survival_samples", "run_fidelity_map", "run_difference_map",
    "run_spectroscopy", "run_zstats",
    "high_fidelity_area", "find_dips", "spurious_amplitude",
]

THREADS_ENV = "DDSIM_THREADS"


def resolve_threads(threads=None):
    """Explicit count, else ``$DDSIM_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return int(threads)


def _map(fn, items, threads):
    threads = resolve_threads(threads)
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def default_axis(lo=-0.3, hi=0.3, points=61):
    return np.linspace(lo, hi, points)


def _check_axis(name, axis):
    axis = np.asarray(axis, dtype=float).reshape(-1)
    if axis.size < 1 or np.any(np.diff(axis) <= 0):
        raise ValueError(f"{name} must be a non-empty strictly increasing sequence")
    return axis


def _protocol_record(p):
    return {"kind": p.kind, "G": p.G, "seed": int(p.seed), "rng": RNG_ID, "sampler": SAMPLER_ID}


def _unit_record(unit):
    return {
        "label": unit.label,
        "phases": [float(p) for p in unit.phases],
        "starts_s": [e.start for e in unit.events],
        "durations_s": [e.duration for e in unit.events],
        "total_duration_s": unit.total_duration,
    }


@dataclass
class ScanResult:
    """
    Gridded output of an experiment.

    ``axes`` maps axis names to 1-D arrays in ``values`` axis order. ``extra``
    holds additional columns of the same shape (e.g. the ideal trace).
    """

    axes: dict
    values: np.ndarray
    stderr: np.ndarray
    provenance: dict
    extra: dict = field(default_factory=dict)

    @property
    def ndim(self):
        return np.ndim(self.values)


@dataclass(frozen=True)
class FidelityMapSpec:
    unit: PulseUnit
    M: int
    protocol: PhaseProtocol
    detuning_axis: tuple = tuple(default_axis())
    amplitude_axis: tuple = tuple(default_axis())
    realizations: int = 100
    omega: float = None

    def __post_init__(self):
        object.__setattr__(self, "detuning_axis", tuple(_check_axis("detuning_axis", self.detuning_axis)))
        object.__setattr__(self, "amplitude_axis", tuple(_check_axis("amplitude_axis", self.amplitude_axis)))
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.protocol.is_random:
            # phases are deterministic, one realization is exact
            object.__setattr__(self, "realizations", 1)
        if self.protocol.kind == "correlated" and self.protocol.G > self.M:
            raise ValueError(f"elimination size G={self.protocol.G} exceeds M={self.M}")
        if min(1 + a for a in self.amplitude_axis) <= 0:
            raise ValueError("amplitude errors must keep rabi_scale = 1 + value positive")
        if self.omega is None:
            durations = {e.duration for e in self.unit.events}
            if len(durations) != 1 or 0 in durations:
                raise ValueError("omega must be given unless all pulses share one finite duration")
            object.__setattr__(self, "omega", np.pi / durations.pop())

    def provenance(self):
        return {
            "experiment": "fidelity-map",
            "unit": _unit_record(self.unit),
            "M": int(self.M),
            "protocol": _protocol_record(self.protocol),
            "realizations": int(self.realizations),
            "omega_rad_s": float(self.omega),
            "detuning_axis_over_omega": list(self.detuning_axis),
            "amplitude_axis_relative": list(self.amplitude_axis),
            "initial_state": "+x",
            "nuclei": [],
            "package_version": __version__,
        }


def survival_samples(unit, M, protocol, error, omega, realizations, phases=None):
    """Per-realization survival probability of ``|+x>`` for the bare qubit."""
    if phases is None:
        phases = generate_phase_matrix(protocol, M, realizations)
    system = SpinSystem()
    u = unit_propagator(system, unit, error, omega)
    seq = phased_products(u, system.qubit_signs, phases)
    return sm.survival_probability(seq, sm.plus_x())


def _mean_stderr(samples):
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        return float(samples.mean()), 0.0
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(samples.size))


def run_fidelity_map(spec, threads=None):
    """Survival-probability map over (detuning / Omega, relative amplitude error)."""
    phases = generate_phase_matrix(spec.protocol, spec.M, spec.realizations)
    det = np.asarray(spec.detuning_axis)
    amp = np.asarray(spec.amplitude_axis)

    def row(i):
        vals, errs = np.empty(amp.size), np.empty(amp.size)
        for j, a in enumerate(amp):
            err = ControlError.relative(det[i], a, spec.omega)
            s = survival_samples(spec.unit, spec.M, spec.protocol, err, spec.omega, spec.realizations, phases)
            vals[j], errs[j] = _mean_stderr(s)
        return vals, errs

    rows = _map(row, range(det.size), threads)
    values = np.array([r[0] for r in rows])
    stderr = np.array([r[1] for r in rows])
    return ScanResult(
        axes={"detuning_over_omega": det, "relative_amp_error": amp},
        values=values, stderr=stderr, provenance=spec.provenance(),
    )


def run_difference_map(spec_a, spec_b, threads=None):
    """Pointwise ``fidelity(spec_b) - fidelity(spec_a)`` with combined standard errors."""
    if spec_a.detuning_axis != spec_b.detuning_axis or spec_a.amplitude_axis != spec_b.amplitude_axis:
        raise ValueError("difference maps need identical detuning and amplitude axes")
    a = run_fidelity_map(spec_a, threads)
    b = run_fidelity_map(spec_b, threads)
    return ScanResult(
        axes=dict(a.axes),
        values=b.values - a.values,
        stderr=np.hypot(a.stderr, b.stderr),
        provenance={"experiment": "diff-map", "a": a.provenance, "b": b.provenance},
        extra={"fidelity_a": a.values, "fidelity_b": b.values},
    )


@dataclass(frozen=True)
class SpectroscopySpec:
    """
    DD spectroscopy scan. ``frequency_axis`` holds DD frequencies ``1/(2 tau)`` in Hz.

    ``spacing="center"`` means ``tau`` is center-to-center; ``"edge"`` reads
    ``1/(2f)`` as the edge-to-edge gap. Errors are relative to the nominal
    Rabi frequency ``pi / pulse_duration``.
    """

    system: SpinSystem
    frequency_axis: tuple
    unit_kind: str = "xy8"
    total_pulses: int = 200
    pulse_duration: float = 100e-9
    protocol: PhaseProtocol = PhaseProtocol()
    realizations: int = 50
    detuning_fraction: float = 0.1
    amplitude_error: float = 0.1
    n_pulses: int = None
    custom_phases: tuple = None
    presets: dict = None
    spacing: str = "center"

    def __post_init__(self):
        freqs = _check_axis("frequency_axis", self.frequency_axis)
        if np.any(freqs <= 0):
            bad = freqs[freqs <= 0][0]
            raise ValueError(f"DD frequency {bad!r} Hz is not positive")
        object.__setattr__(self, "frequency_axis", tuple(freqs))
        if not self.pulse_duration > 0:
            raise ValueError("pulse_duration must be positive")
        if self.spacing not in ("center", "edge"):
            raise ValueError(f"unknown spacing convention {self.spacing!r}")
        for f in freqs:
            if self.tau(f) <= self.pulse_duration:
                raise ValueError(
                    f"DD frequency {f / 1e3:.6g} kHz gives tau={self.tau(f):.4g} s, "
                    f"not longer than the {self.pulse_duration:.4g} s pulse"
                )
        n_unit = self.template().n_pulses
        if self.total_pulses < n_unit or self.total_pulses % n_unit:
            raise ValueError(f"total_pulses={self.total_pulses} is not a multiple of the {n_unit}-pulse unit")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.protocol.is_random:
            object.__setattr__(self, "realizations", 1)
        if self.protocol.kind == "correlated" and self.protocol.G > self.M:
            raise ValueError(f"elimination size G={self.protocol.G} exceeds M={self.M}")

    def tau(self, f):
        half_period = 1.0 / (2.0 * f)
        return half_period if self.spacing == "center" else half_period + self.pulse_duration

    def unit(self, f, pulse_duration=None):
        d = self.pulse_duration if pulse_duration is None else pulse_duration
        return build_unit(self.unit_kind, self.tau(f), d, n_pulses=self.n_pulses,
                          phases=self.custom_phases, presets=self.presets)

    def template(self):
        return self.unit(self.frequency_axis[0])

    @property
    def M(self):
        return self.total_pulses // self.template().n_pulses

    @property
    def omega(self):
        return np.pi / self.pulse_duration

    @property
    def error(self):
        return ControlError.relative(self.detuning_fraction, self.amplitude_error, self.omega)

    def provenance(self):
        return {
            "experiment": "spectroscopy",
            "unit_kind": self.unit_kind,
            "unit_phases": [float(p) for p in self.template().phases],
            "total_pulses": int(self.total_pulses),
            "M": int(self.M),
            "pulse_duration_s": float(self.pulse_duration),
            "omega_rad_s": float(self.omega),
            "detuning_fraction": float(self.detuning_fraction),
            "amplitude_error": float(self.amplitude_error),
            "spacing": self.spacing,
            "protocol": _protocol_record(self.protocol),
            "realizations": int(self.realizations),
            "b_field_G": float(self.system.b_field),
            "nuclei": [asdict(n) for n in self.system.nuclei],
            "hamiltonian": "sum_n w_n Iz + 1/2 sz (x) (a_perp Ix + a_par Iz), w_n = -gamma_n B",
            "nuclear_state": "maximally mixed",
            "reference": "instantaneous error-free pulses, standard protocol",
            "frequency_axis_hz": list(self.frequency_axis),
            "package_version": __version__,
        }


def run_spectroscopy(spec, threads=None):
    """Averaged population signal vs DD frequency, plus the ideal reference trace."""
    system = spec.system
    h_free = free_hamiltonian(system)
    signs = system.qubit_signs
    phases = generate_phase_matrix(spec.protocol, spec.M, spec.realizations)
    err, omega, M = spec.error, spec.omega, spec.M

    def point(f):
        u = unit_propagator(system, spec.unit(f), err, omega, h_free)
        s = signal_from_propagator(phased_products(u, signs, phases), system.nuclear_dim)
        u0 = unit_propagator(system, spec.unit(f, 0.0), ControlError(), omega, h_free)
        ideal = signal_from_propagator(np.linalg.matrix_power(u0, M), system.nuclear_dim)
        return (*_mean_stderr(s), float(ideal))

    rows = _map(point, spec.frequency_axis, threads)
    freqs = np.asarray(spec.frequency_axis)
    return ScanResult(
        axes={"dd_frequency_khz": freqs / 1e3},
        values=np.array([r[0] for r in rows]),
        stderr=np.array([r[1] for r in rows]),
        provenance=spec.provenance(),
        extra={"signal_ideal": np.array([r[2] for r in rows])},
    )


def run_zstats(protocol, M, samples, bins=40):
    """
    Sample ``|Z|^2`` over ``samples`` realizations.

    Returns the histogram (edges, counts) on [0, 1] and a summary with the
    sample mean, its standard error and ``1/M`` for comparison.
    """
    phases = generate_phase_matrix(protocol, M, samples)
    z2 = np.abs(z_statistic(phases)) ** 2
    counts, edges = np.histogram(np.clip(z2, 0, 1), bins=bins, range=(0.0, 1.0))
    mean, se = _mean_stderr(z2)
    summary = {"M": int(M), "samples": int(samples), "mean_abs_z2": mean, "stderr": se, "inverse_m": 1.0 / M}
    provenance = {"experiment": "zstats", "protocol": _protocol_record(protocol), "bins": int(bins),
                  "package_version": __version__, **summary}
    return edges, counts, summary, provenance


def high_fidelity_area(result, threshold=0.99):
    """Fraction of map points with fidelity above ``threshold``."""
    return float(np.mean(np.asarray(result.values) > threshold))


def find_dips(signal, min_prominence):
    """Indices of local minima of ``signal`` with prominence at least ``min_prominence``."""
    idx, _ = find_peaks(-np.asarray(signal, dtype=float), prominence=min_prominence)
    return idx


def spurious_amplitude(result, lo_khz, hi_khz):
    """Largest ``|signal - signal_ideal|`` with the DD frequency in [lo_khz, hi_khz]."""
    f = result.axes["dd_frequency_khz"]
    window = (f >= lo_khz) & (f <= hi_khz)
    if not np.any(window):
        raise ValueError("no scan points inside the window")
    return float(np.max(np.abs(result.values - result.extra["signal_ideal"])[window]))
