"""
Exact propagation of the sensor qubit, optionally coupled to nuclear spins.

The qubit is the first (slowest) tensor factor. In the rotating frame the
free Hamiltonian is the secular pure-dephasing hyperfine model

    H_free = sum_n [ w_n Iz_n + (1/2) sz (x) (a_perp_n Ix_n + a_par_n Iz_n) ],   w_n = -gamma_n B

and during a rectangular pulse of phase ``phi`` the control term

    H_c = (1/2) s Omega [sx cos(phi) + sy sin(phi)] + (1/2) Delta sz

is added, with ``s`` the Rabi scale and ``Delta`` the detuning. Both terms
act on the qubit only, while the nuclear terms stay on during the pulse.

Because every part of ``H_free`` commutes with ``sz (x) 1``, a pulse of phase
``phi`` equals the phase-0 pulse conjugated by ``Rz(phi) (x) 1``. The same
holds for a whole unit shifted by a global phase, which is how sequences are
propagated: one unit propagator per parameter point, then cheap elementwise
phase factors for each repetition.
"""

from dataclasses import dataclass

import numpy as np

from . import smallmat as sm
from .constants import GYROMAGNETIC

__all__ = [
    "MAX_DIM", "ControlError", "NuclearSpin", "SpinSystem",
    "larmor_frequency", "free_hamiltonian", "control_hamiltonian",
    "pulse_propagator", "instantaneous_pulse", "rotate_phase",
    "unit_propagator", "phased_products", "sequence_propagator",
    "sensing_signal", "signal_from_propagator",
]

MAX_DIM = 32
# gap lengths are bucketed at this resolution (s) when caching free propagators
_GAP_RESOLUTION = 1e-21


@dataclass(frozen=True)
class ControlError:
    """Static pulse error: ``detuning`` in rad/s, ``rabi_scale`` multiplies the nominal Rabi frequency."""

    detuning: float = 0.0
    rabi_scale: float = 1.0

    def __post_init__(self):
        if not self.rabi_scale > 0:
            raise ValueError(f"rabi_scale must be positive, got {self.rabi_scale}")

    @classmethod
    def relative(cls, detuning_fraction, amplitude_error, omega):
        """Errors quoted relative to the nominal Rabi frequency ``omega``."""
        return cls(detuning=detuning_fraction * omega, rabi_scale=1.0 + amplitude_error)

    @property
    def is_zero(self):
        return self.detuning == 0.0 and self.rabi_scale == 1.0


@dataclass(frozen=True)
class NuclearSpin:
    a_perp: float
    a_par: float
    gamma: float
    label: str = ""

    def __post_init__(self):
        if self.a_perp < 0:
            raise ValueError("a_perp must be >= 0 (its sign is a choice of transverse axis)")

    @classmethod
    def of_species(cls, species, a_perp, a_par):
        """Nucleus with a tabulated gyromagnetic ratio (``"1H"`` or ``"13C"``); couplings in rad/s."""
        try:
            gamma = GYROMAGNETIC[species]
        except KeyError:
            raise ValueError(f"unknown species {species!r}; known: {sorted(GYROMAGNETIC)}") from None
        return cls(a_perp, a_par, gamma, species)


@dataclass(frozen=True)
class SpinSystem:
    nuclei: tuple = ()
    b_field: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if self.dim > MAX_DIM:
            raise ValueError(f"Hilbert dimension {self.dim} exceeds the cap of {MAX_DIM}")

    @property
    def dim(self):
        return 2 ** (1 + len(self.nuclei))

    @property
    def nuclear_dim(self):
        return 2 ** len(self.nuclei)

    @property
    def qubit_signs(self):
        """Diagonal of ``sz (x) 1``."""
        n = self.nuclear_dim
        return np.concatenate([np.ones(n), -np.ones(n)])

    def on_qubit(self, op):
        return np.kron(op, np.eye(self.nuclear_dim))


def larmor_frequency(nucleus, b_field):
    """Bare nuclear Larmor frequency ``-gamma B`` in rad/s."""
    return -nucleus.gamma * b_field


def _nuclear_op(system, n, op):
    factors = [sm.I2] + [op if k == n else sm.I2 for k in range(len(system.nuclei))]
    return sm.kron(*factors)


def free_hamiltonian(system):
    h = np.zeros((system.dim, system.dim), dtype=complex)
    qz = system.on_qubit(sm.SZ)
    for n, nuc in enumerate(system.nuclei):
        ix = _nuclear_op(system, n, sm.SX / 2)
        iz = _nuclear_op(system, n, sm.SZ / 2)
        h += larmor_frequency(nuc, system.b_field) * iz
        h += 0.5 * qz @ (nuc.a_perp * ix + nuc.a_par * iz)
    return h


def control_hamiltonian(system, err, omega_nominal, phi):
    qubit = 0.5 * err.rabi_scale * omega_nominal * (np.cos(phi) * sm.SX + np.sin(phi) * sm.SY)
    qubit = qubit + 0.5 * err.detuning * sm.SZ
    return system.on_qubit(qubit)


def rotate_phase(u, signs, phi):
    """
    Conjugate ``u`` by ``Rz(phi) (x) 1``: ``u_ij -> u_ij exp(-i phi (s_i - s_j) / 2)``.

    ``phi`` may be an array; the result then has shape ``phi.shape + u.shape``.
    """
    phi = np.asarray(phi, dtype=float)
    half = 0.5 * (signs[:, None] - signs[None, :])
    return u * np.exp(-1j * phi[..., None, None] * half)


def pulse_propagator(system, err, omega_nominal, event, h_free=None):
    """Propagator of one finite-width rectangular pulse, nuclear terms included."""
    if event.duration <= 0:
        raise ValueError("zero-duration pulse: use instantaneous_pulse instead")
    if h_free is None:
        h_free = free_hamiltonian(system)
    h = h_free + control_hamiltonian(system, err, omega_nominal, event.phase)
    return sm.hermitian_expm(h, event.duration)


def instantaneous_pulse(system, phi):
    """Ideal pi rotation about ``(cos phi, sin phi, 0)`` on the qubit: ``-i (sx cos phi + sy sin phi) (x) 1``."""
    return system.on_qubit(-1j * (np.cos(phi) * sm.SX + np.sin(phi) * sm.SY))


def unit_propagator(system, unit, err, omega_nominal, h_free=None):
    """
    Time-ordered propagator of a single unit (no global shift).

    Zero-duration events are applied as ideal instantaneous pulses and ignore
    ``err``; finite ones use the full control Hamiltonian.
    """
    if h_free is None:
        h_free = free_hamiltonian(system)
    signs = system.qubit_signs
    free_cache, pulse_cache = {}, {}

    def free(gap):
        key = round(gap / _GAP_RESOLUTION)
        if key not in free_cache:
            free_cache[key] = sm.hermitian_expm(h_free, gap)
        return free_cache[key]

    u = np.eye(system.dim, dtype=complex)
    t = 0.0
    for ev in unit.events:
        gap = ev.start - t
        if gap < -1e-15:
            raise ValueError(f"negative free-evolution gap ({gap:.3e} s): pulses overlap")
        if gap > 0:
            u = free(gap) @ u
        if ev.duration == 0:
            p = instantaneous_pulse(system, ev.phase)
        else:
            key = round(ev.duration / _GAP_RESOLUTION)
            if key not in pulse_cache:
                h = h_free + control_hamiltonian(system, err, omega_nominal, 0.0)
                pulse_cache[key] = sm.hermitian_expm(h, ev.duration)
            p = rotate_phase(pulse_cache[key], signs, ev.phase)
        u = p @ u
        t = ev.end
    tail = unit.total_duration - t
    if tail < -1e-15:
        raise ValueError("pulses extend past the unit duration")
    if tail > 0:
        u = free(tail) @ u
    return u


def phased_products(unit_u, signs, phases):
    """
    Whole-sequence propagators ``U(Phi_M) ... U(Phi_1)`` from one unit propagator.

    Parameters
    ----------
    unit_u : ndarray, shape (d, d)
    signs : ndarray, shape (d,)
        Qubit ``sz`` diagonal.
    phases : array_like, shape (M,) or (R, M)
        Unit phases; a 2-D input gives one product per row.
    """
    phases = np.asarray(phases, dtype=float)
    single = phases.ndim == 1
    phases = np.atleast_2d(phases)
    d = unit_u.shape[-1]
    out = np.broadcast_to(np.eye(d, dtype=complex), (phases.shape[0], d, d)).copy()
    for m in range(phases.shape[1]):
        out = rotate_phase(unit_u, signs, phases[:, m]) @ out
    return out[0] if single else out


def sequence_propagator(system, program, err, omega_nominal):
    unit_u = unit_propagator(system, program.unit, err, omega_nominal)
    return phased_products(unit_u, system.qubit_signs, np.asarray(program.unit_phases))


def signal_from_propagator(u, nuclear_dim):
    """
    Population left in ``|+x>`` with the nuclei maximally mixed.

    ``P = || (<+| (x) 1) U (|+> (x) 1) ||_F^2 / 2^n``, which is the exact
    average over the nuclear basis states. Accepts stacks of propagators.
    """
    n = nuclear_dim
    block = 0.5 * (u[..., :n, :n] + u[..., :n, n:] + u[..., n:, :n] + u[..., n:, n:])
    p = np.sum(np.abs(block) ** 2, axis=(-1, -2)) / n
    return np.clip(p, 0.0, 1.0)


def sensing_signal(system, program, err, omega_nominal):
    u = sequence_propagator(system, program, err, omega_nominal)
    return float(signal_from_propagator(u, system.nuclear_dim))
