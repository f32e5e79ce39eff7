import numpy as np
import pytest
from scipy.linalg import expm

from ddsim import smallmat as sm
from ddsim.constants import GAMMA_13C, GAMMA_1H
from ddsim.dynamics import (
    ControlError, NuclearSpin, SpinSystem, free_hamiltonian, instantaneous_pulse, larmor_frequency,
    pulse_propagator, sensing_signal, sequence_propagator, signal_from_propagator, unit_propagator,
)
from ddsim.sequence import PulseEvent, PulseUnit, assemble, build_unit

TWO_PI = 2 * np.pi


def oracle_sequence(system, program, err, omega):
    """Pulse-by-pulse propagation with dense expm, each pulse built at its own phase."""
    n = system.nuclear_dim
    h0 = np.zeros((system.dim, system.dim), dtype=complex)
    for k, nuc in enumerate(system.nuclei):
        def op(p):
            fs = [np.eye(2)] + [p if j == k else np.eye(2) for j in range(len(system.nuclei))]
            out = fs[0]
            for f in fs[1:]:
                out = np.kron(out, f)
            return out
        sz = np.kron(sm.SZ, np.eye(n))
        h0 += -nuc.gamma * system.b_field * op(sm.SZ / 2)
        h0 += 0.5 * sz @ (nuc.a_perp * op(sm.SX / 2) + nuc.a_par * op(sm.SZ / 2))
    u = np.eye(system.dim, dtype=complex)
    for unit in program.units():
        t = 0.0
        for ev in unit.events:
            u = expm(-1j * h0 * (ev.start - t)) @ u
            q = 0.5 * err.rabi_scale * omega * (np.cos(ev.phase) * sm.SX + np.sin(ev.phase) * sm.SY)
            q = q + 0.5 * err.detuning * sm.SZ
            u = expm(-1j * (h0 + np.kron(q, np.eye(n))) * ev.duration) @ u
            t = ev.end
        u = expm(-1j * h0 * (unit.total_duration - t)) @ u
    return u


B = 400.0
H1 = NuclearSpin(TWO_PI * 2e3, TWO_PI * 4e3, GAMMA_1H, "1H")
C13 = NuclearSpin(TWO_PI * 10e3, TWO_PI * 200e3, GAMMA_13C, "13C")


def test_larmor_frequencies():
    assert abs(larmor_frequency(H1, B)) / TWO_PI / 1e3 == pytest.approx(1703.0, abs=0.05)
    assert abs(larmor_frequency(C13, B)) / TWO_PI / 1e3 == pytest.approx(428.2, abs=0.05)


def test_free_hamiltonian_examples():
    assert np.array_equal(free_hamiltonian(SpinSystem()), np.zeros((2, 2)))
    h = free_hamiltonian(SpinSystem((H1, C13), B))
    assert h.shape == (8, 8) and sm.is_hermitian(h)


def test_dimension_cap():
    SpinSystem((H1,) * 4)
    with pytest.raises(ValueError):
        SpinSystem((H1,) * 5)
    with pytest.raises(ValueError):
        NuclearSpin(-1.0, 0.0, GAMMA_1H)
    with pytest.raises(ValueError):
        ControlError(rabi_scale=0.0)


def test_perfect_finite_pulse():
    T = 100e-9
    u = pulse_propagator(SpinSystem(), ControlError(), np.pi / T, PulseEvent(0, T, 0))
    assert np.max(np.abs(u + 1j * sm.SX)) < 1e-10
    with pytest.raises(ValueError):
        pulse_propagator(SpinSystem(), ControlError(), 1.0, PulseEvent(0, 0, 0))


def test_erroneous_pulse_is_unitary(rng):
    from ddsim.analysis import extract_pulse_params
    T = 100e-9
    err = ControlError.relative(0.1, 0.1, np.pi / T)
    u = pulse_propagator(SpinSystem(), err, np.pi / T, PulseEvent(0, T, 0))
    assert sm.is_unitary(u) and extract_pulse_params(u, 0.0).epsilon > 0
    for _ in range(50):
        err = ControlError(rng.normal() * 1e7, rng.uniform(0.5, 1.5))
        ev = PulseEvent(0, rng.uniform(1e-9, 1e-6), rng.uniform(0, TWO_PI))
        assert sm.unitarity_error(pulse_propagator(SpinSystem((H1, C13), B), err, 3e7, ev)) < 1e-10


def test_instantaneous_examples():
    s = SpinSystem((H1,), B)
    assert np.allclose(instantaneous_pulse(s, 0), np.kron(-1j * sm.SX, np.eye(2)))
    assert np.allclose(instantaneous_pulse(s, np.pi / 2), np.kron(-1j * sm.SY, np.eye(2)))
    p = instantaneous_pulse(s, 0.4)
    assert np.allclose(p @ p, -np.eye(4))
    assert signal_from_propagator(p @ p, 2) == pytest.approx(1.0)


def test_instantaneous_limit():
    s = SpinSystem((H1, C13), B)
    diffs = []
    for T in (1e-7, 1e-8, 1e-9):
        u = pulse_propagator(s, ControlError(), np.pi / T, PulseEvent(0, T, 0.7))
        diffs.append(np.max(np.abs(u - instantaneous_pulse(s, 0.7))))
    assert diffs[0] > diffs[1] > diffs[2]
    # bounded by the free evolution accumulated during the pulse
    assert diffs[2] < np.linalg.norm(free_hamiltonian(s), 2) * 1e-9
    # the residual is linear in the pulse length
    assert diffs[1] / diffs[2] == pytest.approx(10, rel=0.05)


@pytest.mark.parametrize("kind,M", [("xy8", 1), ("xy8", 24), ("cp", 24)])
def test_ideal_sequence_is_identity(kind, M):
    unit = build_unit(kind, 215e-9, 0.0, n_pulses=2 if kind == "cp" else None)
    u = sequence_propagator(SpinSystem(), assemble(unit, M, np.linspace(0, 5, M)), ControlError(), 1.0)
    assert np.max(np.abs(sm.strip_global_phase(u) - np.eye(2))) < 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_matches_pulse_by_pulse_oracle(seed):
    r = np.random.default_rng(seed)
    nuclei = (H1, C13)[: 1 + seed % 2]
    system = SpinSystem(nuclei, B)
    T = r.uniform(10e-9, 100e-9)
    kind = ("xy8", "cp")[seed % 2]
    unit = build_unit(kind, r.uniform(2 * T, 600e-9), T, n_pulses=4 if kind == "cp" else None)
    err = ControlError.relative(r.uniform(-0.2, 0.2), r.uniform(-0.2, 0.2), np.pi / T)
    program = assemble(unit, 3, r.uniform(0, TWO_PI, 3))
    u = sequence_propagator(system, program, err, np.pi / T)
    assert np.max(np.abs(u - oracle_sequence(system, program, err, np.pi / T))) < 1e-9
    assert sm.unitarity_error(u) < 1e-10


def test_zero_coupling_factorizes():
    T = 50e-9
    err = ControlError.relative(0.1, 0.1, np.pi / T)
    program = assemble(build_unit("xy8", 300e-9, T), 4, [0.0, 1.0, 2.0, 3.0])
    bare = sm.survival_probability(sequence_propagator(SpinSystem(), program, err, np.pi / T), sm.plus_x())
    dark = SpinSystem((NuclearSpin(0.0, 0.0, GAMMA_1H), NuclearSpin(0.0, 0.0, GAMMA_13C)), B)
    assert sensing_signal(dark, program, err, np.pi / T) == pytest.approx(bare, abs=1e-12)


def test_echo_refocuses_parallel_coupling():
    tau = 3.7e-6
    unit = PulseUnit((PulseEvent(tau / 2, 0.0, 0.0),), tau)
    system = SpinSystem((NuclearSpin(0.0, TWO_PI * 150e3, GAMMA_1H),), B)
    assert sensing_signal(system, assemble(unit, 1, [0.0]), ControlError(), 1.0) == pytest.approx(1.0, abs=1e-12)


def test_unit_gap_errors():
    bad = PulseUnit.__new__(PulseUnit)
    object.__setattr__(bad, "events", (PulseEvent(1e-7, 2e-7, 0), PulseEvent(2e-7, 1e-8, 0)))
    object.__setattr__(bad, "total_duration", 1e-6)
    object.__setattr__(bad, "label", "bad")
    with pytest.raises(ValueError, match="gap"):
        unit_propagator(SpinSystem(), bad, ControlError(), 1e7)


def test_sensing_examples():
    freq = abs(larmor_frequency(H1, B)) / TWO_PI
    ideal = lambda tau: assemble(build_unit("cp", tau, 0.0, n_pulses=2), 100, [0.0] * 100)  # noqa: E731
    s = SpinSystem((H1,), B)
    assert sensing_signal(SpinSystem(), ideal(1e-6), ControlError(), 1.0) == pytest.approx(1.0)
    off = sensing_signal(s, ideal(1 / (2 * 1.3 * freq)), ControlError(), 1.0)
    on = sensing_signal(s, ideal(1 / (2 * freq)), ControlError(), 1.0)
    assert off > 0.99
    assert on < off - 0.005
