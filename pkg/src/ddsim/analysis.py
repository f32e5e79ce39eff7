"""
First-order error analysis of repeated DD units.

A single imperfect pi pulse of phase ``phi`` can always be written as

    U = [[ e^{-i a} sin(eps),            i e^{-i(b + phi)} cos(eps) ],
         [ i e^{i(b + phi)} cos(eps),    e^{i a} sin(eps)           ]]

and a unit built from such pulses is, after removing its global phase,
``[[1, i C eps], [i C* eps, 1]] + O(eps^2)``. Repeating the unit ``M`` times
with unit phases ``Phi_m`` gives the off-diagonal ``i Z M C eps`` with
``Z = (1/M) sum_m exp(-i Phi_m)``.

``C`` here is measured from the numerically propagated unit, so it carries
whatever the unit structure does to first order. Robust units such as XY8
cancel the first-order term, in which case ``C`` is itself ``O(eps)`` and
only the propagation identities (linear growth in ``M``, the ``Z`` factor)
remain meaningful.
"""

from dataclasses import dataclass

import numpy as np

from . import smallmat as sm
from .dynamics import SpinSystem, pulse_propagator, unit_propagator
from .phases import z_statistic
from .sequence import PulseEvent

__all__ = [
    "PulseParams", "UnitErrorConstant",
    "pi_pulse_matrix", "extract_pulse_params", "single_pulse_params",
    "unit_error_constant", "predict_sequence_offdiag", "measured_offdiag",
]

DEGENERATE_EPS = 1e-12


def _wrap(x):
    """Map angles to (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - x, 2 * np.pi))


@dataclass(frozen=True)
class PulseParams:
    alpha: float
    beta: float
    epsilon: float
    residual: float


@dataclass(frozen=True)
class UnitErrorConstant:
    c: complex
    epsilon: float
    degenerate: bool = False
    global_phase: complex = 1.0

    def shifted(self, phi):
        """Constant of the same unit after a global phase shift ``phi``."""
        return UnitErrorConstant(self.c * np.exp(-1j * phi), self.epsilon, self.degenerate, self.global_phase)


def pi_pulse_matrix(alpha, beta, epsilon, phi):
    s, c = np.sin(epsilon), np.cos(epsilon)
    return np.array([
        [np.exp(-1j * alpha) * s, 1j * np.exp(-1j * (beta + phi)) * c],
        [1j * np.exp(1j * (beta + phi)) * c, np.exp(1j * alpha) * s],
    ])


def extract_pulse_params(u, phi):
    """
    Recover ``(alpha, beta, epsilon)`` of a 2x2 pulse propagator applied with phase ``phi``.

    Gauge: angles in (-pi, pi] and ``epsilon = arcsin|u00| >= 0``. The
    residual is the max-norm distance to the reconstructed matrix; it is
    ~1e-16 for any special-unitary input and large when ``u`` carries a
    global phase.
    """
    u = sm.as_matrix(u)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 pulse propagator, got {u.shape}")
    if not sm.is_unitary(u):
        raise ValueError("pulse propagator is not unitary")
    mag = min(1.0, abs(u[0, 0]))
    alpha = -float(np.angle(u[0, 0])) if mag > 0 else 0.0
    epsilon = float(np.arcsin(mag))
    beta = _wrap(np.angle(u[1, 0] / 1j) - phi)
    alpha = _wrap(alpha)
    residual = float(np.max(np.abs(u - pi_pulse_matrix(alpha, beta, epsilon, phi))))
    return PulseParams(alpha, beta, epsilon, residual)


def single_pulse_params(error, omega, duration):
    """Parameters of one phase-0 rectangular pulse on the bare qubit."""
    u = pulse_propagator(SpinSystem(), error, omega, PulseEvent(0.0, duration, 0.0))
    return extract_pulse_params(u, 0.0)


def unit_error_constant(unit, error, omega):
    """
    First-order constant ``C`` of ``unit`` under a static ``error``.

    The unit is propagated for the bare qubit, its global phase is removed
    and ``C = U01 / (i eps)`` with ``eps`` from the unit's first finite pulse.
    Valid to O(eps). Error-free or ideal units return a degenerate constant
    with ``c = 0``.
    """
    u = unit_propagator(SpinSystem(), unit, error, omega)
    normalized = sm.strip_global_phase(u)
    tr = np.trace(u)
    g = tr / abs(tr) if abs(tr) > 0 else 1.0
    finite = [e for e in unit.events if e.duration > 0]
    eps = single_pulse_params(error, omega, finite[0].duration).epsilon if finite else 0.0
    if eps < DEGENERATE_EPS:
        return UnitErrorConstant(0j, eps, True, complex(g))
    return UnitErrorConstant(complex(normalized[0, 1] / (1j * eps)), eps, False, complex(g))


def predict_sequence_offdiag(c, epsilon, phases):
    """First-order upper-right entry ``i Z M C eps`` of the M-unit propagator (global phase removed)."""
    if isinstance(c, UnitErrorConstant):
        c = c.c
    phases = np.asarray(phases, dtype=float)
    M = phases.shape[-1]
    return 1j * z_statistic(phases) * M * c * epsilon


def measured_offdiag(u):
    """Upper-right entry of a propagator after removing its global phase."""
    return sm.strip_global_phase(u)[..., 0, 1]
