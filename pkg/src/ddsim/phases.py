"""
Per-unit global phases for the standard, randomized and correlated protocols.

Random streams
--------------
Every realization ``r`` of a protocol with master ``seed`` owns one stream,
``Generator(PCG64(SeedSequence(seed, spawn_key=(r,))))``. Within that stream
draws are consumed in unit order, so unit ``m`` always reads the same
position. PCG64 and SeedSequence are bit-stable across platforms, which makes
phase lists reproducible regardless of how realizations are scheduled.

Correlated sampler
------------------
Units are grouped in consecutive blocks of ``G`` starting at unit 0. A
complete block takes the ``G``-th roots of unity, rotates them by a uniform
random angle and permutes them at random; its phase factors therefore sum to
zero exactly. A trailing partial block (``M % G`` units) gets independent
uniform phases.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhaseProtocol", "RNG_ID", "SAMPLER_ID",
    "realization_rng", "generate_phases", "generate_phase_matrix", "z_statistic",
]

TWO_PI = 2 * np.pi
KINDS = ("standard", "randomized", "correlated")

RNG_ID = "numpy.PCG64(SeedSequence(seed, spawn_key=(realization,))), draws in unit order"
SAMPLER_ID = "rotated-permuted-roots-of-unity/v1"


@dataclass(frozen=True)
class PhaseProtocol:
    kind: str = "standard"
    G: int = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol {self.kind!r}, expected one of {KINDS}")
        if self.kind == "correlated":
            if self.G is None or int(self.G) != self.G or self.G <= 1:
                raise ValueError(f"correlated protocol needs an integer elimination size G > 1, got {self.G!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def is_random(self):
        return self.kind != "standard"

    def describe(self):
        return self.kind if self.kind != "correlated" else f"correlated(G={self.G})"


def realization_rng(seed, realization):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(realization),))
    return np.random.Generator(np.random.PCG64(ss))


def generate_phases(protocol, M, realization=0):
    """
    Unit phases ``Phi_m`` (radians, in [0, 2pi)) for one realization of ``protocol``.

    Raises
    ------
    ValueError
        For a correlated protocol with ``G > M``.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be a positive integer")
    if protocol.kind == "standard":
        return np.zeros(M)
    rng = realization_rng(protocol.seed, realization)
    if protocol.kind == "randomized":
        return TWO_PI * rng.random(M)

    G = int(protocol.G)
    if G > M:
        raise ValueError(f"elimination size G={G} exceeds the number of units M={M}")
    out = np.empty(M)
    roots = TWO_PI * np.arange(G) / G
    n_full = M // G
    for g in range(n_full):
        theta = TWO_PI * rng.random()
        out[g * G:(g + 1) * G] = np.mod(theta + roots, TWO_PI)[rng.permutation(G)]
    rem = M - n_full * G
    if rem:
        out[n_full * G:] = TWO_PI * rng.random(rem)
    return out


def generate_phase_matrix(protocol, M, realizations):
    """Stack ``generate_phases`` for realizations ``0..realizations-1`` into shape (R, M)."""
    return np.array([generate_phases(protocol, M, r) for r in range(int(realizations))]).reshape(-1, int(M))


def z_statistic(phases):
    """Normalized phase-factor sum ``(1/M) sum_m exp(-i Phi_m)``; works along the last axis."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape[-1:] == (0,) or phases.ndim == 0:
        raise ValueError("z_statistic needs at least one phase")
    return np.mean(np.exp(-1j * phases), axis=-1)
