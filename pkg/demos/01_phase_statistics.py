"""
Phase protocols and the random-walk statistic Z.

Randomized unit phases make Z a 2-D random walk with <|Z|^2> = 1/M.
Correlated phases cancel exactly inside every complete group of G units.
"""
import numpy as np

from ddsim.phases import PhaseProtocol, generate_phase_matrix, generate_phases, z_statistic

# one realization of each protocol for M = 6
for proto in (PhaseProtocol("standard"), PhaseProtocol("randomized", seed=0),
              PhaseProtocol("correlated", 2, seed=0), PhaseProtocol("correlated", 3, seed=0)):
    ph = generate_phases(proto, 6)
    print(f"{proto.describe():>16s}  phases/pi = {np.round(ph / np.pi, 3)}  |Z| = {abs(z_statistic(ph)):.2e}")

# <|Z|^2> against 1/M
print()
for M in (2, 6, 24):
    z2 = np.abs(z_statistic(generate_phase_matrix(PhaseProtocol("randomized", seed=1), M, 100_000))) ** 2
    print(f"M = {M:2d}: <|Z|^2> = {z2.mean():.5f} +/- {z2.std(ddof=1) / np.sqrt(z2.size):.5f}, 1/M = {1 / M:.5f}")

# a partial trailing group is left unconstrained
ph = generate_phase_matrix(PhaseProtocol("correlated", 3, seed=1), 7, 10_000)
print(f"\nG = 3, M = 7: mean |M Z| = {np.mean(np.abs(7 * z_statistic(ph))):.3f} (one free unit left over)")
