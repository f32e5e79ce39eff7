"""Physical constants. Gyromagnetic ratios are stored in rad/(s*G)."""

import numpy as np

TWO_PI = 2 * np.pi

# 1H: gamma/2pi = 42.576 MHz/T = 4.2576 kHz/G (CODATA proton value, rounded)
GAMMA_1H = TWO_PI * 4.2576e3
# 13C: gamma/2pi = 10.705 MHz/T = 1.0705 kHz/G (tabulated NMR value)
GAMMA_13C = TWO_PI * 1.0705e3

GYROMAGNETIC = {"1H": GAMMA_1H, "13C": GAMMA_13C}
