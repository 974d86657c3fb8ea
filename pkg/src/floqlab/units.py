"""Unit conventions shared across the package.

Configuration values carry ordinary (cycle) frequencies: qubit and cavity
frequencies in GHz, couplings/field strengths/detunings in MHz, loss rates in
kHz, times in microseconds.  Hamiltonian builders convert to angular units
internally (rad/us), so a value of 1 MHz corresponds to 2*pi rad/us and
frequency*time products are phases without stray 2*pi factors.
"""

import math

TWO_PI = 2.0 * math.pi

GHZ_TO_MHZ = 1.0e3
KHZ_TO_MHZ = 1.0e-3

# irrational frequency-ratio surrogate used for incommensurate drives
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


def angular(freq_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular rate in rad/us."""
    return TWO_PI * freq_mhz


def rate_from_khz(rate_khz: float) -> float:
    """Loss rate quoted in kHz (cycle units) -> angular rate in 1/us."""
    return TWO_PI * rate_khz * KHZ_TO_MHZ
