"""Physical constants and unit conversions used across the package.

All spin Hamiltonians are expressed in MHz, magnetic fields in mT,
wavelengths in nm and delays in us.  The single load-bearing constant is
the Bohr magneton over Planck's constant, which converts field to
frequency for a given g-factor.
"""
from __future__ import annotations

import math

# Bohr magneton / Planck constant, GHz/T == MHz/mT.
MU_B_OVER_H_MHZ_PER_MT = 13.996245

# Peak-to-peak width of a first-derivative Lorentzian -> HWHM of the
# underlying absorption line: Gamma = (sqrt(3)/2) * dHpp.
PP_TO_HWHM = math.sqrt(3.0) / 2.0

# Gaussian FWHM -> standard deviation.
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def field_to_frequency_mhz(g: float, b_mt: float) -> float:
    """Electron Zeeman splitting in MHz for an isotropic g at field b_mt."""
    return g * MU_B_OVER_H_MHZ_PER_MT * b_mt


def frequency_to_field_mt(g: float, nu_mhz: float) -> float:
    """Resonance field in mT of a free spin-1/2 with isotropic g at nu_mhz."""
    return nu_mhz / (g * MU_B_OVER_H_MHZ_PER_MT)


def linewidth_mhz_to_mt(g: float, width_mhz: float) -> float:
    """Convert a linewidth quoted in MHz to field units using the species g."""
    return width_mhz / (g * MU_B_OVER_H_MHZ_PER_MT)


def linewidth_mt_to_mhz(g: float, width_mt: float) -> float:
    return width_mt * g * MU_B_OVER_H_MHZ_PER_MT
