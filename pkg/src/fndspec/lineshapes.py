"""Analytic lineshape kernels shared by the ESR and ODMR models.

Field-swept cw-ESR uses area-normalized Lorentzians and their first
field derivative (linear modulation regime).  ODMR dips use unit-peak
profiles so the dip depth maps directly onto contrast.

Width conventions:
  * gamma is the half width at half maximum (HWHM) of the absorption.
  * the peak-to-peak width of the first-derivative Lorentzian relates to
    gamma as gamma = (sqrt(3)/2) * dBpp.
  * unit-peak profiles take the full width at half maximum (FWHM).
"""
from __future__ import annotations

import numpy as np

_4LN2 = 4.0 * np.log(2.0)


def lorentzian_absorption(x, gamma):
    """Area-normalized Lorentzian, HWHM gamma."""
    return (gamma / np.pi) / (x * x + gamma * gamma)


def lorentzian_derivative(x, gamma):
    """First derivative of the area-normalized Lorentzian."""
    d = x * x + gamma * gamma
    return (-2.0 * gamma / np.pi) * x / (d * d)


def gaussian_dip(x, fwhm):
    """Unit-peak Gaussian profile."""
    return np.exp(-_4LN2 * (x / fwhm) ** 2)


def lorentzian_dip(x, fwhm):
    """Unit-peak Lorentzian profile."""
    half = 0.5 * fwhm
    return half * half / (x * x + half * half)
