"""Decomposition of nanodiamond PL spectra into NV charge-state components.

A measured emission spectrum is modeled as a nonnegative superposition
of two fixed basis lineshapes,

    I(lambda) = a1 * I_nv_minus(lambda) + a2 * I_nv_zero(lambda),

and the charge-state fraction is the ratio of the integrated component
intensities.  The packaged basis pair is model generated (see
scripts/make_basis_spectra.py for the provenance record); any basis pair
on a shared wavelength axis can be substituted.

Because the measured spectrum is normalized to its in-window maximum
before the linear solve, the individual weights a1, a2 are only defined
up to that common scale factor.  The fraction is scale invariant.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .fitting import solve_nonneg_linear
from .spectrum import Spectrum, load_spectrum, normalize_to_unit_max, resample

# NV(-) phonon-sideband region used to normalize measured spectra, nm.
DEFAULT_NORMALIZATION_WINDOW = (640.0, 720.0)

_UNIT_MAX_TOL = 1e-9


@dataclass
class BasisPair:
    """Two nonnegative unit-maximum basis spectra on a shared axis."""

    nv_minus: Spectrum
    nv_zero: Spectrum

    def __post_init__(self) -> None:
        a, b = self.nv_minus, self.nv_zero
        for name, s in (("nv_minus", a), ("nv_zero", b)):
            if s.axis_kind != "wavelength_nm":
                raise ValueError(f"{name} axis_kind must be wavelength_nm")
            if np.any(s.values < 0.0):
                raise ValueError(f"{name} basis spectrum has negative values")
            if abs(float(np.max(s.values)) - 1.0) > _UNIT_MAX_TOL:
                raise ValueError(f"{name} basis spectrum is not unit maximum")
        if a.axis.size != b.axis.size or np.any(a.axis != b.axis):
            raise ValueError("basis spectra must share one axis")

    @property
    def axis(self) -> np.ndarray:
        return self.nv_minus.axis

    @classmethod
    def from_files(cls, nv_minus_path: str | Path,
                   nv_zero_path: str | Path) -> BasisPair:
        """Load a basis pair, resampling to the common axis overlap and
        normalizing each spectrum to unit maximum."""
        minus = load_spectrum(nv_minus_path, "wavelength_nm")
        zero = load_spectrum(nv_zero_path, "wavelength_nm")
        lo = max(minus.axis[0], zero.axis[0])
        hi = min(minus.axis[-1], zero.axis[-1])
        if lo >= hi:
            raise ValueError("basis spectra have no axis overlap")
        grid = minus.axis[(minus.axis >= lo) & (minus.axis <= hi)]
        minus = normalize_to_unit_max(resample(minus, grid))
        zero = normalize_to_unit_max(resample(zero, grid))
        return cls(minus, zero)

    @classmethod
    def load_default(cls) -> BasisPair:
        """The packaged model-generated reference basis."""
        data = resources.files("fndspec").joinpath("data")
        with resources.as_file(data.joinpath("nv_minus_pl.csv")) as p1, \
                resources.as_file(data.joinpath("nv_zero_pl.csv")) as p2:
            return cls.from_files(p1, p2)


@dataclass
class DecompositionResult:
    """Nonnegative component weights and the derived charge-state fraction."""

    a1: float
    a2: float
    f: float
    residual_norm: float

    def __post_init__(self) -> None:
        if self.a1 < 0.0 or self.a2 < 0.0:
            raise ValueError("component weights must be nonnegative")
        if not (0.0 <= self.f <= 1.0):
            raise ValueError(f"fraction {self.f} outside [0, 1]")


def nv_fraction(a1: float, a2: float, basis: BasisPair) -> float:
    """Fraction of emission carried by the NV(-) component.

    Component intensities are the weights times the trapezoidal integral
    of each basis spectrum over the shared axis.
    """
    if a1 < 0.0 or a2 < 0.0:
        raise ValueError("weights must be nonnegative")
    i_minus = float(np.trapezoid(basis.nv_minus.values, basis.axis))
    i_zero = float(np.trapezoid(basis.nv_zero.values, basis.axis))
    total = a1 * i_minus + a2 * i_zero
    if total <= 0.0:
        raise ValueError("both component intensities are zero")
    return a1 * i_minus / total


def decompose(
    measured: Spectrum,
    basis: BasisPair,
    normalization_window: tuple[float, float] = DEFAULT_NORMALIZATION_WINDOW,
) -> DecompositionResult:
    """Unmix a measured PL spectrum into the two basis components.

    The measured spectrum is resampled onto the part of the basis axis
    it covers, normalized to its maximum inside ``normalization_window``
    and decomposed by nonnegative linear least squares.
    """
    if measured.axis_kind != "wavelength_nm":
        raise ValueError("measured spectrum must be on a wavelength_nm axis")
    inside = (basis.axis >= measured.axis[0]) & (basis.axis <= measured.axis[-1])
    grid = basis.axis[inside]
    if grid.size < 2:
        raise ValueError("measured spectrum does not overlap the basis axis")
    resampled = resample(measured, grid)
    normalized = normalize_to_unit_max(resampled, normalization_window)
    design = np.column_stack([basis.nv_minus.values[inside],
                              basis.nv_zero.values[inside]])
    coeffs, residual_norm = solve_nonneg_linear(design, normalized.values)
    a1, a2 = float(coeffs[0]), float(coeffs[1])
    return DecompositionResult(
        a1=a1,
        a2=a2,
        f=nv_fraction(a1, a2, basis),
        residual_norm=residual_norm,
    )


def mix(basis: BasisPair, a1: float, a2: float) -> Spectrum:
    """Synthesize a1 * nv_minus + a2 * nv_zero on the basis axis."""
    values = a1 * basis.nv_minus.values + a2 * basis.nv_zero.values
    return Spectrum(basis.axis.copy(), values, "wavelength_nm")


def power_series_table(results):
    """Tabulate fractions by sample against laser power.

    ``results`` is an iterable of (SampleDescriptor, laser_power,
    DecompositionResult) triples.  Returns (header, rows) with one row
    per (termination, diameter) group, sorted, and one fraction column
    per distinct power; cells without a measurement are None.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to tabulate")
    powers = sorted({power for _, power, _ in results})
    groups: dict[tuple[str, float], dict[float, float]] = {}
    for descriptor, power, result in results:
        key = (descriptor.termination, descriptor.diameter_nm)
        groups.setdefault(key, {})[power] = result.f
    header = ["termination", "diameter_nm"] \
        + [f"f_{power:g}mW" for power in powers]
    rows = []
    for termination, diameter in sorted(groups):
        cells = groups[(termination, diameter)]
        rows.append([termination, diameter]
                    + [cells.get(power) for power in powers])
    return header, rows
