"""Zero-field cw-ODMR dip model and D/E extraction.

At zero static field the two allowed transitions of an S = 1 center sit
at D - E and D + E, so the spectrum is a pair of contrast dips placed
symmetrically about D, each carrying half the total contrast:

    baseline * (1 - (contrast / 2) * (L(nu - (D - E)) + L(nu - (D + E))))

with L a unit-peak Gaussian (default, ensembles are inhomogeneously
broadened) or Lorentzian of shared FWHM.  Hyperfine substructure is far
below the ~10 MHz ensemble linewidths and is not modeled, and a single
effective E stands in for whatever E distribution the ensemble carries.

``fit_odmr`` seeds the refinement from smoothed dip positions.  The
model is even in E, which makes E = 0 a stationary point of the
residual norm; when only one dip is resolved the initial E is therefore
set to a small positive fraction of the dip width instead of zero, and
the fit is free to fall back to the E = 0 axis if the data wants it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitting import ParameterSpec, solve_nlls
from .lineshapes import gaussian_dip, lorentzian_dip
from .spectrum import Spectrum
from .spinham import ZfsParameters

PROFILES = {"gaussian": gaussian_dip, "lorentzian": lorentzian_dip}

_SMOOTH_POINTS = 5
# a candidate dip must undercut the baseline by this many noise sigmas
_DIP_SIGNIFICANCE = 3.0


@dataclass
class OdmrFitResult:
    """Zero-field splitting parameters extracted from one spectrum."""

    d_mhz: float
    d_sigma: float | None
    e_mhz: float
    e_sigma: float | None
    linewidth_mhz: float
    contrast: float
    baseline: float
    profile: str
    residual_norm: float

    def __post_init__(self) -> None:
        if self.e_mhz < 0.0:
            raise ValueError(f"E must be nonnegative, got {self.e_mhz}")
        if not 0.0 < self.contrast <= 1.0:
            raise ValueError(f"contrast must be in (0, 1], got {self.contrast}")
        if self.linewidth_mhz <= 0.0:
            raise ValueError(f"linewidth must be positive, got {self.linewidth_mhz}")

    def dip_frequencies(self) -> tuple[float, float]:
        """The fitted dip positions (D - E, D + E), MHz."""
        return self.d_mhz - self.e_mhz, self.d_mhz + self.e_mhz


def _profile(name: str):
    if name not in PROFILES:
        raise ValueError(
            f"unknown profile {name!r}, expected one of {tuple(PROFILES)}")
    return PROFILES[name]


def _dip_pair(axis, d, e, linewidth, contrast, baseline, shape):
    return baseline * (1.0 - 0.5 * contrast * (shape(axis - (d - e), linewidth)
                                               + shape(axis - (d + e), linewidth)))


def model_odmr(zfs: ZfsParameters, linewidth_mhz: float, contrast: float,
               baseline: float, freq_axis, profile: str = "gaussian") -> Spectrum:
    """Synthetic zero-field ODMR spectrum on the given frequency axis."""
    shape = _profile(profile)
    if linewidth_mhz <= 0.0:
        raise ValueError(f"linewidth must be positive, got {linewidth_mhz}")
    if not 0.0 < contrast <= 1.0:
        raise ValueError(f"contrast must be in (0, 1], got {contrast}")
    if baseline <= 0.0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    axis = np.asarray(freq_axis, dtype=np.float64)
    values = _dip_pair(axis, zfs.d_mhz, zfs.e_mhz, linewidth_mhz,
                       contrast, baseline, shape)
    return Spectrum(axis, values, "frequency_MHz")


def _smoothed(values: np.ndarray) -> np.ndarray:
    """Running mean over _SMOOTH_POINTS, ends padded by reflection."""
    n = _SMOOTH_POINTS
    half = n // 2
    padded = np.concatenate([values[half:0:-1], values, values[-2:-2 - half:-1]])
    return np.convolve(padded, np.full(n, 1.0 / n), mode="valid")


def _noise_sigma(values: np.ndarray) -> float:
    # successive differences cancel the smooth part; the median absolute
    # difference of white noise is 0.6745 * sigma * sqrt(2)
    d = np.diff(values)
    return float(np.median(np.abs(d))) / (0.6745 * np.sqrt(2.0))


def _half_depth_halfwidth(axis, smooth, i, base) -> float:
    """Half width of the dip at index i, measured at half its depth."""
    half_level = 0.5 * (base + smooth[i])
    left = i
    while left > 0 and smooth[left] < half_level:
        left -= 1
    right = i
    while right < smooth.size - 1 and smooth[right] < half_level:
        right += 1
    step = axis[1] - axis[0]
    return max(0.5 * (axis[right] - axis[left]), step)


def _initial_guess(measured: Spectrum):
    """(D0, E0, linewidth0, contrast0, baseline0) from smoothed minima."""
    axis, values = measured.axis, measured.values
    smooth = _smoothed(values)
    base = float(np.percentile(smooth, 90.0))
    sigma = _noise_sigma(values)
    floor = base - _DIP_SIGNIFICANCE * sigma

    interior = np.arange(1, smooth.size - 1)
    is_min = (smooth[interior] < smooth[interior - 1]) \
        & (smooth[interior] <= smooth[interior + 1])
    minima = interior[is_min & (smooth[interior] < floor)]
    if minima.size == 0:
        raise ValueError(
            "no dip detected: no local minimum undercuts the baseline "
            f"by {_DIP_SIGNIFICANCE:g} noise sigmas")

    order = minima[np.argsort(smooth[minima])]
    first = order[0]
    halfwidth = _half_depth_halfwidth(axis, smooth, first, base)

    # two dips are distinct only when separated by at least twice the
    # half-width guess; anything closer is one merged feature
    second = None
    for j in order[1:]:
        if abs(axis[j] - axis[first]) >= 2.0 * halfwidth:
            second = j
            break

    depth = (base - smooth[first]) / base
    if second is not None:
        d0 = 0.5 * (axis[first] + axis[second])
        e0 = 0.5 * abs(axis[second] - axis[first])
        contrast0 = 2.0 * depth
    else:
        d0 = float(axis[first])
        # nonzero so the refinement is not started on the even-symmetry axis
        e0 = 0.5 * halfwidth
        contrast0 = depth
    contrast0 = min(max(contrast0, 1e-3), 1.0)
    return d0, e0, 2.0 * halfwidth, contrast0, base


def fit_odmr(measured: Spectrum, profile: str = "gaussian") -> OdmrFitResult:
    """Fit the symmetric two-dip model and return D, E and dip shape.

    Raises ValueError when the axis is not a frequency axis or no dip
    undercuts the baseline significantly, RuntimeError when the
    refinement fails to converge.
    """
    shape = _profile(profile)
    if measured.axis_kind != "frequency_MHz":
        raise ValueError(
            f"ODMR fit needs a frequency_MHz axis, got {measured.axis_kind!r}")
    if measured.axis.size < 4 * _SMOOTH_POINTS:
        raise ValueError(
            f"need at least {4 * _SMOOTH_POINTS} points, got {measured.axis.size}")

    axis, y = measured.axis, measured.values
    d0, e0, lw0, c0, base0 = _initial_guess(measured)
    span = float(axis[-1] - axis[0])
    step = float(axis[1] - axis[0])

    def residual(p):
        return _dip_pair(axis, p[0], p[1], p[2], p[3], p[4], shape) - y

    specs = [
        ParameterSpec("D_MHz", d0, axis[0], axis[-1]),
        ParameterSpec("E_MHz", min(e0, 0.5 * span), 0.0, 0.5 * span),
        ParameterSpec("linewidth_MHz", min(lw0, span), step, span),
        ParameterSpec("contrast", c0, 1e-6, 1.0),
        ParameterSpec("baseline", base0, 0.0, np.inf),
    ]
    report = solve_nlls(residual, specs)
    if not report.converged:
        raise RuntimeError(f"ODMR fit did not converge: {report.message}")
    d = report["D_MHz"]
    e = report["E_MHz"]
    return OdmrFitResult(
        d_mhz=d.value, d_sigma=d.sigma,
        e_mhz=e.value, e_sigma=e.sigma,
        linewidth_mhz=report["linewidth_MHz"].value,
        contrast=report["contrast"].value,
        baseline=report["baseline"].value,
        profile=profile,
        residual_norm=report.residual_norm,
    )


def odmr_result_to_dict(result: OdmrFitResult) -> dict:
    return {
        "D_MHz": result.d_mhz,
        "D_sigma": result.d_sigma,
        "E_MHz": result.e_mhz,
        "E_sigma": result.e_sigma,
        "linewidth_MHz": result.linewidth_mhz,
        "contrast": result.contrast,
        "profile": result.profile,
        "residual_norm": result.residual_norm,
    }
