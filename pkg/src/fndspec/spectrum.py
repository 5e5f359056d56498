"""Spectrum container, CSV interchange and basic axis operations.

A :class:`Spectrum` is a pair of equal-length 1-D arrays (axis, values)
plus an axis kind tag and free-form string metadata.  The axis is always
strictly increasing; loaders sort their input and reject duplicates.

The on-disk format is a plain CSV with ``# key=value`` comment headers::

    # axis=wavelength_nm
    # sample=ND140-NH2
    # laser_power_uW=100
    550.0,0.0132
    551.0,0.0140
    ...

Values are written with 12 significant digits so that a load/save/load
round trip is an identity.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

AXIS_KINDS = ("wavelength_nm", "field_mT", "frequency_MHz", "delay_us")
TERMINATIONS = ("as_received", "washed", "OH", "NH2")

# Default wavelength window for PL work, nm.
DEFAULT_PL_WINDOW = (600.0, 850.0)

_FLOAT_FMT = "%.12g"


class SpectrumFormatError(ValueError):
    """Raised when a spectrum file cannot be parsed."""


@dataclass
class Spectrum:
    """An immutable 1-D spectrum on a strictly increasing axis."""

    axis: NDArray[np.float64]
    values: NDArray[np.float64]
    axis_kind: str
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        axis = np.asarray(self.axis, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if axis.ndim != 1 or values.ndim != 1:
            raise ValueError("axis and values must be 1-D arrays")
        if axis.size != values.size:
            raise ValueError(
                f"axis has {axis.size} points but values has {values.size}"
            )
        if axis.size < 2:
            raise ValueError("a spectrum needs at least 2 points")
        if not np.all(np.isfinite(axis)) or not np.all(np.isfinite(values)):
            raise ValueError("axis and values must be finite")
        d = np.diff(axis)
        if np.any(d == 0.0):
            dup = axis[:-1][d == 0.0][0]
            raise ValueError(f"duplicate axis value {dup!r}")
        if np.any(d < 0.0):
            raise ValueError("axis must be strictly increasing")
        if self.axis_kind not in AXIS_KINDS:
            raise ValueError(
                f"unknown axis_kind {self.axis_kind!r}, expected one of {AXIS_KINDS}"
            )
        for k, v in self.metadata.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ValueError("metadata must map str to str")
        axis.setflags(write=False)
        values.setflags(write=False)
        self.axis = axis
        self.values = values

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            self.axis_kind == other.axis_kind
            and self.axis.shape == other.axis.shape
            and bool(np.all(self.axis == other.axis))
            and bool(np.all(self.values == other.values))
            and self.metadata == other.metadata
        )

    def window_mask(self, lo: float, hi: float) -> NDArray[np.bool_]:
        """Boolean mask of axis points inside [lo, hi]."""
        return (self.axis >= lo) & (self.axis <= hi)

    def with_values(self, values: NDArray[np.float64]) -> Spectrum:
        """Copy of this spectrum with replaced values."""
        return Spectrum(self.axis.copy(), np.asarray(values, dtype=np.float64),
                        self.axis_kind, dict(self.metadata))


_LABEL_RE = re.compile(r"^ND(\d+)(?:-(\w+))?$")
_SUFFIX_TO_TERMINATION = {None: "as_received", "W": "washed", "washed": "washed",
                          "OH": "OH", "NH2": "NH2"}


@dataclass
class SampleDescriptor:
    """Identity and bulk properties of one nanodiamond sample.

    Densities that the vendor does not quote are ``None``.
    """

    label: str
    diameter_nm: float
    termination: str = "as_received"
    nv_density_ppm: float | None = None
    nv_per_particle: float | None = None
    p1_density_ppm: float | None = None

    def __post_init__(self) -> None:
        if self.diameter_nm <= 0:
            raise ValueError(f"diameter_nm must be positive, got {self.diameter_nm}")
        if self.termination not in TERMINATIONS:
            raise ValueError(
                f"unknown termination {self.termination!r}, expected one of {TERMINATIONS}"
            )
        for name in ("nv_density_ppm", "nv_per_particle", "p1_density_ppm"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")

    @classmethod
    def from_label(cls, label: str, **overrides) -> SampleDescriptor:
        """Parse labels like ``ND140``, ``ND50-OH``, ``ND30-NH2``, ``ND90-W``."""
        m = _LABEL_RE.match(label.strip())
        if m is None:
            raise ValueError(f"cannot parse sample label {label!r}")
        suffix = m.group(2)
        if suffix not in _SUFFIX_TO_TERMINATION:
            raise ValueError(f"unknown termination suffix {suffix!r} in {label!r}")
        kwargs = dict(
            label=label.strip(),
            diameter_nm=float(m.group(1)),
            termination=_SUFFIX_TO_TERMINATION[suffix],
        )
        kwargs.update(overrides)
        return cls(**kwargs)


def load_spectrum(path: str | Path, axis_kind: str | None = None) -> Spectrum:
    """Load a spectrum from a ``# key=value`` headed CSV file.

    The axis kind comes from the ``axis_kind`` argument or, if that is
    None, from an ``# axis=...`` header line.  Supplying both with
    different values is an error: a silent unit mismatch is worse than a
    loud one.  Rows are sorted by axis value; duplicate axis values,
    malformed rows (reported with their line number), non-finite numbers
    and files with fewer than two points are rejected.
    """
    path = Path(path)
    metadata: dict[str, str] = {}
    axis_vals: list[float] = []
    values: list[float] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    metadata[key.strip()] = val.strip()
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SpectrumFormatError(
                    f"{path.name} line {lineno}: expected 'axis,value', got {line!r}"
                )
            try:
                x = float(parts[0])
                y = float(parts[1])
            except ValueError as exc:
                raise SpectrumFormatError(
                    f"{path.name} line {lineno}: {exc}"
                ) from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise SpectrumFormatError(
                    f"{path.name} line {lineno}: non-finite value"
                )
            axis_vals.append(x)
            values.append(y)

    header_kind = metadata.pop("axis", None)
    if axis_kind is None:
        axis_kind = header_kind
    elif header_kind is not None and header_kind != axis_kind:
        raise SpectrumFormatError(
            f"{path.name}: axis header {header_kind!r} contradicts requested {axis_kind!r}"
        )
    if axis_kind is None:
        raise SpectrumFormatError(
            f"{path.name}: no axis kind given and no '# axis=' header present"
        )

    if len(axis_vals) < 2:
        raise SpectrumFormatError(
            f"{path.name}: need at least 2 data points, got {len(axis_vals)}"
        )
    axis_arr = np.array(axis_vals)
    vals_arr = np.array(values)
    order = np.argsort(axis_arr, kind="stable")
    axis_arr = axis_arr[order]
    vals_arr = vals_arr[order]
    dup = np.diff(axis_arr) == 0.0
    if np.any(dup):
        raise SpectrumFormatError(
            f"{path.name}: duplicate axis value {axis_arr[:-1][dup][0]!r}"
        )
    return Spectrum(axis_arr, vals_arr, axis_kind, metadata)


def save_spectrum(spectrum: Spectrum, path: str | Path) -> None:
    """Write a spectrum in the CSV interchange format (see module docs)."""
    path = Path(path)
    lines = [f"# axis={spectrum.axis_kind}"]
    for key in sorted(spectrum.metadata):
        lines.append(f"# {key}={spectrum.metadata[key]}")
    for x, y in zip(spectrum.axis, spectrum.values):
        lines.append(f"{_FLOAT_FMT % x},{_FLOAT_FMT % y}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def resample(spectrum: Spectrum, grid: NDArray[np.float64]) -> Spectrum:
    """Linearly interpolate a spectrum onto a new strictly increasing grid.

    The grid must lie inside the source axis range; this function never
    extrapolates.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("resample grid must be 1-D with at least 2 points")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("resample grid must be strictly increasing")
    lo, hi = spectrum.axis[0], spectrum.axis[-1]
    if grid[0] < lo or grid[-1] > hi:
        raise ValueError(
            f"grid [{grid[0]}, {grid[-1]}] extends outside the source axis "
            f"range [{lo}, {hi}]"
        )
    new_vals = np.interp(grid, spectrum.axis, spectrum.values)
    return Spectrum(grid, new_vals, spectrum.axis_kind, dict(spectrum.metadata))


def normalize_to_unit_max(spectrum: Spectrum,
                          window: tuple[float, float] | None = None) -> Spectrum:
    """Scale the spectrum so its maximum inside ``window`` is exactly 1.

    ``window`` is an (lo, hi) pair in axis units; None means the whole
    axis.  The window must contain at least one point and the in-window
    maximum must be positive.
    """
    if window is None:
        mask = np.ones(spectrum.axis.size, dtype=bool)
    else:
        lo, hi = window
        mask = spectrum.window_mask(lo, hi)
    if not np.any(mask):
        raise ValueError(f"normalization window {window} contains no axis points")
    peak = float(np.max(spectrum.values[mask]))
    if peak <= 0.0:
        raise ValueError(f"in-window maximum is {peak}, cannot normalize")
    return spectrum.with_values(spectrum.values / peak)
