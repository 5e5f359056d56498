"""Static SVG views of spectra and aggregated trends.

Plots are derived views only: nothing here feeds back into a fit or a
result file.  matplotlib is imported lazily so the numerical modules
stay usable without a plotting stack, and the SVG writer is pinned to a
fixed hash salt and no date stamp so reruns produce stable files.
"""
from __future__ import annotations

from pathlib import Path

from .spectrum import Spectrum

_AXIS_LABELS = {
    "wavelength_nm": "wavelength (nm)",
    "field_mT": "magnetic field (mT)",
    "frequency_MHz": "microwave frequency (MHz)",
    "delay_us": "delay (µs)",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fndspec"
    return plt


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    _pyplot().close(fig)
    return path


def overlay_svg(path: str | Path, measured: Spectrum, fitted: Spectrum,
                title: str = "") -> Path:
    """Measured data with the fitted curve drawn over it."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(measured.axis, measured.values, ".", ms=3, color="0.4",
            label="measured")
    ax.plot(fitted.axis, fitted.values, "-", lw=1.5, color="crimson",
            label="fitted")
    ax.set_xlabel(_AXIS_LABELS.get(measured.axis_kind, measured.axis_kind))
    ax.set_ylabel("intensity (arb.)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def spectrum_svg(path: str | Path, spectrum: Spectrum, title: str = "") -> Path:
    """A single simulated or measured spectrum."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(spectrum.axis, spectrum.values, "-", lw=1.0, color="navy")
    ax.set_xlabel(_AXIS_LABELS.get(spectrum.axis_kind, spectrum.axis_kind))
    ax.set_ylabel("intensity (arb.)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def trend_svg(path: str | Path, f_points, rate_points) -> Path:
    """Size trends: NV(-) fraction, and relaxation rate on a log axis.

    Both point lists hold (diameter_nm, value) pairs; either may be
    empty, in which case its panel just stays blank.
    """
    plt = _pyplot()
    fig, (ax_f, ax_r) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    if f_points:
        d, f = zip(*f_points)
        ax_f.plot(d, f, "o", color="seagreen")
    ax_f.set_xlabel("diameter (nm)")
    ax_f.set_ylabel("NV(-) fraction")
    ax_f.set_ylim(0.0, 1.0)
    if rate_points:
        d, r = zip(*rate_points)
        ax_r.semilogy(d, r, "s", color="navy")
    else:
        ax_r.set_yscale("log")
    ax_r.set_xlabel("diameter (nm)")
    ax_r.set_ylabel("1/T1 (Hz)")
    fig.tight_layout()
    return _save(fig, path)
