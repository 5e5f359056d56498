"""Generate the packaged NV(-) / NV(0) reference emission lineshapes.

The shipped basis CSVs are model generated, not traced from a measured
curve: each charge state is built as a vibronic progression (zero-phonon
line plus Poisson-weighted phonon replicas) with parameters chosen to
reproduce the well-known room-temperature emission shapes, i.e. ZPLs at
637 nm / 575 nm and sideband maxima near 690 nm / 615 nm.  The model and
every parameter are recorded in the CSV headers so the provenance of the
basis is auditable.

Run from the repository root:

    python scripts/make_basis_spectra.py
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

EV_NM = 1239.84193  # photon energy (eV) * wavelength (nm)

GRID_NM = np.arange(550.0, 851.0, 1.0)

# zpl_ev: zero-phonon line energy; s: Huang-Rhys factor; phonon_ev:
# effective phonon energy; widths are Gaussian sigmas in eV.
PARAMS = {
    "nv_minus": dict(zpl_ev=EV_NM / 637.2, s=2.9, phonon_ev=0.060,
                     zpl_sigma_ev=0.008, psb_sigma_ev=0.030,
                     psb_sigma_growth_ev=0.012, n_replicas=12),
    "nv_zero": dict(zpl_ev=EV_NM / 575.1, s=2.6, phonon_ev=0.062,
                    zpl_sigma_ev=0.008, psb_sigma_ev=0.030,
                    psb_sigma_growth_ev=0.012, n_replicas=12),
}


def vibronic_lineshape(grid_nm, zpl_ev, s, phonon_ev, zpl_sigma_ev,
                       psb_sigma_ev, psb_sigma_growth_ev, n_replicas):
    energy = EV_NM / grid_nm
    out = np.zeros_like(grid_nm)
    for n in range(n_replicas + 1):
        weight = math.exp(-s) * s**n / math.factorial(n)
        center = zpl_ev - n * phonon_ev
        if n == 0:
            sigma = zpl_sigma_ev
        else:
            sigma = math.sqrt(psb_sigma_ev**2 + n * psb_sigma_growth_ev**2)
        out += weight * np.exp(-0.5 * ((energy - center) / sigma) ** 2)
    return out / out.max()


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "src" / "fndspec" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, params in PARAMS.items():
        shape = vibronic_lineshape(GRID_NM, **params)
        lines = [
            "# axis=wavelength_nm",
            f"# center={name}",
            "# provenance=model-generated vibronic progression (see scripts/make_basis_spectra.py)",
        ]
        for key, val in params.items():
            lines.append(f"# {key}={val}")
        for x, y in zip(GRID_NM, shape):
            lines.append(f"{x:.1f},{y:.6e}")
        path = out_dir / f"{name}_pl.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(GRID_NM)} points, max at "
              f"{GRID_NM[int(np.argmax(shape))]:.0f} nm)")


if __name__ == "__main__":
    main()
