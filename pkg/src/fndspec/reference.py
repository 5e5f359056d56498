"""Bundled reference values for the milled nanodiamond size series.

Fitted cw-ESR species parameters, zero-field splitting parameters and
spin-lattice relaxation times for the ND10-ND140 samples in their
as-received, hydroxylated (-OH) and aminated (-NH2) states, plus basic
sample properties.  The tables serve as simulation defaults, fit
starting points and regression baselines for the rest of the package.

ESR linewidths and strain are quoted in MHz (peak-to-peak, Lorentzian);
weights are double-integral fractions.  A few published weight triples
sum to 0.9999 or 1.0001 from rounding; ``esr_model`` renormalizes them.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .esr import EsrModel, isotropic_species, p1_species
from .spectrum import SampleDescriptor

SAMPLES: dict[str, SampleDescriptor] = {
    "ND10": SampleDescriptor("ND10", 10.0, nv_density_ppm=1.0,
                             nv_per_particle=1.5),
    "ND30": SampleDescriptor("ND30", 30.0, nv_density_ppm=2.0,
                             nv_per_particle=5.5),
    "ND40": SampleDescriptor("ND40", 40.0, nv_density_ppm=2.0,
                             nv_per_particle=13.0, p1_density_ppm=2.0),
    "ND50": SampleDescriptor("ND50", 50.0, nv_density_ppm=3.0,
                             nv_per_particle=23.0, p1_density_ppm=4.0),
    "ND70": SampleDescriptor("ND70", 70.0, nv_density_ppm=3.0,
                             nv_per_particle=95.0, p1_density_ppm=4.8),
    "ND90": SampleDescriptor("ND90", 90.0, nv_density_ppm=3.0,
                             nv_per_particle=200.0),
    "ND140": SampleDescriptor("ND140", 140.0, nv_density_ppm=3.0,
                              nv_per_particle=385.0, p1_density_ppm=8.0),
}

# cw-ESR species rows: (dHpp_L MHz, strain_z MHz, strain_perp MHz, weight)
# for the nitrogen center, (g, dHpp_L MHz, weight) for the two isotropic
# centers.  None means the row resolves no nitrogen signal.
ESR_ROWS: dict[str, dict] = {
    "ND30": {
        "P1": None,
        "broad": (2.0030, 1.002, 0.8749),
        "narrow": (2.0029, 0.006, 0.1251),
    },
    "ND30-NH2": {
        "P1": None,
        "broad": (2.0030, 1.187, 0.9231),
        "narrow": (2.0029, 0.349, 0.0768),
    },
    "ND70": {
        "P1": (0.710, 10.68, 7.03, 0.0022),
        "broad": (2.0030, 1.174, 0.9103),
        "narrow": (2.0028, 0.388, 0.0875),
    },
    "ND70-NH2": {
        "P1": (0.775, 10.68, 5.54, 0.0024),
        "broad": (2.0030, 1.610, 0.9109),
        "narrow": (2.0028, 0.712, 0.0867),
    },
    "ND90": {
        "P1": (0.691, 10.68, 7.35, 0.0257),
        "broad": (2.0028, 1.103, 0.7665),
        "narrow": (2.0027, 0.306, 0.2078),
    },
    "ND90-NH2": {
        "P1": (0.717, 10.68, 5.21, 0.0768),
        "broad": (2.0030, 1.261, 0.7473),
        "narrow": (2.0029, 0.348, 0.1760),
    },
    "ND140": {
        "P1": (0.419, 10.68, 3.01, 0.1074),
        "broad": (2.0030, 1.308, 0.7503),
        "narrow": (2.0029, 0.356, 0.1423),
    },
    "ND140-NH2": {
        "P1": (0.481, 10.68, 1.65, 0.1185),
        "broad": (2.0030, 1.457, 0.7265),
        "narrow": (2.0029, 0.362, 0.1550),
    },
}


@dataclass(frozen=True)
class ZeroFieldRow:
    """Zero-field splitting and relaxation time of one sample state."""

    d_mhz: float
    e_mhz: float
    t1_us: float


# (sample label, termination) -> zero-field/relaxation parameters
ZERO_FIELD_ROWS: dict[tuple[str, str], ZeroFieldRow] = {
    ("ND10", "as_received"): ZeroFieldRow(2867.5, 8.0, 8.0),
    ("ND10", "OH"): ZeroFieldRow(2865.7, 8.6, 11.0),
    ("ND10", "NH2"): ZeroFieldRow(2867.5, 8.0, 31.0),
    ("ND30", "as_received"): ZeroFieldRow(2868.5, 7.3, 25.0),
    ("ND30", "OH"): ZeroFieldRow(2869.0, 7.2, 39.0),
    ("ND30", "NH2"): ZeroFieldRow(2868.5, 7.1, 21.0),
    ("ND40", "as_received"): ZeroFieldRow(2869.4, 7.3, 32.0),
    ("ND40", "OH"): ZeroFieldRow(2868.7, 5.8, 34.0),
    ("ND40", "NH2"): ZeroFieldRow(2870.2, 6.8, 16.0),
    ("ND50", "as_received"): ZeroFieldRow(2870.0, 7.3, 27.0),
    ("ND50", "OH"): ZeroFieldRow(2870.0, 5.5, 46.0),
    ("ND50", "NH2"): ZeroFieldRow(2869.7, 6.8, 18.0),
    ("ND70", "as_received"): ZeroFieldRow(2870.0, 6.8, 32.0),
    ("ND70", "OH"): ZeroFieldRow(2870.5, 6.2, 40.0),
    ("ND70", "NH2"): ZeroFieldRow(2870.5, 6.0, 42.0),
    ("ND90", "as_received"): ZeroFieldRow(2870.5, 6.4, 64.0),
    ("ND90", "OH"): ZeroFieldRow(2869.5, 5.6, 38.0),
    ("ND90", "NH2"): ZeroFieldRow(2869.4, 5.7, 24.0),
    ("ND140", "as_received"): ZeroFieldRow(2870.3, 5.7, 74.0),
    ("ND140", "OH"): ZeroFieldRow(2870.5, 4.5, 83.0),
    ("ND140", "NH2"): ZeroFieldRow(2870.0, 5.0, 32.0),
}


def esr_row_labels() -> list[str]:
    return list(ESR_ROWS)


def esr_model(label: str, mw_frequency_ghz: float = 9.4) -> EsrModel:
    """Three-species (or two-species) model for one tabulated sample."""
    if label not in ESR_ROWS:
        raise KeyError(f"no ESR reference row for {label!r}; "
                       f"known: {', '.join(ESR_ROWS)}")
    row = ESR_ROWS[label]
    species = []
    if row["P1"] is not None:
        width, strain_z, strain_perp, weight = row["P1"]
        species.append(p1_species(width, strain_z, strain_perp, weight))
    for name in ("broad", "narrow"):
        g, width, weight = row[name]
        species.append(isotropic_species(g, width, weight, label=name))
    total = sum(sp.weight for sp in species)
    if abs(total - 1.0) > 1e-12:
        species = [replace(sp, weight=sp.weight / total) for sp in species]
    return EsrModel(species=species, mw_frequency_ghz=mw_frequency_ghz)


def zero_field_row(label: str, termination: str | None = None) -> ZeroFieldRow:
    """Zero-field parameters by sample label, e.g. ND90 or ND50-OH."""
    if termination is None:
        descriptor = SampleDescriptor.from_label(label)
        base = f"ND{descriptor.diameter_nm:g}"
        termination = descriptor.termination
    else:
        base = label
    key = (base, termination)
    if key not in ZERO_FIELD_ROWS:
        raise KeyError(f"no zero-field reference row for {key}")
    return ZERO_FIELD_ROWS[key]


def zero_field_labels() -> list[tuple[str, str]]:
    return list(ZERO_FIELD_ROWS)
