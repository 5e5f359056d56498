"""Magneto-optical characterization toolkit for fluorescent nanodiamonds.

Subpackages cover photoluminescence decomposition into NV charge-state
components, powder cw-ESR simulation and fitting, zero-field ODMR dip
fitting, and pulsed T1 relaxometry, all built on a shared spectrum
container and a small deterministic least-squares engine.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .spectrum import (  # noqa: F401
    AXIS_KINDS,
    SampleDescriptor,
    Spectrum,
    SpectrumFormatError,
    load_spectrum,
    normalize_to_unit_max,
    resample,
    save_spectrum,
)
from .fitting import (  # noqa: F401
    FitReport,
    ParameterEstimate,
    ParameterSpec,
    solve_nlls,
    solve_nonneg_linear,
)
from .pl import (  # noqa: F401
    BasisPair,
    DecompositionResult,
    decompose,
    mix,
    nv_fraction,
    power_series_table,
)
from .spinham import (  # noqa: F401
    ElectronSpinSystem,
    HyperfineTensor,
    ZfsParameters,
    build_hamiltonian,
    nv_zero_field_frequencies,
    resonance_fields,
)
from .esr import (  # noqa: F401
    EsrFitResult,
    EsrModel,
    SpeciesFit,
    fit_esr,
    isotropic_species,
    p1_species,
    simulate_cw_esr,
    species_weights,
)
from .odmr import OdmrFitResult, fit_odmr, model_odmr  # noqa: F401
from .relaxometry import (  # noqa: F401
    RelaxometrySequence,
    RelaxometryTrace,
    T1FitResult,
    contrast_signal,
    fit_t1,
    relaxation_rate,
    simulate_trace,
)
from .reference import esr_model, zero_field_row  # noqa: F401
