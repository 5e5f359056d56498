"""Field-modulated cw-ESR simulation and fitting.

A spectrum is modeled as a weighted superposition of species components:
a nitrogen (P1) center with resolved hyperfine structure plus isotropic
S = 1/2 lines.  Each component is the powder absorption of that species
differentiated analytically with respect to field, i.e. the linear
(small-modulation) limit of field modulation; the output amplitude
scales with the modulation amplitude and is otherwise arbitrary.

Conventions used throughout:
  * linewidths are Lorentzian peak-to-peak widths quoted in MHz and
    converted to field units with that species' own g factor;
  * species weights are double-integral fractions, which equal the
    fitted nonnegative amplitude fractions because every component is
    normalized to unit double integral before weighting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import (
    MU_B_OVER_H_MHZ_PER_MT,
    PP_TO_HWHM,
    linewidth_mhz_to_mt,
    linewidth_mt_to_mhz,
)
from .fitting import FitReport, ParameterSpec, solve_nlls, solve_nonneg_linear
from .lineshapes import lorentzian_derivative
from .spectrum import Spectrum
from .spinham import (
    DEFAULT_ORIENTATION_COUNT,
    DEFAULT_STRAIN_NODES,
    ElectronSpinSystem,
    HyperfineTensor,
    _powder_sticks,
    _stick_spectrum,
)

P1_G_FACTOR = 2.0024
P1_AZZ_MHZ = 115.0
P1_APERP_MHZ = 82.0

_WEIGHT_SUM_TOL = 1e-9
_AXIS_MARGIN_LINEWIDTHS = 5.0


def p1_species(
    linewidth_pp_mhz: float,
    strain_z_mhz: float = 0.0,
    strain_perp_mhz: float = 0.0,
    weight: float = 1.0,
    g: float = P1_G_FACTOR,
    azz_mhz: float = P1_AZZ_MHZ,
    aperp_mhz: float = P1_APERP_MHZ,
    label: str = "P1",
) -> ElectronSpinSystem:
    """Substitutional nitrogen: S = 1/2 coupled to the I = 1 nitrogen."""
    return ElectronSpinSystem(
        s=0.5,
        g=g,
        linewidth_pp_mt=linewidth_mhz_to_mt(g, linewidth_pp_mhz),
        weight=weight,
        nuclear_spin=1.0,
        hyperfine=HyperfineTensor(aperp_mhz, aperp_mhz, azz_mhz,
                                  strain_z_mhz, strain_perp_mhz),
        label=label,
    )


def isotropic_species(
    g: float, linewidth_pp_mhz: float, weight: float = 1.0, label: str = ""
) -> ElectronSpinSystem:
    """Structureless S = 1/2 line (the broad and narrow centers)."""
    return ElectronSpinSystem(
        s=0.5,
        g=g,
        linewidth_pp_mt=linewidth_mhz_to_mt(g, linewidth_pp_mhz),
        weight=weight,
        label=label,
    )


@dataclass
class EsrModel:
    """Weighted multi-species model of one cw-ESR spectrum."""

    species: list[ElectronSpinSystem]
    mw_frequency_ghz: float = 9.4
    modulation_amplitude_g: float = 0.2

    def __post_init__(self) -> None:
        if not self.species:
            raise ValueError("model needs at least one species")
        if self.mw_frequency_ghz <= 0.0:
            raise ValueError("microwave frequency must be positive")
        if self.modulation_amplitude_g <= 0.0:
            raise ValueError("modulation amplitude must be positive")
        total = sum(sp.weight for sp in self.species)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"species weights sum to {total}, expected 1")
        with_nucleus = sum(sp.nuclear_spin is not None for sp in self.species)
        if with_nucleus > 1:
            raise ValueError("at most one species may carry a hyperfine nucleus")

    def labels(self) -> list[str]:
        names = [sp.label or f"species{k}" for k, sp in enumerate(self.species)]
        if len(set(names)) != len(names):
            raise ValueError(f"species labels are not unique: {names}")
        return names


def _component(system, nu_mhz, axis, n_orientations, strain_nodes, cache=None):
    """Unit-double-integral derivative component of one species.

    Sticks and convolved columns are cached separately: the stick set
    does not depend on the linewidth, so width-only updates skip the
    diagonalization entirely.
    """
    hf = system.hyperfine
    hf_key = None if hf is None else (hf.axx_mhz, hf.ayy_mhz, hf.azz_mhz,
                                      hf.strain_z_mhz, hf.strain_perp_mhz)
    stick_key = ("sticks", system.g, hf_key, n_orientations, strain_nodes)
    axis = np.asarray(axis, dtype=np.float64)
    col_key = ("column", system.g, system.linewidth_pp_mt, hf_key,
               n_orientations, strain_nodes,
               axis.size, float(axis[0]), float(axis[-1]))
    if cache is not None and col_key in cache:
        return cache[col_key]
    if cache is not None and stick_key in cache:
        positions, weights = cache[stick_key]
    else:
        positions, weights = _powder_sticks(system, nu_mhz, n_orientations,
                                            strain_nodes)
        if cache is not None:
            cache[stick_key] = (positions, weights)
    gamma = PP_TO_HWHM * system.linewidth_pp_mt
    values = _stick_spectrum(axis, positions, weights, gamma,
                             lorentzian_derivative)
    out = (positions, values)
    if cache is not None:
        cache[col_key] = out
    return out


def simulate_cw_esr(
    model: EsrModel,
    field_axis,
    n_orientations: int = DEFAULT_ORIENTATION_COUNT,
    strain_nodes: int = DEFAULT_STRAIN_NODES,
) -> Spectrum:
    """First-derivative powder spectrum of the model on field_axis (mT).

    Raises when any species resonates more than five of its linewidths
    outside the axis, which would silently truncate that component.
    """
    axis = np.asarray(field_axis, dtype=np.float64)
    if axis.ndim != 1 or axis.size < 2 or np.any(np.diff(axis) <= 0.0):
        raise ValueError("field_axis must be a strictly increasing 1-D array")
    nu_mhz = model.mw_frequency_ghz * 1000.0
    labels = model.labels()
    total = np.zeros_like(axis)
    for system, label in zip(model.species, labels):
        positions, values = _component(system, nu_mhz, axis,
                                       n_orientations, strain_nodes)
        if positions.size == 0:
            raise ValueError(f"species '{label}' has no resonance")
        margin = _AXIS_MARGIN_LINEWIDTHS * system.linewidth_pp_mt
        if positions.min() < axis[0] - margin or positions.max() > axis[-1] + margin:
            raise ValueError(
                f"field axis [{axis[0]}, {axis[-1]}] mT too narrow: species "
                f"'{label}' resonates at {positions.min():.2f}-"
                f"{positions.max():.2f} mT"
            )
        total += system.weight * values
    # linear modulation regime: amplitude proportional to modulation, 1 G = 0.1 mT
    total *= model.modulation_amplitude_g * 0.1
    return Spectrum(axis, total, "field_mT")


# ----------------------------------------------------------------- fitting

_P_G = "g"
_P_WIDTH = "dHpp_L_MHz"
_P_STRAIN_Z = "strain_z_MHz"
_P_STRAIN_PERP = "strain_perp_MHz"


def default_free_parameters(model: EsrModel) -> list[ParameterSpec]:
    """Fitting protocol: all linewidths free; g free for structureless
    species only; hyperfine strain free where a nucleus is present."""
    specs: list[ParameterSpec] = []
    for system, label in zip(model.species, model.labels()):
        width = linewidth_mt_to_mhz(system.g, system.linewidth_pp_mt)
        specs.append(ParameterSpec(f"{label}.{_P_WIDTH}", width,
                                   lower=1e-5, upper=50.0))
        if system.nuclear_spin is None:
            specs.append(ParameterSpec(f"{label}.{_P_G}", system.g,
                                       lower=1.95, upper=2.05))
        else:
            hf = system.hyperfine
            specs.append(ParameterSpec(f"{label}.{_P_STRAIN_Z}",
                                       hf.strain_z_mhz, lower=0.0, upper=50.0))
            specs.append(ParameterSpec(f"{label}.{_P_STRAIN_PERP}",
                                       hf.strain_perp_mhz, lower=0.0, upper=50.0))
    return specs


@dataclass
class SpeciesFit:
    """One fitted species row: g, linewidth, strain widths, weight."""

    label: str
    g: float
    g_sigma: float | None
    dhpp_l_mhz: float
    strain_z_mhz: float | None
    strain_perp_mhz: float | None
    weight: float


@dataclass
class EsrFitResult:
    species: list[SpeciesFit]
    residual_norm: float
    converged: bool
    message: str
    amplitude: float
    report: FitReport | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        total = sum(row.weight for row in self.species)
        if any(row.weight < 0.0 for row in self.species):
            raise ValueError("species weights must be nonnegative")
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"fitted weights sum to {total}, expected 1")
        if any(row.dhpp_l_mhz <= 0.0 for row in self.species):
            raise ValueError("fitted linewidths must be positive")

    def __getitem__(self, label: str) -> SpeciesFit:
        for row in self.species:
            if row.label == label:
                return row
        raise KeyError(label)


def species_weights(result: EsrFitResult) -> dict[str, float]:
    """Normalized double-integral weight per species of a converged fit."""
    if not result.converged:
        raise ValueError("weights are only meaningful for a converged fit")
    return {row.label: row.weight for row in result.species}


def _updated_species(system, values, label):
    """Copy of system with fitted parameter values applied."""
    g = values.get(f"{label}.{_P_G}", system.g)
    width = values.get(f"{label}.{_P_WIDTH}",
                       linewidth_mt_to_mhz(system.g, system.linewidth_pp_mt))
    hyperfine = system.hyperfine
    if hyperfine is not None:
        hyperfine = HyperfineTensor(
            hyperfine.axx_mhz, hyperfine.ayy_mhz, hyperfine.azz_mhz,
            values.get(f"{label}.{_P_STRAIN_Z}", hyperfine.strain_z_mhz),
            values.get(f"{label}.{_P_STRAIN_PERP}", hyperfine.strain_perp_mhz),
        )
    return ElectronSpinSystem(
        s=system.s, g=g,
        linewidth_pp_mt=linewidth_mhz_to_mt(g, width),
        weight=system.weight, nuclear_spin=system.nuclear_spin,
        hyperfine=hyperfine, zfs=system.zfs, label=system.label,
    )


def _rescue_zeroed_centers(specs, template, labels, design_matrix, y, axis,
                           nu_mhz):
    """Realign free centers that the nonnegative stage zeroes at start.

    A species whose line sits more than about a linewidth from its true
    position anti-correlates with the data, gets amplitude zero, and
    then has no gradient left to move through.  Its center is instead
    read off the strongest derivative feature of the current residual
    (the midpoint of the residual's extrema), widest species first.
    """
    free = {s.name for s in specs if not s.fixed}
    values = {s.name: s.initial for s in specs}
    design = design_matrix(values)
    amplitudes, _ = solve_nonneg_linear(design, y)
    zeroed = [k for k, a_k in enumerate(amplitudes)
              if a_k == 0.0 and f"{labels[k]}.{_P_G}" in free]
    if not zeroed:
        return specs
    zeroed.sort(key=lambda k: -template.species[k].linewidth_pp_mt)
    by_name = {s.name: s for s in specs}
    for k in zeroed:
        r = y - design @ amplitudes
        b_star = 0.5 * (axis[np.argmax(r)] + axis[np.argmin(r)])
        name = f"{labels[k]}.{_P_G}"
        old = by_name[name]
        g_new = min(max(nu_mhz / (MU_B_OVER_H_MHZ_PER_MT * b_star),
                        old.lower), old.upper)
        by_name[name] = replace(old, initial=g_new)
        values[name] = g_new
        design = design_matrix(values)
        amplitudes, _ = solve_nonneg_linear(design, y)
    return [by_name[s.name] for s in specs]


def _assign_identities(template, labels, specs, rows):
    """Reassign fitted rows to the template slots they best match.

    Two structureless species whose centers nearly coincide make the
    model symmetric under exchange, so the optimizer can return their
    parameter sets in either order.  Within each group of same-spin,
    same-protocol structureless species, permute the fitted sets so
    each lands on the template species with the closest linewidth and
    center, keeping every species' identity tied to the template.
    """
    free_suffixes: dict[str, set] = {}
    for s in specs:
        if s.fixed:
            continue
        label, _, suffix = s.name.rpartition(".")
        free_suffixes.setdefault(label, set()).add(suffix)
    groups: dict[tuple, list[int]] = {}
    for k, (system, label) in enumerate(zip(template.species, labels)):
        if system.nuclear_spin is not None:
            continue
        key = (system.s, frozenset(free_suffixes.get(label, ())))
        groups.setdefault(key, []).append(k)
    out = list(rows)
    for idx in groups.values():
        if len(idx) < 2:
            continue
        inits = [(template.species[k].g,
                  linewidth_mt_to_mhz(template.species[k].g,
                                      template.species[k].linewidth_pp_mt))
                 for k in idx]

        def cost(perm):
            c = 0.0
            for (g0, w0), j in zip(inits, perm):
                c += (abs(math.log(rows[j].dhpp_l_mhz / w0))
                      + abs(rows[j].g - g0) / 0.01)
            return c

        for k, j in zip(idx, min(itertools.permutations(idx), key=cost)):
            out[k] = replace(rows[j], label=labels[k])
    return out


def fit_esr(
    measured: Spectrum,
    template: EsrModel,
    free_parameters: list[ParameterSpec] | None = None,
    n_orientations: int = 256,
    strain_nodes: int = DEFAULT_STRAIN_NODES,
    max_iterations: int = 100,
) -> EsrFitResult:
    """Fit the multi-species model to a measured derivative spectrum.

    Separable least squares: the nonlinear engine varies shape
    parameters (linewidths, center g factors, hyperfine strain) while
    the species amplitudes are re-solved at every step by nonnegative
    linear least squares.  Weights are the normalized amplitudes.
    """
    if measured.axis_kind != "field_mT":
        raise ValueError(f"expected a field_mT spectrum, got {measured.axis_kind}")
    y = measured.values
    if np.abs(y).max() == 0.0:
        raise ValueError("measured spectrum is identically zero")
    labels = template.labels()
    specs = free_parameters if free_parameters is not None \
        else default_free_parameters(template)
    names = [s.name for s in specs]
    nu_mhz = template.mw_frequency_ghz * 1000.0
    axis = measured.axis
    mod_scale = template.modulation_amplitude_g * 0.1
    cache: dict = {}

    def design_matrix(values: dict[str, float]) -> np.ndarray:
        cols = []
        for system, label in zip(template.species, labels):
            current = _updated_species(system, values, label)
            _, comp = _component(current, nu_mhz, axis, n_orientations,
                                 strain_nodes, cache=cache)
            cols.append(mod_scale * comp)
        return np.column_stack(cols)

    def residual(p: np.ndarray) -> np.ndarray:
        design = design_matrix(dict(zip(names, p)))
        amplitudes, _ = solve_nonneg_linear(design, y)
        return design @ amplitudes - y

    specs = _rescue_zeroed_centers(specs, template, labels, design_matrix, y,
                                   axis, nu_mhz)
    # Stage the solve when hyperfine strain is free.  The strain basin
    # is narrow and sits on a nearly flat shelf, and the nucleus
    # linewidth is nearly degenerate with the amplitude mix in the
    # crowded center, so a plain joint solve can park in a secondary
    # minimum with both off.  Settle the well-determined parameters
    # first, locate the (linewidth, strain) basin with a coarse grid
    # sweep, then release everything from there.
    strain_free = {
        s.name for s in specs if not s.fixed
        and s.name.endswith((_P_STRAIN_Z, _P_STRAIN_PERP))
    }
    if strain_free:
        by_name = {s.name: s for s in specs}
        nuc_label = next(iter(strain_free)).rsplit(".", 1)[0]
        width_name = f"{nuc_label}.{_P_WIDTH}"
        held_names = set(strain_free)
        if width_name in by_name and not by_name[width_name].fixed:
            held_names.add(width_name)
        held = [replace(s, fixed=True) if s.name in held_names else s
                for s in specs]
        warm = solve_nlls(residual, held, rel_tol=1e-8,
                          max_iterations=max_iterations)
        values = warm.values()

        sub_axis = axis[::4]
        sub_y = y[::4]

        def sweep_residual(vals: dict[str, float]) -> float:
            cols = []
            for system, label in zip(template.species, labels):
                current = _updated_species(system, vals, label)
                _, comp = _component(current, nu_mhz, sub_axis,
                                     n_orientations, strain_nodes,
                                     cache=cache)
                cols.append(mod_scale * comp)
            design = np.column_stack(cols)
            amplitudes, _ = solve_nonneg_linear(design, sub_y)
            return float(np.linalg.norm(design @ amplitudes - sub_y))

        def strain_grid(name: str) -> np.ndarray:
            spec_ = by_name[name]
            v0 = values[name]
            if v0 > 0.0:
                grid = v0 * np.linspace(0.1, 1.9, 16)
            else:
                grid = np.linspace(max(spec_.lower, 0.0),
                                   min(spec_.upper, 25.0), 16)
            return np.append(np.clip(grid, spec_.lower, spec_.upper), v0)

        z_first = sorted(strain_free, key=lambda n: not n.endswith(_P_STRAIN_Z))
        first, rest = z_first[0], z_first[1:]
        if width_name in held_names:
            width_grid = values[width_name] * np.linspace(0.85, 1.15, 7)
        else:
            width_grid = [None]
        best_vals, best_r = dict(values), np.inf
        for w in width_grid:
            for c in strain_grid(first):
                trial = dict(values, **{first: float(c)})
                if w is not None:
                    trial[width_name] = float(w)
                r = sweep_residual(trial)
                if r < best_r:
                    best_vals, best_r = trial, r
        for name in rest:
            base, best_r = dict(best_vals), np.inf
            for c in strain_grid(name):
                trial = dict(base, **{name: float(c)})
                r = sweep_residual(trial)
                if r < best_r:
                    best_vals, best_r = trial, r
        # Fine pass on the z strain.  The quadrature nodes of model and
        # data form alignment minima ("teeth") about 0.3 MHz apart in
        # the z strain, and a descent that starts in the wrong tooth
        # drags the nucleus linewidth a few percent off as it
        # compensates.  Resolve the teeth around the current best point.
        z_name = first if first.endswith(_P_STRAIN_Z) else None

        def tooth_pass(vals, z_span, z_points, w_frac, w_points):
            spec_ = by_name[z_name]
            fine = np.clip(vals[z_name] + np.linspace(-z_span, z_span,
                                                      z_points),
                           spec_.lower, spec_.upper)
            if width_name in held_names:
                fine_w = vals[width_name] * np.linspace(1.0 - w_frac,
                                                        1.0 + w_frac,
                                                        w_points)
            else:
                fine_w = [None]
            picked, picked_r = dict(vals), np.inf
            for c in fine:
                for w in fine_w:
                    trial = dict(vals, **{z_name: float(c)})
                    if w is not None:
                        trial[width_name] = float(w)
                    r = sweep_residual(trial)
                    if r < picked_r:
                        picked, picked_r = trial, r
            return picked

        if z_name is not None:
            best_vals = tooth_pass(best_vals, 1.0, 21, 0.05, 7)
        specs = [replace(s, initial=best_vals[s.name]) for s in specs]
        report = solve_nlls(residual, specs, rel_tol=1e-8,
                            max_iterations=max_iterations)
        # The solve refines the other parameters, which can expose a
        # deeper tooth than the sweep saw; alternate a tooth pass with
        # a re-solve until the tooth choice is stable.
        for _ in range(3):
            if z_name is None:
                break
            current = report.values()
            repicked = tooth_pass(current, 0.8, 17, 0.04, 5)
            if abs(repicked[z_name] - current[z_name]) < 1e-9:
                break
            specs = [replace(s, initial=repicked[s.name]) for s in specs]
            report = solve_nlls(residual, specs, rel_tol=1e-8,
                                max_iterations=max_iterations)
    else:
        report = solve_nlls(residual, specs, rel_tol=1e-8,
                            max_iterations=max_iterations)
    best = report.values()
    design = design_matrix(best)
    amplitudes, _ = solve_nonneg_linear(design, y)
    total = amplitudes.sum()
    converged = bool(report.converged and total > 0.0)
    message = report.message if total > 0.0 else "all species amplitudes vanished"
    if total <= 0.0:
        # keep a well-formed report even when the linear stage collapses
        weights = np.full(len(labels), 1.0 / len(labels))
    else:
        weights = amplitudes / total

    rows = []
    for k, (system, label) in enumerate(zip(template.species, labels)):
        fitted = _updated_species(system, best, label)
        g_est = report.parameters.get(f"{label}.{_P_G}")
        hf = fitted.hyperfine
        rows.append(SpeciesFit(
            label=label,
            g=fitted.g,
            g_sigma=None if g_est is None else g_est.sigma,
            dhpp_l_mhz=linewidth_mt_to_mhz(fitted.g, fitted.linewidth_pp_mt),
            strain_z_mhz=None if hf is None else hf.strain_z_mhz,
            strain_perp_mhz=None if hf is None else hf.strain_perp_mhz,
            weight=float(weights[k]),
        ))
    rows = _assign_identities(template, labels, specs, rows)
    return EsrFitResult(
        species=rows,
        residual_norm=report.residual_norm,
        converged=converged,
        message=message,
        amplitude=float(total),
        report=report,
    )


# ------------------------------------------------------------------- JSON


def model_to_dict(model: EsrModel) -> dict:
    """JSON-ready description mirroring the species table columns."""
    species = []
    for system, label in zip(model.species, model.labels()):
        entry: dict = {
            "label": label,
            "g": system.g,
            "S": system.s,
            "dHpp_L_MHz": linewidth_mt_to_mhz(system.g, system.linewidth_pp_mt),
            "weight": system.weight,
        }
        if system.hyperfine is not None:
            hf = system.hyperfine
            entry["nucleus"] = {
                "I": system.nuclear_spin,
                "Axx": hf.axx_mhz, "Ayy": hf.ayy_mhz, "Azz": hf.azz_mhz,
                "strain_z": hf.strain_z_mhz, "strain_perp": hf.strain_perp_mhz,
            }
        species.append(entry)
    return {
        "mw_frequency_GHz": model.mw_frequency_ghz,
        "modulation_amplitude_G": model.modulation_amplitude_g,
        "species": species,
    }


def model_from_dict(data: dict) -> EsrModel:
    """Inverse of model_to_dict; widths accepted in MHz or mT."""
    if "species" not in data or not isinstance(data["species"], list):
        raise ValueError("model definition needs a 'species' list")
    species = []
    for k, entry in enumerate(data["species"]):
        g = float(entry["g"])
        if "linewidth_pp_mT" in entry:
            width_mt = float(entry["linewidth_pp_mT"])
        elif "dHpp_L_MHz" in entry:
            width_mt = linewidth_mhz_to_mt(g, float(entry["dHpp_L_MHz"]))
        else:
            raise ValueError(
                f"species {k}: needs linewidth_pp_mT or dHpp_L_MHz"
            )
        nucleus = entry.get("nucleus")
        hyperfine = None
        nuclear_spin = None
        if nucleus is not None:
            nuclear_spin = float(nucleus["I"])
            hyperfine = HyperfineTensor(
                float(nucleus["Axx"]), float(nucleus["Ayy"]),
                float(nucleus["Azz"]),
                float(nucleus.get("strain_z", 0.0)),
                float(nucleus.get("strain_perp", 0.0)),
            )
        species.append(ElectronSpinSystem(
            s=float(entry.get("S", 0.5)),
            g=g,
            linewidth_pp_mt=width_mt,
            weight=float(entry.get("weight", 1.0 / len(data["species"]))),
            nuclear_spin=nuclear_spin,
            hyperfine=hyperfine,
            label=str(entry.get("label", f"species{k}")),
        ))
    return EsrModel(
        species=species,
        mw_frequency_ghz=float(data.get("mw_frequency_GHz", 9.4)),
        modulation_amplitude_g=float(data.get("modulation_amplitude_G", 0.2)),
    )


def fit_result_to_dict(result: EsrFitResult) -> dict:
    """JSON-ready fit report mirroring the species table columns."""
    species = []
    for row in result.species:
        entry: dict = {
            "label": row.label,
            "g": row.g,
            "dHpp_L_MHz": row.dhpp_l_mhz,
            "weight": row.weight,
        }
        if row.g_sigma is not None:
            entry["g_sigma"] = row.g_sigma
        if row.strain_z_mhz is not None:
            entry["A_strain_MHz"] = [row.strain_z_mhz, row.strain_perp_mhz]
        species.append(entry)
    return {
        "converged": result.converged,
        "message": result.message,
        "residual_norm": result.residual_norm,
        "amplitude": result.amplitude,
        "species": species,
    }
