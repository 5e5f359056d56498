"""cw-ESR simulation and fitting tests."""
import numpy as np
import pytest

from fndspec.constants import (
    frequency_to_field_mt,
    linewidth_mhz_to_mt,
    linewidth_mt_to_mhz,
)
from fndspec.esr import (
    EsrFitResult,
    EsrModel,
    SpeciesFit,
    default_free_parameters,
    fit_esr,
    fit_result_to_dict,
    isotropic_species,
    model_from_dict,
    model_to_dict,
    p1_species,
    simulate_cw_esr,
    species_weights,
)
from fndspec.fitting import ParameterSpec
from fndspec.reference import esr_model, esr_row_labels
from fndspec.spectrum import Spectrum


def single_species_model(g=2.0029, width_mhz=1.0):
    return EsrModel(species=[isotropic_species(g, width_mhz, 1.0, label="only")])


def zero_crossing(spec):
    v, a = spec.values, spec.axis
    sl = slice(np.argmax(v), np.argmin(v) + 1)
    vv, aa = v[sl], a[sl]
    exact = np.nonzero(vv == 0.0)[0]
    if exact.size:
        return aa[exact[0]]
    idx = np.nonzero(np.sign(vv[:-1]) * np.sign(vv[1:]) < 0)[0][0]
    frac = vv[idx] / (vv[idx] - vv[idx + 1])
    return aa[idx] + frac * (aa[idx + 1] - aa[idx])


def outer_extrema(spec, frac=0.002):
    # 0.2% of max keeps the nitrogen perpendicular-edge features
    # (0.3-0.8% here) while rejecting quadrature ripple (< 0.01%)
    v, a = spec.values, spec.axis
    mag = np.abs(v)
    thresh = frac * mag.max()
    inner = v[1:-1]
    is_ext = ((inner > v[:-2]) & (inner > v[2:])) | ((inner < v[:-2]) & (inner < v[2:]))
    idx = np.nonzero(is_ext & (mag[1:-1] > thresh))[0] + 1
    return a[idx[0]], a[idx[-1]]


# ----------------------------------------------------------------- model


def test_model_validation():
    with pytest.raises(ValueError):
        EsrModel(species=[])
    with pytest.raises(ValueError):
        EsrModel(species=[isotropic_species(2.003, 1.0, 0.6),
                          isotropic_species(2.002, 1.0, 0.6)])
    with pytest.raises(ValueError):
        EsrModel(species=[p1_species(0.5, weight=0.5),
                          p1_species(0.5, weight=0.5, label="P1b")])
    with pytest.raises(ValueError):
        EsrModel(species=[isotropic_species(2.003, 1.0)], mw_frequency_ghz=-1.0)
    with pytest.raises(ValueError):
        EsrModel(species=[isotropic_species(2.003, 1.0)],
                 modulation_amplitude_g=0.0)


def test_reference_rows_well_formed():
    assert len(esr_row_labels()) == 8
    for label in esr_row_labels():
        model = esr_model(label)
        assert abs(sum(sp.weight for sp in model.species) - 1.0) < 1e-12
        with_nucleus = [sp for sp in model.species if sp.nuclear_spin is not None]
        assert len(with_nucleus) <= 1


# ------------------------------------------------------------- simulation


def test_zero_crossing_invariant_under_linewidth():
    b0 = frequency_to_field_mt(2.0029, 9400.0)
    axis = np.linspace(b0 - 3.0, b0 + 3.0, 6001)
    crossings = []
    for width in (0.4, 1.2, 3.0):
        spec = simulate_cw_esr(single_species_model(width_mhz=width), axis)
        crossings.append(zero_crossing(spec))
    for c in crossings:
        assert abs(c - b0) < 1e-6
    assert max(crossings) - min(crossings) < 1e-6


def test_peak_to_peak_distance_matches_linewidth():
    g, width_mhz = 2.0029, 8.0
    pp_mt = linewidth_mhz_to_mt(g, width_mhz)
    b0 = frequency_to_field_mt(g, 9400.0)
    axis = np.arange(b0 - 6.0 * pp_mt, b0 + 6.0 * pp_mt, pp_mt / 200.0)
    spec = simulate_cw_esr(single_species_model(g, width_mhz), axis)
    distance = axis[np.argmin(spec.values)] - axis[np.argmax(spec.values)]
    assert distance == pytest.approx(pp_mt, rel=0.01)


def test_two_species_model_is_average_of_singles():
    a = isotropic_species(2.0027, 1.2, 0.5, label="a")
    b = isotropic_species(2.0033, 0.7, 0.5, label="b")
    axis = np.linspace(330.0, 341.0, 2001)
    both = simulate_cw_esr(EsrModel(species=[a, b]), axis)
    only_a = simulate_cw_esr(EsrModel(
        species=[isotropic_species(2.0027, 1.2, 1.0, label="a")]), axis)
    only_b = simulate_cw_esr(EsrModel(
        species=[isotropic_species(2.0033, 0.7, 1.0, label="b")]), axis)
    mean = 0.5 * (only_a.values + only_b.values)
    assert np.allclose(both.values, mean, rtol=0.0, atol=1e-15 * np.abs(mean).max())


def test_nd140_outer_features():
    axis = np.linspace(325.0, 346.0, 2048)
    spec = simulate_cw_esr(esr_model("ND140"), axis)
    low, high = outer_extrema(spec)
    assert abs(low - 333.0) <= 1.0
    assert abs(high - 339.0) <= 1.0


def test_axis_too_narrow_raises():
    axis = np.linspace(330.0, 334.0, 200)
    with pytest.raises(ValueError):
        simulate_cw_esr(esr_model("ND140"), axis)


def test_first_integral_is_nonnegative_absorption():
    # symmetric generous axis and a step well under the linewidth keep
    # tail truncation and trapezoid error below the 1e-6 bound
    g, width_mhz = 2.0029, 0.056
    b0 = frequency_to_field_mt(g, 9400.0)
    pp_mt = linewidth_mhz_to_mt(g, width_mhz)
    axis = np.linspace(b0 - 6.0, b0 + 6.0, int(12.0 / (pp_mt / 300.0)))
    spec = simulate_cw_esr(single_species_model(g, width_mhz), axis)
    dx = np.diff(axis)
    absorption = np.concatenate(
        ([0.0], np.cumsum(0.5 * (spec.values[1:] + spec.values[:-1]) * dx)))
    assert absorption.min() >= -1e-6 * absorption.max()


def test_first_integral_nonnegative_p1_pattern():
    # hyperfine pattern on a coarser grid: quadrature error dominates,
    # so the bound is correspondingly looser
    model = EsrModel(species=[p1_species(0.419, 10.68, 3.01, 1.0)])
    b0 = frequency_to_field_mt(2.0024, 9400.0)
    axis = np.arange(b0 - 50.0, b0 + 50.0, 0.0013)
    spec = simulate_cw_esr(model, axis, n_orientations=128, strain_nodes=5)
    dx = axis[1] - axis[0]
    absorption = np.concatenate(
        ([0.0], np.cumsum(0.5 * (spec.values[1:] + spec.values[:-1]) * dx)))
    assert absorption.min() >= -1e-4 * absorption.max()


def test_double_integral_normalization():
    # every species component carries unit double integral times the
    # modulation scale, so double integrals compare as the weights do
    integrals = []
    for g, width in ((2.0027, 0.8), (2.0033, 0.45)):
        b0 = frequency_to_field_mt(g, 9400.0)
        axis = np.linspace(b0 - 8.0, b0 + 8.0, 40001)
        spec = simulate_cw_esr(single_species_model(g, width), axis)
        dx = axis[1] - axis[0]
        first = np.cumsum(spec.values) * dx
        integrals.append(np.sum(first) * dx)
    assert integrals[0] == pytest.approx(integrals[1], rel=0.01)
    assert integrals[0] == pytest.approx(0.02, rel=0.01)  # 0.2 G -> 0.02 mT


# ---------------------------------------------------------------- fitting


def fit_axis(model):
    # the axis has to resolve the narrowest derivative line or its peak
    # pair collapses into an aliased spike the fit cannot use
    step = min(0.0025, min(s.linewidth_pp_mt for s in model.species) / 8.0)
    return np.arange(329.0, 342.0, step)


def perturbed_template(label, g_shift=0.0003, factor=1.1):
    model = esr_model(label)
    species = []
    for sp in model.species:
        width_mhz = linewidth_mt_to_mhz(sp.g, sp.linewidth_pp_mt)
        if sp.nuclear_spin is not None:
            hf = sp.hyperfine
            species.append(p1_species(
                factor * width_mhz, factor * hf.strain_z_mhz,
                hf.strain_perp_mhz / factor, sp.weight, label=sp.label))
        else:
            species.append(isotropic_species(
                sp.g + g_shift, factor * width_mhz, sp.weight, label=sp.label))
    return EsrModel(species=species, mw_frequency_ghz=model.mw_frequency_ghz)


def test_fit_round_trip_nd90():
    truth = esr_model("ND90")
    axis = fit_axis(truth)
    measured = simulate_cw_esr(truth, axis, n_orientations=96, strain_nodes=5)
    template = perturbed_template("ND90")
    result = fit_esr(measured, template, n_orientations=96, strain_nodes=5)
    assert result.converged
    for sp in truth.species:
        row = result[sp.label or "P1"]
        assert row.g == pytest.approx(sp.g, abs=2e-4)
        assert row.dhpp_l_mhz == pytest.approx(
            linewidth_mt_to_mhz(sp.g, sp.linewidth_pp_mt), rel=0.02)
        assert row.weight == pytest.approx(sp.weight, abs=0.005)


def test_fit_weight_proportionality():
    truth = EsrModel(species=[isotropic_species(2.0027, 1.0, 0.25, label="a"),
                              isotropic_species(2.0035, 0.5, 0.75, label="b")])
    axis = np.arange(332.0, 339.0, 0.002)
    measured = simulate_cw_esr(truth, axis, n_orientations=32)
    template = EsrModel(species=[isotropic_species(2.0028, 1.1, 0.5, label="a"),
                                 isotropic_species(2.0034, 0.55, 0.5, label="b")])
    result = fit_esr(measured, template, n_orientations=32)
    weights = species_weights(result)
    assert weights["a"] == pytest.approx(0.25, abs=0.005)
    assert weights["b"] == pytest.approx(0.75, abs=0.005)


def test_fit_single_species_weight_is_one():
    axis = np.arange(333.0, 338.0, 0.002)
    measured = simulate_cw_esr(single_species_model(), axis, n_orientations=16)
    result = fit_esr(measured, single_species_model(), n_orientations=16)
    assert species_weights(result) == {"only": 1.0}


def test_fit_scale_invariance():
    truth = esr_model("ND140")
    axis = np.arange(329.0, 342.0, 0.004)
    measured = simulate_cw_esr(truth, axis, n_orientations=48, strain_nodes=3)
    template = perturbed_template("ND140")
    r1 = fit_esr(measured, template, n_orientations=48, strain_nodes=3)
    r2 = fit_esr(measured.with_values(5.0 * measured.values), template,
                 n_orientations=48, strain_nodes=3)
    for a, b in zip(r1.species, r2.species):
        assert b.g == pytest.approx(a.g, abs=1e-9)
        assert b.dhpp_l_mhz == pytest.approx(a.dhpp_l_mhz, rel=1e-9)
        assert b.weight == pytest.approx(a.weight, abs=1e-9)
    assert r2.amplitude == pytest.approx(5.0 * r1.amplitude, rel=1e-9)


def test_fit_noisy_round_trip_weights():
    truth = esr_model("ND140")
    axis = np.arange(330.0, 341.0, 0.004)
    clean = simulate_cw_esr(truth, axis, n_orientations=48, strain_nodes=3)
    scale = np.abs(clean.values).max()
    rng = np.random.default_rng(20)
    template = perturbed_template("ND140")
    true_weights = {sp.label: sp.weight for sp in truth.species}
    worst = 0.0
    for _ in range(20):
        noisy = clean.with_values(
            clean.values + 0.02 * scale * rng.standard_normal(axis.size))
        result = fit_esr(noisy, template, n_orientations=48, strain_nodes=3,
                         max_iterations=40)
        for row in result.species:
            worst = max(worst, abs(row.weight - true_weights[row.label]))
    assert worst < 0.05


def test_fit_rejects_all_zero():
    axis = np.arange(330.0, 341.0, 0.01)
    zero = Spectrum(axis, np.zeros_like(axis), "field_mT")
    with pytest.raises(ValueError):
        fit_esr(zero, esr_model("ND140"))


def test_fit_rejects_wrong_axis_kind():
    spec = Spectrum(np.linspace(600.0, 700.0, 50), np.ones(50), "wavelength_nm")
    with pytest.raises(ValueError):
        fit_esr(spec, esr_model("ND140"))


def test_species_weights_requires_convergence():
    rows = [SpeciesFit("only", 2.003, None, 1.0, None, None, 1.0)]
    result = EsrFitResult(rows, 1.0, False, "did not converge", 1.0)
    with pytest.raises(ValueError):
        species_weights(result)


def test_default_free_parameters_protocol():
    names = [s.name for s in default_free_parameters(esr_model("ND140"))]
    assert "P1.dHpp_L_MHz" in names
    assert "P1.strain_z_MHz" in names
    assert "P1.strain_perp_MHz" in names
    assert "P1.g" not in names
    assert "broad.g" in names and "narrow.g" in names


# ------------------------------------------------------------------- JSON


def test_model_json_round_trip():
    model = esr_model("ND140")
    data = model_to_dict(model)
    rebuilt = model_from_dict(data)
    assert model_to_dict(rebuilt) == data
    assert [sp.label for sp in rebuilt.species] == ["P1", "broad", "narrow"]


def test_model_from_dict_accepts_mhz_widths():
    data = {"species": [{"label": "x", "g": 2.003, "dHpp_L_MHz": 1.4,
                         "weight": 1.0}]}
    model = model_from_dict(data)
    assert model.species[0].linewidth_pp_mt == pytest.approx(
        linewidth_mhz_to_mt(2.003, 1.4), rel=1e-12)
    with pytest.raises(ValueError):
        model_from_dict({"species": [{"label": "x", "g": 2.003, "weight": 1.0}]})
    with pytest.raises(ValueError):
        model_from_dict({})


def test_fit_result_json():
    axis = np.arange(333.0, 338.0, 0.002)
    measured = simulate_cw_esr(single_species_model(), axis, n_orientations=16)
    result = fit_esr(measured, single_species_model(), n_orientations=16)
    data = fit_result_to_dict(result)
    assert data["converged"] is True
    assert data["species"][0]["label"] == "only"
    assert data["species"][0]["weight"] == 1.0
    assert "g_sigma" in data["species"][0]