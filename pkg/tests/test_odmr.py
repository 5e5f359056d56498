import numpy as np
import pytest

from fndspec.odmr import (
    OdmrFitResult,
    fit_odmr,
    model_odmr,
    odmr_result_to_dict,
)
from fndspec.reference import zero_field_labels, zero_field_row
from fndspec.spectrum import Spectrum
from fndspec.spinham import ZfsParameters


def freq_axis(center=2870.0, halfspan=50.0, step=0.2):
    return np.arange(center - halfspan, center + halfspan + step / 2, step)


def synthetic(d, e, linewidth=5.0, contrast=0.15, baseline=1.0,
              profile="gaussian", step=0.2):
    return model_odmr(ZfsParameters(d, e), linewidth, contrast, baseline,
                      freq_axis(step=step), profile=profile)


# ------------------------------------------------------------------ model


def test_model_merged_dip_has_full_contrast():
    spec = synthetic(2870.0, 0.0, linewidth=6.0, contrast=0.2)
    i = np.argmin(spec.values)
    assert spec.axis[i] == pytest.approx(2870.0, abs=0.2)
    assert spec.values.min() == pytest.approx(0.8, abs=1e-12)


def test_model_well_separated_dip_positions():
    spec = synthetic(2870.0, 7.0, linewidth=1.0)
    v = spec.values
    idx = np.nonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:]))[0] + 1
    assert idx.size == 2
    assert spec.axis[idx[0]] == pytest.approx(2863.0, abs=0.2)
    assert spec.axis[idx[1]] == pytest.approx(2877.0, abs=0.2)


def test_model_symmetric_about_d():
    axis = np.linspace(2840.0, 2900.0, 601)  # symmetric about 2870
    for profile in ("gaussian", "lorentzian"):
        spec = model_odmr(ZfsParameters(2870.0, 5.3), 7.7, 0.31, 2.4,
                          axis, profile=profile)
        assert np.allclose(spec.values, spec.values[::-1], atol=1e-14)


def test_model_rejects_bad_inputs():
    with pytest.raises(ValueError):
        synthetic(2870.0, 5.0, linewidth=0.0)
    with pytest.raises(ValueError):
        synthetic(2870.0, 5.0, contrast=0.0)
    with pytest.raises(ValueError):
        synthetic(2870.0, 5.0, contrast=1.5)
    with pytest.raises(ValueError):
        synthetic(2870.0, 5.0, baseline=-1.0)
    with pytest.raises(ValueError):
        synthetic(2870.0, 5.0, profile="voigt")


# -------------------------------------------------------------------- fit


def test_fit_round_trip_noiseless():
    spec = synthetic(2870.5, 4.5)
    result = fit_odmr(spec)
    assert result.d_mhz == pytest.approx(2870.5, abs=1e-6)
    assert result.e_mhz == pytest.approx(4.5, abs=1e-6)
    assert result.linewidth_mhz == pytest.approx(5.0, rel=1e-6)
    assert result.contrast == pytest.approx(0.15, rel=1e-6)
    assert result.baseline == pytest.approx(1.0, rel=1e-6)
    assert result.dip_frequencies() == pytest.approx((2866.0, 2875.0), abs=1e-5)


def test_fit_round_trip_all_reference_rows():
    for key in zero_field_labels():
        row = zero_field_row(*key)
        result = fit_odmr(synthetic(row.d_mhz, row.e_mhz))
        assert result.d_mhz == pytest.approx(row.d_mhz, abs=0.05), key
        assert result.e_mhz == pytest.approx(row.e_mhz, abs=0.05), key


def test_fit_lorentzian_profile_round_trip():
    spec = synthetic(2868.0, 6.1, profile="lorentzian")
    result = fit_odmr(spec, profile="lorentzian")
    assert result.profile == "lorentzian"
    assert result.d_mhz == pytest.approx(2868.0, abs=1e-5)
    assert result.e_mhz == pytest.approx(6.1, abs=1e-5)


def test_fit_noisy_round_trip():
    clean = synthetic(2870.0, 5.5)
    rng = np.random.default_rng(7)
    for _ in range(20):
        noisy = clean.with_values(
            clean.values * (1.0 + 0.01 * rng.standard_normal(clean.axis.size)))
        result = fit_odmr(noisy)
        assert result.d_mhz == pytest.approx(2870.0, abs=0.2)
        assert result.e_mhz == pytest.approx(5.5, abs=0.3)


def test_fit_merged_dips_returns_small_e():
    # generator E far below the linewidth: the pair is one feature and
    # the fitted E must come back consistent with zero
    spec = synthetic(2870.0, 0.0, linewidth=8.0)
    result = fit_odmr(spec)
    assert result.d_mhz == pytest.approx(2870.0, abs=0.05)
    assert result.e_mhz < 0.5
    assert result.linewidth_mhz == pytest.approx(8.0, rel=0.02)


def test_fit_invariant_under_scale_and_offset():
    spec = synthetic(2869.4, 5.7)
    r0 = fit_odmr(spec)
    scaled = spec.with_values(3.5 * spec.values)
    shifted = spec.with_values(spec.values + 0.25)
    for other in (scaled, shifted):
        r = fit_odmr(other)
        assert r.d_mhz == pytest.approx(r0.d_mhz, abs=1e-6)
        assert r.e_mhz == pytest.approx(r0.e_mhz, abs=1e-6)
    assert fit_odmr(scaled).baseline == pytest.approx(3.5 * r0.baseline, rel=1e-6)


def test_fit_flat_spectrum_raises():
    axis = freq_axis()
    flat = Spectrum(axis, np.ones_like(axis), "frequency_MHz")
    with pytest.raises(ValueError, match="no dip"):
        fit_odmr(flat)


def test_fit_rejects_wrong_axis_kind():
    axis = np.linspace(300.0, 400.0, 100)
    with pytest.raises(ValueError, match="frequency"):
        fit_odmr(Spectrum(axis, np.ones(100), "field_mT"))


def test_result_validates_invariants():
    with pytest.raises(ValueError):
        OdmrFitResult(2870.0, None, -1.0, None, 5.0, 0.1, 1.0, "gaussian", 0.0)
    with pytest.raises(ValueError):
        OdmrFitResult(2870.0, None, 5.0, None, 5.0, 0.0, 1.0, "gaussian", 0.0)
    with pytest.raises(ValueError):
        OdmrFitResult(2870.0, None, 5.0, None, 0.0, 0.1, 1.0, "gaussian", 0.0)


def test_result_dict_keys():
    result = fit_odmr(synthetic(2870.0, 7.3))
    data = odmr_result_to_dict(result)
    assert sorted(data) == ["D_MHz", "D_sigma", "E_MHz", "E_sigma",
                            "contrast", "linewidth_MHz", "profile",
                            "residual_norm"]
    assert data["D_MHz"] == pytest.approx(2870.0, abs=1e-5)
    assert data["E_MHz"] == pytest.approx(7.3, abs=1e-5)
    assert data["D_sigma"] is None or data["D_sigma"] >= 0.0
