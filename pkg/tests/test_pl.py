from __future__ import annotations

import numpy as np
import pytest

from fndspec.pl import (
    BasisPair,
    DecompositionResult,
    decompose,
    mix,
    nv_fraction,
    power_series_table,
)
from fndspec.spectrum import SampleDescriptor, Spectrum, resample

# frozen output of scripts/integral_oracle.py (independent plain-Python
# trapezoid sum over the packaged basis CSVs)
ORACLE_INTEGRAL_MINUS = 105.8473890557346
ORACLE_INTEGRAL_ZERO = 80.58201940106156
ORACLE_EQUAL_WEIGHT_FRACTION = 0.5677612235746812


@pytest.fixture(scope="module")
def basis():
    return BasisPair.load_default()


class TestBasisPair:
    def test_default_basis_shape(self, basis):
        assert basis.nv_minus.axis_kind == "wavelength_nm"
        assert np.array_equal(basis.nv_minus.axis, basis.nv_zero.axis)
        assert np.max(basis.nv_minus.values) == pytest.approx(1.0, abs=1e-12)
        assert np.max(basis.nv_zero.values) == pytest.approx(1.0, abs=1e-12)
        assert np.all(basis.nv_minus.values >= 0.0)
        assert np.all(basis.nv_zero.values >= 0.0)

    def test_zpl_positions(self, basis):
        # charge-state identity check: NV(-) ZPL near 637 nm, NV(0) near 575 nm
        def local_peaks(spectrum, lo, hi):
            v = spectrum.values
            is_peak = np.zeros_like(v, dtype=bool)
            is_peak[1:-1] = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
            return basis.axis[is_peak & spectrum.window_mask(lo, hi)]

        minus_zpl = local_peaks(basis.nv_minus, 630.0, 645.0)
        zero_zpl = local_peaks(basis.nv_zero, 568.0, 582.0)
        assert minus_zpl.size == 1 and abs(minus_zpl[0] - 637.0) < 3.0
        assert zero_zpl.size == 1 and abs(zero_zpl[0] - 575.0) < 3.0

    def test_mismatched_axes_rejected(self, basis):
        shifted = Spectrum(basis.axis + 1.0, basis.nv_zero.values,
                           "wavelength_nm")
        with pytest.raises(ValueError, match="share"):
            BasisPair(basis.nv_minus, shifted)

    def test_negative_basis_rejected(self, basis):
        bad = basis.nv_zero.with_values(basis.nv_zero.values - 0.5)
        with pytest.raises(ValueError, match="negative|unit"):
            BasisPair(basis.nv_minus, bad)


class TestNvFraction:
    def test_equal_weights_match_independent_oracle(self, basis):
        f = nv_fraction(1.0, 1.0, basis)
        assert f == pytest.approx(ORACLE_EQUAL_WEIGHT_FRACTION, rel=1e-12)

    def test_integrals_match_independent_oracle(self, basis):
        i_minus = np.trapezoid(basis.nv_minus.values, basis.axis)
        i_zero = np.trapezoid(basis.nv_zero.values, basis.axis)
        assert i_minus == pytest.approx(ORACLE_INTEGRAL_MINUS, rel=1e-12)
        assert i_zero == pytest.approx(ORACLE_INTEGRAL_ZERO, rel=1e-12)

    def test_pure_components(self, basis):
        assert nv_fraction(1.0, 0.0, basis) == 1.0
        assert nv_fraction(0.0, 1.0, basis) == 0.0

    def test_monotone_in_a1(self, basis):
        fs = [nv_fraction(a1, 0.5, basis) for a1 in np.linspace(0.05, 2.0, 15)]
        assert np.all(np.diff(fs) > 0.0)

    def test_both_zero_rejected(self, basis):
        with pytest.raises(ValueError, match="zero"):
            nv_fraction(0.0, 0.0, basis)


class TestDecompose:
    def test_round_trip_on_basis_axis(self, basis):
        measured = mix(basis, 0.3, 0.7)
        result = decompose(measured, basis)
        # weights recovered up to the normalization scale; ratio and f exact
        assert result.a1 / result.a2 == pytest.approx(0.3 / 0.7, rel=1e-8)
        expected_f = nv_fraction(0.3, 0.7, basis)
        assert result.f == pytest.approx(expected_f, abs=1e-8)
        assert result.residual_norm < 1e-10

    def test_round_trip_many_weights(self, basis):
        rng = np.random.default_rng(21)
        for _ in range(20):
            a1, a2 = rng.uniform(0.05, 1.0, 2)
            result = decompose(mix(basis, a1, a2), basis)
            assert result.f == pytest.approx(nv_fraction(a1, a2, basis),
                                             abs=1e-8)

    def test_scale_invariance_is_exact(self, basis):
        measured = mix(basis, 0.4, 0.6)
        scaled = measured.with_values(measured.values * 137.5)
        r1 = decompose(measured, basis)
        r2 = decompose(scaled, basis)
        assert r1.f == r2.f  # bitwise: normalization removes the scale

    def test_fraction_monotone_in_admixture(self, basis):
        fs = []
        for a1 in np.linspace(0.1, 0.9, 9):
            fs.append(decompose(mix(basis, a1, 1.0 - a1), basis).f)
        assert np.all(np.diff(fs) > 0.0)

    def test_noise_stability(self, basis):
        measured = mix(basis, 0.35, 0.65)
        f0 = decompose(measured, basis).f
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(100):
            noisy = measured.with_values(
                measured.values * (1.0 + 0.01 * rng.normal(size=measured.axis.size))
            )
            worst = max(worst, abs(decompose(noisy, basis).f - f0))
        assert worst < 0.02

    def test_measured_on_other_grid(self, basis):
        fine = np.arange(560.0, 840.0, 0.7)
        measured = resample(mix(basis, 0.5, 0.5), fine)
        result = decompose(measured, basis)
        assert result.f == pytest.approx(nv_fraction(0.5, 0.5, basis), abs=1e-3)

    def test_no_overlap_rejected(self, basis):
        off = Spectrum(np.array([200.0, 210.0]), np.array([1.0, 1.0]),
                       "wavelength_nm")
        with pytest.raises(ValueError, match="overlap"):
            decompose(off, basis)

    def test_wrong_axis_kind_rejected(self, basis):
        s = Spectrum(np.array([600.0, 700.0]), np.array([1.0, 1.0]), "field_mT")
        with pytest.raises(ValueError, match="wavelength"):
            decompose(s, basis)


class TestDecompositionResult:
    def test_validation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            DecompositionResult(-0.1, 0.5, 0.5, 0.0)
        with pytest.raises(ValueError, match="outside"):
            DecompositionResult(0.1, 0.5, 1.5, 0.0)


class TestPowerSeriesTable:
    @staticmethod
    def entry(label, power, f):
        result = DecompositionResult(f, 1.0 - f, f, 0.0)
        return SampleDescriptor.from_label(label), power, result

    def test_single_result(self):
        header, rows = power_series_table([self.entry("ND140", 1.0, 0.8)])
        assert header == ["termination", "diameter_nm", "f_1mW"]
        assert rows == [["as_received", 140.0, 0.8]]

    def test_rows_sorted_by_diameter(self):
        header, rows = power_series_table([
            self.entry("ND90", 0.5, 0.6),
            self.entry("ND30", 0.5, 0.4),
        ])
        assert [r[1] for r in rows] == [30.0, 90.0]

    def test_full_grid_has_no_empty_cells(self):
        sizes = (10, 30, 40, 50, 70, 90, 140)
        powers = (0.1, 1.0, 5.0)
        entries = [self.entry(f"ND{s}", p, 0.5)
                   for s in sizes for p in powers]
        header, rows = power_series_table(entries)
        assert len(rows) == 7
        assert len(header) == 2 + 3
        cells = [c for row in rows for c in row[2:]]
        assert len(cells) == 21
        assert all(c is not None for c in cells)

    def test_missing_cells_are_none(self):
        _, rows = power_series_table([
            self.entry("ND30", 0.1, 0.4),
            self.entry("ND90", 1.0, 0.6),
        ])
        assert rows[0][2:] == [0.4, None]
        assert rows[1][2:] == [None, 0.6]

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no results"):
            power_series_table([])
