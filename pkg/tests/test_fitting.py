from __future__ import annotations

import numpy as np
import pytest

from fndspec.fitting import (
    ParameterSpec,
    solve_nlls,
    solve_nonneg_linear,
)


def exp_model(p, t):
    amp, tau, off = p
    return amp * np.exp(-t / tau) + off


class TestSolveNlls:
    def test_linear_one_step(self):
        report = solve_nlls(lambda p: np.array([p[0] - 3.0]),
                            [ParameterSpec("p", 0.0)])
        assert report.converged
        # exact up to the finite-difference Jacobian error
        assert report.parameters["p"].value == pytest.approx(3.0, abs=1e-8)
        assert report.residual_norm < 1e-8

    def test_exponential_round_trip_from_perturbed_starts(self):
        t = np.linspace(0.0, 50.0, 80)
        truth = np.array([0.8, 12.0, 0.05])
        data = exp_model(truth, t)
        rng = np.random.default_rng(42)
        for _ in range(10):
            start = truth * rng.uniform(0.8, 1.2, 3)
            specs = [
                ParameterSpec("amp", start[0], 0.0, 10.0),
                ParameterSpec("tau", start[1], 0.1, 1e4),
                ParameterSpec("off", start[2], -1.0, 1.0),
            ]
            report = solve_nlls(lambda p: exp_model(p, t) - data, specs)
            assert report.converged
            fitted = np.array([report.parameters[n].value
                               for n in ("amp", "tau", "off")])
            assert np.all(np.abs(fitted - truth) <= 1e-6 * np.abs(truth))

    def test_fixed_parameter_untouched(self):
        t = np.linspace(0.0, 50.0, 40)
        data = exp_model([0.8, 12.0, 0.05], t)
        specs = [
            ParameterSpec("amp", 0.7),
            ParameterSpec("tau", 10.0),
            ParameterSpec("off", 0.123, fixed=True),
        ]
        report = solve_nlls(lambda p: exp_model(p, t) - data, specs)
        est = report.parameters["off"]
        assert est.value == 0.123
        assert est.sigma == 0.0

    def test_bounds_projection(self):
        # unconstrained optimum at 3, upper bound at 2
        report = solve_nlls(lambda p: np.array([p[0] - 3.0]),
                            [ParameterSpec("p", 0.0, upper=2.0)])
        assert report.parameters["p"].value == pytest.approx(2.0)

    def test_zero_max_iterations(self):
        report = solve_nlls(lambda p: np.array([p[0] - 3.0, p[0]]),
                            [ParameterSpec("p", 1.5)], max_iterations=0)
        assert not report.converged
        assert report.iterations == 0
        assert report.parameters["p"].value == 1.5

    def test_non_finite_at_start_raises(self):
        with pytest.raises(ValueError, match="non-finite"):
            solve_nlls(lambda p: np.array([np.nan]), [ParameterSpec("p", 1.0)])

    def test_history_non_increasing(self):
        t = np.linspace(0.0, 50.0, 60)
        data = exp_model([0.8, 12.0, 0.05], t)
        specs = [
            ParameterSpec("amp", 0.4),
            ParameterSpec("tau", 30.0, lower=0.1),
            ParameterSpec("off", 0.0),
        ]
        report = solve_nlls(lambda p: exp_model(p, t) - data, specs)
        h = np.array(report.history)
        assert np.all(np.diff(h) <= 0.0)

    def test_covariance_matches_finite_difference_reconstruction(self):
        t = np.linspace(0.0, 50.0, 80)
        truth = np.array([0.8, 12.0, 0.05])
        rng = np.random.default_rng(1)
        data = exp_model(truth, t) + rng.normal(0.0, 0.003, t.size)
        specs = [
            ParameterSpec("amp", 0.7),
            ParameterSpec("tau", 10.0, lower=0.1),
            ParameterSpec("off", 0.0),
        ]
        fn = lambda p: exp_model(p, t) - data
        report = solve_nlls(fn, specs)
        p_opt = np.array([report.parameters[n].value
                          for n in ("amp", "tau", "off")])
        # central-difference Jacobian, independent of the solver internals
        jac = np.empty((t.size, 3))
        for i in range(3):
            h = 1e-6 * max(1.0, abs(p_opt[i]))
            pp, pm = p_opt.copy(), p_opt.copy()
            pp[i] += h
            pm[i] -= h
            jac[:, i] = (fn(pp) - fn(pm)) / (2.0 * h)
        r = fn(p_opt)
        s2 = r @ r / (t.size - 3)
        cov = s2 * np.linalg.inv(jac.T @ jac)
        sig = np.sqrt(np.diag(cov))
        for i, name in enumerate(("amp", "tau", "off")):
            assert report.parameters[name].sigma == pytest.approx(sig[i], rel=0.01)

    def test_singular_normal_matrix_reported(self):
        # second parameter has no effect: normal matrix is singular
        def fn(p):
            return np.array([p[0] - 1.0, 2.0 * (p[0] - 1.0)])

        specs = [ParameterSpec("a", 0.0), ParameterSpec("ghost", 5.0)]
        report = solve_nlls(fn, specs)
        assert report.parameters["a"].value == pytest.approx(1.0, abs=1e-6)
        assert report.parameters["ghost"].sigma is None
        assert "singular" in report.message

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            solve_nlls(lambda p: p, [ParameterSpec("a", 0.0),
                                     ParameterSpec("a", 1.0)])

    def test_initial_outside_bounds_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            ParameterSpec("a", 5.0, lower=0.0, upper=1.0)


class TestSolveNonnegLinear:
    def test_identity_design_clips_negative(self):
        x, rnorm = solve_nonneg_linear(np.eye(2), np.array([1.0, -2.0]))
        assert np.allclose(x, [1.0, 0.0])
        assert rnorm == pytest.approx(2.0)

    def test_matches_unconstrained_when_nonnegative(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            a = rng.normal(size=(30, 4))
            x_true = rng.uniform(0.5, 2.0, 4)
            b = a @ x_true
            x, rnorm = solve_nonneg_linear(a, b)
            x_ls, *_ = np.linalg.lstsq(a, b, rcond=None)
            if np.all(x_ls >= 0):
                assert np.allclose(x, x_ls, atol=1e-9)
            assert rnorm < 1e-9

    def test_kkt_conditions(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            a = rng.normal(size=(20, 5))
            b = rng.normal(size=20)
            x, _ = solve_nonneg_linear(a, b)
            assert np.all(x >= 0.0)
            w = a.T @ (b - a @ x)
            # zero gradient on the support, nonpositive elsewhere
            assert np.all(w[x > 0] == pytest.approx(0.0, abs=1e-8))
            assert np.all(w[x == 0] <= 1e-8)

    def test_zero_norm_column(self):
        a = np.array([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(ValueError, match="zero norm"):
            solve_nonneg_linear(a, np.array([1.0, 2.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="match"):
            solve_nonneg_linear(np.eye(3), np.array([1.0, 2.0]))
