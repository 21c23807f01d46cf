import math
import time

import numpy as np
import pytest
from scipy import integrate

from teleop_scripts.errors import InvalidParameterError
from teleop_scripts.estimators import build_naive, build_nwls, build_ols, solve_weighted_slope
from teleop_scripts.oracle import QuasiStaticSignals, generate, naive_bias_closed_form, samples_per_period
from teleop_scripts.simulation import TrialLog

K = 200.0
OMEGA = 0.518
AMPLITUDE = 0.05
GRID_DELAYS = (0.0, 0.08, 0.16, 0.32)
GRID_STIFFNESS = (60.0, 120.0)


def signals(k0=60.0, delta=0.0, n_periods=1, dt=0.001):
    return generate(K, k0, AMPLITUDE, OMEGA, delta, dt, n_periods)


def quadrature_naive(k, k0, omega, delta):
    """Period average <f1 * x2_hat> / <x2_hat^2> by numerical integration."""
    gain = k / (k + k0)

    def x2_hat(t):
        return gain * math.sin(omega * (t - 2.0 * delta))

    def f1(t):
        return k * (math.sin(omega * t) - x2_hat(t))

    period = 2.0 * math.pi / omega
    cross, _ = integrate.quad(lambda t: f1(t) * x2_hat(t), 0.0, period, limit=200)
    power, _ = integrate.quad(lambda t: x2_hat(t) ** 2, 0.0, period, limit=200)
    return cross / power


class TestGenerate:
    """Closed-form quasi-static signal generation."""

    def test_record_is_a_trial_log(self):
        record = signals(n_periods=2)
        assert isinstance(record, QuasiStaticSignals)
        assert isinstance(record, TrialLog)
        assert record.n_samples == 2 * samples_per_period(OMEGA, 0.001)
        assert record.x2_rest == 0.0

    def test_spans_whole_periods(self):
        record = signals(n_periods=3)
        period = 2.0 * math.pi / OMEGA
        assert record.t[-1] + record.dt == pytest.approx(3.0 * period, rel=1e-12)

    def test_equilibrium_relations(self):
        record = signals(k0=60.0, delta=0.16)
        gain = K / (K + 60.0)
        np.testing.assert_allclose(record.x2, gain * AMPLITUDE * np.sin(OMEGA * (record.t - 0.16)),
                                   rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(record.f1, K * (record.x1 - record.x2_hat), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(record.x1_tilde, AMPLITUDE * np.sin(OMEGA * (record.t - 0.32)),
                                   rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(record.f2, -60.0 * record.x2, rtol=1e-12, atol=1e-15)

    def test_series_spring_identity_without_delay(self):
        record = signals(k0=60.0)
        mask = np.abs(record.x2_hat) > 1e-9
        np.testing.assert_allclose(record.f1[mask] / record.x2_hat[mask], 60.0, rtol=1e-9)

    def test_unloaded_novice_gives_zero_stiffness(self):
        record = signals(k0=0.0, delta=0.32)
        assert abs(solve_weighted_slope(build_ols(record, warmup_periods=0)).k_hat) < 1e-12

    def test_coarse_step_keeps_three_samples_per_period(self):
        assert samples_per_period(OMEGA, 10.0) == 3

    @pytest.mark.parametrize("kwargs", [
        dict(n_periods=0), dict(n_periods=1.5), dict(k=0.0), dict(k0=-250.0),
    ])
    def test_invalid_arguments_rejected(self, kwargs):
        arguments = dict(k=K, k0=60.0, amplitude=AMPLITUDE, omega=OMEGA, delta=0.0, dt=0.001, n_periods=1)
        arguments.update(kwargs)
        with pytest.raises(InvalidParameterError):
            generate(**arguments)


class TestNaiveBiasClosedForm:
    """Full-period naive bias on pure sinusoids."""

    def test_no_delay_no_bias(self):
        assert naive_bias_closed_form(K, 60.0, OMEGA, 0.0) == 60.0

    def test_long_delay_underestimates(self):
        assert naive_bias_closed_form(K, 60.0, OMEGA, 0.32) == pytest.approx(45.84, abs=0.05)

    def test_quarter_cycle_round_trip_inverts_the_sign(self):
        delta = math.pi / (4.0 * OMEGA)
        assert naive_bias_closed_form(K, 60.0, OMEGA, delta) == pytest.approx(-K, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.0, 0.08, 0.16, 0.32, 0.9, math.pi / (4.0 * OMEGA)])
    @pytest.mark.parametrize("k0", GRID_STIFFNESS)
    def test_agrees_with_quadrature(self, k0, delta):
        assert naive_bias_closed_form(K, k0, OMEGA, delta) == pytest.approx(
            quadrature_naive(K, k0, OMEGA, delta), rel=1e-9, abs=1e-9)

    def test_strictly_decreasing_up_to_quarter_cycle(self):
        deltas = np.linspace(0.0, math.pi / (4.0 * OMEGA), 50)
        values = [naive_bias_closed_form(K, 60.0, OMEGA, d) for d in deltas]
        assert np.all(np.diff(values) < 0)


class TestOracleGrid:
    """Estimator accuracy over the whole delay/stiffness grid on oracle signals."""

    def test_compensated_estimators_exact_on_grid(self):
        started = time.perf_counter()
        for delta in GRID_DELAYS:
            for k0 in GRID_STIFFNESS:
                record = signals(k0=k0, delta=delta)
                for builder in (build_ols, build_nwls):
                    estimate = solve_weighted_slope(builder(record, warmup_periods=0)).k_hat
                    assert abs(estimate - k0) / k0 <= 1e-6, (builder.__name__, delta, k0)
        assert time.perf_counter() - started < 1.0

    def test_naive_matches_closed_form_on_grid(self):
        started = time.perf_counter()
        for delta in GRID_DELAYS:
            for k0 in GRID_STIFFNESS:
                estimate = solve_weighted_slope(build_naive(signals(k0=k0, delta=delta),
                                                            warmup_periods=0)).k_hat
                assert estimate == pytest.approx(naive_bias_closed_form(K, k0, OMEGA, delta), abs=0.5)
        assert time.perf_counter() - started < 1.0
