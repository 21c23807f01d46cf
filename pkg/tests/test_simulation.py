import math

import numpy as np
import pytest

from teleop_scripts.errors import FractionalDelayError, IntegrationDivergedError, InvalidParameterError
from teleop_scripts.estimators import ESTIMATORS, EstimatorSettings
from teleop_scripts.simulation import (
    SIGNAL_COLUMNS,
    MeasurementNoise,
    friction_force,
    initial_state,
    simulate_trial,
    step,
)


def two_periods(params):
    return 2.0 * params.period


def run_states(params, n_steps, **initial):
    """Clean state trajectory of a noise-free run from the given initial state."""
    noise = MeasurementNoise()
    state = initial_state(params, noise, **initial)
    states = [state]
    for _ in range(n_steps):
        state, _ = step(state, params, noise)
        states.append(state)
    return states


def final_period(values, params):
    samples = int(round(params.period / params.dt))
    return np.asarray(values)[-samples:]


class TestPlantParams:
    """Parameter invariants are enforced at construction."""

    def test_negative_mass_names_the_field(self, make_params):
        with pytest.raises(InvalidParameterError) as excinfo:
            make_params(m1=-1.0)
        assert excinfo.value.field == "m1"

    def test_fractional_delay_rejected(self, make_params):
        with pytest.raises(FractionalDelayError):
            make_params(delta=0.0805)

    def test_coarse_step_rejected(self, make_params):
        with pytest.raises(InvalidParameterError):
            make_params(omega=200.0)

    def test_delay_steps(self, make_params):
        assert make_params(delta=0.32).delay_steps == 320

    def test_static_friction_needs_a_stribeck_velocity(self, make_params):
        with pytest.raises(InvalidParameterError) as excinfo:
            make_params(fc=0.02, fs=0.2)
        assert excinfo.value.field == "vs"

    def test_sensor_gain_must_be_positive(self, make_params):
        with pytest.raises(InvalidParameterError) as excinfo:
            make_params(f2_gain=0.0)
        assert excinfo.value.field == "f2_gain"


class TestFriction:
    """Stribeck friction law."""

    def test_no_levels_no_force(self):
        assert friction_force(0.01, 0.0) == 0.0
        assert friction_force(0.01, 0.0, 0.0, 5e-4) == 0.0

    def test_coulomb_level_away_from_rest(self):
        assert friction_force(0.05, 0.3) == pytest.approx(0.3, rel=1e-9)

    def test_odd_in_velocity(self):
        for velocity in (1e-4, 4e-4, 2e-3):
            forward = friction_force(velocity, 0.02, 0.2, 5e-4)
            assert friction_force(-velocity, 0.02, 0.2, 5e-4) == pytest.approx(-forward, rel=1e-12)

    def test_static_level_dominates_near_rest(self):
        near_rest = friction_force(3e-4, 0.02, 0.2, 5e-4)
        sliding = friction_force(5e-3, 0.02, 0.2, 5e-4)
        assert near_rest > 2.0 * sliding
        assert sliding == pytest.approx(0.02, rel=1e-3)

    def test_zero_stribeck_velocity_is_plain_coulomb(self):
        assert friction_force(4e-4, 0.3, 0.0, 0.0) == pytest.approx(0.3 * math.tanh(0.4), rel=1e-12)


class TestSimulateTrial:
    """Whole-trial behaviour of the simulator."""

    def test_rest_equilibrium_stays_at_zero(self, make_params):
        params = make_params(amplitude=0.0)
        log = simulate_trial(params, two_periods(params), seed=1)
        for name in SIGNAL_COLUMNS[1:]:
            assert not np.any(getattr(log, name)), name

    def test_sample_count(self, make_params):
        params = make_params()
        duration = two_periods(params)
        log = simulate_trial(params, duration, seed=1)
        assert log.n_samples == math.ceil(duration / params.dt)
        np.testing.assert_allclose(np.diff(log.t), params.dt, rtol=1e-6)

    def test_same_seed_gives_identical_logs(self, make_params):
        params = make_params(delta=0.08, sigma_x=1e-4, sigma_f=0.05)
        first = simulate_trial(params, params.period, seed=11)
        second = simulate_trial(params, params.period, seed=11)
        for name in SIGNAL_COLUMNS:
            np.testing.assert_array_equal(getattr(first, name), getattr(second, name))

    def test_different_seeds_differ_when_noisy(self, make_params):
        params = make_params(delta=0.08, sigma_x=1e-4, sigma_f=0.05)
        first = simulate_trial(params, params.period, seed=11)
        second = simulate_trial(params, params.period, seed=12)
        assert not np.array_equal(first.f1, second.f1)

    def test_noise_free_runs_ignore_the_seed(self, make_params):
        params = make_params(delta=0.08)
        first = simulate_trial(params, params.period, seed=1)
        second = simulate_trial(params, params.period, seed=2)
        for name in SIGNAL_COLUMNS:
            np.testing.assert_array_equal(getattr(first, name), getattr(second, name))

    def test_longest_default_delay_stays_bounded(self, make_params):
        params = make_params(delta=0.32, k0=60.0)
        log = simulate_trial(params, two_periods(params), seed=3)
        assert np.all(np.isfinite(log.x1)) and np.all(np.isfinite(log.x2))
        assert np.max(np.abs(log.x2)) < params.amplitude

    def test_duration_shorter_than_a_period_rejected(self, make_params):
        params = make_params()
        with pytest.raises(InvalidParameterError):
            simulate_trial(params, 0.5 * params.period, seed=1)

    def test_log_is_read_only(self, make_params):
        params = make_params()
        log = simulate_trial(params, params.period, seed=1)
        with pytest.raises(ValueError):
            log.x1[0] = 1.0

    def test_unstable_plant_reports_divergence(self, make_params):
        params = make_params(m1=1e-5, m2=1e-5)
        with pytest.raises(IntegrationDivergedError) as excinfo:
            simulate_trial(params, params.period, seed=1)
        assert excinfo.value.step_index > 0


class TestDelayedObservables:
    """The logged delayed channels are exact integer shifts of the logged positions."""

    @pytest.fixture
    def noisy_log(self, make_params):
        params = make_params(delta=0.08, sigma_x=1e-4, sigma_f=0.05)
        return simulate_trial(params, params.period, seed=5), params.delay_steps

    def test_initial_observation_equals_initial_position(self, noisy_log):
        log, _ = noisy_log
        assert log.x2_hat[0] == log.x2[0]

    def test_novice_position_arrives_one_delay_later(self, noisy_log):
        log, c = noisy_log
        np.testing.assert_array_equal(log.x2_hat[c:], log.x2[:-c])
        assert np.all(log.x2_hat[:c] == log.x2[0])

    def test_round_trip_position_arrives_two_delays_later(self, noisy_log):
        log, c = noisy_log
        np.testing.assert_array_equal(log.x1_tilde[2 * c:], log.x1[:-2 * c])
        assert np.all(log.x1_tilde[:2 * c] == log.x1[0])

    def test_zero_delay_observables_are_the_positions(self, make_params):
        params = make_params(sigma_x=1e-4)
        log = simulate_trial(params, params.period, seed=5)
        np.testing.assert_array_equal(log.x2_hat, log.x2)
        np.testing.assert_array_equal(log.x1_tilde, log.x1)


class TestDynamicsProperties:
    """Physical sanity of the integrator."""

    def test_energy_never_increases_without_excitation(self, make_params):
        params = make_params(amplitude=0.0)
        states = run_states(params, 5000, x1=0.01)

        def energy(s):
            return (0.5 * params.m1 * s.v1 ** 2 + 0.5 * params.m2 * s.v2 ** 2
                    + 0.5 * params.k * (s.x1 - s.x2) ** 2
                    + 0.5 * params.kc * s.x1 ** 2
                    + 0.5 * params.k0 * (s.x2 - s.x2_rest) ** 2)

        energies = np.array([energy(s) for s in states])
        tolerance = 1e-12 + 1e-6 * energies[0]
        assert np.all(np.diff(energies) <= tolerance)
        assert energies[-1] < 0.01 * energies[0]

    def test_mirrored_plants_share_the_coupling_force(self, make_params):
        expert_side = make_params(amplitude=0.0, m1=0.5, b1=12.0, m2=0.75, b2=4.0,
                                  kc=120.0, k0=60.0)
        novice_side = make_params(amplitude=0.0, m1=0.75, b1=4.0, m2=0.5, b2=12.0,
                                  kc=60.0, k0=120.0)
        first = run_states(expert_side, 2000, v1=0.1)
        second = run_states(novice_side, 2000, v2=0.1)

        stretch_first = np.array([abs(s.x2_hat - s.x1) for s in first])
        stretch_second = np.array([abs(s.x1_remote - s.x2) for s in second])
        np.testing.assert_allclose(stretch_first, stretch_second, rtol=1e-12, atol=1e-15)
        assert np.max(stretch_first) > 0

    def test_final_period_rms_converges_with_step(self, make_params):
        rms = []
        for dt in (0.002, 0.001, 0.0005):
            params = make_params(delta=0.08, dt=dt)
            log = simulate_trial(params, two_periods(params), seed=1)
            tail = final_period(log.x2, params)
            rms.append(math.sqrt(float(np.mean(tail ** 2))))
        first_change = abs(rms[1] - rms[0])
        second_change = abs(rms[2] - rms[1])
        assert second_change < 4.0 * first_change

    @pytest.mark.parametrize("mass", [0.5, 0.75], ids=["x-axis", "y-axis"])
    @pytest.mark.parametrize("k0", [60.0, 120.0])
    @pytest.mark.parametrize("delta", [0.0, 0.08, 0.16, 0.32])
    def test_halving_the_step_barely_moves_estimates(self, make_params, delta, k0, mass):
        settings = EstimatorSettings()
        estimates = []
        for dt in (0.001, 0.0005):
            params = make_params(delta=delta, k0=k0, dt=dt, m1=mass, m2=mass)
            log = simulate_trial(params, two_periods(params), seed=1)
            estimates.append({m: e.estimate(log, settings).k_hat for m, e in ESTIMATORS.items()})
        for method in ESTIMATORS:
            assert abs(estimates[0][method] - estimates[1][method]) < 0.1, method


class TestSlowExcitation:
    """At a tenth of the nominal frequency the plant is close to quasi-static."""

    def test_novice_amplitude_matches_static_gain_chain(self, make_params):
        params = make_params(omega=0.0518, k0=60.0)
        log = simulate_trial(params, two_periods(params), seed=1)
        k, k0, kc, a = params.k, params.k0, params.kc, params.amplitude
        series = k * k0 / (k + k0)
        expected = a * (kc / (kc + series)) * (k / (k + k0))
        amplitude = np.max(np.abs(final_period(log.x2, params)))
        assert amplitude == pytest.approx(expected, rel=0.02)

    def test_amplitude_ratio_matches_equilibrium(self, make_params):
        params = make_params(omega=0.0518, k0=60.0, delta=0.08)
        log = simulate_trial(params, two_periods(params), seed=1)
        ratio = (np.max(np.abs(final_period(log.x2, params)))
                 / np.max(np.abs(final_period(log.x1, params))))
        assert ratio == pytest.approx(params.k / (params.k + params.k0), rel=0.02)

    def test_unloaded_novice_follows_the_delayed_expert(self, make_params):
        params = make_params(omega=0.0518, k0=0.0, delta=0.08)
        log = simulate_trial(params, two_periods(params), seed=1)
        c = params.delay_steps
        x1 = final_period(log.x1, params)
        x2 = final_period(log.x2, params)
        amplitude = np.max(np.abs(x1))
        assert np.max(np.abs(x2)) / amplitude == pytest.approx(1.0, abs=0.01)
        lagged = final_period(log.x1[:-c], params)
        assert np.max(np.abs(x2[:lagged.shape[0]] - lagged[:x2.shape[0]])) < 0.02 * amplitude
