"""
Fixed-step simulation of the delayed expert/novice coupling.

Two 1-D robots are joined by a virtual spring across a transport delay.
The expert robot runs an impedance controller that tracks a sinusoid,
and the novice robot carries an intrinsic spring. Integration is
semi-implicit Euler: velocities first, then positions, then the delay
lines are pushed with the new positions.

Every delay line carries (clean, measured) pairs. The dynamics read
the clean channel and the log reads the measured channel, so
measurement noise never enters the dynamics.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .delay_line import DelayLine, steps_for_delay
from .errors import IntegrationDivergedError, InvalidParameterError

logger = logging.getLogger(__name__)

FRICTION_VELOCITY_EPS = 1e-3  # m/s
MAX_OMEGA_DT = 0.1
SIGNAL_COLUMNS = ("t", "x1", "x2", "f1", "f2", "x2_hat", "x1_tilde")


@dataclass(frozen=True)
class PlantParams:
    """Physical and controller constants of one axis of the coupled system."""

    m1: float
    m2: float
    b1: float
    b2: float
    k: float
    k0: float
    kc: float
    amplitude: float
    omega: float
    delta: float
    dt: float
    fc: float = 0.0
    fs: float = 0.0  # static level at rest, used when vs > 0
    vs: float = 0.0  # Stribeck velocity, m/s
    sigma_x: float = 0.0
    sigma_f: float = 0.0
    f2_gain: float = 1.0  # novice force-sensor gain on the logged f2

    def __post_init__(self):
        for name in ("m1", "m2", "b1", "b2", "k", "k0", "kc", "amplitude",
                     "omega", "delta", "dt", "fc", "fs", "vs", "sigma_x", "sigma_f", "f2_gain"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(name, "must be finite")
        for name in ("m1", "m2", "k", "dt", "omega", "f2_gain"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(name, f"must be > 0, got {getattr(self, name)!r}")
        for name in ("b1", "b2", "k0", "kc", "fc", "fs", "vs", "sigma_x", "sigma_f"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(name, f"must be >= 0, got {getattr(self, name)!r}")
        if self.fs > 0 and self.vs == 0:
            raise InvalidParameterError("vs", "must be > 0 when a static friction level is set")
        if self.omega * self.dt >= MAX_OMEGA_DT:
            raise InvalidParameterError(
                "omega", f"omega*dt must be < {MAX_OMEGA_DT}, got {self.omega * self.dt!r}"
            )
        steps_for_delay(self.delta, self.dt)

    @property
    def delay_steps(self):
        return steps_for_delay(self.delta, self.dt)

    @property
    def period(self):
        return 2.0 * math.pi / self.omega


class Sample(NamedTuple):
    """Observables logged at one step."""

    t: float
    x1: float
    x2: float
    f1: float
    f2: float
    x2_hat: float
    x1_tilde: float


@dataclass(frozen=True)
class SimState:
    """Integrator state at t = step_index * dt.

    The delay lines are shared with the successor state returned by
    `step`, so a state must not be stepped twice.
    """

    step_index: int
    t: float
    x1: float
    x2: float
    v1: float
    v2: float
    x2_rest: float
    x1_remote: float  # clean x1(t - delta), seen by the novice
    x2_hat: float  # clean x2(t - delta), seen by the expert
    x1_meas: float
    x2_meas: float
    x2_hat_meas: float
    x1_tilde_meas: float
    to_novice: DelayLine = field(repr=False)
    to_expert: DelayLine = field(repr=False)
    observer: DelayLine = field(repr=False)


@dataclass(frozen=True)
class TrialLog:
    """Uniformly sampled observables of one trial.

    Arrays are read-only once the log is built. `x2_rest` is the novice's
    clean initial position, the offset every displacement is taken from.
    """

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    x2_hat: np.ndarray
    x1_tilde: np.ndarray
    x2_rest: float
    dt: float
    omega: float
    delay_steps: int

    def __post_init__(self):
        lengths = set()
        for name in SIGNAL_COLUMNS:
            array = np.array(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
            if array.ndim != 1:
                raise InvalidParameterError(name, "must be one-dimensional")
            lengths.add(array.shape[0])
        if len(lengths) != 1:
            raise InvalidParameterError("t", f"signal lengths differ: {sorted(lengths)}")
        if lengths.pop() < 2:
            raise InvalidParameterError("t", "a trial log needs at least 2 samples")

    @property
    def n_samples(self):
        return self.t.shape[0]

    def as_columns(self):
        """Signal arrays keyed by column name, in CSV order."""
        return {name: getattr(self, name) for name in SIGNAL_COLUMNS}


class MeasurementNoise:
    """Additive Gaussian noise for the logged position and force channels.

    Standard normals are drawn from the generator in blocks. Nothing is
    drawn for a channel whose sigma is zero, so a noise-free run never
    touches the generator.
    """

    def __init__(self, rng=None, sigma_x=0.0, sigma_f=0.0, block_size=4096):
        if (sigma_x > 0 or sigma_f > 0) and rng is None:
            raise InvalidParameterError("rng", "a generator is required when noise is enabled")
        self.rng = rng
        self.sigma_x = sigma_x
        self.sigma_f = sigma_f
        self.block_size = block_size
        self._block = []
        self._cursor = 0

    def _draw(self):
        if self._cursor >= len(self._block):
            self._block = self.rng.standard_normal(self.block_size).tolist()
            self._cursor = 0
        value = self._block[self._cursor]
        self._cursor += 1
        return value

    def position(self, value):
        if self.sigma_x == 0:
            return value
        return value + self.sigma_x * self._draw()

    def force(self, value):
        if self.sigma_f == 0:
            return value
        return value + self.sigma_f * self._draw()


def trial_streams(seed):
    """Independent (measurement noise, plant variability) generators for one seed."""
    noise_seq, plant_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(noise_seq), np.random.default_rng(plant_seq)


def friction_force(velocity, fc, fs=0.0, vs=0.0):
    """
    Stribeck friction smoothed through zero velocity.

    The level falls from `fs` at rest to the Coulomb level `fc` over the
    Stribeck velocity `vs`. With `vs` = 0 the law is plain Coulomb.
    """
    level = fc
    if vs > 0:
        level += (fs - fc) * math.exp(-(velocity / vs) ** 2)
    if level == 0:
        return 0.0
    return level * math.tanh(velocity / FRICTION_VELOCITY_EPS)


def _observe(step_index, dt, x1, x2, v1, v2, x1_meas, x2_meas, x2_rest,
             to_novice, to_expert, observer):
    novice_view = to_novice.shift((x1, x1_meas))
    x1_remote = novice_view[0]
    x2_hat, x2_hat_meas = to_expert.shift((x2, x2_meas))
    _, x1_tilde_meas = observer.shift(novice_view)
    return SimState(
        step_index=step_index,
        t=step_index * dt,
        x1=x1,
        x2=x2,
        v1=v1,
        v2=v2,
        x2_rest=x2_rest,
        x1_remote=x1_remote,
        x2_hat=x2_hat,
        x1_meas=x1_meas,
        x2_meas=x2_meas,
        x2_hat_meas=x2_hat_meas,
        x1_tilde_meas=x1_tilde_meas,
        to_novice=to_novice,
        to_expert=to_expert,
        observer=observer,
    )


def initial_state(params, noise, x1=0.0, x2=0.0, v1=0.0, v2=0.0):
    """Rest state at t = 0 with every delay line pre-filled by the initial positions."""
    x1_meas = noise.position(x1)
    x2_meas = noise.position(x2)
    capacity = params.delay_steps
    return _observe(
        0, params.dt, x1, x2, v1, v2, x1_meas, x2_meas, x2,
        to_novice=DelayLine(capacity, fill=(x1, x1_meas)),
        to_expert=DelayLine(capacity, fill=(x2, x2_meas)),
        observer=DelayLine(capacity, fill=(x1, x1_meas)),
    )


def step(state, params, noise):
    """
    Advance the coupled system by one step.

    Returns the next state and the sample observed at `state.t`. The
    forces in the sample are the ones applied during this step.
    """
    f1 = params.kc * (params.amplitude * math.sin(params.omega * state.t) - state.x1)
    f2 = -params.k0 * (state.x2 - state.x2_rest)
    sample = Sample(
        t=state.t,
        x1=state.x1_meas,
        x2=state.x2_meas,
        f1=noise.force(f1),
        f2=noise.force(params.f2_gain * f2),
        x2_hat=state.x2_hat_meas,
        x1_tilde=state.x1_tilde_meas,
    )

    a1 = (params.k * (state.x2_hat - state.x1) + f1 - params.b1 * state.v1
          - friction_force(state.v1, params.fc, params.fs, params.vs)) / params.m1
    a2 = (params.k * (state.x1_remote - state.x2) + f2 - params.b2 * state.v2
          - friction_force(state.v2, params.fc, params.fs, params.vs)) / params.m2
    v1 = state.v1 + a1 * params.dt
    v2 = state.v2 + a2 * params.dt
    x1 = state.x1 + v1 * params.dt
    x2 = state.x2 + v2 * params.dt

    next_index = state.step_index + 1
    if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(v1) and math.isfinite(v2)):
        raise IntegrationDivergedError(next_index)

    next_state = _observe(
        next_index, params.dt, x1, x2, v1, v2,
        noise.position(x1), noise.position(x2), state.x2_rest,
        state.to_novice, state.to_expert, state.observer,
    )
    return next_state, sample


def sample_count(duration, dt):
    """Number of logged samples covering `duration` at step `dt`."""
    return math.ceil(round(duration / dt, 6))


def simulate_trial(params, duration, seed):
    """
    Simulate one trial from rest and return its log.

    The same (params, duration, seed) always yields the same log. Only
    the measurement-noise stream of `seed` is used here.
    """
    if duration < params.period * (1.0 - 1e-12):
        raise InvalidParameterError(
            "duration", f"must cover one excitation period ({params.period!r} s), got {duration!r}"
        )
    n_samples = sample_count(duration, params.dt)
    noise_rng, _ = trial_streams(seed)
    noise = MeasurementNoise(noise_rng, params.sigma_x, params.sigma_f)

    state = initial_state(params, noise)
    x2_rest = state.x2_rest
    columns = {name: [] for name in SIGNAL_COLUMNS}
    appenders = [columns[name].append for name in SIGNAL_COLUMNS]
    for _ in range(n_samples):
        state, sample = step(state, params, noise)
        for append, value in zip(appenders, sample):
            append(value)

    logger.debug("Simulated %d samples (delta=%r, k0=%r, seed=%r)",
                 n_samples, params.delta, params.k0, seed)
    return TrialLog(
        **columns,
        x2_rest=x2_rest,
        dt=params.dt,
        omega=params.omega,
        delay_steps=params.delay_steps,
    )
