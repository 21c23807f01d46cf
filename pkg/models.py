import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from teleop_scripts.estimators import EstimatorSettings, Method
from teleop_scripts.simulation import PlantParams


class Axis(enum.Enum):
    X = 'X'
    Y = 'Y'


class TrialStatus(enum.Enum):
    SUCCESS = 'success'
    FAILED = 'failed'


@dataclass(frozen=True)
class AxisPlant:
    """Per-axis robot constants shared by both robots of the dyad."""

    mass: float = 0.5  # kg
    damping: float = 12.0  # N*s/m
    mass_scale: float = 1.0
    friction: float = 0.0  # N, Coulomb level
    static_friction: float = 0.0  # N
    stribeck_velocity: float = 0.0  # m/s
    friction_spread: float = 0.0
    force_gain_spread: float = 0.0
    sigma_x: float = 0.0  # m
    sigma_f: float = 0.0  # N

    @property
    def effective_mass(self):
        return self.mass * self.mass_scale


def default_plants():
    return {Axis.X: AxisPlant(), Axis.Y: AxisPlant(mass_scale=1.5)}


@dataclass(frozen=True)
class ExperimentConfig:
    k: float = 200.0
    kc: float = 120.0
    amplitude: float = 0.05
    omega: float = 0.518
    dt: float = 0.001
    duration_periods: int = 2
    warmup_periods: float = 1.0
    epsilon: float = 1e-6
    delays_s: tuple = (0.0, 0.08, 0.16, 0.32)
    stiffness_levels: tuple = (60.0, 120.0)
    axes: tuple = (Axis.X, Axis.Y)
    trials_per_cell: int = 10
    base_seed: int = 1000
    plants: dict = field(default_factory=default_plants)
    output_dir: Optional[str] = None

    @property
    def duration(self):
        return self.duration_periods * 2.0 * math.pi / self.omega

    @property
    def estimator_settings(self):
        return EstimatorSettings(warmup_periods=self.warmup_periods, epsilon=self.epsilon)

    def plant_params(self, axis, delta, k0, friction_scale=1.0, f2_gain=1.0):
        """
        PlantParams for one axis and grid cell.

        `friction_scale` multiplies both friction levels of the axis and
        `f2_gain` is the novice force-sensor gain of the trial.
        """
        plant = self.plants[Axis(axis)]
        mass = plant.effective_mass
        return PlantParams(
            m1=mass,
            m2=mass,
            b1=plant.damping,
            b2=plant.damping,
            k=self.k,
            k0=k0,
            kc=self.kc,
            amplitude=self.amplitude,
            omega=self.omega,
            delta=delta,
            dt=self.dt,
            fc=plant.friction * friction_scale,
            fs=plant.static_friction * friction_scale,
            vs=plant.stribeck_velocity,
            sigma_x=plant.sigma_x,
            sigma_f=plant.sigma_f,
            f2_gain=f2_gain,
        )


@dataclass(frozen=True)
class Condition:
    delta: float
    k0_cmd: float
    axis: Axis
    trial_index: int
    seed: int
    delta_index: int = 0
    k0_index: int = 0
    axis_index: int = 0

    @property
    def sort_key(self):
        return (self.delta_index, self.k0_index, self.axis_index, self.trial_index)

    @property
    def cell(self):
        return (self.delta, self.k0_cmd, self.axis)


TRIAL_COLUMNS = (
    'delta_s', 'k0_cmd', 'axis', 'trial', 'seed',
    'k_ref', 'k_naive', 'k_ols', 'k_nwls',
    'ape_naive', 'ape_ols', 'ape_nwls',
    'status', 'reason',
)


@dataclass(frozen=True)
class TrialRecord:
    condition: Condition
    k_ref: Optional[float] = None
    k_naive: Optional[float] = None
    k_ols: Optional[float] = None
    k_nwls: Optional[float] = None
    ape_naive: Optional[float] = None
    ape_ols: Optional[float] = None
    ape_nwls: Optional[float] = None
    status: TrialStatus = TrialStatus.SUCCESS
    reason: str = ''

    @property
    def is_valid(self):
        return self.status == TrialStatus.SUCCESS

    def estimate(self, method):
        method = Method(method)
        if method == Method.REFERENCE:
            return self.k_ref
        return getattr(self, f"k_{method.value}")

    def ape_for(self, method):
        return getattr(self, f'ape_{Method(method).value}')

    def csv_row(self):
        c = self.condition
        return (
            c.delta, c.k0_cmd, c.axis, c.trial_index, c.seed,
            self.k_ref, self.k_naive, self.k_ols, self.k_nwls,
            self.ape_naive, self.ape_ols, self.ape_nwls,
            self.status, self.reason,
        )


SUMMARY_COLUMNS = (
    'delta_s', 'k0_cmd', 'axis', 'method', 'n',
    'median_ape', 'iqr_ape', 'p_vs_naive', 'significant_at_0p05',
)


@dataclass(frozen=True)
class SummaryRow:
    delta: float
    k0_cmd: float
    axis: Axis
    method: Method
    n: int
    median_ape: Optional[float] = None
    iqr_ape: Optional[float] = None
    p_vs_naive: Optional[float] = None
    significant: Optional[bool] = None

    @property
    def suppressed(self):
        return self.median_ape is None

    def csv_row(self):
        return (
            self.delta, self.k0_cmd, self.axis, self.method, self.n,
            self.median_ape, self.iqr_ape, self.p_vs_naive, self.significant,
        )


class ComparisonKind(enum.Enum):
    DELAY_STEP = 'delay_step'
    STIFFNESS_SPLIT = 'stiffness_split'


COMPARISON_COLUMNS = (
    'kind', 'delta_s', 'k0_cmd', 'axis', 'method', 'level_a', 'level_b',
    'n_a', 'n_b', 'median_a', 'median_b', 'statistic', 'p_value', 'significant_at_0p05',
)


@dataclass(frozen=True)
class ComparisonRow:
    """
    Rank-sum comparison between two levels of one factor.

    For delay steps the levels are delays and the samples are APEs, with
    `delta` left empty. For stiffness splits the levels are commanded
    stiffnesses and the samples are the estimates, with `k0_cmd` empty.
    """

    kind: ComparisonKind
    delta: Optional[float]
    k0_cmd: Optional[float]
    axis: Axis
    method: Method
    level_a: float
    level_b: float
    n_a: int
    n_b: int
    median_a: float
    median_b: float
    statistic: float
    p_value: float

    @property
    def significant(self):
        return self.p_value < 0.05

    def csv_row(self):
        return (
            self.kind, self.delta, self.k0_cmd, self.axis, self.method,
            self.level_a, self.level_b, self.n_a, self.n_b,
            self.median_a, self.median_b, self.statistic, self.p_value, self.significant,
        )
