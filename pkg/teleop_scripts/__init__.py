# This file makes the directory a Python package
from .delay_line import DelayLine, steps_for_delay
from .errors import (
    ConfigError,
    DegenerateRegressorError,
    EmptySampleError,
    FractionalDelayError,
    IntegrationDivergedError,
    InvalidParameterError,
    InvalidProblemError,
    TeleopError,
    UndefinedReferenceError,
)
from .estimators import (
    ESTIMATORS,
    SCORED_METHODS,
    EstimatorSettings,
    Method,
    RegressionProblem,
    StiffnessEstimate,
    build_naive,
    build_nwls,
    build_ols,
    build_reference,
    get_estimator,
    solve_weighted_slope,
)
from .oracle import QuasiStaticSignals, generate, naive_bias_closed_form
from .simulation import (
    SIGNAL_COLUMNS,
    MeasurementNoise,
    PlantParams,
    SimState,
    TrialLog,
    initial_state,
    simulate_trial,
    step,
    trial_streams,
)
from .statistics import RankSumResult, ape, median_iqr, wilcoxon_rank_sum

__all__ = [
    'DelayLine',
    'steps_for_delay',
    'ConfigError',
    'DegenerateRegressorError',
    'EmptySampleError',
    'FractionalDelayError',
    'IntegrationDivergedError',
    'InvalidParameterError',
    'InvalidProblemError',
    'TeleopError',
    'UndefinedReferenceError',
    'ESTIMATORS',
    'SCORED_METHODS',
    'EstimatorSettings',
    'Method',
    'RegressionProblem',
    'StiffnessEstimate',
    'build_naive',
    'build_nwls',
    'build_ols',
    'build_reference',
    'get_estimator',
    'solve_weighted_slope',
    'QuasiStaticSignals',
    'generate',
    'naive_bias_closed_form',
    'SIGNAL_COLUMNS',
    'MeasurementNoise',
    'PlantParams',
    'SimState',
    'TrialLog',
    'initial_state',
    'simulate_trial',
    'step',
    'trial_streams',
    'RankSumResult',
    'ape',
    'median_iqr',
    'wilcoxon_rank_sum',
]
