"""
One-parameter stiffness regressors.

Each estimator reduces a trial log to a (Y, Phi, W) problem whose
slope through the origin is the stiffness estimate:

    naive      Y = f1                         Phi = x2_hat - x2_rest
    ols        Y = f1 * (x1_tilde - x2_hat)   Phi = (x1 - x2_hat) * (x2_hat - x2_rest)
    nwls       as ols, W = 1 / (|deflection| + epsilon)
    reference  Y = -f2                        Phi = x2 - x2_rest
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegressorError, InvalidParameterError, InvalidProblemError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-6  # m
DEFAULT_WARMUP_PERIODS = 1.0
TOL_DENOMINATOR = 1e-12


class Method(enum.Enum):
    NAIVE = 'naive'
    OLS = 'ols'
    NWLS = 'nwls'
    REFERENCE = 'reference'


@dataclass(frozen=True)
class RegressionProblem:
    y: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    method: Method

    def __post_init__(self):
        arrays = []
        for name in ("y", "phi", "w"):
            array = np.array(getattr(self, name), dtype=np.float64)
            if array.ndim != 1:
                raise InvalidProblemError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(array)):
                raise InvalidProblemError(f"{name} has non-finite entries")
            array.setflags(write=False)
            object.__setattr__(self, name, array)
            arrays.append(array)
        if len({a.shape[0] for a in arrays}) != 1:
            raise InvalidProblemError("y, phi and w must have equal lengths")
        if arrays[0].shape[0] < 2:
            raise InvalidProblemError("a regression needs at least 2 samples")
        if np.any(self.w < 0):
            raise InvalidProblemError("weights must be non-negative")

    @property
    def n_samples(self):
        return self.y.shape[0]


@dataclass(frozen=True)
class StiffnessEstimate:
    k_hat: float
    n_samples: int
    residual_rms: float
    method: Method


@dataclass(frozen=True)
class EstimatorSettings:
    warmup_periods: float = DEFAULT_WARMUP_PERIODS
    epsilon: float = DEFAULT_EPSILON
    tol_denominator: float = TOL_DENOMINATOR

    def __post_init__(self):
        if not self.warmup_periods >= 0:
            raise InvalidParameterError("warmup_periods", f"must be >= 0, got {self.warmup_periods!r}")
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon", f"must be > 0, got {self.epsilon!r}")


def solve_weighted_slope(problem, tol_denominator=TOL_DENOMINATOR):
    """Closed-form minimiser of sum(W * (Y - k*Phi)**2) over k."""
    weighted_phi = problem.w * problem.phi
    denominator = float(np.dot(weighted_phi, problem.phi))
    if denominator <= tol_denominator:
        raise DegenerateRegressorError(problem.method.value, denominator)
    k_hat = float(np.dot(weighted_phi, problem.y)) / denominator
    residual = problem.y - k_hat * problem.phi
    residual_rms = math.sqrt(float(np.mean(residual * residual)))
    return StiffnessEstimate(
        k_hat=k_hat,
        n_samples=problem.n_samples,
        residual_rms=residual_rms,
        method=problem.method,
    )


def warmup_samples(log, warmup_periods=DEFAULT_WARMUP_PERIODS):
    """Number of leading samples that cover `warmup_periods` excitation periods."""
    return int(round(warmup_periods * 2.0 * math.pi / (log.omega * log.dt)))


def _window(log, warmup_periods):
    return slice(warmup_samples(log, warmup_periods), None)


def _deflections(log, window):
    x2_hat = log.x2_hat[window]
    observed = log.x1_tilde[window] - x2_hat
    local = log.x1[window] - x2_hat
    displacement = x2_hat - log.x2_rest
    return observed, local, displacement


def build_naive(log, warmup_periods=DEFAULT_WARMUP_PERIODS):
    window = _window(log, warmup_periods)
    phi = log.x2_hat[window] - log.x2_rest
    y = log.f1[window]
    return RegressionProblem(y=y, phi=phi, w=np.ones_like(phi), method=Method.NAIVE)


def build_ols(log, warmup_periods=DEFAULT_WARMUP_PERIODS):
    window = _window(log, warmup_periods)
    observed, local, displacement = _deflections(log, window)
    y = log.f1[window] * observed
    phi = local * displacement
    return RegressionProblem(y=y, phi=phi, w=np.ones_like(phi), method=Method.OLS)


def deflection_weights(observed, local, epsilon=DEFAULT_EPSILON):
    """Inverse deflection magnitude, regularised so a stationary sample weighs 1/epsilon."""
    if not epsilon > 0:
        raise InvalidParameterError("epsilon", f"must be > 0, got {epsilon!r}")
    return 1.0 / (np.hypot(observed, local) + epsilon)


def build_nwls(log, epsilon=DEFAULT_EPSILON, warmup_periods=DEFAULT_WARMUP_PERIODS):
    window = _window(log, warmup_periods)
    observed, local, displacement = _deflections(log, window)
    y = log.f1[window] * observed
    phi = local * displacement
    w = deflection_weights(observed, local, epsilon)
    return RegressionProblem(y=y, phi=phi, w=w, method=Method.NWLS)


def build_reference(log, warmup_periods=DEFAULT_WARMUP_PERIODS):
    window = _window(log, warmup_periods)
    phi = log.x2[window] - log.x2_rest
    y = -log.f2[window]
    return RegressionProblem(y=y, phi=phi, w=np.ones_like(phi), method=Method.REFERENCE)


class Estimator:
    """Base class for estimators"""

    method = None

    def build(self, log, settings):
        raise NotImplementedError

    def estimate(self, log, settings=None):
        settings = settings or EstimatorSettings()
        problem = self.build(log, settings)
        estimate = solve_weighted_slope(problem, settings.tol_denominator)
        logger.debug("%s estimate %.6f over %d samples", self.method.value,
                     estimate.k_hat, estimate.n_samples)
        return estimate


class NaiveEstimator(Estimator):
    """Instantaneous force against delayed novice displacement"""

    method = Method.NAIVE

    def build(self, log, settings):
        return build_naive(log, settings.warmup_periods)


class OLSEstimator(Estimator):
    """Delay-compensated cross-product regression"""

    method = Method.OLS

    def build(self, log, settings):
        return build_ols(log, settings.warmup_periods)


class NWLSEstimator(Estimator):
    """Delay-compensated regression reweighted by inverse deflection"""

    method = Method.NWLS

    def build(self, log, settings):
        return build_nwls(log, settings.epsilon, settings.warmup_periods)


class ReferenceEstimator(Estimator):
    """Novice-side spring fit, the per-trial ground truth"""

    method = Method.REFERENCE

    def build(self, log, settings):
        return build_reference(log, settings.warmup_periods)


# Estimator registry
ESTIMATORS = {
    Method.NAIVE: NaiveEstimator(),
    Method.OLS: OLSEstimator(),
    Method.NWLS: NWLSEstimator(),
    Method.REFERENCE: ReferenceEstimator(),
}

# Methods scored against the reference, in report order
SCORED_METHODS = (Method.NAIVE, Method.OLS, Method.NWLS)


def get_estimator(method):
    """Get estimator by method"""
    return ESTIMATORS.get(Method(method))
