"""
Closed-form quasi-static signals.

With inertia and damping neglected, both robots sit at spring
equilibrium at every instant. Sampling that solution directly gives
exact ground truth for the estimators, independent of the integrator.
The excitation x1(t) = A sin(wt) is defined for negative time as well,
so delayed signals never see a pre-fill value.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .simulation import TrialLog

MIN_SAMPLES_PER_PERIOD = 3


@dataclass(frozen=True)
class QuasiStaticSignals(TrialLog):
    """A TrialLog sampled from the equilibrium solution, with its generating constants."""

    k: float
    k0: float
    amplitude: float
    delta: float
    n_periods: int


def samples_per_period(omega, dt):
    return max(MIN_SAMPLES_PER_PERIOD, int(round(2.0 * math.pi / (omega * dt))))


def generate(k, k0, amplitude, omega, delta, dt, n_periods):
    """
    Sample the quasi-static solution over exactly `n_periods` periods.

    The effective step is the period divided by a whole number of
    samples, the nearest one to `dt`, so period averages are exact.
    """
    if not k > 0:
        raise InvalidParameterError("k", f"must be > 0, got {k!r}")
    if not k + k0 > 0:
        raise InvalidParameterError("k0", f"k + k0 must be > 0, got {k + k0!r}")
    if not omega > 0:
        raise InvalidParameterError("omega", f"must be > 0, got {omega!r}")
    if not delta >= 0:
        raise InvalidParameterError("delta", f"must be >= 0, got {delta!r}")
    if int(n_periods) != n_periods or n_periods < 1:
        raise InvalidParameterError("n_periods", f"must be an integer >= 1, got {n_periods!r}")

    period = 2.0 * math.pi / omega
    spp = samples_per_period(omega, dt)
    dt_eff = period / spp
    t = np.arange(int(n_periods) * spp) * dt_eff

    gain = k / (k + k0)
    x1 = amplitude * np.sin(omega * t)
    x2 = gain * amplitude * np.sin(omega * (t - delta))
    x1_tilde = amplitude * np.sin(omega * (t - 2.0 * delta))
    x2_hat = gain * x1_tilde
    f1 = k * (x1 - x2_hat)
    f2 = -k0 * x2

    return QuasiStaticSignals(
        t=t,
        x1=x1,
        x2=x2,
        f1=f1,
        f2=f2,
        x2_hat=x2_hat,
        x1_tilde=x1_tilde,
        x2_rest=0.0,
        dt=dt_eff,
        omega=omega,
        delay_steps=int(round(delta / dt_eff)),
        k=k,
        k0=k0,
        amplitude=amplitude,
        delta=delta,
        n_periods=int(n_periods),
    )


def naive_bias_closed_form(k, k0, omega, delta):
    """Full-period naive estimate on quasi-static signals: (k + k0) cos(2 w delta) - k."""
    return (k + k0) * math.cos(2.0 * omega * delta) - k
