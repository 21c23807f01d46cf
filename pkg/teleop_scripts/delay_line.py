"""Integer-step transport delay used for the haptic channel."""

import numpy as np

from .errors import FractionalDelayError, InvalidParameterError

STEP_TOLERANCE = 1e-9


def steps_for_delay(delay, dt):
    """Convert a delay in seconds to a whole number of integration steps."""
    if delay < 0:
        raise InvalidParameterError("delta", f"must be >= 0, got {delay!r}")
    if dt <= 0:
        raise InvalidParameterError("dt", f"must be > 0, got {dt!r}")
    ratio = delay / dt
    steps = round(ratio)
    if abs(ratio - steps) >= STEP_TOLERANCE:
        raise FractionalDelayError(delay, dt)
    return int(steps)


class DelayLine:
    """Fixed-length FIFO over one or more channels.

    The value shifted in on call n comes back out on call n + capacity.
    Until then the line returns its fill value. A zero-capacity line
    hands its input straight back.

    Usage:
        line = DelayLine(80, fill=(0.0, 0.0))
        clean, measured = line.shift((x, x_meas))
    """

    def __init__(self, capacity, fill=0.0):
        if capacity < 0:
            raise InvalidParameterError("capacity", f"must be >= 0, got {capacity!r}")
        self.capacity = int(capacity)
        self.scalar = np.ndim(fill) == 0
        fill_row = np.atleast_1d(np.asarray(fill, dtype=np.float64))
        self.nchannels = fill_row.shape[0]
        self.buffer = np.tile(fill_row, (self.capacity, 1))
        self.write_idx = 0

    @classmethod
    def for_delay(cls, delay, dt, fill=0.0):
        return cls(steps_for_delay(delay, dt), fill)

    def shift(self, sample):
        """Push one sample and return the one pushed `capacity` calls ago."""
        if self.capacity == 0:
            return sample
        out = self.buffer[self.write_idx].tolist()
        self.buffer[self.write_idx] = sample
        self.write_idx = (self.write_idx + 1) % self.capacity
        return out[0] if self.scalar else tuple(out)

    def process(self, samples):
        """Push a block of samples through the line.

        Parameters:
            samples (array of nsamples, or nsamples by nchannels)

        Returns:
            array of the same shape, delayed by `capacity` samples.
        """
        samples = np.asarray(samples, dtype=np.float64)
        output = np.empty_like(samples)
        for n, sample in enumerate(samples):
            output[n] = self.shift(sample if samples.ndim > 1 else float(sample))
        return output
