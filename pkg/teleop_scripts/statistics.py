"""Error metric and rank statistics for comparing estimators."""

import math
from collections import namedtuple

import numpy as np
from scipy.stats import distributions, rankdata, tiecorrect

from .errors import EmptySampleError, UndefinedReferenceError

RankSumResult = namedtuple('RankSumResult', ('statistic', 'pvalue'))

EXACT_LIMIT = 20


def ape(k_est, k_ref):
    """Absolute percentage error of an estimate against the reference stiffness."""
    if k_ref == 0 or not math.isfinite(k_ref):
        raise UndefinedReferenceError(f"reference stiffness must be finite and non-zero, got {k_ref!r}")
    return abs(k_est - k_ref) / abs(k_ref) * 100.0


def median_iqr(values):
    """Median and interquartile range (linear interpolation between order statistics)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptySampleError("cannot summarise an empty sample")
    q25, q50, q75 = np.percentile(values, [25.0, 50.0, 75.0])
    return float(q50), float(q75 - q25)


def rank_sum_distribution(doubled_ranks, n_a):
    """
    Count the subsets of size n_a for every possible doubled rank sum.

    Midranks are multiples of 1/2, so doubled ranks are integers and the
    counts are exact. Entry s of the result is the number of subsets whose
    doubled rank sum equals s.
    """
    total = int(sum(doubled_ranks))
    counts = np.zeros((n_a + 1, total + 1), dtype=np.int64)
    counts[0, 0] = 1
    for r in doubled_ranks:
        # Right-hand side is read before the in-place add, so each rank is used once.
        counts[1:, r:] += counts[:-1, :total + 1 - r].copy()
    return counts[n_a]


def _exact_pvalue(ranks, n_a):
    n = ranks.shape[0]
    doubled = [int(round(2.0 * r)) for r in ranks]
    distribution = rank_sum_distribution(doubled, n_a)
    expected = n_a * (n + 1)
    observed = sum(doubled[:n_a])
    deviation = abs(observed - expected)
    sums = np.arange(distribution.shape[0])
    extreme = int(distribution[np.abs(sums - expected) >= deviation].sum())
    return extreme / int(distribution.sum())


def _normal_pvalue(ranks, n_a, n_b, statistic):
    tie = tiecorrect(ranks)
    if tie == 0:
        return 1.0
    n = n_a + n_b
    expected = n_a * (n + 1) / 2.0
    sd = math.sqrt(tie * n_a * n_b * (n + 1) / 12.0)
    z = (abs(statistic - expected) - 0.5) / sd
    return float(min(1.0, 2.0 * distributions.norm.sf(max(z, 0.0))))


def wilcoxon_rank_sum(sample_a, sample_b, exact_limit=EXACT_LIMIT):
    """
    Two-sided Wilcoxon rank-sum test.

    The statistic is the midrank sum of `sample_a` in the pooled sample.
    The p-value is exact, by enumerating every assignment of pooled ranks
    to the two samples, when the pooled size is at most `exact_limit`.
    Larger samples use the tie-corrected normal approximation with a
    continuity correction.
    """
    a = np.asarray(sample_a, dtype=np.float64).ravel()
    b = np.asarray(sample_b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("both samples must be non-empty")

    ranks = rankdata(np.concatenate((a, b)))
    statistic = float(np.sum(ranks[:a.size]))
    if a.size + b.size <= exact_limit:
        pvalue = _exact_pvalue(ranks, a.size)
    else:
        pvalue = _normal_pvalue(ranks, a.size, b.size, statistic)
    return RankSumResult(statistic, pvalue)
