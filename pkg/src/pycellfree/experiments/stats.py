"""Empirical CDFs, percentiles and percentile gains."""
from collections import OrderedDict

import numpy as np

from pycellfree.exceptions import InvalidArgument

# Percentiles reported for every metric.
REPORTED_PERCENTILES = (5, 50, 90)


def _samples(values):
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise InvalidArgument("Need at least one sample")
    return values


def empirical_cdf(samples):
    """Sorted samples and the fraction of samples at or below each.

    :param samples: Non-empty sample set.
    :type samples: array-like

    :return: ``(values, probabilities)``, both non-decreasing, the last
             probability being 1.
    :rtype: (``numpy.ndarray``, ``numpy.ndarray``)

    :raises: :py:class:`InvalidArgument` on an empty sample set.
    """
    values = np.sort(_samples(samples))
    return values, np.arange(1, values.size + 1) / float(values.size)


def percentile(samples, p):
    """The p-th percentile, interpolating linearly between order statistics.
    """
    if not 0 <= p <= 100:
        raise InvalidArgument("Percentile must lie in [0, 100], got {}"
                              .format(p))
    return float(np.percentile(_samples(samples), p, method="linear"))


class StatSummary(object):
    """Samples of one metric with their mean and reported percentiles."""
    def __init__(self, samples):
        self.samples = _samples(samples)

    @property
    def mean(self):
        return float(np.mean(self.samples))

    @property
    def p5(self):
        return percentile(self.samples, 5)

    @property
    def p50(self):
        return percentile(self.samples, 50)

    @property
    def p90(self):
        return percentile(self.samples, 90)

    @property
    def cdf(self):
        return empirical_cdf(self.samples)

    def __len__(self):
        return self.samples.size

    def as_dict(self):
        return OrderedDict([("mean", self.mean), ("p5", self.p5),
                            ("p50", self.p50), ("p90", self.p90)])

    def __repr__(self):
        return "StatSummary(n={}, mean={:.4g}, p50={:.4g})".format(
            len(self), self.mean, self.p50)


def relative_gain(candidate, baseline):
    """(candidate - baseline) / baseline; NaN for a zero baseline."""
    if baseline == 0:
        return float("nan")
    return (candidate - baseline) / float(baseline)


def percentile_gains(candidate, baseline):
    """Relative gains of one summary over another at the mean and at the
    reported percentiles.

    :type candidate: :py:class:`StatSummary`
    :type baseline: :py:class:`StatSummary`

    :rtype: ``OrderedDict``
    """
    ours, theirs = candidate.as_dict(), baseline.as_dict()
    return OrderedDict((stat, relative_gain(ours[stat], theirs[stat]))
                       for stat in ours)
