"""Test empirical CDFs, percentiles and gains."""
import math
import unittest

import numpy as np

from pycellfree.exceptions import InvalidArgument
from pycellfree.experiments.stats import (StatSummary, empirical_cdf,
                                          percentile, percentile_gains,
                                          relative_gain)


class TestPercentile(unittest.TestCase):
    """Tests for percentile and empirical_cdf"""
    def test_median(self):
        self.assertEqual(percentile([3.0, 1.0, 2.0], 50), 2.0)

    def test_interpolates(self):
        self.assertAlmostEqual(percentile([1.0, 2.0, 3.0, 4.0], 50), 2.5)
        self.assertAlmostEqual(percentile([0.0, 10.0], 5), 0.5)

    def test_uniform_samples(self):
        samples = np.random.default_rng(0).uniform(0, 1, 10000)
        self.assertAlmostEqual(percentile(samples, 90), 0.9, delta=0.01)

    def test_single_sample(self):
        summary = StatSummary([4.0])
        self.assertEqual((summary.p5, summary.p50, summary.p90),
                         (4.0, 4.0, 4.0))

    def test_bad_input(self):
        with self.assertRaises(InvalidArgument):
            percentile([], 50)
        with self.assertRaises(InvalidArgument):
            percentile([1.0], 101)
        with self.assertRaises(InvalidArgument):
            empirical_cdf([])

    def test_cdf(self):
        values, probabilities = empirical_cdf([0.3, 0.1, 0.2, 0.2])
        np.testing.assert_array_equal(values, [0.1, 0.2, 0.2, 0.3])
        np.testing.assert_allclose(probabilities, [0.25, 0.5, 0.75, 1.0])
        self.assertTrue(np.all(np.diff(probabilities) > 0))


class TestGains(unittest.TestCase):
    """Tests for relative_gain and percentile_gains"""
    def test_relative_gain(self):
        self.assertAlmostEqual(relative_gain(1.5, 1.0), 0.5)
        self.assertTrue(math.isnan(relative_gain(1.0, 0.0)))

    def test_percentile_gains(self):
        gains = percentile_gains(StatSummary([2.0, 4.0, 6.0]),
                                 StatSummary([1.0, 2.0, 3.0]))
        self.assertEqual(list(gains), ["mean", "p5", "p50", "p90"])
        for stat, gain in gains.items():
            self.assertAlmostEqual(gain, 1.0, msg=stat)
