"""Test achievable rates, channel hardening and net throughput."""
import unittest

import numpy as np

from pycellfree.exceptions import InvalidArgument, UndefinedChannelHardening
from pycellfree.power_control import uniform_power
from pycellfree.rates import (AhatStats, FrameConfig, InterferenceTerms,
                              ahat_stats, channel_hardening_degree,
                              channel_hardening_degree_mc, collocated_chd,
                              interference_terms, net_throughput, rate_icsi,
                              rate_icsi_mc, rate_scsi)


def _network(seed, num_aps=8, num_ues=3):
    rng = np.random.default_rng(seed)
    beta = rng.uniform(0.05, 1.0, (num_aps, num_ues))
    gamma = beta * rng.uniform(0.3, 0.9, (num_aps, num_ues))
    return uniform_power(gamma), beta, gamma


def _random_networks(count):
    """Networks of assorted sizes, from one AP and one UE upwards."""
    sizes = np.random.default_rng(1000).integers(1, [25, 7], (count, 2))
    return [_network(seed, int(m), int(k))
            for seed, (m, k) in enumerate(sizes)]


class TestStatisticalRate(unittest.TestCase):
    """Tests for the interference terms and rate_scsi"""
    def test_varsigma(self):
        terms = interference_terms([[2.0]], [[1.0]], [[0.5]])
        np.testing.assert_allclose(terms.varsigma, [[1.0]])
        self.assertEqual(terms.self_terms[0], 1.0)
        self.assertEqual(terms.cross_terms[0], 0.0)

    def test_cross_terms(self):
        terms = InterferenceTerms([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(terms.self_terms, [1.0, 4.0])
        np.testing.assert_array_equal(terms.cross_terms, [2.0, 3.0])

    def test_rate(self):
        rate = rate_scsi([[1.0]], [[1.0]], [[0.5]], 1.0)
        self.assertAlmostEqual(rate[0], np.log2(1.25))


class TestInstantaneousRate(unittest.TestCase):
    """Tests for ahat_stats and rate_icsi"""
    def test_estimate_variance(self):
        stats = ahat_stats([[1.0]], [[1.0]], [1.0], 1, 1.0)
        self.assertAlmostEqual(stats.mean[0], 1.0)
        self.assertAlmostEqual(stats.variance[0], 0.5)
        stats = ahat_stats([[1.0]], [[1.0]], [1.0], 0, 1.0)
        self.assertEqual(stats.variance[0], 0.0)

    def test_no_pilot_matches_statistical_rate(self):
        """Without downlink pilot energy both rates coincide."""
        for i, (eta, beta, gamma) in enumerate(_random_networks(100)):
            terms = interference_terms(eta, beta, gamma)
            stats = ahat_stats(eta, gamma, terms.self_terms, 1, 1e-9)
            icsi = rate_icsi(stats, terms, 10.0, 1, 1e-9)
            np.testing.assert_allclose(
                icsi, rate_scsi(eta, beta, gamma, 10.0), rtol=0, atol=1e-6,
                err_msg="instance {}".format(i))

    def test_strong_pilot_helps(self):
        for i, (eta, beta, gamma) in enumerate(_random_networks(100)):
            terms = interference_terms(eta, beta, gamma)
            stats = ahat_stats(eta, gamma, terms.self_terms, 3, 1e6)
            icsi = rate_icsi(stats, terms, 10.0, 3, 1e6)
            scsi = rate_scsi(eta, beta, gamma, 10.0)
            self.assertTrue(np.all(icsi >= scsi),
                            "instance {}: {} < {}".format(i, icsi, scsi))

    def test_quadrature_agrees_with_sampling(self):
        terms = InterferenceTerms([[0.02, 0.01], [0.005, 0.03]])
        stats = ahat_stats([[1.0, 1.0]], [[1.0, 0.8]], terms.self_terms,
                           10, 1.0)
        exact = rate_icsi(stats, terms, 10.0, 10, 1.0)
        sampled = rate_icsi_mc(stats, terms, 10.0, 10, 1.0, 200000,
                               np.random.default_rng(0))
        np.testing.assert_allclose(sampled, exact, rtol=1e-3)

    def test_too_few_nodes(self):
        stats = AhatStats([1.0], [0.1])
        with self.assertRaises(InvalidArgument):
            rate_icsi(stats, [[0.2]], 1.0, 1, 1.0, nodes=1)


class TestChannelHardening(unittest.TestCase):
    """Tests for the channel hardening degree"""
    def test_two_equal_aps(self):
        self.assertAlmostEqual(channel_hardening_degree([[1.0], [1.0]])[0],
                               0.5)

    def test_one_dominant_ap(self):
        self.assertAlmostEqual(channel_hardening_degree([[1.0], [0.01]])[0],
                               1 - 1.0001 / 1.0201, places=12)

    def test_collocated(self):
        chd = channel_hardening_degree(np.ones((200, 2)))
        np.testing.assert_allclose(chd, [0.995, 0.995])
        self.assertAlmostEqual(collocated_chd(200), 0.995)
        self.assertEqual(collocated_chd(1), 0.0)

    def test_single_ap(self):
        self.assertEqual(channel_hardening_degree([[3e-12, 1e-9]]).tolist(),
                         [0.0, 0.0])

    def test_scale_invariant(self):
        beta = np.random.default_rng(2).uniform(0, 1, (10, 4))
        np.testing.assert_allclose(channel_hardening_degree(beta * 1e-12),
                                   channel_hardening_degree(beta))

    def test_all_zero_column(self):
        with self.assertRaises(UndefinedChannelHardening) as ctx:
            channel_hardening_degree([[1.0, 0.0], [1.0, 0.0]])
        self.assertEqual(ctx.exception.ues, [1])

    def test_sampled_estimate(self):
        beta = np.array([[1.0, 1.0], [1.0, 0.5], [1.0, 0.5], [1.0, 0.25]])
        estimate = channel_hardening_degree_mc(beta, 1000000,
                                               np.random.default_rng(4))
        np.testing.assert_allclose(estimate, channel_hardening_degree(beta),
                                   rtol=0.01)

    def test_sampled_estimate_many_aps(self):
        rng = np.random.default_rng(5)
        beta = rng.uniform(0, 1, (50, 1)) ** 4
        estimate = channel_hardening_degree_mc(beta, 200000, rng)
        np.testing.assert_allclose(estimate, channel_hardening_degree(beta),
                                   rtol=0.01)


class TestFrame(unittest.TestCase):
    """Tests for FrameConfig and net_throughput"""
    def test_scheme_frames(self):
        self.assertEqual(FrameConfig.for_scheme("scsi", 200, 50, 25, 50)
                         .tau_p, 50)
        self.assertEqual(FrameConfig.for_scheme("icsi", 200, 50, 25, 50)
                         .tau_p, 100)
        self.assertEqual(FrameConfig.for_scheme("ubpa", 200, 50, 25, 50)
                         .tau_p, 75)

    def test_ubpa_needs_pilots(self):
        with self.assertRaises(InvalidArgument):
            FrameConfig.for_scheme("ubpa", 200, 50, 0, 50)
        with self.assertRaises(InvalidArgument):
            FrameConfig.for_scheme("ubpa", 200, 50, 51, 50)

    def test_data_split(self):
        """Pilots, then the rest split evenly between DL and UL data."""
        frame = FrameConfig(201, 50, 25)
        self.assertEqual(frame.tau_dd, 63.0)
        self.assertEqual(frame.tau_ud, 63.0)
        self.assertEqual(frame.tau_p + frame.tau_dd + frame.tau_ud, 201)
        self.assertAlmostEqual(frame.overhead_factor, 126.0 / 201)
        np.testing.assert_allclose(net_throughput([2.0], frame, 20e6),
                                   [20e6 * 63.0 / 201 * 2.0])

    def test_pilots_must_fit(self):
        with self.assertRaises(InvalidArgument):
            FrameConfig(100, 60, 50)

    def test_throughput(self):
        frame = FrameConfig(200, 50, 50)
        np.testing.assert_allclose(net_throughput([1.0], frame, 20e6), [5e6])

    def test_no_pilots(self):
        frame = FrameConfig(200, 0, 0)
        np.testing.assert_allclose(net_throughput([2.0], frame, 20e6),
                                   [20e6])

    def test_pilots_fill_frame(self):
        frame = FrameConfig(200, 150, 50)
        np.testing.assert_array_equal(net_throughput([3.0], frame, 20e6),
                                      [0.0])


class TestRateProperties(unittest.TestCase):
    """Limits and monotonicity of the rates"""
    def test_no_power(self):
        eta, beta, gamma = _network(1)
        zero = np.zeros_like(eta.eta)
        np.testing.assert_array_equal(
            interference_terms(zero, beta, gamma).varsigma,
            np.zeros((3, 3)))
        np.testing.assert_array_equal(rate_scsi(zero, beta, gamma, 10.0),
                                      np.zeros(3))

    def test_perfect_estimate_limit(self):
        stats = ahat_stats([[1.0]], [[1.0]], [0.3], 1, 1e12)
        self.assertAlmostEqual(stats.variance[0], 0.3, places=9)

    def test_constant_estimate(self):
        """Without uncertainty the expectation is the plain log."""
        terms = InterferenceTerms([[0.2, 0.1], [0.3, 0.4]])
        stats = AhatStats([1.0, 2.0], [0.0, 0.0])
        denominator = 10.0 * np.array([0.2, 0.4]) / np.array([1.5, 2.0]) + \
            10.0 * np.array([0.1, 0.3]) + 1.0
        expected = np.log2(1.0 + 10.0 * np.array([1.0, 4.0]) / denominator)
        np.testing.assert_allclose(rate_icsi(stats, terms, 10.0, 1, 2.5),
                                   expected)
        sampled = rate_icsi_mc(stats, terms, 10.0, 0, 2.5, 10,
                               np.random.default_rng(0))
        no_pilot = np.log2(1.0 + 10.0 * np.array([1.0, 4.0]) /
                           (10.0 * np.array([0.3, 0.7]) + 1.0))
        np.testing.assert_allclose(sampled, no_pilot)

    def test_more_pilot_energy_helps(self):
        eta, beta, gamma = _network(2)
        terms = interference_terms(eta, beta, gamma)
        rates = []
        for c in (0.0, 0.1, 1.0, 10.0, 100.0):
            stats = ahat_stats(eta, gamma, terms.self_terms, 1, c)
            rates.append(rate_icsi(stats, terms, 10.0, 1, c))
        self.assertTrue(np.all(np.diff(rates, axis=0) >= -1e-6))

    def test_statistical_rate_grows_with_snr(self):
        eta, beta, gamma = _network(3, num_ues=1)
        rates = [rate_scsi(eta, beta, gamma, rho)[0]
                 for rho in (0.1, 1.0, 10.0, 100.0)]
        self.assertTrue(np.all(np.diff(rates) > 0))

    def test_appending_mean_ap_hardens(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            beta = rng.uniform(0, 1, (int(rng.integers(1, 30)), 1))
            longer = np.vstack([beta, [[beta.mean()]]])
            self.assertGreaterEqual(channel_hardening_degree(longer)[0],
                                    channel_hardening_degree(beta)[0] -
                                    1e-12)

    def test_throughput_linear(self):
        frame = FrameConfig(200, 50, 25)
        one = net_throughput([1.0, 2.0], frame, 10e6)
        np.testing.assert_allclose(net_throughput([2.0, 4.0], frame, 10e6),
                                   2 * one)
        np.testing.assert_allclose(net_throughput([1.0, 2.0], frame, 30e6),
                                   3 * one)
