"""Achievable downlink rates, channel hardening and net throughput.

Rates are in bits/s/Hz and throughputs in bits/s. Two rate expressions are
available for every UE: the statistical-CSI one, where the UE decodes with
the mean of its effective channel gain, and the instantaneous-CSI one,
where a downlink pilot gives the UE an estimate of that gain.
"""
import logging

import numpy as np

from pycellfree.exceptions import InvalidArgument, UndefinedChannelHardening
from pycellfree.power_control import (coherent_gain, interference_matrix,
                                      sinr_scsi)
from pycellfree.utils import as_matrix, as_vector

SCHEME_KINDS = ("scsi", "icsi", "ubpa")
DEFAULT_QUADRATURE_NODES = 24


class FrameConfig(object):
    """Split of a TDD coherence interval of ``tau`` symbols.

    The pilot phase takes tau_p = tau_up + tau_dp symbols and the rest is
    shared equally between downlink and uplink data.
    """
    def __init__(self, tau, tau_up, tau_dp):
        """Initializer.

        :param tau: Symbols per coherence interval.
        :type tau: ``int``
        :param tau_up: Uplink pilot symbols.
        :type tau_up: ``int``
        :param tau_dp: Downlink pilot symbols.
        :type tau_dp: ``int``

        :raises: :py:class:`InvalidArgument` if a length is negative or
                 the pilots don't fit in the frame.
        """
        if tau < 1:
            raise InvalidArgument("Frame length must be >= 1, got {}"
                                  .format(tau))
        if tau_up < 0 or tau_dp < 0:
            raise InvalidArgument("Pilot lengths must be non-negative, got "
                                  "tau_up={}, tau_dp={}"
                                  .format(tau_up, tau_dp))
        self.tau = int(tau)
        self.tau_up = int(tau_up)
        self.tau_dp = int(tau_dp)
        if self.tau_p > self.tau:
            raise InvalidArgument("Pilots ({} symbols) don't fit in a frame "
                                  "of {}".format(self.tau_p, self.tau))
        if self.tau_p > self.tau / 2.0:
            logging.warning("Pilots take {} of {} symbols, more than half "
                            "the frame".format(self.tau_p, self.tau))

    @property
    def tau_p(self):
        return self.tau_up + self.tau_dp

    @property
    def tau_dd(self):
        """Downlink data symbols. Not necessarily an integer."""
        return (self.tau - self.tau_p) / 2.0

    @property
    def tau_ud(self):
        """Uplink data symbols, the other half of the data part."""
        return (self.tau - self.tau_p) / 2.0

    @property
    def overhead_factor(self):
        """Fraction of the frame left for data, 1 - tau_p / tau."""
        return (self.tau_dd + self.tau_ud) / self.tau

    def __repr__(self):
        return "FrameConfig(tau={}, tau_up={}, tau_dp={})".format(
            self.tau, self.tau_up, self.tau_dp)

    def __eq__(self, other):
        return isinstance(other, FrameConfig) and \
            (self.tau, self.tau_up, self.tau_dp) == \
            (other.tau, other.tau_up, other.tau_dp)

    def __ne__(self, other):
        return not self == other

    @classmethod
    def for_scheme(cls, kind, tau, tau_up, tau_dp, num_ues):
        """The frame a pilot-assignment scheme runs with.

        sCSI sends no downlink pilot, iCSI sends one to each of the K UEs,
        and ubPA sends ``tau_dp`` of them (0 < tau_dp <= K).
        """
        if kind == "scsi":
            return cls(tau, tau_up, 0)
        elif kind == "icsi":
            return cls(tau, tau_up, num_ues)
        elif kind == "ubpa":
            if not 0 < tau_dp <= num_ues:
                raise InvalidArgument(
                    "ubPA needs 0 < tau_dp <= K, got tau_dp={}, K={}; use "
                    "scsi for tau_dp=0".format(tau_dp, num_ues))
            return cls(tau, tau_up, tau_dp)
        else:
            raise InvalidArgument("Unknown scheme {}; expected one of {}"
                                  .format(repr(kind), ", ".join(SCHEME_KINDS)))


class InterferenceTerms(object):
    """The K x K matrix varsigma, (k, k') = sum_m eta_mk' beta_mk gamma_mk'.
    """
    def __init__(self, varsigma):
        self.varsigma = as_matrix(varsigma, "varsigma")
        if self.varsigma.shape[0] != self.varsigma.shape[1]:
            raise InvalidArgument("varsigma must be square, got shape {}"
                                  .format(self.varsigma.shape))

    @property
    def self_terms(self):
        """varsigma_kk, the beamforming uncertainty of each UE."""
        return np.diag(self.varsigma).copy()

    @property
    def cross_terms(self):
        """sum_{k' != k} varsigma_kk', the multi-user interference."""
        return np.sum(self.varsigma, axis=1) - self.self_terms


def _as_terms(varsigma):
    if isinstance(varsigma, InterferenceTerms):
        return varsigma
    return InterferenceTerms(varsigma)


class AhatStats(object):
    """Mean and variance of the UE-side estimate of its effective gain."""
    def __init__(self, mean, variance):
        self.mean = as_vector(mean, "mean")
        self.variance = as_vector(variance, "variance", len(self.mean))
        if np.any(self.mean < 0) or np.any(self.variance < 0):
            raise InvalidArgument("Estimate mean and variance must be "
                                  "non-negative")


class RateReport(object):
    """Per-UE rates and net throughputs of one scheme on one realization."""
    def __init__(self, scheme, rates, throughputs, tau_p, selected=None):
        self.scheme = scheme
        self.rates = as_vector(rates, "rates")
        self.throughputs = as_vector(throughputs, "throughputs",
                                     len(self.rates))
        if np.any(self.rates < 0) or np.any(self.throughputs < 0):
            raise InvalidArgument("Rates and throughputs must be "
                                  "non-negative")
        self.tau_p = tau_p
        self.selected = None if selected is None else \
            frozenset(int(k) for k in selected)

    @property
    def num_ues(self):
        return len(self.rates)

    @property
    def sum_throughput(self):
        return float(np.sum(self.throughputs))

    @property
    def mean_throughput(self):
        return float(np.mean(self.throughputs))

    def __repr__(self):
        return "RateReport({}, K={}, tau_p={}, sum={:.4g} bit/s)".format(
            self.scheme, self.num_ues, self.tau_p, self.sum_throughput)


def interference_terms(eta, beta, gamma):
    """Compute varsigma for power coefficients ``eta``.

    :rtype: :py:class:`InterferenceTerms`
    """
    beta = as_matrix(beta, "beta")
    gamma = as_matrix(gamma, "gamma", shape=beta.shape)
    return InterferenceTerms(interference_matrix(eta, beta, gamma))


def rate_scsi(eta, beta, gamma, rho_d):
    """Statistical-CSI rate log2(1 + SINR_k) of every UE."""
    return np.log2(1.0 + sinr_scsi(eta, beta, gamma, rho_d))


def _pilot_snr(tau_dp, rho_dp):
    if tau_dp < 0 or rho_dp < 0:
        raise InvalidArgument("Downlink pilot length and SNR must be "
                              "non-negative")
    return float(tau_dp) * float(rho_dp)


def ahat_stats(eta, gamma, varsigma_kk, tau_dp, rho_dp):
    """Gaussian statistics of the UE-side effective gain estimate.

    The mean is sum_m sqrt(eta_mk) gamma_mk. The variance is
    c varsigma_kk^2 / (c varsigma_kk + 1), with c = tau_dp rho_dp.

    :param eta: Power-control coefficients.
    :param gamma: M x K estimate qualities.
    :param varsigma_kk: Per-UE self terms varsigma_kk.
    :param tau_dp: Downlink pilot length.
    :param rho_dp: Normalized downlink pilot SNR.

    :rtype: :py:class:`AhatStats`
    """
    gamma = as_matrix(gamma, "gamma")
    varsigma_kk = as_vector(varsigma_kk, "varsigma_kk", gamma.shape[1])
    c = _pilot_snr(tau_dp, rho_dp)
    snr = c * varsigma_kk
    return AhatStats(coherent_gain(eta, gamma),
                     varsigma_kk * (snr / (snr + 1.0)))


def _icsi_denominator(terms, rho_d, tau_dp, rho_dp):
    """Residual self term plus interference plus noise."""
    c = _pilot_snr(tau_dp, rho_dp)
    own = terms.self_terms
    return rho_d * own / (c * own + 1.0) + rho_d * terms.cross_terms + 1.0


def rate_icsi(ahat, varsigma, rho_d, tau_dp, rho_dp,
              nodes=DEFAULT_QUADRATURE_NODES):
    """Instantaneous-CSI rate E{log2(1 + rho_d |a|^2 / D_k)} of every UE.

    The estimate a is circularly symmetric complex Gaussian around its
    (real) mean. The expectation is a two-dimensional Gauss-Hermite
    quadrature over the real and imaginary parts.

    :param ahat: Statistics of the effective gain estimates.
    :type ahat: :py:class:`AhatStats`
    :param varsigma: Interference terms.
    :type varsigma: :py:class:`InterferenceTerms` or array-like
    :param rho_d: Normalized downlink data SNR.
    :param tau_dp: Downlink pilot length.
    :param rho_dp: Normalized downlink pilot SNR.
    :param nodes: Quadrature nodes per axis.
    :type nodes: ``int``

    :rtype: ``numpy.ndarray``

    :raises: :py:class:`InvalidArgument` if ``nodes`` < 2.
    """
    if nodes < 2:
        raise InvalidArgument("Quadrature needs at least 2 nodes per axis, "
                              "got {}".format(nodes))
    terms = _as_terms(varsigma)
    denominator = _icsi_denominator(terms, rho_d, tau_dp, rho_dp)
    x, w = np.polynomial.hermite.hermgauss(int(nodes))
    sigma = np.sqrt(ahat.variance)[:, None, None]
    real = ahat.mean[:, None, None] + sigma * x[None, :, None]
    imag = sigma * x[None, None, :]
    power = real ** 2 + imag ** 2
    integrand = np.log2(1.0 + rho_d * power /
                        denominator[:, None, None])
    weights = np.outer(w, w) / np.pi
    return np.sum(integrand * weights[None, :, :], axis=(1, 2))


def rate_icsi_mc(ahat, varsigma, rho_d, tau_dp, rho_dp, draws, rng,
                 chunk=100000):
    """Monte-Carlo estimate of :py:func:`rate_icsi`.

    Draws the effective gain a = m + sqrt(varsigma_kk) n and the pilot
    noise w, both with CN(0, 1) parts, and forms the linear MMSE estimate
    (c varsigma_kk a + sqrt(c) varsigma_kk w + m) / (c varsigma_kk + 1).
    """
    if draws < 1:
        raise InvalidArgument("Need at least one draw, got {}".format(draws))
    terms = _as_terms(varsigma)
    denominator = _icsi_denominator(terms, rho_d, tau_dp, rho_dp)
    c = _pilot_snr(tau_dp, rho_dp)
    own = terms.self_terms
    mean = ahat.mean
    num_ues = len(mean)
    total = np.zeros(num_ues)
    done = 0
    while done < draws:
        size = (min(chunk, draws - done), num_ues)
        gain = mean + np.sqrt(own) * _complex_normal(rng, size)
        noise = _complex_normal(rng, size)
        estimate = (c * own * gain + np.sqrt(c) * own * noise + mean) / \
            (c * own + 1.0)
        total += np.sum(np.log2(1.0 + rho_d * np.abs(estimate) ** 2 /
                                denominator), axis=0)
        done += size[0]
    return total / draws


def _complex_normal(rng, size):
    return (rng.standard_normal(size) +
            1j * rng.standard_normal(size)) / np.sqrt(2.0)


def _check_chd_columns(beta):
    dead = np.flatnonzero(np.all(beta == 0, axis=0))
    if dead.size:
        raise UndefinedChannelHardening(dead)


def channel_hardening_degree(beta):
    """Channel hardening degree 1 - sum_m beta_mk^2 / (sum_m beta_mk)^2.

    This is one minus the variance of the channel power sum_m |g_mk|^2
    over its squared mean, under i.i.d. Rayleigh fading.

    :param beta: M x K linear path gains.

    :rtype: ``numpy.ndarray``

    :raises: :py:class:`UndefinedChannelHardening` for an all-zero column.
    """
    beta = as_matrix(beta, "beta")
    _check_chd_columns(beta)
    ratio = np.sum(beta ** 2, axis=0) / np.sum(beta, axis=0) ** 2
    return np.clip(1.0 - ratio, 0.0, 1.0)


def channel_hardening_degree_mc(beta, draws, rng, chunk=None):
    """Sample estimate of the channel hardening degree.

    Draws Rayleigh fading ``draws`` times and returns one minus the sample
    variance of sum_m |g_mk|^2 over its squared sample mean.
    """
    beta = as_matrix(beta, "beta")
    _check_chd_columns(beta)
    if draws < 2:
        raise InvalidArgument("Need at least two draws, got {}".format(draws))
    if chunk is None:
        chunk = max(1, 2 ** 20 // beta.size)
    total = np.zeros(beta.shape[1])
    total_sq = np.zeros(beta.shape[1])
    done = 0
    while done < draws:
        rows = min(chunk, draws - done)
        # |h|^2 of a CN(0, 1) entry is Exp(1).
        fading = rng.standard_exponential((rows,) + beta.shape)
        power = np.sum(beta[None, :, :] * fading, axis=1)
        total += np.sum(power, axis=0)
        total_sq += np.sum(power ** 2, axis=0)
        done += rows
    mean = total / draws
    variance = (total_sq - draws * mean ** 2) / (draws - 1)
    return 1.0 - variance / mean ** 2


def collocated_chd(num_antennas):
    """Hardening degree of M equally strong antennas: 1 - 1/M."""
    if num_antennas < 1:
        raise InvalidArgument("Need at least one antenna")
    return 1.0 - 1.0 / num_antennas


def net_throughput(rate, frame, bandwidth):
    """Per-UE net throughput (B / 2) (1 - tau_p / tau) R_k, in bits/s.

    Half of the bandwidth-time product goes to downlink data.

    :param rate: Per-UE rates, bits/s/Hz.
    :param frame: The frame the scheme runs with.
    :type frame: :py:class:`FrameConfig`
    :param bandwidth: Bandwidth B, in Hz.

    :rtype: ``numpy.ndarray``
    """
    if frame.tau_p > frame.tau:
        raise InvalidArgument("Pilots don't fit in the frame")
    if not bandwidth > 0:
        raise InvalidArgument("Bandwidth must be positive")
    rate = as_vector(rate, "rate")
    return 0.5 * bandwidth * frame.overhead_factor * rate
