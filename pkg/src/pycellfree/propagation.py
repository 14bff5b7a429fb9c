"""Large-scale fading, noise normalization and channel estimation quality.

Path gains follow a three-slope law around the Hata-COST231 constant, with
uncorrelated log-normal shadowing applied at every distance. Everything
downstream consumes linear quantities; dB only appears at the boundary.
"""
import logging

import numpy as np
from scipy import constants

from pycellfree.exceptions import InvalidArgument
from pycellfree.utils import (as_matrix, db_to_linear, linear_to_db,
                              mhz_to_hz, mw_to_watts)

# Noise temperature, Kelvin.
NOISE_TEMPERATURE = 290.0
# Boltzmann constant, J/K (exact since the 2019 SI redefinition).
BOLTZMANN = constants.k


class PropagationParams(object):
    """Parameters of the three-slope Hata-COST231 path-loss model."""
    def __init__(self, frequency_mhz=2000.0, h_ap=5.0, h_ue=1.65, d0=10.0,
                 d1=50.0, sigma_sh=8.0, distance_unit=1000.0):
        """Initializer.

        :param frequency_mhz: Carrier frequency, in MHz.
        :type frequency_mhz: ``float``
        :param h_ap: AP antenna height, in meters.
        :type h_ap: ``float``
        :param h_ue: UE antenna height, in meters.
        :type h_ue: ``float``
        :param d0: Distance (meters) below which the loss is flat.
        :type d0: ``float``
        :param d1: Distance (meters) above which the exponent is 3.5.
        :type d1: ``float``
        :param sigma_sh: Shadow-fading standard deviation, in dB.
        :type sigma_sh: ``float``
        :param distance_unit: Meters per unit of the log-distance terms.
            The Hata-COST231 law is calibrated for kilometers (1000);
            use 1 to evaluate the logarithms directly in meters.
        :type distance_unit: ``float``
        """
        if not frequency_mhz > 0:
            raise InvalidArgument("Carrier frequency must be positive")
        if not (h_ap > 0 and h_ue > 0):
            raise InvalidArgument("Antenna heights must be positive")
        if not 0 < d0 < d1:
            raise InvalidArgument("Breakpoints must satisfy 0 < d0 < d1, "
                                  "got d0={}, d1={}".format(d0, d1))
        if sigma_sh < 0:
            raise InvalidArgument("Shadowing std must be non-negative")
        if not distance_unit > 0:
            raise InvalidArgument("Distance unit must be positive")
        self.frequency_mhz = float(frequency_mhz)
        self.h_ap = float(h_ap)
        self.h_ue = float(h_ue)
        self.d0 = float(d0)
        self.d1 = float(d1)
        self.sigma_sh = float(sigma_sh)
        self.distance_unit = float(distance_unit)

    @classmethod
    def reference(cls):
        """The reference urban scenario: 2 GHz, 5 m APs, 1.65 m UEs,
        breakpoints at 10 and 50 m and 8 dB shadowing."""
        return cls()

    def __repr__(self):
        args = ", ".join("{}={}".format(k, v) for k, v in vars(self).items())
        return "PropagationParams({})".format(args)


class RadioConfig(object):
    """Bandwidth, noise and radiated powers, plus the normalized SNRs.

    Each normalized SNR is the radiated power (times the antenna gain)
    divided by the noise power.
    """
    def __init__(self, bandwidth, noise_figure, p_d, p_dp, p_u, p_up,
                 antenna_gain_db=0.0):
        """Initializer.

        :param bandwidth: Bandwidth B, in Hz.
        :param noise_figure: Noise figure, in dB.
        :param p_d: AP data power, in watts.
        :param p_dp: AP (downlink) pilot power, in watts.
        :param p_u: UE data power, in watts.
        :param p_up: UE (uplink) pilot power, in watts.
        :param antenna_gain_db: Antenna gain, in dBi.
        """
        if not bandwidth > 0:
            raise InvalidArgument("Bandwidth must be positive")
        for name, power in (("p_d", p_d), ("p_dp", p_dp), ("p_u", p_u),
                            ("p_up", p_up)):
            if not power > 0:
                raise InvalidArgument("Radiated power {} must be positive, "
                                      "got {}".format(name, power))
        self.bandwidth = float(bandwidth)
        self.noise_figure = float(noise_figure)
        self.p_d = float(p_d)
        self.p_dp = float(p_dp)
        self.p_u = float(p_u)
        self.p_up = float(p_up)
        self.antenna_gain_db = float(antenna_gain_db)

    @classmethod
    def from_units(cls, bandwidth_mhz=20.0, noise_figure=9.0,
                   ap_power_mw=200.0, ue_power_mw=100.0, antenna_gain_db=0.0):
        """Build a config from MHz, dB and mW, with equal data/pilot powers."""
        return cls(bandwidth=mhz_to_hz(bandwidth_mhz),
                   noise_figure=noise_figure,
                   p_d=mw_to_watts(ap_power_mw),
                   p_dp=mw_to_watts(ap_power_mw),
                   p_u=mw_to_watts(ue_power_mw),
                   p_up=mw_to_watts(ue_power_mw),
                   antenna_gain_db=antenna_gain_db)

    @property
    def noise_power(self):
        return noise_power(self.bandwidth, self.noise_figure)

    def _normalize(self, power):
        return power * float(db_to_linear(self.antenna_gain_db)) / \
            self.noise_power

    @property
    def rho_d(self):
        return self._normalize(self.p_d)

    @property
    def rho_dp(self):
        return self._normalize(self.p_dp)

    @property
    def rho_u(self):
        return self._normalize(self.p_u)

    @property
    def rho_up(self):
        return self._normalize(self.p_up)

    def __repr__(self):
        return ("RadioConfig(B={}, NF={}, rho_d={:.4g}, rho_up={:.4g})"
                .format(self.bandwidth, self.noise_figure, self.rho_d,
                        self.rho_up))


def cost231_constant(params):
    """The Hata-COST231 constant L, in dB.

    :param params: Propagation parameters (frequency in MHz, heights in m).
    :type params: :py:class:`PropagationParams`

    :rtype: ``float``
    """
    log_f = np.log10(params.frequency_mhz)
    return float(46.3 + 33.9 * log_f
                 - (1.1 * log_f - 0.7) * params.h_ue
                 - 13.82 * np.log10(params.h_ap)
                 + (1.56 * log_f - 0.8))


def path_loss_db(d, L, params):
    """Three-slope path gain (a negative dB value) at distance(s) d.

    The exponent is 3.5 beyond d1, 2 between d0 and d1, and 0 at or
    below d0. The law is continuous at both breakpoints.

    :param d: Distance(s) in meters.
    :type d: ``float`` or ``numpy.ndarray``
    :param L: The Hata-COST231 constant, in dB.
    :type L: ``float``
    :param params: Breakpoints and distance unit.
    :type params: :py:class:`PropagationParams`

    :rtype: ``float`` or ``numpy.ndarray``
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise InvalidArgument("Distances must be non-negative")
    unit = params.distance_unit
    log_d1 = np.log10(params.d1 / unit)
    log_d0 = np.log10(params.d0 / unit)
    # Clip so that log10 stays finite on the branches np.where discards.
    log_d = np.log10(np.maximum(d, params.d0) / unit)
    far = -L - 35.0 * log_d
    mid = -L - 15.0 * log_d1 - 20.0 * log_d
    near = -L - 15.0 * log_d1 - 20.0 * log_d0
    result = np.where(d > params.d1, far, np.where(d > params.d0, mid, near))
    if result.ndim == 0:
        return float(result)
    return result


def large_scale_fading(deployment, params, L, rng):
    """Draw the M x K matrix of linear path gains beta.

    beta_mk = 10^(PL_mk / 10) * 10^(sigma_sh * z_mk / 10), with z_mk
    i.i.d. standard normal and PL_mk evaluated at wrap-around distances.

    :param deployment: AP/UE positions.
    :type deployment: :py:class:`pycellfree.geometry.Deployment`
    :param params: Propagation parameters.
    :type params: :py:class:`PropagationParams`
    :param L: The Hata-COST231 constant, in dB.
    :type L: ``float``
    :param rng: The random stream to draw shadowing from.
    :type rng: :py:class:`numpy.random.Generator`

    :rtype: ``numpy.ndarray``
    """
    pl_db = path_loss_db(deployment.distances, L, params)
    z = rng.standard_normal(pl_db.shape)
    return db_to_linear(pl_db + params.sigma_sh * z)


def noise_power(bandwidth, noise_figure):
    """Thermal noise power B * k_B * T_0 * NF, in watts.

    :param bandwidth: Bandwidth, in Hz.
    :param noise_figure: Noise figure, in dB.
    """
    if not bandwidth > 0:
        raise InvalidArgument("Bandwidth must be positive")
    return bandwidth * BOLTZMANN * NOISE_TEMPERATURE * \
        float(db_to_linear(noise_figure))


def estimate_quality(beta, tau_up, rho_up, num_ues=None, orthogonal=True):
    """Variance gamma of the MMSE uplink channel estimates.

    gamma_mk = tau_up rho_up beta_mk^2 / (tau_up rho_up beta_mk + 1).

    :param beta: M x K linear path gains.
    :type beta: ``numpy.ndarray``
    :param tau_up: Uplink pilot length, in symbols.
    :type tau_up: ``int``
    :param rho_up: Normalized uplink pilot SNR.
    :type rho_up: ``float``
    :param num_ues: Number of UEs sharing the pilot book (defaults to the
                    number of columns of beta).
    :type num_ues: ``int`` or ``NoneType``
    :param orthogonal: Require mutually orthogonal pilots, i.e.
                       tau_up >= K.
    :type orthogonal: ``bool``

    :rtype: ``numpy.ndarray``
    """
    beta = as_matrix(beta, "beta")
    if tau_up < 1:
        raise InvalidArgument("Uplink pilot length must be >= 1, got {}"
                              .format(tau_up))
    if not rho_up > 0:
        raise InvalidArgument("Uplink pilot SNR must be positive")
    num_ues = beta.shape[1] if num_ues is None else num_ues
    if orthogonal and tau_up < num_ues:
        raise InvalidArgument("Orthogonal uplink pilots need tau_up >= K "
                              "(tau_up={}, K={})".format(tau_up, num_ues))
    snr = tau_up * rho_up * beta
    # Written as beta times a ratio <= 1 so rounding never pushes gamma
    # above beta.
    return beta * (snr / (snr + 1.0))


def draw_small_scale(beta, rng):
    """Draw g_mk = sqrt(beta_mk) h_mk with h_mk ~ CN(0, 1) i.i.d.

    :rtype: :py:class:`SmallScaleRealization`
    """
    beta = as_matrix(beta, "beta")
    h = (rng.standard_normal(beta.shape) +
         1j * rng.standard_normal(beta.shape)) / np.sqrt(2.0)
    return SmallScaleRealization(np.sqrt(beta) * h)


class SmallScaleRealization(object):
    """One draw of the M x K complex channel gains."""
    def __init__(self, g):
        self.g = np.asarray(g, dtype=complex)

    @property
    def channel_power(self):
        """Per-UE total channel power sum_m |g_mk|^2."""
        return np.sum(np.abs(self.g) ** 2, axis=0)


class LargeScaleState(object):
    """Path gains beta and estimate qualities gamma of one realization."""
    def __init__(self, beta, gamma):
        self.beta = as_matrix(beta, "beta").copy()
        self.gamma = as_matrix(gamma, "gamma", shape=self.beta.shape).copy()
        if np.any(self.gamma > self.beta):
            raise InvalidArgument("Estimate quality gamma can't exceed beta")
        self.beta.setflags(write=False)
        self.gamma.setflags(write=False)

    @property
    def shape(self):
        return self.beta.shape

    def __repr__(self):
        return "LargeScaleState(M={}, K={})".format(*self.shape)

    @classmethod
    def draw(cls, deployment, params, radio, tau_up, rng, orthogonal=True):
        """Draw shadowed path gains for a deployment and derive gamma."""
        L = cost231_constant(params)
        beta = large_scale_fading(deployment, params, L, rng)
        logging.debug("Drew beta for {}: median {:.2f} dB"
                      .format(deployment,
                              float(linear_to_db(np.median(beta)))))
        gamma = estimate_quality(beta, tau_up, radio.rho_up,
                                 orthogonal=orthogonal)
        return cls(beta, gamma)
