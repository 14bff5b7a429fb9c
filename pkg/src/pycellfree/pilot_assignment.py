"""Utility-based downlink pilot assignment.

Every UE gets a pilot utility built from large-scale quantities only. The
UEs with the highest utility get an orthogonal downlink pilot and decode
with instantaneous CSI; the others decode with statistical CSI. The three
schemes compared are:

* ``scsi``: no downlink pilots at all,
* ``icsi``: a downlink pilot for every UE,
* ``ubpa``: ``tau_dp`` pilots for the UEs that need them most.
"""
import logging

import numpy as np

from pycellfree.exceptions import InvalidArgument
from pycellfree.power_control import PowerCoefficients
from pycellfree.rates import (DEFAULT_QUADRATURE_NODES, SCHEME_KINDS,
                              FrameConfig, RateReport, ahat_stats,
                              channel_hardening_degree, interference_terms,
                              net_throughput, rate_icsi, rate_scsi)
from pycellfree.utils import as_vector

VARIANTS = (
    "chd_additive",
    "chd_multiplicative",
    "abs_rate",
    "abs_throughput",
    "rel_rate",
    "rel_throughput",
    "inverse_rate",
)
VARIANT_ALIASES = {
    "chd_add": "chd_additive",
    "chd_mul": "chd_multiplicative",
}

_CHD_VARIANTS = ("chd_additive", "chd_multiplicative")
_RATE_VARIANTS = ("abs_rate", "rel_rate", "inverse_rate")
_THROUGHPUT_VARIANTS = ("abs_throughput", "rel_throughput")


def canonical_variant(name):
    """Resolve a utility variant name, accepting the short aliases."""
    name = VARIANT_ALIASES.get(name, name)
    if name not in VARIANTS:
        raise InvalidArgument("Unknown pilot utility {}; expected one of {}"
                              .format(repr(name), ", ".join(
                                  VARIANTS + tuple(VARIANT_ALIASES))))
    return name


def _unit_interval(values, name):
    if np.any(values < 0) or np.any(values > 1):
        raise InvalidArgument("{} must lie in [0, 1]".format(name))
    return values


class Selection(object):
    """How many UEs get a downlink pilot.

    Either every UE whose utility exceeds a threshold, or a fixed number
    (the budget) of highest-utility UEs. A budget of None means "as many
    as there are downlink pilots".
    """
    def __init__(self, mode, value=None):
        if mode not in ("threshold", "budget"):
            raise InvalidArgument("Selection mode must be threshold or "
                                  "budget, got {}".format(repr(mode)))
        if mode == "threshold" and value is None:
            raise InvalidArgument("Threshold selection needs a threshold")
        if mode == "budget" and value is not None and \
                (int(value) != value or value < 0):
            raise InvalidArgument("Budget must be a non-negative integer, "
                                  "got {}".format(value))
        self.mode = mode
        self.value = value

    @classmethod
    def threshold(cls, value):
        return cls("threshold", float(value))

    @classmethod
    def budget(cls, count=None):
        return cls("budget", None if count is None else int(count))

    def __repr__(self):
        return "Selection.{}({})".format(self.mode, self.value)


class UtilityConfig(object):
    """Pilot utility variant, its weight w, priorities and Doppler spreads.
    """
    def __init__(self, variant="abs_rate", w=0.0, alpha=1.0, doppler=0.0,
                 selection=None):
        """Initializer.

        :param variant: One of ``VARIANTS`` (or an alias).
        :type variant: ``str``
        :param w: Weight of the Doppler term, in [0, 1].
        :type w: ``float``
        :param alpha: Per-UE priority, in [0, 1]. A scalar applies to all.
        :type alpha: ``float`` or array-like
        :param doppler: Per-UE normalized Doppler spread, in [0, 1].
        :type doppler: ``float`` or array-like
        :param selection: Selection rule, budget = tau_dp by default.
        :type selection: :py:class:`Selection`
        """
        self.variant = canonical_variant(variant)
        if not 0 <= w <= 1:
            raise InvalidArgument("Weight w must lie in [0, 1], got {}"
                                  .format(w))
        self.w = float(w)
        self.alpha = _unit_interval(as_vector(alpha, "alpha"), "alpha")
        self.doppler = _unit_interval(as_vector(doppler, "doppler"),
                                      "doppler")
        self.selection = selection or Selection.budget()

    @classmethod
    def uniform(cls, num_ues, variant="abs_rate", w=0.0, alpha=1.0,
                doppler=0.0, selection=None):
        """Same priority and Doppler spread for all ``num_ues`` UEs."""
        return cls(variant, w, np.full(num_ues, float(alpha)),
                   np.full(num_ues, float(doppler)), selection)

    def priorities(self, num_ues):
        return as_vector(self.alpha, "alpha", num_ues)

    def doppler_spreads(self, num_ues):
        return as_vector(self.doppler, "doppler", num_ues)

    def __repr__(self):
        return "UtilityConfig({}, w={}, {})".format(self.variant, self.w,
                                                    self.selection)


class PilotUtility(object):
    """Per-UE utilities, plus a mask of UEs whose utility was undefined
    (and was set to +inf)."""
    def __init__(self, values, undefined=None):
        self.values = as_vector(values, "utility")
        if undefined is None:
            undefined = np.zeros(len(self.values), dtype=bool)
        self.undefined = np.asarray(undefined, dtype=bool)

    def __len__(self):
        return len(self.values)


class Assignment(object):
    """The UEs that get an orthogonal downlink pilot."""
    def __init__(self, pilot_ues, tau_dp):
        self.pilot_ues = frozenset(int(k) for k in pilot_ues)
        if len(self.pilot_ues) > tau_dp:
            raise InvalidArgument("{} UEs selected for {} downlink pilots"
                                  .format(len(self.pilot_ues), tau_dp))
        self.tau_dp = tau_dp

    def mask(self, num_ues):
        selected = np.zeros(num_ues, dtype=bool)
        selected[sorted(self.pilot_ues)] = True
        return selected

    def __len__(self):
        return len(self.pilot_ues)

    def __repr__(self):
        return "Assignment({})".format(sorted(self.pilot_ues))


class SchemeSpec(object):
    """A pilot-assignment scheme and the frame it runs with."""
    def __init__(self, kind, frame):
        if kind not in SCHEME_KINDS:
            raise InvalidArgument("Unknown scheme {}".format(repr(kind)))
        if kind == "scsi" and frame.tau_dp != 0:
            raise InvalidArgument("sCSI sends no downlink pilots")
        if kind == "ubpa" and frame.tau_dp == 0:
            raise InvalidArgument("ubPA with tau_dp=0 is sCSI")
        self.kind = kind
        self.frame = frame

    @classmethod
    def build(cls, kind, tau, tau_up, tau_dp, num_ues):
        return cls(kind, FrameConfig.for_scheme(kind, tau, tau_up, tau_dp,
                                                num_ues))

    def __repr__(self):
        return "SchemeSpec({}, {})".format(self.kind, self.frame)


def _require(name, value, variant, num_ues=None):
    if value is None:
        raise InvalidArgument("Utility {} needs {}".format(variant, name))
    return as_vector(value, name, num_ues)


def pilot_utility(cfg, chd=None, r_scsi=None, r_icsi=None, t_scsi=None,
                  t_icsi=None):
    """Pilot utility of every UE.

    Only the inputs the variant uses are required: ``chd`` for the
    hardening-based variants, both rates for the rate variants and both
    throughputs for the throughput variants. Where a ratio's denominator
    is zero the UE's utility is +inf and it is flagged as undefined: a UE
    with nothing to lose from a pilot needs one the most.

    :param cfg: Variant, weight, priorities and Doppler spreads.
    :type cfg: :py:class:`UtilityConfig`

    :rtype: :py:class:`PilotUtility`
    """
    variant = cfg.variant
    if variant in _CHD_VARIANTS:
        channel = 1.0 - _require("chd", chd, variant)
    elif variant in _RATE_VARIANTS:
        if variant == "inverse_rate":
            low = _require("r_scsi", r_scsi, variant)
            high = None
        else:
            low = _require("r_scsi", r_scsi, variant)
            high = _require("r_icsi", r_icsi, variant, len(low))
    else:
        low = _require("t_scsi", t_scsi, variant)
        high = _require("t_icsi", t_icsi, variant, len(low))
    num_ues = len(channel) if variant in _CHD_VARIANTS else len(low)
    undefined = np.zeros(num_ues, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant in ("abs_rate", "abs_throughput"):
            channel = high - low
        elif variant in ("rel_rate", "rel_throughput"):
            undefined = high == 0
            channel = (high - low) / high
        elif variant == "inverse_rate":
            undefined = low == 0
            channel = 1.0 / low
    alpha = cfg.priorities(num_ues)
    doppler = cfg.doppler_spreads(num_ues)
    mixed = cfg.w * doppler + (1.0 - cfg.w) * channel
    if variant == "chd_additive":
        values = mixed + alpha
    else:
        values = alpha * mixed
    if np.any(undefined):
        logging.warning("Pilot utility {} undefined for UE(s) {}; using +inf"
                        .format(variant, ", ".join(
                            str(k) for k in np.flatnonzero(undefined))))
        values = np.where(undefined, np.inf, values)
    return PilotUtility(values, undefined)


def select_ues(utility, selection, tau_dp):
    """Choose the UEs that get a downlink pilot.

    Threshold mode takes every UE with utility strictly above the
    threshold, keeping the ``tau_dp`` best if there are more. Budget mode
    takes exactly ``budget`` UEs. Ties go to the lowest UE index.

    :param utility: Per-UE utilities.
    :type utility: :py:class:`PilotUtility` or array-like
    :param selection: The selection rule.
    :type selection: :py:class:`Selection`
    :param tau_dp: Number of downlink pilots available.
    :type tau_dp: ``int``

    :rtype: :py:class:`Assignment`

    :raises: :py:class:`InvalidArgument` if the budget exceeds ``tau_dp``
             or the number of UEs.
    """
    if isinstance(utility, PilotUtility):
        utility = utility.values
    utility = as_vector(utility, "utility")
    if np.any(np.isnan(utility)):
        raise InvalidArgument("Pilot utilities can't be NaN")
    # Stable sort on the negated values keeps lower indices first on ties.
    order = np.argsort(-utility, kind="stable")
    if selection.mode == "budget":
        count = tau_dp if selection.value is None else selection.value
        if count > tau_dp:
            raise InvalidArgument("Budget {} exceeds the {} downlink pilots"
                                  .format(count, tau_dp))
        if count > len(utility):
            raise InvalidArgument("Budget {} exceeds the {} UEs"
                                  .format(count, len(utility)))
        chosen = order[:count]
    else:
        above = order[utility[order] > selection.value]
        if len(above) > tau_dp:
            logging.debug("{} UEs above the threshold, keeping the best {}"
                          .format(len(above), tau_dp))
        chosen = above[:tau_dp]
    return Assignment(chosen, tau_dp)


class NetworkRates(object):
    """Rates of one network state (eta, beta, gamma), computed on demand.

    The statistical-CSI rates and the interference terms don't depend on
    the scheme, and the instantaneous-CSI rates only depend on tau_dp, so
    evaluating several schemes on one state shares them.
    """
    def __init__(self, eta, beta, gamma, radio,
                 nodes=DEFAULT_QUADRATURE_NODES):
        if not isinstance(eta, PowerCoefficients):
            eta = PowerCoefficients(eta)
        self.eta = eta
        self.beta = np.asarray(beta, dtype=float)
        self.gamma = np.asarray(gamma, dtype=float)
        self.radio = radio
        self.nodes = nodes
        # Built lazily.
        self._terms = None
        self._r_scsi = None
        self._r_icsi = {}
        self._chd = None

    @property
    def num_ues(self):
        return self.beta.shape[1]

    @property
    def terms(self):
        if self._terms is None:
            self._terms = interference_terms(self.eta, self.beta, self.gamma)
        return self._terms

    @property
    def r_scsi(self):
        if self._r_scsi is None:
            self._r_scsi = rate_scsi(self.eta, self.beta, self.gamma,
                                     self.radio.rho_d)
        return self._r_scsi

    @property
    def chd(self):
        if self._chd is None:
            self._chd = channel_hardening_degree(self.beta)
        return self._chd

    def r_icsi(self, tau_dp):
        """Instantaneous-CSI rates with downlink pilots of ``tau_dp``
        symbols."""
        if tau_dp not in self._r_icsi:
            ahat = ahat_stats(self.eta, self.gamma, self.terms.self_terms,
                              tau_dp, self.radio.rho_dp)
            self._r_icsi[tau_dp] = rate_icsi(ahat, self.terms,
                                             self.radio.rho_d, tau_dp,
                                             self.radio.rho_dp, self.nodes)
        return self._r_icsi[tau_dp]

    def utility(self, cfg, frame):
        """Pilot utilities for a ubPA scheme running with ``frame``."""
        kwargs = {}
        if cfg.variant in _CHD_VARIANTS:
            kwargs["chd"] = self.chd
        elif cfg.variant in _RATE_VARIANTS:
            kwargs["r_scsi"] = self.r_scsi
            kwargs["r_icsi"] = self.r_icsi(frame.tau_dp)
        else:
            # Each rate paired with the frame of the scheme that achieves it.
            scsi_frame = FrameConfig.for_scheme(
                "scsi", frame.tau, frame.tau_up, 0, self.num_ues)
            icsi_frame = FrameConfig.for_scheme(
                "icsi", frame.tau, frame.tau_up, self.num_ues, self.num_ues)
            bandwidth = self.radio.bandwidth
            kwargs["t_scsi"] = net_throughput(self.r_scsi, scsi_frame,
                                              bandwidth)
            kwargs["t_icsi"] = net_throughput(self.r_icsi(frame.tau_dp),
                                              icsi_frame, bandwidth)
        return pilot_utility(cfg, **kwargs)


def _report(spec, rates, radio, selected=None):
    throughputs = net_throughput(rates, spec.frame, radio.bandwidth)
    return RateReport(spec.kind, rates, throughputs, spec.frame.tau_p,
                      selected)


def evaluate_network(spec, network, cfg):
    """Evaluate a scheme on precomputed :py:class:`NetworkRates`."""
    if spec.kind == "scsi":
        return _report(spec, network.r_scsi, network.radio)
    if spec.frame.tau_dp > network.num_ues:
        raise InvalidArgument("{} downlink pilots for {} UEs"
                              .format(spec.frame.tau_dp, network.num_ues))
    if spec.kind == "icsi":
        if spec.frame.tau_dp != network.num_ues:
            raise InvalidArgument("iCSI needs tau_dp = K")
        return _report(spec, network.r_icsi(spec.frame.tau_dp),
                       network.radio)
    utility = network.utility(cfg, spec.frame)
    assignment = select_ues(utility, cfg.selection, spec.frame.tau_dp)
    logging.debug("ubPA selected {} of {} UEs".format(len(assignment),
                                                      network.num_ues))
    mask = assignment.mask(network.num_ues)
    rates = np.where(mask, network.r_icsi(spec.frame.tau_dp),
                     network.r_scsi)
    return _report(spec, rates, network.radio, assignment.pilot_ues)


def evaluate_scheme(spec, eta, beta, gamma, radio, cfg,
                    nodes=DEFAULT_QUADRATURE_NODES):
    """Per-UE rates and net throughputs of one scheme.

    sCSI uses the statistical-CSI rate for everyone and iCSI the
    instantaneous-CSI one. ubPA gives the instantaneous-CSI rate to the
    selected UEs only, but every UE pays the tau_up + tau_dp pilot
    overhead, since the downlink pilot symbols carry no data for anyone.

    :param spec: The scheme and its frame.
    :type spec: :py:class:`SchemeSpec`
    :param eta: Power-control coefficients.
    :type eta: :py:class:`PowerCoefficients`
    :param beta: M x K linear path gains.
    :param gamma: M x K estimate qualities.
    :param radio: Normalized SNRs and bandwidth.
    :type radio: :py:class:`pycellfree.propagation.RadioConfig`
    :param cfg: Pilot utility settings (used by ubPA only).
    :type cfg: :py:class:`UtilityConfig`

    :rtype: :py:class:`pycellfree.rates.RateReport`
    """
    network = NetworkRates(eta, beta, gamma, radio, nodes)
    return evaluate_network(spec, network, cfg)


def evaluate_all(eta, beta, gamma, radio, cfg, tau, tau_up, tau_dp,
                 nodes=DEFAULT_QUADRATURE_NODES, kinds=SCHEME_KINDS):
    """Evaluate several schemes on one network state, sharing the rates.

    :return: Reports keyed by scheme kind, in the order of ``kinds``.
    :rtype: ``dict``
    """
    network = NetworkRates(eta, beta, gamma, radio, nodes)
    reports = {}
    for kind in kinds:
        spec = SchemeSpec.build(kind, tau, tau_up, tau_dp, network.num_ues)
        reports[kind] = evaluate_network(spec, network, cfg)
    return reports
