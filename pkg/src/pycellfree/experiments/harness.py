"""Monte-Carlo driver: draws network realizations, evaluates the pilot
assignment schemes on them and aggregates the results.

Realization ``i`` of an experiment with seed ``s`` draws everything from
``numpy.random.default_rng([s, i])``: AP positions, then UE positions,
then shadowing. Realizations can therefore run in any order, on any
number of workers, and still reproduce bit for bit.
"""
from collections import OrderedDict
from functools import partial
from concurrent.futures import ThreadPoolExecutor
from multiprocessing import cpu_count
import logging
import time

import numpy as np

from pycellfree.exceptions import OptimizationFailed
from pycellfree.experiments.stats import StatSummary
from pycellfree.geometry import Deployment
from pycellfree.pilot_assignment import (NetworkRates, SchemeSpec,
                                         evaluate_network)
from pycellfree.power_control import compute_power
from pycellfree.propagation import LargeScaleState
from pycellfree.rates import (SCHEME_KINDS, channel_hardening_degree,
                              collocated_chd)
from pycellfree.utils import format_seconds

# Utility variants compared against each other by default.
COMPARED_METRICS = ("abs_rate", "abs_throughput", "chd_multiplicative")
METRICS = ("sum_throughput_bps", "mean_ue_throughput_bps")


def realization_rng(seed, index):
    """The random stream owned by one realization."""
    return np.random.default_rng([seed, index])


class NetworkState(object):
    """One large-scale realization: deployment, beta, gamma and eta."""
    def __init__(self, index, deployment, large_scale, eta=None):
        self.index = index
        self.deployment = deployment
        self.large_scale = large_scale
        self.eta = eta

    @property
    def beta(self):
        return self.large_scale.beta

    @property
    def gamma(self):
        return self.large_scale.gamma

    def rates(self, cfg):
        """Lazily evaluated rates on this state.

        :rtype: :py:class:`pycellfree.pilot_assignment.NetworkRates`
        """
        return NetworkRates(self.eta, self.beta, self.gamma, cfg.radio(),
                            cfg.quadrature_nodes)

    def __repr__(self):
        return "NetworkState({}, {})".format(self.index, self.deployment)


def draw_network(cfg, index, with_power=True, strict=True):
    """Draw realization ``index`` of an experiment.

    :param cfg: The experiment.
    :type cfg: :py:class:`pycellfree.config.ExperimentConfig`
    :param index: Realization index.
    :type index: ``int``
    :param with_power: Also run power control.
    :type with_power: ``bool``
    :param strict: Require M > K.
    :type strict: ``bool``

    :rtype: :py:class:`NetworkState`

    :raises: :py:class:`OptimizationFailed` from power control, with the
             realization index attached.
    """
    rng = realization_rng(cfg.seed, index)
    deployment = Deployment.draw(cfg.num_aps, cfg.num_ues, cfg.side, rng,
                                 strict=strict)
    large_scale = LargeScaleState.draw(
        deployment, cfg.propagation(), cfg.radio(), cfg.tau_up, rng,
        orthogonal=cfg.orthogonal_pilots)
    eta = None
    if with_power:
        try:
            eta = compute_power(cfg.power_mode, large_scale.beta,
                                large_scale.gamma, cfg.radio().rho_d,
                                cfg.maxmin_settings())
        except OptimizationFailed as err:
            err.realization = index
            raise
    return NetworkState(index, deployment, large_scale, eta)


class RealizationResult(object):
    """Reports of every evaluated scheme on one realization, plus ChD."""
    def __init__(self, index, reports, chd, state=None):
        """Initializer.

        :param index: Realization index.
        :type index: ``int``
        :param reports: Rate reports keyed by label, in output order.
        :type reports: ``OrderedDict`` of ``str`` to
                       :py:class:`pycellfree.rates.RateReport`
        :param chd: Per-UE channel hardening degree.
        :type chd: ``numpy.ndarray``
        :param state: The realization itself, kept for per-UE dumps.
        :type state: :py:class:`NetworkState` or ``NoneType``
        """
        self.index = index
        self.reports = reports
        self.chd = chd
        self.state = state

    @property
    def labels(self):
        return list(self.reports)

    def rows(self):
        """One row per scheme: sum and mean per-UE throughput."""
        return [OrderedDict([("realization", self.index),
                             ("scheme", label),
                             ("sum_throughput_bps", report.sum_throughput),
                             ("mean_ue_throughput_bps",
                              report.mean_throughput)])
                for label, report in self.reports.items()]

    def per_ue_rows(self):
        """One row per UE with its ChD and every scheme's rate and
        throughput. ubPA schemes also say whether the UE got a pilot."""
        rows = []
        for k in range(len(self.chd)):
            row = OrderedDict([("realization", self.index), ("ue", k),
                               ("chd", float(self.chd[k]))])
            for label, report in self.reports.items():
                row["{}_rate".format(label)] = float(report.rates[k])
                row["{}_throughput_bps".format(label)] = \
                    float(report.throughputs[k])
                if report.selected is not None:
                    row["{}_pilot".format(label)] = k in report.selected
            rows.append(row)
        return rows


def run_realization(cfg, index, kinds=SCHEME_KINDS):
    """Draw one realization and evaluate the schemes on its (beta, gamma,
    eta).

    :param cfg: The experiment.
    :type cfg: :py:class:`pycellfree.config.ExperimentConfig`
    :param index: Realization index.
    :type index: ``int``
    :param kinds: Schemes to evaluate.

    :rtype: :py:class:`RealizationResult`
    """
    state = draw_network(cfg, index)
    network = state.rates(cfg)
    utility = cfg.utility()
    reports = OrderedDict()
    for kind in kinds:
        spec = SchemeSpec.build(kind, cfg.tau, cfg.tau_up, cfg.tau_dp,
                                cfg.num_ues)
        reports[kind] = evaluate_network(spec, network, utility)
    return RealizationResult(index, reports, network.chd, state)


def _metric_realization(cfg, index, metrics):
    state = draw_network(cfg, index)
    network = state.rates(cfg)
    spec = SchemeSpec.build("ubpa", cfg.tau, cfg.tau_up, cfg.tau_dp,
                            cfg.num_ues)
    reports = OrderedDict()
    for metric in metrics:
        reports["ubpa/{}".format(metric)] = \
            evaluate_network(spec, network, cfg.utility(metric))
    return RealizationResult(index, reports, network.chd)


def _chd_realization(cfg, index):
    state = draw_network(cfg, index, with_power=False, strict=False)
    return channel_hardening_degree(state.beta)


def run_realizations(cfg, work, jobs=None):
    """Run ``work(cfg, index)`` for every realization on a thread pool.

    Results come back in realization order. If a realization fails with
    :py:class:`OptimizationFailed`, the error gets the results of the
    realizations before it attached as ``partial``.
    """
    jobs = jobs or cpu_count()
    count = cfg.realizations
    step = max(1, count // 10)
    start = time.time()
    logging.info("Running {} realization(s) on {} worker(s)"
                 .format(count, jobs))
    results = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(work, cfg, index) for index in range(count)]
        try:
            for index, future in enumerate(futures):
                results.append(future.result())
                if (index + 1) % step == 0 or index + 1 == count:
                    logging.info("{}/{} realizations done ({})".format(
                        index + 1, count,
                        format_seconds(time.time() - start)))
        except OptimizationFailed as err:
            for future in futures:
                future.cancel()
            err.partial = results
            raise
    return results


class ExperimentResult(object):
    """Per-realization results of an experiment, with their summaries."""
    def __init__(self, cfg, realizations):
        self.cfg = cfg
        self.realizations = list(realizations)

    @property
    def labels(self):
        return self.realizations[0].labels if self.realizations else []

    def samples(self, label, metric="sum_throughput_bps"):
        """Per-realization values of a metric for one scheme."""
        if metric == "sum_throughput_bps":
            return np.array([r.reports[label].sum_throughput
                             for r in self.realizations])
        elif metric == "mean_ue_throughput_bps":
            return np.array([r.reports[label].mean_throughput
                             for r in self.realizations])
        raise ValueError("Unknown metric {}".format(metric))

    def summary(self, label, metric="sum_throughput_bps"):
        """:rtype: :py:class:`pycellfree.experiments.stats.StatSummary`"""
        return StatSummary(self.samples(label, metric))

    def summaries(self):
        """Summaries keyed by (label, metric), in output order."""
        return OrderedDict(((label, metric), self.summary(label, metric))
                           for label in self.labels for metric in METRICS)

    def rows(self):
        return [row for r in self.realizations for row in r.rows()]

    def chd_rows(self):
        return [OrderedDict([("realization", r.index), ("ue", k),
                             ("chd", float(value))])
                for r in self.realizations for k, value in enumerate(r.chd)]


def run_experiment(cfg, jobs=None, kinds=SCHEME_KINDS):
    """Evaluate the schemes over ``cfg.realizations`` realizations.

    :rtype: :py:class:`ExperimentResult`
    """
    work = partial(run_realization, kinds=kinds)
    return ExperimentResult(cfg, run_realizations(cfg, work, jobs))


def compare_metrics(cfg, metrics=COMPARED_METRICS, jobs=None):
    """Evaluate ubPA with several utility variants on the same
    realizations. Each realization is drawn (and power-controlled) once.

    :rtype: :py:class:`ExperimentResult` with labels ``ubpa/<variant>``
    """
    work = partial(_metric_realization, metrics=metrics)
    return ExperimentResult(cfg, run_realizations(cfg, work, jobs))


class ChdStudy(object):
    """ChD of every (realization, UE) pair, and the collocated reference.
    """
    def __init__(self, chd, num_aps):
        #: realizations x K matrix.
        self.chd = np.asarray(chd, dtype=float)
        self.reference = collocated_chd(num_aps)

    @property
    def samples(self):
        return self.chd.ravel()

    @property
    def summary(self):
        return StatSummary(self.samples)

    def fraction_below_reference(self):
        return float(np.mean(self.samples < self.reference))

    def rows(self):
        return [OrderedDict([("realization", i), ("ue", k),
                             ("chd", float(value))])
                for i, row in enumerate(self.chd)
                for k, value in enumerate(row)]


def chd_study(cfg, jobs=None):
    """Channel hardening degree over all realizations; no power control.

    M <= K is allowed here.

    :rtype: :py:class:`ChdStudy`
    """
    chd = run_realizations(cfg, _chd_realization, jobs)
    return ChdStudy(np.vstack(chd), cfg.num_aps)
