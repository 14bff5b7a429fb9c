"""Downlink power control under the per-AP power constraint.

Two policies are provided: a uniform split of every AP's full power, and
max-min fairness on the statistical-CSI SINR, solved by bisection over the
SINR target with a second-order cone feasibility problem at each step.

The cone problem is stated in the scaled variables x_mk = sqrt(eta_mk
gamma_mk), for which the per-AP constraint reads ||x_m|| <= 1 and the
SINR of UE k reads

    (sum_m sqrt(rho_d gamma_mk) x_mk)^2 / (rho_d sum_m beta_mk ||x_m||^2 + 1)

since the interference sum (self term included) only depends on the
per-AP norms. Norm slacks s_m >= ||x_m|| keep every cone small.
"""
import logging
from threading import RLock

import cvxpy as cp
import numpy as np
import six

from pycellfree.exceptions import InvalidArgument, OptimizationFailed
from pycellfree.utils import as_matrix

POWER_MODES = ("uniform", "maxmin")

# Solver statuses accepted as "this SINR target is achievable".
_FEASIBLE = (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)
_INFEASIBLE = (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE)

# cvxpy keeps its DPP canonicalization scope in a process-wide flag, so
# problems are built and solved one thread at a time.
_SOLVER_LOCK = RLock()


class PowerCoefficients(object):
    """The M x K matrix of downlink power-control coefficients eta."""
    def __init__(self, eta):
        self.eta = as_matrix(eta, "eta")

    @property
    def shape(self):
        return self.eta.shape

    def per_ap_load(self, gamma):
        """Fraction of each AP's power budget in use: sum_k eta_mk gamma_mk.
        """
        return np.sum(self.eta * gamma, axis=1)

    def __repr__(self):
        return "PowerCoefficients(M={}, K={})".format(*self.shape)


class MaxMinSettings(object):
    """Tolerances of the max-min bisection."""
    def __init__(self, bisection_tol=1e-2, max_bisection_iters=40,
                 feasibility_tol=1e-6, max_balancing_passes=500):
        """Initializer.

        :param bisection_tol: Relative width (t_hi - t_lo) / t_hi of the
                              SINR bracket at which bisection stops.
        :type bisection_tol: ``float``
        :param max_bisection_iters: Feasibility solves allowed before
                                    giving up.
        :type max_bisection_iters: ``int``
        :param feasibility_tol: Allowed per-AP constraint violation.
        :type feasibility_tol: ``float``
        :param max_balancing_passes: Passes of the SINR balancing step run
                                     on the final feasible point.
        :type max_balancing_passes: ``int``
        """
        if not (bisection_tol > 0 and feasibility_tol > 0):
            raise InvalidArgument("Max-min tolerances must be positive")
        if max_bisection_iters < 1:
            raise InvalidArgument("Need at least one bisection iteration")
        self.bisection_tol = float(bisection_tol)
        self.max_bisection_iters = int(max_bisection_iters)
        self.feasibility_tol = float(feasibility_tol)
        self.max_balancing_passes = int(max_balancing_passes)

    def __repr__(self):
        args = ", ".join("{}={}".format(k, v) for k, v in vars(self).items())
        return "MaxMinSettings({})".format(args)


def _eta_matrix(eta):
    if isinstance(eta, PowerCoefficients):
        return eta.eta
    return as_matrix(eta, "eta")


def interference_matrix(eta, beta, gamma):
    """K x K matrix varsigma, (k, k') = sum_m eta_mk' beta_mk gamma_mk'."""
    eta = _eta_matrix(eta)
    return np.asarray(beta, dtype=float).T @ (eta * gamma)


def coherent_gain(eta, gamma):
    """Per-UE mean effective gain sum_m sqrt(eta_mk) gamma_mk."""
    return np.sum(np.sqrt(_eta_matrix(eta)) * gamma, axis=0)


def sinr_scsi_from_terms(gain, varsigma, rho_d):
    """Statistical-CSI SINR from the mean gains and the varsigma matrix.

    The denominator sums varsigma over every k', the self term included.
    """
    denominator = rho_d * np.sum(varsigma, axis=1) + 1.0
    return rho_d * gain ** 2 / denominator


def sinr_scsi(eta, beta, gamma, rho_d):
    """Per-UE SINR with conjugate beamforming and statistical CSI.

    :param eta: Power-control coefficients.
    :type eta: :py:class:`PowerCoefficients` or array-like
    :param beta: M x K linear path gains.
    :param gamma: M x K estimate qualities.
    :param rho_d: Normalized downlink data SNR.
    :type rho_d: ``float``

    :rtype: ``numpy.ndarray``
    """
    return sinr_scsi_from_terms(coherent_gain(eta, gamma),
                                interference_matrix(eta, beta, gamma), rho_d)


def uniform_power(gamma):
    """Every AP at full power, split equally: eta_mk = 1 / sum_k gamma_mk.

    An AP whose gamma row is all zero transmits nothing.

    :rtype: :py:class:`PowerCoefficients`
    """
    gamma = as_matrix(gamma, "gamma")
    row_sums = np.sum(gamma, axis=1)
    inv = np.zeros_like(row_sums)
    active = row_sums > 0
    inv[active] = 1.0 / row_sums[active]
    if not np.all(active):
        logging.debug("{} AP(s) have no usable channel estimate and stay "
                      "silent".format(np.count_nonzero(~active)))
    return PowerCoefficients(np.repeat(inv[:, None], gamma.shape[1], axis=1))


def validate_power(eta, gamma, feasibility_tol=1e-6):
    """Check the per-AP power constraint sum_k eta_mk gamma_mk <= 1.

    :return: Whether every AP satisfies the constraint (within the
             tolerance), and the largest per-AP load.
    :rtype: (``bool``, ``float``)
    """
    eta = _eta_matrix(eta)
    gamma = as_matrix(gamma, "gamma", shape=eta.shape)
    load = np.sum(eta * gamma, axis=1)
    worst = float(np.max(load)) if load.size else 0.0
    return worst <= 1.0 + feasibility_tol, worst


class _SinrFeasibility(object):
    """The cone feasibility problem "min_k SINR_k >= t", built once and
    re-solved for each target t."""
    def __init__(self, beta, gamma, rho_d):
        num_aps, num_ues = gamma.shape
        a = np.sqrt(rho_d * gamma)
        b = np.sqrt(rho_d * beta)
        with _SOLVER_LOCK:
            self._x = cp.Variable((num_aps, num_ues), nonneg=True)
            self._s = cp.Variable(num_aps, nonneg=True)
            self._inv_sqrt_t = cp.Parameter(nonneg=True)
            signal = cp.sum(cp.multiply(a, self._x), axis=0)
            interference = cp.vstack([cp.diag(self._s) @ b,
                                      np.ones((1, num_ues))])
            constraints = [
                cp.SOC(self._inv_sqrt_t * signal, interference, axis=0),
                cp.SOC(self._s, self._x, axis=1),
                self._s <= 1,
            ]
            self._problem = cp.Problem(cp.Minimize(0), constraints)
        self._gamma = gamma

    def solve(self, target):
        """Try to reach min-SINR ``target``.

        :return: Power coefficients reaching it, or None if infeasible.
        :rtype: :py:class:`PowerCoefficients` or ``NoneType``

        :raises: ``cvxpy.error.SolverError`` if the solver gives up.
                 ``cvxpy.error.DCPError`` if the problem fails to
                 canonicalize.
        """
        with _SOLVER_LOCK:
            self._inv_sqrt_t.value = 1.0 / np.sqrt(target)
            self._problem.solve()
            status = self._problem.status
            x = self._x.value
        if status in _INFEASIBLE:
            return None
        if status not in _FEASIBLE:
            raise cp.error.SolverError("solver returned status {}"
                                       .format(status))
        if status == cp.OPTIMAL_INACCURATE:
            logging.warning("Feasibility solve at SINR target {:.4g} is "
                            "inaccurate".format(target))
        return self._to_eta(x)

    def _to_eta(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        # Pull solver round-off back inside the per-AP budget.
        norms = np.linalg.norm(x, axis=1)
        over = norms > 1.0
        x[over] /= norms[over][:, None]
        eta = np.zeros_like(x)
        positive = self._gamma > 0
        eta[positive] = x[positive] ** 2 / self._gamma[positive]
        return PowerCoefficients(eta)


def _balance(eta, beta, gamma, rho_d, target, settings):
    """Scale down UEs whose SINR exceeds ``target`` until all SINRs are
    within ``bisection_tol`` of it.

    Lowering a UE's power only lowers the interference seen by the others,
    so the minimum SINR never drops below ``target``.
    """
    eta = eta.eta.copy()
    ceiling = target * (1.0 + settings.bisection_tol)
    for _ in range(settings.max_balancing_passes):
        varsigma = interference_matrix(eta, beta, gamma)
        signal = rho_d * coherent_gain(eta, gamma) ** 2
        own = rho_d * np.diag(varsigma)
        others = rho_d * np.sum(varsigma, axis=1) - own + 1.0
        sinr = signal / (own + others)
        surplus = sinr > ceiling
        if not np.any(surplus):
            break
        # Column scale q solving q S / (q V + I) = target.
        scale = target * others[surplus] / \
            (signal[surplus] - target * own[surplus])
        eta[:, surplus] *= np.clip(scale, 0.0, 1.0)
    else:
        logging.debug("SINR balancing stopped after {} passes"
                      .format(settings.max_balancing_passes))
    return PowerCoefficients(eta)


def maxmin_power(beta, gamma, rho_d, settings=None):
    """Max-min fairness power control on the statistical-CSI SINR.

    The bracket starts at [min-SINR of uniform_power, t_hi] with
    t_hi = max_k rho_d (sum_m sqrt(gamma_mk))^2, doubled while it is still
    feasible. Midpoints are geometric once the lower end is positive.

    :param beta: M x K linear path gains.
    :param gamma: M x K estimate qualities.
    :param rho_d: Normalized downlink data SNR.
    :type rho_d: ``float``
    :param settings: Bisection tolerances.
    :type settings: :py:class:`MaxMinSettings`

    :rtype: :py:class:`PowerCoefficients`

    :raises: :py:class:`OptimizationFailed` if the bracket doesn't close
             within ``max_bisection_iters`` solves, or the solver fails.
    """
    settings = settings or MaxMinSettings()
    beta = as_matrix(beta, "beta")
    gamma = as_matrix(gamma, "gamma", shape=beta.shape)
    if beta.shape[1] < 1:
        raise InvalidArgument("Max-min power control needs K >= 1")
    best = uniform_power(gamma)
    if np.any(np.all(gamma == 0, axis=0)):
        # Some UE can't be served at all: every feasible point is max-min.
        logging.debug("A UE has no channel estimate; min-SINR is 0")
        return best
    t_lo = float(np.min(sinr_scsi(best, beta, gamma, rho_d)))
    t_hi = float(np.max(rho_d * np.sum(np.sqrt(gamma), axis=0) ** 2))
    problem = _SinrFeasibility(beta, gamma, rho_d)
    iterations = 0
    try:
        # Make sure t_hi really is out of reach.
        while True:
            if iterations >= settings.max_bisection_iters:
                raise OptimizationFailed(
                    "no infeasible upper SINR bound found", best, t_lo,
                    t_hi, iterations)
            iterations += 1
            candidate = problem.solve(t_hi)
            if candidate is None:
                break
            best, t_lo = candidate, t_hi
            t_hi *= 2.0
        while (t_hi - t_lo) / t_hi > settings.bisection_tol:
            if iterations >= settings.max_bisection_iters:
                raise OptimizationFailed(
                    "SINR bracket still too wide", best, t_lo, t_hi,
                    iterations)
            if t_lo > 0:
                target = np.sqrt(t_lo * t_hi)
            else:
                target = 0.5 * t_hi
            iterations += 1
            candidate = problem.solve(target)
            logging.debug("Bisection step {}: target {:.6g} {}"
                          .format(iterations, target,
                                  "infeasible" if candidate is None
                                  else "feasible"))
            if candidate is None:
                t_hi = target
            else:
                best, t_lo = candidate, target
    except (cp.error.SolverError, cp.error.DCPError) as err:
        six.raise_from(OptimizationFailed(str(err), best, t_lo, t_hi,
                                          iterations), err)
    balanced = _balance(best, beta, gamma, rho_d, t_lo, settings)
    ok, worst = validate_power(balanced, gamma, settings.feasibility_tol)
    if not ok:
        raise OptimizationFailed(
            "per-AP load {:.6g} exceeds the budget".format(worst),
            best, t_lo, t_hi, iterations)
    logging.debug("Max-min power control converged to min-SINR {:.6g} in "
                  "{} steps".format(t_lo, iterations))
    return balanced


def compute_power(mode, beta, gamma, rho_d, settings=None):
    """Dispatch to one of the power-control policies in ``POWER_MODES``."""
    if mode == "uniform":
        return uniform_power(gamma)
    elif mode == "maxmin":
        return maxmin_power(beta, gamma, rho_d, settings)
    else:
        raise InvalidArgument("Unknown power mode {}; expected one of {}"
                              .format(repr(mode), ", ".join(POWER_MODES)))
