"""Command-line interface: ``cellfree <command> [flags]``.

Every command resolves its configuration (flags over ``--config`` file
over the reference preset), runs, and writes CSV files plus a
``manifest.yaml`` into ``--output-dir``.
"""
import argparse
from collections import OrderedDict
from multiprocessing import cpu_count
import logging
import os

from pycellfree import __version__
from pycellfree.config import load_config_file, resolve_config
from pycellfree.exceptions import CliError, ConfigError, OptimizationFailed
from pycellfree.experiments import harness, results
from pycellfree.pilot_assignment import VARIANTS, VARIANT_ALIASES
from pycellfree.power_control import POWER_MODES
from pycellfree.utils import tell_size

COMMANDS = ("chd-cdf", "compare-schemes", "compare-metrics", "single-shot")

# (flag, type, help). Flag names are also the config file keys.
CONFIG_FLAGS = (
    ("M", int, "Number of APs."),
    ("K", int, "Number of UEs."),
    ("side", float, "Side of the square area, in meters."),
    ("tau", int, "Symbols per coherence interval."),
    ("tau-up", int, "Uplink pilot symbols."),
    ("tau-dp", int, "Downlink pilot symbols of ubPA."),
    ("realizations", int, "Number of large-scale realizations."),
    ("seed", int, "Seed of all random streams."),
    ("w", float, "Weight of the Doppler term in the pilot utility."),
    ("budget", int, "Give downlink pilots to this many UEs."),
    ("threshold", float,
     "Give downlink pilots to UEs whose utility exceeds this."),
    ("frequency-mhz", float, "Carrier frequency, in MHz."),
    ("bandwidth-mhz", float, "Bandwidth, in MHz."),
    ("noise-figure", float, "Noise figure, in dB."),
    ("sigma-sh", float, "Shadow fading standard deviation, in dB."),
    ("ap-power-mw", float, "AP radiated power, in mW."),
    ("ue-power-mw", float, "UE radiated power, in mW."),
    ("alpha", float, "Priority of every UE, in [0, 1]."),
    ("doppler", float, "Normalized Doppler spread of every UE, in [0, 1]."),
    ("quadrature-nodes", int, "Gauss-Hermite nodes per axis."),
    ("bisection-tol", float, "Relative tolerance of max-min bisection."),
)


def _dest(flag):
    return flag.replace("-", "_")


def _get_args(argv=None):
    """Parse the command line."""
    parser = argparse.ArgumentParser(
        prog="cellfree",
        description="Downlink pilot assignment in cell-free massive MIMO.")
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(title="Command", dest="command")
    subparsers.required = True
    subparsers.add_parser(
        "chd-cdf", help="Distribution of the channel hardening degree.")
    subparsers.add_parser(
        "compare-schemes", help="Net throughput of sCSI, iCSI and ubPA.")
    subparsers.add_parser(
        "compare-metrics", help="ubPA net throughput per utility metric.")
    single = subparsers.add_parser(
        "single-shot", help="Per-UE dump of one realization.")
    single.add_argument("--index", type=int,
                        help="Realization index to draw (default: the one "
                             "in a --config manifest, else 0).")
    for subparser in subparsers.choices.values():
        subparser.add_argument("-c", "--config",
                               help="Config file of flag: value lines.")
        subparser.add_argument("-o", "--output-dir", default=os.getcwd(),
                               help="Where to write results.")
        subparser.add_argument("-j", "--jobs", type=int,
                               default=int(os.getenv("CELLFREE_JOBS",
                                                     cpu_count())),
                               help="For concurrency, max workers.")
        for flag, kind, help in CONFIG_FLAGS:
            subparser.add_argument("--" + flag, dest=_dest(flag), type=kind,
                                   help=help)
        subparser.add_argument("--power", choices=POWER_MODES,
                               help="Power control policy.")
        subparser.add_argument("--metric",
                               choices=VARIANTS + tuple(VARIANT_ALIASES),
                               help="Pilot utility metric.")
        subparser.add_argument("--no-orthogonal-pilots", action="store_false",
                               dest="orthogonal_pilots", default=None,
                               help="Allow tau-up < K.")
        subparser.set_defaults(log_level=os.getenv("LOG_LEVEL", "INFO"))
        for level in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
            subparser.add_argument("--" + level.lower(), dest="log_level",
                                   action="store_const", const=level)
    return parser.parse_args(argv)


def _overrides(args):
    """Config values given as flags, keyed by flag name."""
    flags = [flag for flag, _, _ in CONFIG_FLAGS]
    flags += ["power", "metric", "orthogonal-pilots"]
    return {flag: getattr(args, _dest(flag)) for flag in flags}


def _configure_logging(level):
    log_level = getattr(logging, level.upper())
    logging.basicConfig(level=log_level, format="%(message)s")
    logging.getLogger().setLevel(log_level)
    # Hide noisy logging of some external libs
    for name in ("cvxpy", "matplotlib"):
        logging.getLogger(name).setLevel(logging.WARNING)


def _log_gains(result, pairs):
    for row in results.gain_rows(result, pairs):
        if row["metric"] == "mean_ue_throughput_bps":
            logging.info("{} vs {}: mean per-UE throughput {:+.1%}".format(
                row["scheme"], row["baseline"], row["mean"]))
        else:
            logging.info("{} vs {}: sum throughput p5 {:+.1%}, p50 {:+.1%}, "
                         "p90 {:+.1%}".format(row["scheme"], row["baseline"],
                                              row["p5"], row["p50"],
                                              row["p90"]))


def _run_chd_cdf(cfg, args, outputs):
    study = harness.chd_study(cfg, args.jobs)
    outputs.append(results.write_chd(study.rows(), args.output_dir))
    outputs.append(results.write_chd_summary(study, args.output_dir))
    logging.info("{:.1%} of ChD samples lie below the collocated value "
                 "{:.4g}".format(study.fraction_below_reference(),
                                 study.reference))


def _run_compare_schemes(cfg, args, outputs):
    result = harness.run_experiment(cfg, args.jobs)
    pairs = [("ubpa", "scsi"), ("ubpa", "icsi")]
    outputs.append(results.write_results(result, args.output_dir))
    outputs.append(results.write_chd(result.chd_rows(), args.output_dir))
    outputs.append(results.write_summary(result, args.output_dir))
    outputs.append(results.write_gains(result, pairs, args.output_dir))
    _log_gains(result, pairs)


def _run_compare_metrics(cfg, args, outputs):
    result = harness.compare_metrics(cfg, jobs=args.jobs)
    first, others = result.labels[0], result.labels[1:]
    pairs = [(first, other) for other in others]
    outputs.append(results.write_results(result, args.output_dir))
    outputs.append(results.write_summary(result, args.output_dir))
    outputs.append(results.write_gains(result, pairs, args.output_dir))
    _log_gains(result, pairs)


def _run_single_shot(cfg, args, outputs):
    realization = harness.run_realization(cfg, args.index)
    outputs.append(results.write_per_ue(realization.per_ue_rows(),
                                        args.output_dir))
    outputs.append(results.write_table(
        realization.rows(),
        os.path.join(args.output_dir, results.RESULTS_FILE),
        results.RESULT_COLUMNS))


_RUNNERS = {
    "chd-cdf": _run_chd_cdf,
    "compare-schemes": _run_compare_schemes,
    "compare-metrics": _run_compare_metrics,
    "single-shot": _run_single_shot,
}


def _write_partial(err, args, outputs):
    """Write what finished before an optimization failure."""
    partial = getattr(err, "partial", None) or []
    rows = [row for r in partial for row in r.rows()]
    if rows:
        outputs.append(results.write_table(
            rows, os.path.join(args.output_dir, results.RESULTS_FILE),
            results.RESULT_COLUMNS))
    return _failure_details(err, len(partial))


def _failure_details(err, completed):
    return OrderedDict([
        ("realization", getattr(err, "realization", None)),
        ("reason", err.reason),
        ("iterations", err.iterations),
        ("sinr_bracket", [float(err.t_lo), float(err.t_hi)]),
        ("completed_realizations", completed),
    ])


def _single_shot_index(args, config_file):
    """The realization to draw: --index, else the manifest's, else 0."""
    if args.index is not None:
        if args.index < 0:
            raise ConfigError("--index must be >= 0")
        return args.index
    if config_file is not None and config_file.index is not None:
        return config_file.index
    return 0


def run(args):
    """Resolve the configuration and run a parsed command.

    :raises: :py:class:`CliError` subclasses.
    """
    config_file = load_config_file(args.config) if args.config else None
    cfg = resolve_config(config_file, _overrides(args))
    index = None
    if args.command == "single-shot":
        index = args.index = _single_shot_index(args, config_file)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1, got {}".format(args.jobs))
    if args.command != "chd-cdf" and cfg.num_aps <= cfg.num_ues:
        raise ConfigError("{} needs more APs than UEs (M={}, K={})"
                          .format(args.command, cfg.num_aps, cfg.num_ues))
    if not os.path.isdir(args.output_dir):
        os.makedirs(args.output_dir)
    logging.info("Running {} with {} ({})".format(
        args.command, cfg, tell_size(range(cfg.realizations), "realization")))
    outputs = []
    try:
        _RUNNERS[args.command](cfg, args, outputs)
    except OptimizationFailed as err:
        failure = _write_partial(err, args, outputs)
        results.write_manifest(args.output_dir, args.command, cfg, outputs,
                               status=results.STATUS_FAILED, failure=failure,
                               index=index)
        raise
    results.write_manifest(args.output_dir, args.command, cfg, outputs,
                           index=index)


def parse_and_run(argv=None):
    """Run the command line ``argv`` and return its exit status.

    0 on success, 2 for a bad configuration (as for bad flags), 3 if
    max-min power control fails.
    """
    args = _get_args(argv)
    _configure_logging(args.log_level)
    try:
        run(args)
    except CliError as err:
        return err.report()
    return 0


def main():
    """Main entry point."""
    args = _get_args()
    _configure_logging(args.log_level)
    try:
        run(args)
    except CliError as err:
        err.exit()


if __name__ == "__main__":
    main()
