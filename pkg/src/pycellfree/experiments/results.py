"""Writers for experiment outputs: CSV tables and the run manifest.

The column layout of every file is documented in this package's README.
"""
from collections import OrderedDict
import logging
import os

import pandas as pd
import rtyaml

from pycellfree import __version__
from pycellfree.experiments.stats import percentile_gains

RESULTS_FILE = "results.csv"
CHD_FILE = "chd.csv"
SUMMARY_FILE = "summary.csv"
GAINS_FILE = "gains.csv"
PER_UE_FILE = "per_ue.csv"
MANIFEST_FILE = "manifest.yaml"

RESULT_COLUMNS = ("realization", "scheme", "sum_throughput_bps",
                  "mean_ue_throughput_bps")
CHD_COLUMNS = ("realization", "ue", "chd")
SUMMARY_COLUMNS = ("scheme", "metric", "mean", "p5", "p50", "p90")
GAIN_COLUMNS = ("scheme", "baseline", "metric", "mean", "p5", "p50", "p90")

STATUS_OK = "ok"
STATUS_FAILED = "optimization-failed"


def write_table(rows, path, columns=None):
    """Write rows (mappings) as a CSV file with a header line.

    :param rows: The table rows.
    :type rows: ``list`` of ``dict``
    :param path: Destination file.
    :type path: ``str``
    :param columns: Column order. Defaults to the keys of the first row.
    :type columns: ``tuple`` of ``str`` or ``NoneType``

    :return: The path written.
    :rtype: ``str``
    """
    frame = pd.DataFrame.from_records(list(rows), columns=columns)
    frame.to_csv(path, index=False)
    logging.info("Wrote {}".format(path))
    return path


def write_results(result, output_dir):
    """Per-realization scheme rows of an experiment."""
    return write_table(result.rows(), os.path.join(output_dir, RESULTS_FILE),
                       RESULT_COLUMNS)


def write_chd(rows, output_dir):
    return write_table(rows, os.path.join(output_dir, CHD_FILE), CHD_COLUMNS)


def summary_rows(result):
    rows = []
    for (label, metric), summary in result.summaries().items():
        row = OrderedDict([("scheme", label), ("metric", metric)])
        row.update(summary.as_dict())
        rows.append(row)
    return rows


def write_summary(result, output_dir):
    return write_table(summary_rows(result),
                       os.path.join(output_dir, SUMMARY_FILE),
                       SUMMARY_COLUMNS)


def gain_rows(result, pairs):
    """Relative gains for each (scheme, baseline) pair and metric."""
    rows = []
    summaries = result.summaries()
    for label, baseline in pairs:
        for (other, metric), summary in summaries.items():
            if other != label:
                continue
            row = OrderedDict([("scheme", label), ("baseline", baseline),
                               ("metric", metric)])
            row.update(percentile_gains(summary,
                                        summaries[(baseline, metric)]))
            rows.append(row)
    return rows


def write_gains(result, pairs, output_dir):
    return write_table(gain_rows(result, pairs),
                       os.path.join(output_dir, GAINS_FILE), GAIN_COLUMNS)


def write_per_ue(rows, output_dir):
    return write_table(rows, os.path.join(output_dir, PER_UE_FILE))


def chd_summary_rows(study):
    """Summary of a ChD study, with the collocated reference as a row."""
    row = OrderedDict([("scheme", "cell-free"), ("metric", "chd")])
    row.update(study.summary.as_dict())
    reference = OrderedDict([("scheme", "collocated"), ("metric", "chd")])
    reference.update((stat, study.reference) for stat in
                     ("mean", "p5", "p50", "p90"))
    return [row, reference]


def write_chd_summary(study, output_dir):
    return write_table(chd_summary_rows(study),
                       os.path.join(output_dir, SUMMARY_FILE),
                       SUMMARY_COLUMNS)


def manifest(command, cfg, outputs, status=STATUS_OK, failure=None,
             index=None):
    """Everything needed to reproduce a run.

    :param command: The subcommand that ran.
    :type command: ``str``
    :param cfg: The resolved configuration.
    :type cfg: :py:class:`pycellfree.config.ExperimentConfig`
    :param outputs: File names written next to the manifest.
    :type outputs: ``list`` of ``str``
    :param status: ``ok`` or ``optimization-failed``.
    :type status: ``str``
    :param failure: Details of a failure, if any.
    :type failure: ``dict`` or ``NoneType``
    :param index: Realization drawn by a single-shot run.
    :type index: ``int`` or ``NoneType``

    :rtype: ``OrderedDict``
    """
    doc = OrderedDict([
        ("version", __version__),
        ("command", command),
        ("status", status),
        ("seed", cfg.seed),
    ])
    if index is not None:
        doc["index"] = index
    doc["config"] = cfg.as_dict()
    doc["outputs"] = [os.path.basename(path) for path in outputs]
    if failure is not None:
        doc["failure"] = failure
    return doc


def write_manifest(output_dir, command, cfg, outputs, status=STATUS_OK,
                   failure=None, index=None):
    path = os.path.join(output_dir, MANIFEST_FILE)
    with open(path, "w") as f:
        f.write(rtyaml.dump(manifest(command, cfg, outputs, status,
                                     failure, index)))
    logging.info("Wrote {}".format(path))
    return path
