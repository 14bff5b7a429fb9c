"""Test the CSV and manifest writers."""
from collections import OrderedDict
import os
import shutil
import tempfile
import unittest

import pandas as pd
import yaml

from pycellfree.config import ExperimentConfig
from pycellfree.experiments import results
from pycellfree.experiments.harness import (ChdStudy, ExperimentResult,
                                            RealizationResult)
from pycellfree.rates import RateReport


def _result():
    realizations = []
    for index, scale in enumerate((1.0, 2.0, 3.0)):
        reports = OrderedDict([
            ("scsi", RateReport("scsi", [1.0, 1.0], [scale, scale], 2)),
            ("ubpa", RateReport("ubpa", [2.0, 1.0],
                                [3 * scale, scale], 3, [0])),
        ])
        realizations.append(RealizationResult(index, reports, [0.5, 0.7]))
    return ExperimentResult(ExperimentConfig(), realizations)


class TestWriters(unittest.TestCase):
    """Tests for the experiment output writers"""
    def setUp(self):
        self.tempdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_results_table(self):
        path = results.write_results(_result(), self.tempdir)
        frame = pd.read_csv(path)
        self.assertEqual(tuple(frame.columns), results.RESULT_COLUMNS)
        self.assertEqual(len(frame), 6)
        self.assertEqual(list(frame["scheme"][:2]), ["scsi", "ubpa"])
        self.assertEqual(frame["sum_throughput_bps"][3], 8.0)

    def test_summary(self):
        rows = results.summary_rows(_result())
        self.assertEqual([(r["scheme"], r["metric"]) for r in rows],
                         [("scsi", "sum_throughput_bps"),
                          ("scsi", "mean_ue_throughput_bps"),
                          ("ubpa", "sum_throughput_bps"),
                          ("ubpa", "mean_ue_throughput_bps")])
        self.assertEqual(rows[0]["mean"], 4.0)
        self.assertEqual(rows[0]["p50"], 4.0)

    def test_gains(self):
        rows = results.gain_rows(_result(), [("ubpa", "scsi")])
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertEqual(row["baseline"], "scsi")
            self.assertAlmostEqual(row["mean"], 1.0)
            self.assertAlmostEqual(row["p90"], 1.0)

    def test_chd_summary(self):
        study = ChdStudy([[0.5, 0.7], [0.6, 0.8]], 4)
        rows = results.chd_summary_rows(study)
        self.assertEqual(rows[0]["scheme"], "cell-free")
        self.assertAlmostEqual(rows[0]["mean"], 0.65)
        self.assertEqual(rows[1]["p50"], 0.75)
        self.assertEqual(study.fraction_below_reference(), 0.75)
        path = results.write_chd(study.rows(), self.tempdir)
        self.assertEqual(len(pd.read_csv(path)), 4)

    def test_manifest(self):
        cfg = ExperimentConfig(seed=11)
        outputs = [os.path.join(self.tempdir, results.RESULTS_FILE)]
        path = results.write_manifest(self.tempdir, "compare-schemes", cfg,
                                      outputs)
        with open(path) as f:
            doc = yaml.safe_load(f)
        self.assertEqual(doc["status"], results.STATUS_OK)
        self.assertEqual(doc["seed"], 11)
        self.assertEqual(doc["outputs"], ["results.csv"])
        self.assertEqual(doc["config"]["tau-dp"], 25)
        self.assertIsNone(doc["config"]["budget"])
        self.assertNotIn("failure", doc)
        self.assertNotIn("index", doc)

    def test_failed_manifest(self):
        failure = OrderedDict([("realization", 3), ("reason", "stuck")])
        doc = results.manifest("single-shot", ExperimentConfig(), [],
                               status=results.STATUS_FAILED,
                               failure=failure)
        self.assertEqual(doc["status"], "optimization-failed")
        self.assertEqual(doc["failure"]["realization"], 3)

    def test_single_shot_manifest(self):
        doc = results.manifest("single-shot", ExperimentConfig(), [],
                               index=3)
        self.assertEqual(list(doc)[:5],
                         ["version", "command", "status", "seed", "index"])
        self.assertEqual(doc["index"], 3)
