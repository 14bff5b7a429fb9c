"""Test the cellfree command line."""
import io
import os
import shutil
import tempfile
import unittest
from unittest import mock

import pandas as pd
import yaml

from pycellfree.cli import main, parse_and_run
from pycellfree.exceptions import OptimizationFailed

SMALL = ["--M", "12", "--K", "3", "--tau-up", "3", "--tau-dp", "2",
         "--realizations", "4", "--seed", "7", "--power", "uniform",
         "--jobs", "2", "--warning"]


class TestCli(unittest.TestCase):
    """Tests for parse_and_run"""
    def setUp(self):
        self.tempdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def _dir(self, name):
        return os.path.join(self.tempdir, name)

    def _read(self, *parts):
        with open(os.path.join(self.tempdir, *parts)) as f:
            return f.read()

    def _manifest(self, name):
        return yaml.safe_load(self._read(name, "manifest.yaml"))

    def test_compare_schemes_reproducible(self):
        for name in ("one", "two"):
            status = parse_and_run(["compare-schemes"] + SMALL +
                                   ["-o", self._dir(name)])
            self.assertEqual(status, 0)
        for output in ("results.csv", "summary.csv", "gains.csv",
                       "chd.csv", "manifest.yaml"):
            self.assertEqual(self._read("one", output),
                             self._read("two", output), output)
        manifest = self._manifest("one")
        self.assertEqual(manifest["status"], "ok")
        self.assertEqual(manifest["seed"], 7)
        self.assertEqual(manifest["config"]["power"], "uniform")
        self.assertIn("results.csv", manifest["outputs"])
        results = pd.read_csv(self._dir("one/results.csv"))
        self.assertEqual(len(results), 12)
        gains = pd.read_csv(self._dir("one/gains.csv"))
        self.assertEqual(sorted(set(gains["baseline"])), ["icsi", "scsi"])

    def test_rerun_from_manifest(self):
        self.assertEqual(parse_and_run(["compare-schemes"] + SMALL +
                                       ["-o", self._dir("first")]), 0)
        status = parse_and_run(["compare-schemes", "--warning",
                                "--config", self._dir("first/manifest.yaml"),
                                "-o", self._dir("again")])
        self.assertEqual(status, 0)
        self.assertEqual(self._read("first", "results.csv"),
                         self._read("again", "results.csv"))

    def test_flag_beats_config_file(self):
        path = self._dir("config.yaml")
        with open(path, "w") as f:
            f.write("seed: 3\nrealizations: 2\n")
        status = parse_and_run(["compare-schemes"] + SMALL +
                               ["--config", path, "--seed", "5",
                                "-o", self._dir("out")])
        self.assertEqual(status, 0)
        manifest = self._manifest("out")
        self.assertEqual(manifest["seed"], 5)
        self.assertEqual(manifest["config"]["realizations"], 4)

    def test_config_error(self):
        path = self._dir("config.yaml")
        with open(path, "w") as f:
            f.write("M: 12\nK: 3\nbogus: 1\n")
        with mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
            status = parse_and_run(["compare-schemes", "--config", path,
                                    "--warning", "-o", self._dir("out")])
        self.assertEqual(status, 2)
        self.assertIn("{}:3:".format(path), stderr.getvalue())
        self.assertIn("bogus", stderr.getvalue())

    def test_needs_more_aps_than_ues(self):
        with mock.patch("sys.stderr", new_callable=io.StringIO):
            status = parse_and_run(["compare-schemes", "--M", "3", "--K", "3",
                                    "--tau-up", "3", "--tau-dp", "2",
                                    "--warning", "-o", self._dir("out")])
        self.assertEqual(status, 2)

    def test_bad_jobs(self):
        with mock.patch("sys.stderr", new_callable=io.StringIO):
            status = parse_and_run(["compare-schemes"] + SMALL +
                                   ["--jobs", "0", "-o", self._dir("out")])
        self.assertEqual(status, 2)

    def test_bad_flag(self):
        with mock.patch("sys.stderr", new_callable=io.StringIO):
            with self.assertRaises(SystemExit):
                parse_and_run(["compare-schemes", "--power", "greedy"])

    def test_chd_single_ap(self):
        status = parse_and_run(["chd-cdf", "--M", "1", "--K", "3",
                                "--tau-up", "3", "--tau-dp", "2",
                                "--realizations", "2", "--warning",
                                "-o", self._dir("chd")])
        self.assertEqual(status, 0)
        chd = pd.read_csv(self._dir("chd/chd.csv"))
        self.assertEqual(len(chd), 6)
        self.assertTrue((chd["chd"] == 0.0).all())
        summary = pd.read_csv(self._dir("chd/summary.csv"))
        self.assertEqual(list(summary["scheme"]), ["cell-free",
                                                   "collocated"])

    def test_compare_metrics(self):
        status = parse_and_run(["compare-metrics"] + SMALL +
                               ["-o", self._dir("metrics")])
        self.assertEqual(status, 0)
        gains = pd.read_csv(self._dir("metrics/gains.csv"))
        self.assertEqual(len(gains), 4)
        self.assertEqual(set(gains["scheme"]), {"ubpa/abs_rate"})

    def test_single_shot(self):
        status = parse_and_run(["single-shot", "--index", "3"] + SMALL +
                               ["-o", self._dir("shot")])
        self.assertEqual(status, 0)
        per_ue = pd.read_csv(self._dir("shot/per_ue.csv"))
        self.assertEqual(len(per_ue), 3)
        self.assertEqual(set(per_ue["realization"]), {3})
        self.assertEqual(int(per_ue["ubpa_pilot"].sum()), 2)
        self.assertIn("icsi_throughput_bps", per_ue.columns)

    def test_single_shot_from_manifest(self):
        """The manifest of a single-shot run redraws the same realization."""
        status = parse_and_run(["single-shot", "--index", "3"] + SMALL +
                               ["-o", self._dir("shot")])
        self.assertEqual(status, 0)
        self.assertEqual(self._manifest("shot")["index"], 3)
        status = parse_and_run(["single-shot", "--warning",
                                "--config", self._dir("shot/manifest.yaml"),
                                "-o", self._dir("again")])
        self.assertEqual(status, 0)
        self.assertEqual(self._read("shot", "per_ue.csv"),
                         self._read("again", "per_ue.csv"))
        self.assertEqual(self._manifest("again")["index"], 3)
        # --index still wins over the manifest.
        status = parse_and_run(["single-shot", "--warning", "--index", "1",
                                "--config", self._dir("shot/manifest.yaml"),
                                "-o", self._dir("other")])
        self.assertEqual(status, 0)
        per_ue = pd.read_csv(self._dir("other/per_ue.csv"))
        self.assertEqual(set(per_ue["realization"]), {1})

    def test_negative_index(self):
        with mock.patch("sys.stderr", new_callable=io.StringIO):
            status = parse_and_run(["single-shot", "--index", "-1"] + SMALL +
                                   ["-o", self._dir("shot")])
        self.assertEqual(status, 2)

    def test_no_uplink_pilots(self):
        with mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
            status = parse_and_run(["compare-schemes"] + SMALL +
                                   ["--no-orthogonal-pilots", "--tau-up", "0",
                                    "-o", self._dir("out")])
        self.assertEqual(status, 2)
        self.assertIn("tau-up", stderr.getvalue())

    def test_range_error_names_line(self):
        path = self._dir("config.yaml")
        with open(path, "w") as f:
            f.write("K: 3\ntau-up: 3\ntau-dp: 2\nM: 0\n")
        with mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
            status = parse_and_run(["compare-schemes", "--config", path,
                                    "--warning", "-o", self._dir("out")])
        self.assertEqual(status, 2)
        self.assertIn("{}:4:".format(path), stderr.getvalue())

    def test_main_exit_status(self):
        argv = ["cellfree", "compare-schemes", "--M", "3", "--K", "3",
                "--tau-up", "3", "--tau-dp", "2", "--warning",
                "-o", self._dir("out")]
        with mock.patch("sys.argv", argv):
            with mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
                with self.assertRaises(SystemExit) as ctx:
                    main()
        self.assertEqual(ctx.exception.code, 2)
        self.assertIn("ConfigError", stderr.getvalue())

    def test_optimization_failure(self):
        error = OptimizationFailed("stuck", None, 0.5, 2.0, 40)
        with mock.patch("pycellfree.experiments.harness.compute_power",
                        side_effect=error):
            with mock.patch("sys.stderr", new_callable=io.StringIO):
                status = parse_and_run(["compare-schemes"] + SMALL +
                                       ["--realizations", "1",
                                        "-o", self._dir("failed")])
        self.assertEqual(status, 3)
        manifest = self._manifest("failed")
        self.assertEqual(manifest["status"], "optimization-failed")
        self.assertEqual(manifest["failure"]["realization"], 0)
        self.assertEqual(manifest["failure"]["sinr_bracket"], [0.5, 2.0])
        self.assertEqual(manifest["outputs"], [])
