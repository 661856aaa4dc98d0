import json
import os
import tempfile
import unittest

from coordination_milp.experiments import (
    RuntimeRow,
    default_zones,
    run_runtime_experiment,
    run_timestep_experiment,
    trend,
)
from coordination_milp.support.plotting import Series, line_chart
from coordination_milp.utils import SolverConfig
from tests import SLOW_TESTS


class TrendTestCase(unittest.TestCase):
    def test_increasing(self):
        result = trend([1, 2, 3], [2.0, 4.0, 6.0])
        self.assertAlmostEqual(2.0, result["slope"])
        self.assertAlmostEqual(1.0, result["spearman"])

    def test_constant(self):
        result = trend([1, 2, 3], [5.0, 5.0, 5.0])
        self.assertAlmostEqual(0.0, result["slope"])
        self.assertIsNone(result["spearman"])

    def test_single_point(self):
        self.assertEqual({"slope": None, "spearman": None}, trend([1], [1.0]))

    def test_default_zones(self):
        self.assertEqual([0, 1, 3, 4, 5], [default_zones(n) for n in (1, 2, 3, 4, 5)])


class TimestepExperimentTestCase(unittest.TestCase):
    def test_small(self):
        result = run_timestep_experiment(instances=1, taus=(1.0, 2.0), robots=2, zones=1)
        self.assertEqual([], result.summary["dropped"])
        self.assertEqual([1.0, 2.0], [r.tau for r in result.rows])
        self.assertEqual(0.0, result.rows[0].loss)
        self.assertEqual(0.0, result.summary["mean_loss"][0])
        self.assertTrue(result.chart.startswith("<svg"))

    def test_taus_ascending(self):
        with self.assertRaises(ValueError):
            run_timestep_experiment(instances=1, taus=(1.0, 0.5))
        with self.assertRaises(ValueError):
            run_timestep_experiment(instances=1, taus=())

    def test_write(self):
        result = run_timestep_experiment(instances=1, taus=(1.0, 2.0), robots=2, zones=1)
        with tempfile.TemporaryDirectory() as directory:
            result.write(directory, "timestep")
            self.assertEqual(
                ["summary.json", "timestep.csv", "timestep.svg"], sorted(os.listdir(directory))
            )
            with open(os.path.join(directory, "timestep.csv")) as f:
                lines = f.read().splitlines()
            self.assertEqual("instance,tau,mean_sojourn,loss,wall_time", lines[0])
            self.assertEqual(3, len(lines))
            with open(os.path.join(directory, "summary.json")) as f:
                self.assertEqual(2, json.load(f)["robots"])

    @unittest.skipUnless(SLOW_TESTS, "slow")
    def test_loss_grows_with_step(self):
        result = run_timestep_experiment(instances=5, seed=1)
        means = result.summary["mean_loss"]
        self.assertGreaterEqual(means[-1], means[0])
        self.assertGreater(result.summary["slope"], 0)


class RuntimeExperimentTestCase(unittest.TestCase):
    def test_small(self):
        result = run_runtime_experiment(counts=(1, 2), instances=1, config=SolverConfig(time_limit=60))
        self.assertEqual([1, 2], [r.robots for r in result.rows])
        self.assertTrue(all(isinstance(r, RuntimeRow) for r in result.rows))
        self.assertTrue(all(r.build_export_time > 0 for r in result.rows))
        self.assertEqual([0, 0], result.summary["censored"])
        self.assertIn("build + export", result.chart)

    def test_counts(self):
        with self.assertRaises(ValueError):
            run_runtime_experiment(counts=(2, 1), instances=1)
        with self.assertRaises(ValueError):
            run_runtime_experiment(counts=(0, 1), instances=1)

    def test_node_limit_censors(self):
        result = run_runtime_experiment(counts=(3,), instances=1, config=SolverConfig(node_limit=1))
        row = result.rows[0]
        self.assertTrue(row.censored)
        self.assertIn(row.status, ("timeout-with-incumbent", "timeout-no-incumbent"))


class LineChartTestCase(unittest.TestCase):
    def test_series(self):
        svg = line_chart("Title", "x", "y", [Series("loss", [1, 2, 3], [0.1, 0.2, 0.4], [0.01, 0.02, 0.03])])
        self.assertTrue(svg.startswith("<svg"))
        self.assertTrue(svg.rstrip().endswith("</svg>"))
        self.assertIn("Title", svg)
        self.assertIn("<polyline", svg)
        self.assertEqual(3, svg.count("<circle"))

    def test_empty(self):
        svg = line_chart("Nothing", "x", "y", [])
        self.assertNotIn("<polyline", svg)
        self.assertIn("Nothing", svg)
