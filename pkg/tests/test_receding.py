import unittest
from unittest import mock

import numpy as np

from coordination_milp.coordinate import scenario_discretization
from coordination_milp import receding
from coordination_milp.milp import SolveStatus, solve_milp
from coordination_milp.model import build_model
from coordination_milp.receding import batch_windows, solve_receding
from coordination_milp.support.scenario import load_scenario
from coordination_milp.utils import SolverConfig
from tests import abstract_robot

STAGGERED = """mode: abstract
tau: 1.0
horizon: 10
robots:
  - {id: 1, s_out: 60}
  - {id: 2, s_out: 60, t_in: 0.5, v_in: 10}
  - {id: 3, s_out: 60, t_in: 3.0}
zones:
  - robots: [1, 2]
    box: [[40, 47], [42, 49]]
  - robots: [2, 3]
    box: [[40, 47], [42, 49]]
"""

# robot 3 arrives between 1 and 2, so its zone with 1 is admitted before the zone of 1 and 2
INTERLEAVED = """mode: abstract
tau: 1.0
horizon: 10
robots:
  - {id: 1, s_out: 60}
  - {id: 2, s_out: 60, t_in: 4.0}
  - {id: 3, s_out: 60, t_in: 0.5}
zones:
  - robots: [1, 2]
    box: [[40, 47], [42, 49]]
  - robots: [1, 3]
    box: [[40, 47], [42, 49]]
  - robots: [1, 3]
    box: [[52, 56], [54, 58]]
"""


class BatchWindowsTestCase(unittest.TestCase):
    def test_groups(self):
        robots = [abstract_robot(3, t_in=3.0), abstract_robot(1, t_in=1.0), abstract_robot(2, t_in=1.5)]
        windows = batch_windows(robots, 2.0)
        self.assertEqual([((1.0, 3.0), ("1", "2")), ((3.0, 5.0), ("3",))], windows)

    def test_skips_empty(self):
        robots = [abstract_robot(1), abstract_robot(2, t_in=7.0)]
        self.assertEqual([("1",), ("2",)], [ids for _, ids in batch_windows(robots, 2.0)])

    def test_empty(self):
        self.assertEqual([], batch_windows([], 2.0))

    def test_window(self):
        with self.assertRaises(ValueError):
            batch_windows([abstract_robot(1)], 0)


class SolveRecedingTestCase(unittest.TestCase):
    def test_batches(self):
        scenario = load_scenario(STAGGERED)
        result = solve_receding(scenario, 2.0)
        self.assertEqual(SolveStatus.OPTIMAL, result.status)
        self.assertEqual([("1", "2"), ("3",)], [b.robots for b in result.batches])
        self.assertEqual(3, len(result.trajectories))
        self.assertEqual(2, len(result.priorities))
        self.assertIsNone(result.failed_batch)
        self.assertIsNotNone(result.objective)

    def test_committed_robots_keep_plan(self):
        scenario = load_scenario(STAGGERED)
        result = solve_receding(scenario, 2.0)
        first = scenario.subset(["1", "2"])
        model = build_model(
            first.robots,
            [c for c in result.model.conflicts if "3" not in (c.robot_i, c.robot_j)],
            scenario_discretization(scenario, SolverConfig()),
        )
        report = solve_milp(model)
        solution = report.solution(model)
        for robot_id in ("1", "2"):
            s_batch, _ = solution.states(robot_id)
            s_final, _ = result.solution.states(robot_id)
            np.testing.assert_allclose(s_batch, s_final, atol=1e-6)

    def test_single_window_matches_full_solve(self):
        scenario = load_scenario(STAGGERED)
        receding = solve_receding(scenario, 10.0)
        self.assertEqual(1, len(receding.batches))
        full = solve_milp(
            build_model(
                scenario.robots,
                list(receding.model.conflicts),
                scenario_discretization(scenario, SolverConfig()),
            )
        )
        self.assertAlmostEqual(full.objective, receding.objective, places=6)

    def test_failed_batch(self):
        # robot 3 starts 45 m upstream and cannot cover 105 m in the six steps
        result = solve_receding(load_scenario(STAGGERED), 2.0, SolverConfig(horizon=3.0))
        self.assertEqual(SolveStatus.INFEASIBLE, result.status)
        self.assertEqual(1, result.failed_batch)
        self.assertEqual(2, len(result.batches))
        self.assertIsNone(result.trajectories)

    def test_interleaved_arrivals(self):
        scenario = load_scenario(INTERLEAVED)
        result = solve_receding(scenario, 2.0)
        self.assertEqual([("1", "3"), ("2",)], [b.robots for b in result.batches])
        self.assertEqual(SolveStatus.OPTIMAL, result.status)
        self.assertTrue(result.safety.ok)
        # zones keep their scenario position across batches
        self.assertEqual((0, 1, 2), result.model.zone_ids)
        names = [col.index.name for col in result.model.columns]
        for name in ("pi_1_2_0", "pi_1_3_1", "pi_1_3_2"):
            self.assertIn(name, names)

    def test_interleaved_committed_plan(self):
        scenario = load_scenario(INTERLEAVED)
        result = solve_receding(scenario, 2.0)
        conflicts = result.model.conflicts
        model = build_model(
            scenario.subset(["1", "3"]).robots,
            conflicts[1:],
            result.model.disc,
            zone_ids=(1, 2),
        )
        solution = solve_milp(model).solution(model)
        self.assertEqual(
            solution.priorities(),
            [p for p in result.solution.priorities() if p[0] != 0],
        )
        for robot_id in ("1", "3"):
            np.testing.assert_allclose(solution.states(robot_id)[0], result.solution.states(robot_id)[0], atol=1e-6)

    def test_later_batches_seeded(self):
        scenario = load_scenario(STAGGERED)
        with mock.patch.object(receding, "solve_milp", wraps=solve_milp) as solve:
            result = solve_receding(scenario, 2.0)
        self.assertEqual(SolveStatus.OPTIMAL, result.status)
        seeds = [c.kwargs.get("incumbent") for c in solve.call_args_list]
        self.assertEqual(2, len(seeds))
        self.assertIsNone(seeds[0])
        self.assertIsNotNone(seeds[1])
        self.assertLessEqual(seeds[1].objective, result.objective + 1e-6)

    def test_seeded_batch_matches_cold_solve(self):
        scenario = load_scenario(INTERLEAVED)
        result = solve_receding(scenario, 2.0)
        with mock.patch.object(receding, "_batch_seed", return_value=None):
            cold = solve_receding(scenario, 2.0)
        self.assertAlmostEqual(cold.objective, result.objective, places=6)
