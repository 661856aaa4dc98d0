import itertools
import unittest

import numpy as np

from coordination_milp.milp import (
    HintError,
    SolveLimits,
    SolveStatus,
    entry_order,
    export_model,
    presolve,
    priority_hint,
    sequential_incumbent,
    solve_milp,
    warm_start,
)
from coordination_milp.model import (
    Discretization,
    MilpModel,
    ModelOptions,
    Sense,
    Solution,
    build_model,
)
from tests import abstract_robot, crossing

VALUES = (10.0, 13.0, 7.0, 8.0, 4.0, 9.0)
WEIGHTS = (5.0, 7.0, 4.0, 5.0, 2.0, 6.0)
VOLUMES = (3.0, 1.0, 4.0, 2.0, 3.0, 1.0)


def knapsack(capacity=13.0, volume=8.0):
    model = MilpModel()
    for n, value in enumerate(VALUES):
        col = model.add_column("x{}".format(n), 0, 1, is_binary=True)
        model.objective[col] = value
    model.add_constraint(dict(enumerate(WEIGHTS)), Sense.LE, capacity, "weight")
    model.add_constraint(dict(enumerate(VOLUMES)), Sense.LE, volume, "volume")
    return model


def brute_force(capacity=13.0, volume=8.0):
    best = -np.inf
    for bits in itertools.product((0, 1), repeat=len(VALUES)):
        x = np.array(bits, dtype=float)
        if x @ WEIGHTS <= capacity and x @ VOLUMES <= volume:
            best = max(best, float(x @ VALUES))
    return best


def crossing_model(**options):
    """
    Both robots enter at 15 m/s with a box far enough downstream to brake before it
    """
    robots = [abstract_robot(1, s_out=60.0), abstract_robot(2, s_out=60.0)]
    conflicts = [crossing(1, 2, (40, 47), (42, 49))]
    return build_model(robots, conflicts, Discretization(1.0, 12), ModelOptions(**options))


class KnapsackTestCase(unittest.TestCase):
    def test_matches_enumeration(self):
        for capacity, volume in ((13.0, 8.0), (9.0, 5.0), (20.0, 12.0), (4.0, 2.0)):
            with self.subTest(capacity=capacity, volume=volume):
                report = solve_milp(knapsack(capacity, volume))
                self.assertEqual(SolveStatus.OPTIMAL, report.status)
                self.assertAlmostEqual(brute_force(capacity, volume), report.objective, places=6)

    def test_simplex_engine(self):
        report = solve_milp(knapsack(), engine="simplex")
        self.assertAlmostEqual(brute_force(), report.objective, places=6)

    def test_integral_incumbent(self):
        report = solve_milp(knapsack())
        x = report.incumbent.x
        self.assertTrue(np.all((x == 0) | (x == 1)))

    def test_threads(self):
        report = solve_milp(knapsack(), SolveLimits(threads=2))
        self.assertAlmostEqual(brute_force(), report.objective, places=6)

    def test_trace(self):
        report = solve_milp(knapsack(), trace=True)
        self.assertEqual(report.nodes, len(report.trace))
        objectives = {r.id: r.objective for r in report.trace}
        for record in report.trace:
            if record.parent is None or record.objective is None:
                continue
            self.assertLessEqual(record.objective, objectives[record.parent] + 1e-6)
            self.assertEqual(record.depth, 1 + [r for r in report.trace if r.id == record.parent][0].depth)

    def test_node_limit_without_incumbent(self):
        report = solve_milp(knapsack(), SolveLimits(node_limit=1))
        self.assertEqual(SolveStatus.TIMEOUT_NO_INCUMBENT, report.status)
        self.assertEqual(4, report.status.exit_code)
        self.assertIsNone(report.objective)
        self.assertIsNone(report.solution(knapsack()))

    def test_node_limit_with_seed(self):
        model = knapsack()
        seed = warm_start(model, {n: 0 for n in range(len(VALUES))})
        self.assertEqual(0, seed.objective)
        report = solve_milp(model, SolveLimits(node_limit=1), incumbent=seed)
        self.assertEqual(SolveStatus.TIMEOUT_WITH_INCUMBENT, report.status)
        self.assertEqual(3, report.status.exit_code)
        self.assertGreaterEqual(report.bound, report.objective)

    def test_seed_keeps_optimum(self):
        model = knapsack()
        seed = warm_start(model, {0: 1, 1: 0, 2: 0, 3: 0, 4: 1, 5: 0})
        self.assertAlmostEqual(14.0, seed.objective)
        report = solve_milp(model, incumbent=seed)
        self.assertAlmostEqual(brute_force(), report.objective, places=6)

    def test_infeasible(self):
        model = MilpModel()
        a = model.add_column("a", 0, 1, is_binary=True)
        b = model.add_column("b", 0, 1, is_binary=True)
        model.objective[a] = 1.0
        model.add_constraint({a: 1, b: 1}, Sense.EQ, 1.0, "sum")
        model.add_constraint({a: 1, b: -1}, Sense.EQ, 0.0, "diff")
        report = solve_milp(model)
        self.assertEqual(SolveStatus.INFEASIBLE, report.status)
        self.assertEqual(2, report.status.exit_code)
        self.assertIsNone(report.to_dict()["objective"])
        self.assertIsNone(report.to_dict()["bound"])

    def test_rounding_violating_rows(self):
        # the LP optimum b = 5e-6 counts as integral, but b = 0 breaks the row
        model = MilpModel()
        b = model.add_column("b", 0, 1, is_binary=True)
        model.objective[b] = -1.0
        model.add_constraint({b: 1}, Sense.GE, 5e-6, "floor")
        report = solve_milp(model)
        self.assertEqual(SolveStatus.OPTIMAL, report.status)
        self.assertAlmostEqual(-1.0, report.objective, places=6)
        self.assertEqual(1.0, report.incumbent.x[b])
        self.assertLessEqual(model.residuals(report.incumbent.x).max(), 1e-6)


class WarmStartTestCase(unittest.TestCase):
    def test_unknown_variable(self):
        with self.assertRaises(HintError):
            warm_start(knapsack(), {"nope": 1})

    def test_not_binary(self):
        hint = {n: 0 for n in range(len(VALUES))}
        hint[2] = 0.5
        with self.assertRaises(HintError) as ctx:
            warm_start(knapsack(), hint)
        self.assertIn("x2", str(ctx.exception))

    def test_missing(self):
        with self.assertRaises(HintError) as ctx:
            warm_start(knapsack(), {0: 1})
        self.assertIn("5 binaries, first x1", str(ctx.exception))

    def test_missing_named_column(self):
        with self.assertRaises(HintError) as ctx:
            warm_start(crossing_model(), {})
        self.assertIn("first mu_1_0", str(ctx.exception))

    def test_infeasible_hint(self):
        self.assertIsNone(warm_start(knapsack(), {n: 1 for n in range(len(VALUES))}))


class CoordinationSolveTestCase(unittest.TestCase):
    def test_single_robot(self):
        model = build_model([abstract_robot(1)], [], Discretization(1.0, 10), ModelOptions(tie_break=False))
        report = solve_milp(model)
        self.assertEqual(SolveStatus.OPTIMAL, report.status)
        self.assertAlmostEqual(9.0, report.objective, places=6)

    def test_crossing_yields(self):
        report = solve_milp(crossing_model())
        self.assertEqual(SolveStatus.OPTIMAL, report.status)
        solution = report.solution(crossing_model())
        self.assertLess(solution.sigma_objective, 9.0)
        self.assertEqual(1, len(solution.priorities()))

    def test_deterministic(self):
        first = solve_milp(crossing_model())
        second = solve_milp(crossing_model())
        np.testing.assert_array_equal(first.incumbent.x, second.incumbent.x)
        self.assertEqual(first.nodes, second.nodes)

    def test_cuts_keep_optimum(self):
        with_cuts = solve_milp(crossing_model())
        without = solve_milp(crossing_model(cuts=False))
        self.assertAlmostEqual(with_cuts.objective, without.objective, places=6)

    def test_forced_priority(self):
        report = solve_milp(crossing_model(forced_priorities=(("2", "1"),)))
        solution = report.solution(crossing_model(forced_priorities=(("2", "1"),)))
        self.assertEqual([(0, "2", "1")], solution.priorities())

    def test_priority_hint(self):
        model = crossing_model()
        hint = priority_hint(model, None, {"1": 0.0, "2": 1.0})
        self.assertIsNotNone(hint)
        seed = warm_start(model, hint)
        self.assertIsNotNone(seed)
        cold = solve_milp(model)
        warm = solve_milp(model, incumbent=seed)
        self.assertAlmostEqual(cold.objective, warm.objective, places=6)
        self.assertLessEqual(seed.objective, cold.objective + 1e-6)

    def test_presolve(self):
        model = crossing_model()
        result = presolve(model)
        self.assertFalse(result.infeasible)
        self.assertGreater(result.fixed, 0)
        binary = model.arrays().binary
        self.assertTrue(np.all(result.lower[binary] <= result.upper[binary]))

    def test_report_dict(self):
        report = solve_milp(crossing_model())
        d = report.to_dict()
        self.assertEqual("optimal", d["status"])
        self.assertAlmostEqual(report.objective, d["bound"])


class ExportModelTestCase(unittest.TestCase):
    def test_formats(self):
        model = crossing_model()
        self.assertTrue(export_model(model).startswith("NAME"))
        self.assertIn("Subject To", export_model(model, "lp"))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            export_model(crossing_model(), "xml")


class SequentialSeedTestCase(unittest.TestCase):
    def robots(self):
        return [abstract_robot(1, t_in=2.0), abstract_robot(2), abstract_robot(3, t_in=2.0)]

    def test_entry_order(self):
        self.assertEqual(["2", "1", "3"], entry_order(self.robots()))

    def test_forced_order(self):
        self.assertEqual(["2", "3", "1"], entry_order(self.robots(), (("3", "1"),)))
        self.assertEqual(["3", "2", "1"], entry_order(self.robots(), (("3", "2"), ("2", "1"))))

    def test_forced_cycle(self):
        self.assertIsNone(entry_order(self.robots(), (("1", "3"), ("3", "2"), ("2", "1"))))

    def test_unknown_robot(self):
        self.assertEqual(["2", "1", "3"], entry_order(self.robots(), (("1", "9"),)))

    def test_seed(self):
        model = crossing_model()
        seed = sequential_incumbent(model)
        self.assertIsNotNone(seed)
        self.assertLessEqual(model.residuals(seed.x).max(), 1e-6)
        self.assertEqual([(0, "1", "2")], Solution(model, seed.x, seed.objective).priorities())
        self.assertLessEqual(seed.objective, solve_milp(model).objective + 1e-6)

    def test_seed_order(self):
        model = crossing_model()
        seed = sequential_incumbent(model, order=["2", "1"])
        self.assertEqual([(0, "2", "1")], Solution(model, seed.x, seed.objective).priorities())

    def test_seed_follows_forced(self):
        model = crossing_model(forced_priorities=(("2", "1"),))
        seed = sequential_incumbent(model)
        self.assertEqual([(0, "2", "1")], Solution(model, seed.x, seed.objective).priorities())
        report = solve_milp(model, SolveLimits(node_limit=1), incumbent=seed)
        self.assertTrue(report.status.has_incumbent)

    def test_no_seed_behind(self):
        # four steps leave robot 2 no time to pass the box behind robot 1
        robots = [abstract_robot(1, s_out=60.0), abstract_robot(2, s_out=60.0)]
        model = build_model(robots, [crossing(1, 2, (40, 47), (42, 49))], Discretization(1.0, 4))
        self.assertIsNone(sequential_incumbent(model))
