import unittest

import numpy as np

from coordination_milp.support.lp import ENGINES, LpStatus, SolverError, solve_arrays
from coordination_milp.support.simplex import BoundedSimplex, SimplexError


def two_rows(sense=("L", "L"), rhs=(4.0, 6.0)):
    return dict(
        c=np.array([1.0, 1.0]),
        A=np.array([[1.0, 2.0], [3.0, 1.0]]),
        sense=np.array(sense),
        rhs=np.array(rhs),
        lower=np.zeros(2),
        upper=np.full(2, 10.0),
    )


class SolveArraysTestCase(unittest.TestCase):
    def test_vertex(self):
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **two_rows())
                self.assertTrue(result.is_optimal)
                self.assertAlmostEqual(2.8, result.objective, places=7)
                np.testing.assert_allclose([1.6, 1.2], result.x, atol=1e-7)

    def test_duals(self):
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **two_rows())
                np.testing.assert_allclose([0.4, 0.2], result.duals, atol=1e-7)

    def test_upper_bounds_bind(self):
        problem = two_rows(rhs=(100.0, 100.0))
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **problem)
                self.assertAlmostEqual(20.0, result.objective, places=7)

    def test_greater_equal_and_equal(self):
        problem = dict(
            c=np.array([-1.0, -2.0]),
            A=np.array([[1.0, 1.0], [1.0, -1.0]]),
            sense=np.array(["G", "E"]),
            rhs=np.array([3.0, 1.0]),
            lower=np.zeros(2),
            upper=np.full(2, 10.0),
        )
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **problem)
                self.assertTrue(result.is_optimal)
                np.testing.assert_allclose([2.0, 1.0], result.x, atol=1e-7)
                self.assertAlmostEqual(-4.0, result.objective, places=7)

    def test_infeasible(self):
        problem = two_rows(sense=("L", "G"), rhs=(1.0, 20.0))
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **problem)
                self.assertEqual(LpStatus.INFEASIBLE, result.status)
                self.assertIsNone(result.x)

    def test_crossed_bounds(self):
        problem = two_rows()
        problem["lower"] = np.array([0.0, 5.0])
        problem["upper"] = np.array([10.0, 4.0])
        for engine in ENGINES:
            with self.subTest(engine=engine):
                self.assertEqual(LpStatus.INFEASIBLE, solve_arrays(engine=engine, **problem).status)

    def test_fixed_column(self):
        problem = two_rows()
        problem["lower"] = np.array([0.0, 1.0])
        problem["upper"] = np.array([10.0, 1.0])
        for engine in ENGINES:
            with self.subTest(engine=engine):
                result = solve_arrays(engine=engine, **problem)
                np.testing.assert_allclose([5.0 / 3.0, 1.0], result.x, atol=1e-7)

    def test_infinite_bounds(self):
        problem = two_rows()
        problem["upper"] = np.array([np.inf, 10.0])
        with self.assertRaises(SolverError):
            solve_arrays(**problem)

    def test_unknown_engine(self):
        with self.assertRaises(ValueError):
            solve_arrays(engine="glpk", **two_rows())


class BoundedSimplexTestCase(unittest.TestCase):
    def _simplex(self, **kwargs):
        problem = two_rows()
        return BoundedSimplex(
            problem["c"], problem["A"], problem["sense"], problem["rhs"], problem["lower"], problem["upper"], **kwargs
        )

    def test_warm_start(self):
        cold = self._simplex().solve()
        self.assertIsNotNone(cold.basis)
        warm = self._simplex().solve(cold.basis)
        self.assertEqual(0, warm.iterations)
        np.testing.assert_allclose(cold.x, warm.x)

    def test_malformed_basis(self):
        result = self._simplex().solve((0, 0))
        self.assertAlmostEqual(2.8, result.objective, places=7)

    def test_iteration_limit(self):
        with self.assertRaises(SimplexError) as ctx:
            self._simplex(max_iterations=1).solve()
        self.assertIn("iterations", ctx.exception.diagnostics)

    def test_no_rows(self):
        simplex = BoundedSimplex(
            np.array([1.0, -1.0]),
            np.zeros((0, 2)),
            np.array([], dtype=str),
            np.zeros(0),
            np.zeros(2),
            np.array([3.0, 3.0]),
        )
        result = simplex.solve()
        np.testing.assert_allclose([3.0, 0.0], result.x)
        self.assertEqual(3.0, result.objective)
