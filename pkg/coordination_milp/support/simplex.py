import logging
from typing import Optional, Sequence

import numpy as np

from coordination_milp.support.lp import LpSolution, LpStatus, SolverError, infeasible

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-9
OPTIMALITY_TOLERANCE = 1e-9
PHASE_ONE_TOLERANCE = 1e-7
STALL_THRESHOLD = 50

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2


class SimplexError(SolverError):
    pass


class _Unbounded(Exception):
    pass


class BoundedSimplex:
    """
    Dense two-phase primal simplex for bounded columns.

    Inequality rows get a slack column (+1 for <=, -1 for >=) bounded below by 0.
    Nonbasic columns sit at either bound and may flip between them without a basis
    change. Pricing is Dantzig's rule until the objective stalls, then Bland's rule.
    """

    def __init__(
        self,
        c: np.ndarray,
        A: np.ndarray,
        sense: np.ndarray,
        rhs: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        max_iterations: Optional[int] = None,
        stall_threshold: int = STALL_THRESHOLD,
    ):
        self.m, self.n = A.shape
        self.c = np.asarray(c, dtype=float)
        slack_rows = np.flatnonzero(sense != "E")
        slacks = np.zeros((self.m, len(slack_rows)))
        for col, row in enumerate(slack_rows):
            slacks[row, col] = 1.0 if sense[row] == "L" else -1.0
        self.A = np.hstack([np.asarray(A, dtype=float), slacks])
        self.b = np.asarray(rhs, dtype=float)
        self.lower = np.concatenate([lower, np.zeros(len(slack_rows))])
        self.upper = np.concatenate([upper, np.full(len(slack_rows), np.inf)])
        self.cost = np.concatenate([-self.c, np.zeros(len(slack_rows))])
        self.width = self.A.shape[1]
        self.max_iterations = max_iterations or 50 * (self.m + self.width) + 1000
        self.stall_threshold = stall_threshold
        self.iterations = 0

    def solve(self, basis: Optional[Sequence[int]] = None) -> LpSolution:
        if self.m == 0:
            return self._solve_unconstrained()
        start = self._warm_start(basis) if basis is not None else None
        if start is None:
            start = self._phase_one()
            if start is None:
                return infeasible(self.iterations)
        A, lower, upper, basis, x, status = start
        cost = np.concatenate([self.cost, np.zeros(A.shape[1] - self.width)])
        try:
            reduced, y = self._iterate(cost, A, lower, upper, basis, x, status)
        except _Unbounded:
            return LpSolution(LpStatus.UNBOUNDED, None, np.inf, iterations=self.iterations)
        values = x[: self.n].copy()
        return LpSolution(
            LpStatus.OPTIMAL,
            values,
            float(self.c @ values),
            basis=tuple(int(b) for b in basis) if max(basis) < self.width else None,
            duals=-y,
            reduced_costs=-reduced[: self.n],
            iterations=self.iterations,
        )

    def _solve_unconstrained(self) -> LpSolution:
        values = np.where(self.c > 0, self.upper[: self.n], self.lower[: self.n])
        return LpSolution(
            LpStatus.OPTIMAL,
            values,
            float(self.c @ values),
            basis=(),
            duals=np.zeros(0),
            reduced_costs=self.c.copy(),
        )

    def _nonbasic_start(self):
        status = np.full(self.width, AT_LOWER)
        x = self.lower.copy()
        return x, status

    def _warm_start(self, basis: Sequence[int]):
        basis = list(basis)
        if len(basis) != self.m or len(set(basis)) != self.m or max(basis) >= self.width:
            logger.debug("Ignoring malformed warm-start basis")
            return None
        x, status = self._nonbasic_start()
        status[basis] = BASIC
        B = self.A[:, basis]
        nonbasic = status != BASIC
        try:
            x[basis] = np.linalg.solve(B, self.b - self.A[:, nonbasic] @ x[nonbasic])
        except np.linalg.LinAlgError:
            logger.debug("Warm-start basis is singular")
            return None
        xb = x[basis]
        if np.any(xb < self.lower[basis] - PHASE_ONE_TOLERANCE) or np.any(
            xb > self.upper[basis] + PHASE_ONE_TOLERANCE
        ):
            logger.debug("Warm-start basis is not primal feasible")
            return None
        return self.A, self.lower, self.upper, basis, x, status

    def _phase_one(self):
        x, status = self._nonbasic_start()
        residual = self.b - self.A @ x
        signs = np.where(residual >= 0, 1.0, -1.0)
        A = np.hstack([self.A, np.diag(signs)])
        lower = np.concatenate([self.lower, np.zeros(self.m)])
        upper = np.concatenate([self.upper, np.full(self.m, np.inf)])
        x = np.concatenate([x, np.abs(residual)])
        status = np.concatenate([status, np.full(self.m, BASIC)])
        basis = list(range(self.width, self.width + self.m))
        cost = np.concatenate([np.zeros(self.width), np.ones(self.m)])
        self._iterate(cost, A, lower, upper, basis, x, status)
        infeasibility = float(cost @ x)
        if infeasibility > PHASE_ONE_TOLERANCE * max(1.0, float(np.abs(self.b).max())):
            logger.debug("Phase one ended with infeasibility %g", infeasibility)
            return None
        # artificials stay in the problem pinned at zero
        upper[self.width :] = 0.0
        return A, lower, upper, basis, x, status

    def _iterate(self, cost, A, lower, upper, basis, x, status):
        bland = False
        best = np.inf
        stalled = 0
        while True:
            if self.iterations >= self.max_iterations:
                raise SimplexError(
                    "Simplex hit its iteration limit",
                    {"iterations": self.iterations, "bland": bland, "objective": float(cost @ x)},
                )
            B = A[:, basis]
            nonbasic = status != BASIC
            try:
                x[basis] = np.linalg.solve(B, self.b - A[:, nonbasic] @ x[nonbasic])
                y = np.linalg.solve(B.T, cost[basis])
            except np.linalg.LinAlgError:
                raise SimplexError("Singular basis", {"iterations": self.iterations})
            reduced = cost - A.T @ y
            movable = upper > lower
            improving = nonbasic & movable & (
                ((status == AT_LOWER) & (reduced < -OPTIMALITY_TOLERANCE))
                | ((status == AT_UPPER) & (reduced > OPTIMALITY_TOLERANCE))
            )
            eligible = np.flatnonzero(improving)
            if not eligible.size:
                return reduced, y
            if bland:
                j = int(eligible[0])
            else:
                j = int(eligible[np.argmax(np.abs(reduced[eligible]))])

            delta = 1.0 if status[j] == AT_LOWER else -1.0
            rate = -delta * np.linalg.solve(B, A[:, j])
            xb = x[basis]
            lb = lower[basis]
            ub = upper[basis]
            limits = np.full(self.m, np.inf)
            dec = rate < -PIVOT_TOLERANCE
            inc = rate > PIVOT_TOLERANCE
            limits[dec] = (xb[dec] - lb[dec]) / -rate[dec]
            limits[inc] = (ub[inc] - xb[inc]) / rate[inc]
            limits = np.maximum(limits, 0.0)
            t_basic = limits.min()
            flip = upper[j] - lower[j]
            if min(t_basic, flip) == np.inf:
                raise _Unbounded()

            if flip <= t_basic:
                x[j] = upper[j] if delta > 0 else lower[j]
                status[j] = AT_UPPER if delta > 0 else AT_LOWER
            else:
                ties = np.flatnonzero(limits <= t_basic + PIVOT_TOLERANCE)
                if bland:
                    r = int(ties[np.argmin([basis[i] for i in ties])])
                else:
                    r = int(ties[np.argmax(np.abs(rate[ties]))])
                x[j] += delta * limits[r]
                leaving = basis[r]
                if rate[r] < 0:
                    x[leaving] = lower[leaving]
                    status[leaving] = AT_LOWER
                else:
                    x[leaving] = upper[leaving]
                    status[leaving] = AT_UPPER
                basis[r] = j
                status[j] = BASIC
            self.iterations += 1

            objective = float(cost @ x)
            if objective < best - OPTIMALITY_TOLERANCE:
                best = objective
                stalled = 0
            else:
                stalled += 1
                if not bland and stalled >= self.stall_threshold:
                    logger.debug("Objective stalled for %d pivots, using Bland's rule", stalled)
                    bland = True
