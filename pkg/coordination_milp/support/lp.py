import logging
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

logger = logging.getLogger(__name__)

ENGINES = ("highs", "simplex")
BOUND_TOLERANCE = 1e-9


class SolverError(Exception):
    def __init__(self, message, diagnostics=None):
        super(SolverError, self).__init__(message)
        self.diagnostics = diagnostics or {}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpSolution(NamedTuple):
    status: LpStatus
    x: Optional[np.ndarray]
    objective: float
    # basic column positions (structural then slack) for warm starts
    basis: Optional[Tuple[int, ...]] = None
    # sensitivities of the maximized objective to each row rhs and column value
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def infeasible(iterations: int = 0) -> LpSolution:
    return LpSolution(LpStatus.INFEASIBLE, None, -np.inf, iterations=iterations)


def _rows(A, mask):
    return A[np.flatnonzero(mask)]


def _solve_highs(c, A, sense, rhs, lower, upper) -> LpSolution:
    le = sense == "L"
    ge = sense == "G"
    eq = sense == "E"
    A_ub = sparse.vstack([_rows(A, le), -_rows(A, ge)]).tocsr()
    b_ub = np.concatenate([rhs[le], -rhs[ge]])
    A_eq = _rows(A, eq)
    b_eq = rhs[eq]
    result = linprog(
        -c,
        A_ub=A_ub if A_ub.shape[0] else None,
        b_ub=b_ub if A_ub.shape[0] else None,
        A_eq=A_eq if A_eq.shape[0] else None,
        b_eq=b_eq if A_eq.shape[0] else None,
        bounds=np.column_stack([lower, upper]),
        method="highs-ds",
    )
    iterations = int(getattr(result, "nit", 0) or 0)
    if result.status == 2:
        return infeasible(iterations)
    if result.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, None, np.inf, iterations=iterations)
    if result.status != 0:
        raise SolverError(
            "HiGHS failed: {}".format(result.message),
            {"status": result.status, "iterations": iterations},
        )

    duals = np.zeros(len(rhs))
    n_le = int(le.sum())
    if A_ub.shape[0]:
        marginals = result.ineqlin.marginals
        duals[le] = -marginals[:n_le]
        duals[ge] = marginals[n_le:]
    if A_eq.shape[0]:
        duals[eq] = -result.eqlin.marginals
    reduced = -(result.lower.marginals + result.upper.marginals)
    return LpSolution(
        LpStatus.OPTIMAL,
        np.asarray(result.x, dtype=float),
        float(c @ result.x),
        duals=duals,
        reduced_costs=reduced,
        iterations=iterations,
    )


def solve_arrays(
    c: np.ndarray,
    A,
    sense: np.ndarray,
    rhs: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    engine: str = "highs",
    basis: Optional[Tuple[int, ...]] = None,
) -> LpSolution:
    """
    Maximizes c.x subject to rows A x (sense) rhs and lower <= x <= upper.

    :param sense: one of "L", "G", "E" per row
    :param engine: "highs" or "simplex"
    :param basis: starting basis for the simplex engine, ignored by HiGHS
    """
    if engine not in ENGINES:
        raise ValueError("Unknown LP engine: {}".format(engine))
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise SolverError("All column bounds must be finite")
    if np.any(lower > upper + BOUND_TOLERANCE):
        logger.debug("Crossed column bounds, LP is infeasible")
        return infeasible()
    upper = np.maximum(lower, upper)
    A = sparse.csr_matrix(A)
    if engine == "highs":
        return _solve_highs(c, A, sense, rhs, lower, upper)
    from coordination_milp.support.simplex import BoundedSimplex

    return BoundedSimplex(c, A.toarray(), sense, rhs, lower, upper).solve(basis)
