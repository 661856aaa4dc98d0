import heapq
import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from coordination_milp.model import (
    MilpModel,
    Solution,
    VariableIndex,
    build_model,
    column_label,
    fix_receding_horizon,
    pi_index,
)
from coordination_milp.support.geometry import RobotSpec
from coordination_milp.support.lp import LpSolution, LpStatus, solve_arrays

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-6
INTEGRALITY_TOLERANCE = 1e-5
OPTIMALITY_GAP = 1e-6
# presolve only trusts thresholds strictly outside the bounds
_PRESOLVE_TOLERANCE = 1e-9


class HintError(Exception):
    pass


class SolveLimits(NamedTuple):
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    gap: float = OPTIMALITY_GAP
    threads: int = 1


class SolveStatus(Enum):
    OPTIMAL = ("optimal", 0)
    INFEASIBLE = ("infeasible", 2)
    TIMEOUT_WITH_INCUMBENT = ("timeout-with-incumbent", 3)
    TIMEOUT_NO_INCUMBENT = ("timeout-no-incumbent", 4)

    @property
    def label(self):
        return self.value[0]

    @property
    def exit_code(self):
        return self.value[1]

    @property
    def has_incumbent(self):
        return self in (SolveStatus.OPTIMAL, SolveStatus.TIMEOUT_WITH_INCUMBENT)


class NodeRecord(NamedTuple):
    id: int
    parent: Optional[int]
    depth: int
    # None when the node LP was infeasible
    objective: Optional[float]


class BnbNode(NamedTuple):
    id: int
    parent: Optional[int]
    depth: int
    parent_bound: float
    lower: np.ndarray
    upper: np.ndarray

    def fixed(self, binary_columns) -> Dict[int, float]:
        return {
            int(c): float(self.lower[c])
            for c in binary_columns
            if self.lower[c] == self.upper[c]
        }


class SolveReport(NamedTuple):
    status: SolveStatus
    incumbent: Optional[LpSolution]
    bound: float
    nodes: int
    wall_time: float
    presolve_fixed: int = 0
    trace: Tuple[NodeRecord, ...] = ()

    @property
    def objective(self) -> Optional[float]:
        return self.incumbent.objective if self.incumbent is not None else None

    def solution(self, model: MilpModel) -> Optional[Solution]:
        if self.incumbent is None:
            return None
        return Solution(model, self.incumbent.x, self.incumbent.objective)

    def to_dict(self) -> Dict:
        return {
            "status": self.status.label,
            "objective": self.objective,
            "bound": self.bound if np.isfinite(self.bound) else None,
            "nodes": self.nodes,
            "wall_time": self.wall_time,
            "presolve_fixed": self.presolve_fixed,
        }


class PresolveResult(NamedTuple):
    lower: np.ndarray
    upper: np.ndarray
    fixed: int
    infeasible: bool


def solve_lp(
    model: MilpModel,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    engine: str = "highs",
    basis=None,
) -> LpSolution:
    """
    Solves the LP relaxation of model, binaries relaxed to their column bounds
    """
    arr = model.arrays()
    return solve_arrays(
        arr.c,
        arr.A,
        arr.sense,
        arr.rhs,
        arr.lower if lower is None else lower,
        arr.upper if upper is None else upper,
        engine=engine,
        basis=basis,
    )


def presolve(
    model: MilpModel, lower: Optional[np.ndarray] = None, upper: Optional[np.ndarray] = None
) -> PresolveResult:
    """
    Fixes indicator binaries decided by position bounds, then pushes fixings along the
    monotone chains: a 1 fixes every later binary of its chain, a 0 every earlier one.
    """
    arr = model.arrays()
    lower = (arr.lower if lower is None else lower).copy()
    upper = (arr.upper if upper is None else upper).copy()
    before = int(np.sum(arr.binary & (lower == upper)))

    def fix(col, value):
        if lower[col] > value or upper[col] < value:
            return False
        lower[col] = upper[col] = value
        return True

    for ind in model.indicators:
        if lower[ind.column] > ind.threshold + _PRESOLVE_TOLERANCE:
            if not fix(ind.binary, 1.0):
                return PresolveResult(lower, upper, 0, True)
        elif upper[ind.column] < ind.threshold - _PRESOLVE_TOLERANCE:
            if not fix(ind.binary, 0.0):
                return PresolveResult(lower, upper, 0, True)

    for chain in model.chains:
        ones = [n for n, col in enumerate(chain) if lower[col] == 1.0]
        zeros = [n for n, col in enumerate(chain) if upper[col] == 0.0]
        if ones and zeros and min(ones) <= max(zeros):
            return PresolveResult(lower, upper, 0, True)
        if ones:
            for col in chain[min(ones) :]:
                fix(col, 1.0)
        if zeros:
            for col in chain[: max(zeros) + 1]:
                fix(col, 0.0)

    fixed = int(np.sum(arr.binary & (lower == upper))) - before
    logger.debug("Presolve fixed %d binaries", fixed)
    return PresolveResult(lower, upper, fixed, False)


def _branch_column(model: MilpModel, x: np.ndarray) -> Optional[int]:
    """
    pi before eps before mu/sigma, then the most fractional value, then the lowest column
    """
    arr = model.arrays()
    binary = np.flatnonzero(arr.binary)
    if not binary.size:
        return None
    values = x[binary]
    fraction = np.minimum(values - np.floor(values), np.ceil(values) - values)
    fractional = fraction > INTEGRALITY_TOLERANCE
    if not np.any(fractional):
        return None
    candidates = binary[fractional]
    order = np.lexsort((candidates, -fraction[fractional], arr.branch_class[candidates]))
    return int(candidates[order[0]])


def _polish(model, lp: LpSolution, lower, upper, engine) -> Optional[LpSolution]:
    """
    Re-solves the continuous part with the binaries rounded.

    :return: None when neither the polished nor the rounded vector satisfies the rows
    """
    arr = model.arrays()
    binary = arr.binary
    rounded = np.round(lp.x[binary])
    lower = lower.copy()
    upper = upper.copy()
    lower[binary] = rounded
    upper[binary] = rounded
    polished = solve_lp(model, lower, upper, engine)
    if polished.is_optimal:
        x = polished.x.copy()
        x[binary] = rounded
        return polished._replace(x=x, objective=float(arr.c @ x))
    x = lp.x.copy()
    x[binary] = rounded
    violation = float(model.residuals(x).max(initial=0.0))
    if violation > FEASIBILITY_TOLERANCE:
        logger.debug("Rounded node solution violates a row by %.3g, rejected", violation)
        return None
    logger.debug("Polishing LP failed, keeping the rounded node solution")
    return lp._replace(x=x, objective=float(arr.c @ x))


def _loosest_binary(model: MilpModel, x: np.ndarray, lower, upper) -> Optional[int]:
    """
    The unfixed binary farthest from an integer, for nodes whose rounding was rejected
    """
    free = np.flatnonzero(model.arrays().binary & (lower < upper))
    if not free.size:
        return None
    distance = np.abs(x[free] - np.round(x[free]))
    return int(free[np.argmax(distance)])


def solve_milp(
    model: MilpModel,
    limits: SolveLimits = SolveLimits(),
    engine: str = "highs",
    trace: bool = False,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    incumbent: Optional[LpSolution] = None,
) -> SolveReport:
    """
    Maximizes the model by best-bound branch-and-bound with depth-first plunging until the
    first incumbent.

    :param lower: column lower bounds overriding the model's
    :param upper: column upper bounds overriding the model's
    :param incumbent: a feasible solution seeding the search, see warm_start
    :return: the report, holding the best incumbent found
    """
    start = time.monotonic()
    # arrays are cached before worker threads read them
    model.arrays()
    pre = presolve(model, lower, upper)
    if pre.infeasible:
        logger.info("Presolve proved the model infeasible")
        return SolveReport(SolveStatus.INFEASIBLE, None, -np.inf, 0, time.monotonic() - start)

    best = incumbent
    best_objective = incumbent.objective if incumbent is not None else -np.inf
    counter = itertools.count()
    node_ids = itertools.count()
    records: List[NodeRecord] = []
    heap = []
    plunging = best is None

    def key(node: BnbNode, rank: int):
        if plunging:
            return (-node.depth, rank, next(counter))
        return (-node.parent_bound, rank, next(counter))

    def prunable(bound: float) -> bool:
        return bound <= best_objective + limits.gap * max(1.0, abs(best_objective))

    root = BnbNode(next(node_ids), None, 0, np.inf, pre.lower, pre.upper)
    heapq.heappush(heap, (key(root, 0), root))
    explored = 0
    timed_out = False
    executor = ThreadPoolExecutor(limits.threads) if limits.threads > 1 else None
    try:
        while heap:
            if limits.node_limit is not None and explored >= limits.node_limit:
                timed_out = True
                break
            if limits.time_limit is not None and time.monotonic() - start >= limits.time_limit:
                timed_out = True
                break

            batch = []
            while heap and len(batch) < max(1, limits.threads):
                _, node = heapq.heappop(heap)
                if not prunable(node.parent_bound):
                    batch.append(node)
            if not batch:
                continue

            def evaluate(node):
                return solve_lp(model, node.lower, node.upper, engine)

            if executor is not None and len(batch) > 1:
                results = list(executor.map(evaluate, batch))
            else:
                results = [evaluate(n) for n in batch]

            for node, lp in zip(batch, results):
                explored += 1
                if not lp.is_optimal:
                    if lp.status is LpStatus.UNBOUNDED:
                        logger.warning("Node %d LP is unbounded", node.id)
                    if trace:
                        records.append(NodeRecord(node.id, node.parent, node.depth, None))
                    continue
                if trace:
                    records.append(NodeRecord(node.id, node.parent, node.depth, lp.objective))
                if prunable(lp.objective):
                    continue
                column = _branch_column(model, lp.x)
                candidate = None
                if column is None:
                    candidate = _polish(model, lp, node.lower, node.upper, engine)
                    if candidate is None:
                        column = _loosest_binary(model, lp.x, node.lower, node.upper)
                        if column is None:
                            continue
                if candidate is not None:
                    if candidate.objective > best_objective:
                        best = candidate
                        best_objective = candidate.objective
                        logger.debug(
                            "New incumbent %.9g at node %d (depth %d)",
                            best_objective,
                            node.id,
                            node.depth,
                        )
                        if plunging:
                            plunging = False
                            heap = [(key(n, 0), n) for _, n in heap]
                            heapq.heapify(heap)
                    continue
                preferred = 1.0 if lp.x[column] >= 0.5 else 0.0
                for rank, value in enumerate((preferred, 1.0 - preferred)):
                    child_lower = node.lower.copy()
                    child_upper = node.upper.copy()
                    child_lower[column] = child_upper[column] = value
                    child = BnbNode(
                        next(node_ids), node.id, node.depth + 1, lp.objective, child_lower, child_upper
                    )
                    heapq.heappush(heap, (key(child, rank), child))
    finally:
        if executor is not None:
            executor.shutdown()

    wall_time = time.monotonic() - start
    if timed_out:
        open_bound = max((n.parent_bound for _, n in heap), default=-np.inf)
        bound = max(best_objective, open_bound)
        status = (
            SolveStatus.TIMEOUT_WITH_INCUMBENT if best is not None else SolveStatus.TIMEOUT_NO_INCUMBENT
        )
        logger.warning("Solve stopped by limits after %d nodes (%s)", explored, status.label)
    elif best is None:
        bound = -np.inf
        status = SolveStatus.INFEASIBLE
    else:
        bound = best_objective
        status = SolveStatus.OPTIMAL
    logger.info(
        "%s after %d nodes in %.3fs, objective %s",
        status.label,
        explored,
        wall_time,
        best_objective if best is not None else "n/a",
    )
    return SolveReport(status, best, bound, explored, wall_time, pre.fixed, tuple(records))


def warm_start(
    model: MilpModel, hint: Dict[Union[VariableIndex, int], float], engine: str = "highs"
) -> Optional[LpSolution]:
    """
    Turns a full binary assignment into an incumbent seed.

    :return: the LP solution with all binaries fixed to the hint, None if that LP is infeasible
    """
    arr = model.arrays()
    values = {}
    for key, value in hint.items():
        try:
            col = key if isinstance(key, (int, np.integer)) else model.column(key)
        except KeyError:
            raise HintError("Hint references unknown variable {}".format(key))
        if not 0 <= col < model.num_columns or not arr.binary[col]:
            raise HintError("Hint assigns non-binary column {}".format(col))
        if value not in (0, 1):
            raise HintError(
                "Hint value {} for {} is not binary".format(
                    value, column_label(model.columns[col].index)
                )
            )
        values[int(col)] = float(value)
    missing = [c for c in np.flatnonzero(arr.binary) if int(c) not in values]
    if missing:
        raise HintError(
            "Hint misses {} binaries, first {}".format(
                len(missing), column_label(model.columns[missing[0]].index)
            )
        )
    for z, conflict in model.zones():
        forward = values[model.column(pi_index(z, conflict, True))]
        backward = values[model.column(pi_index(z, conflict, False))]
        if forward + backward != 1:
            raise HintError("Priorities of zone {} do not sum to 1".format(z))

    lower = arr.lower.copy()
    upper = arr.upper.copy()
    for col, value in values.items():
        if value < lower[col] or value > upper[col]:
            logger.warning(
                "Hint %s=%d violates its column bounds, ignored",
                column_label(model.columns[col].index),
                value,
            )
            return None
        lower[col] = upper[col] = value
    lp = solve_lp(model, lower, upper, engine)
    if not lp.is_optimal:
        logger.warning("Hint is infeasible, solving without a seed")
        return None
    return lp


def priority_hint(
    model: MilpModel,
    previous: Optional[Solution],
    entry_times: Dict[str, float],
    limits: SolveLimits = SolveLimits(),
    engine: str = "highs",
) -> Optional[Dict[VariableIndex, float]]:
    """
    A full binary hint: priorities of conflicts solved before are kept, the others go to
    the robot entering first. The remaining binaries come from solving the model with
    those priorities fixed.

    :return: None when the fixed priorities admit no solution
    """
    lower, upper = model.column_bounds()
    for z, conflict in model.zones():
        forward = pi_index(z, conflict, True)
        if previous is not None and previous.model.has_column(forward):
            value = float(round(previous.value(forward)))
        else:
            value = 1.0 if entry_times[conflict.robot_i] <= entry_times[conflict.robot_j] else 0.0
        for index, v in ((forward, value), (pi_index(z, conflict, False), 1.0 - value)):
            col = model.column(index)
            lower[col] = upper[col] = v
    report = solve_milp(model, limits, engine, lower=lower, upper=upper)
    if not report.status.has_incumbent:
        return None
    x = report.incumbent.x
    return {
        col.index: float(round(x[n])) for n, col in enumerate(model.columns) if col.is_binary
    }


def entry_order(
    robots: Sequence[RobotSpec], forced: Sequence[Tuple[str, str]] = ()
) -> Optional[List[str]]:
    """
    Robot ids by entry time, ties by id, with every forced holder ahead of the robot it
    passes first.

    :return: None when the forced pairs form a cycle
    """
    known = {r.id for r in robots}
    after = {r.id: set() for r in robots}
    waiting = {r.id: 0 for r in robots}
    for holder, other in set(forced):
        if holder in known and other in known and other not in after[holder]:
            after[holder].add(other)
            waiting[other] += 1
    entry = {r.id: r.t_in for r in robots}
    ready = [(entry[i], i) for i, n in waiting.items() if n == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, robot_id = heapq.heappop(ready)
        order.append(robot_id)
        for other in after[robot_id]:
            waiting[other] -= 1
            if waiting[other] == 0:
                heapq.heappush(ready, (entry[other], other))
    if len(order) != len(robots):
        return None
    return order


def sequential_incumbent(
    model: MilpModel,
    limits: SolveLimits = SolveLimits(),
    engine: str = "highs",
    order: Optional[Sequence[str]] = None,
) -> Optional[LpSolution]:
    """
    Plans the robots one at a time, each yielding at every zone to the robots planned
    before it, and turns the last plan into a seed for the full model.

    :param order: robot ids, defaults to entry_order with the model's forced priorities
    :return: None when some robot finds no plan behind the others
    """
    if order is None:
        order = entry_order(model.robots, model.options.forced_priorities)
        if order is None:
            logger.info("Forced priorities form a cycle, no sequential seed")
            return None
    rank = {robot_id: n for n, robot_id in enumerate(order)}
    committed = None
    for n, robot_id in enumerate(order):
        admitted = set(order[: n + 1])
        robots = [r for r in model.robots if r.id in admitted]
        zones = [
            (z, c) for z, c in model.zones() if c.robot_i in admitted and c.robot_j in admitted
        ]
        forced = tuple(
            sorted(
                {
                    (c.robot_i, c.robot_j)
                    if rank[c.robot_i] < rank[c.robot_j]
                    else (c.robot_j, c.robot_i)
                    for _, c in zones
                }
            )
        )
        part = build_model(
            robots,
            [c for _, c in zones],
            model.disc,
            model.options._replace(forced_priorities=forced),
            [z for z, _ in zones],
        )
        if committed is not None:
            part = fix_receding_horizon(part, committed, [robot_id])
        report = solve_milp(part, limits, engine)
        if not report.status.has_incumbent:
            logger.info("Robot %s has no plan behind %s", robot_id, list(order[:n]))
            return None
        committed = report.solution(part)
    if committed is None:
        return None
    hint = {
        col.index: float(round(committed.value(col.index)))
        for col in model.columns
        if col.is_binary
    }
    seed = warm_start(model, hint, engine)
    if seed is not None:
        logger.info("Sequential seed in order %s: %.9g", ",".join(order), seed.objective)
    return seed


def export_model(model: MilpModel, fmt: str = "mps") -> str:
    from coordination_milp.support.mps import write_lp, write_mps

    if fmt == "mps":
        return write_mps(model)
    if fmt == "lp":
        return write_lp(model)
    raise ValueError("Unknown export format: {}".format(fmt))
