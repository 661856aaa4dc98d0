import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

from coordination_milp.coordinate import scenario_conflicts, scenario_discretization
from coordination_milp.milp import SolveReport, SolveStatus, priority_hint, solve_milp, warm_start
from coordination_milp.model import MilpModel, Solution, build_model, fix_receding_horizon
from coordination_milp.support.geometry import Conflict, RobotSpec
from coordination_milp.support.scenario import Scenario
from coordination_milp.trajectory import (
    Metrics,
    PriorityGraph,
    SafetyReport,
    Trajectory,
    extract,
    metrics,
    verify_safety,
)
from coordination_milp.utils import SolverConfig

logger = logging.getLogger(__name__)


class BatchResult(NamedTuple):
    index: int
    window: Tuple[float, float]
    robots: Tuple[str, ...]
    report: SolveReport


class RecedingResult(NamedTuple):
    status: SolveStatus
    batches: List[BatchResult]
    model: Optional[MilpModel] = None
    solution: Optional[Solution] = None
    trajectories: Optional[List[Trajectory]] = None
    priorities: Optional[PriorityGraph] = None
    safety: Optional[SafetyReport] = None
    metrics: Optional[Metrics] = None
    failed_batch: Optional[int] = None

    @property
    def objective(self) -> Optional[float]:
        return self.solution.objective if self.solution is not None else None


def batch_windows(
    robots: Sequence[RobotSpec], window: float
) -> List[Tuple[Tuple[float, float], Tuple[str, ...]]]:
    """
    Groups robots by entry time into consecutive windows of the given length starting at
    the earliest entry. Empty windows are skipped.
    """
    if window <= 0:
        raise ValueError("Batch window must be positive, got {}".format(window))
    if not robots:
        return []
    start = min(r.t_in for r in robots)
    groups = {}
    for r in sorted(robots, key=lambda r: (r.t_in, r.id)):
        groups.setdefault(int(math.floor((r.t_in - start) / window)), []).append(r.id)
    return [
        ((start + b * window, start + (b + 1) * window), tuple(ids))
        for b, ids in sorted(groups.items())
    ]


def _worse(a: SolveStatus, b: SolveStatus) -> SolveStatus:
    return a if a.exit_code > b.exit_code else b


def _batch_seed(model, committed, entry_times, config):
    """
    Incumbent for a batch that keeps the committed priorities and lets the new robots
    yield to whoever entered first
    """
    hint = priority_hint(model, committed, entry_times, config.solve_limits(), config.engine)
    if hint is None:
        logger.debug("No seed from the committed priorities")
        return None
    return warm_start(model, hint, config.engine)


def solve_receding(
    scenario: Scenario,
    window: float,
    config: SolverConfig = SolverConfig(),
    conflicts: Optional[Sequence[Conflict]] = None,
) -> RecedingResult:
    """
    Solves batches of robots in entry order. Every batch model holds all robots admitted so
    far, with the robots of earlier batches pinned to their committed trajectories.
    """
    if conflicts is None:
        conflicts = scenario_conflicts(scenario, config.resolution)
    disc = scenario_discretization(scenario, config)
    options = config.model_options()
    entry_times = {r.id: r.t_in for r in scenario.robots}
    batches = []
    admitted = set()
    committed = None
    model = None
    status = SolveStatus.OPTIMAL
    graph = PriorityGraph()
    for index, (window_bounds, ids) in enumerate(batch_windows(scenario.robots, window)):
        admitted.update(ids)
        robots = [r for r in scenario.robots if r.id in admitted]
        zone_ids = [
            n
            for n, c in enumerate(conflicts)
            if c.robot_i in admitted and c.robot_j in admitted
        ]
        model = build_model(
            robots, [conflicts[n] for n in zone_ids], disc, options, zone_ids
        )
        seed = None
        if committed is not None:
            model = fix_receding_horizon(model, committed, ids)
            seed = _batch_seed(model, committed, entry_times, config)
        report = solve_milp(model, config.solve_limits(), config.engine, incumbent=seed)
        batches.append(BatchResult(index, window_bounds, ids, report))
        logger.info(
            "Batch %d (%d new robots, %d total): %s",
            index,
            len(ids),
            len(robots),
            report.status.label,
        )
        status = _worse(status, report.status)
        if not report.status.has_incumbent:
            logger.warning("Batch %d has no solution", index)
            return RecedingResult(report.status, batches, model, failed_batch=index)
        committed = report.solution(model)
        graph = graph.union(PriorityGraph.from_solution(committed))

    if committed is None:
        return RecedingResult(SolveStatus.INFEASIBLE, batches)
    trajectories, _ = extract(model, committed)
    if not graph.is_acyclic():
        logger.warning("Composite priority graph has a cycle: %s", graph)
    safety = verify_safety(trajectories, conflicts, config.verify_dt, robots=scenario.robots)
    return RecedingResult(
        status,
        batches,
        model,
        committed,
        trajectories,
        graph,
        safety,
        metrics(trajectories, scenario.robots, safety),
    )
