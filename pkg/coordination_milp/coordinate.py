import itertools
import logging
import time
from typing import List, NamedTuple, Optional, Sequence

from coordination_milp.milp import SolveReport, sequential_incumbent, solve_milp
from coordination_milp.model import Discretization, MilpModel, Solution, build_model
from coordination_milp.support.geometry import Conflict, conflicts_between, make_conflict
from coordination_milp.support.scenario import Scenario, ScenarioMode
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

HORIZON_TOO_SHORT = "horizon too short"
UNSAFE_INITIAL_STATE = "unsafe initial state"


class CoordinationResult(NamedTuple):
    scenario: Scenario
    conflicts: List[Conflict]
    model: MilpModel
    report: SolveReport
    solution: Optional[Solution] = None
    trajectories: Optional[List[Trajectory]] = None
    priorities: Optional[PriorityGraph] = None
    safety: Optional[SafetyReport] = None
    metrics: Optional[Metrics] = None

    @property
    def disc(self) -> Discretization:
        return self.model.disc


def scenario_conflicts(scenario: Scenario, resolution: Optional[float] = None) -> List[Conflict]:
    """
    Explicit zones of an abstract scenario, or the zones sampled between every pair of paths
    """
    if scenario.mode is ScenarioMode.ABSTRACT:
        conflicts = []
        components = {}
        for zone in scenario.zones:
            i, j = zone.robots
            component = components.get(zone.robots, 0)
            components[zone.robots] = component + 1
            conflicts.append(
                make_conflict(
                    zone.polygon,
                    zone.robots,
                    scenario.d_par,
                    (scenario.robot(i).s_out, scenario.robot(j).s_out),
                    component,
                    zone.forward,
                    zone.backward,
                )
            )
        return conflicts
    resolution = resolution or scenario.resolution
    conflicts = []
    for spec_i, spec_j in itertools.combinations(scenario.robots, 2):
        conflicts.extend(conflicts_between(spec_i, spec_j, resolution, scenario.d_par))
    logger.info("Found %d conflict zones between %d robots", len(conflicts), len(scenario.robots))
    return conflicts


def scenario_discretization(scenario: Scenario, config: SolverConfig = SolverConfig()):
    return Discretization.for_horizon(
        scenario.robots, config.tau or scenario.tau, config.horizon or scenario.horizon
    )


def _seed_limits(limits, robots: int):
    # the seed gets at most half of the time limit, shared by its per-robot solves
    if limits.time_limit is None:
        return limits
    return limits._replace(time_limit=limits.time_limit / (2 * max(1, robots)))


def solve_scenario(
    scenario: Scenario,
    config: SolverConfig = SolverConfig(),
    conflicts: Optional[Sequence[Conflict]] = None,
) -> CoordinationResult:
    """
    Builds and solves the model of a scenario, then extracts and verifies the trajectories
    when an incumbent exists.
    """
    if conflicts is None:
        conflicts = scenario_conflicts(scenario, config.resolution)
    conflicts = list(conflicts)
    disc = scenario_discretization(scenario, config)
    model = build_model(scenario.robots, conflicts, disc, config.model_options())
    logger.info(
        "Solving %d robots, %d zones, tau=%s, K=%d", len(scenario.robots), len(conflicts), disc.tau, disc.K
    )
    limits = config.solve_limits()
    seed = None
    if config.heuristic:
        started = time.monotonic()
        seed_limits = _seed_limits(limits, len(scenario.robots))
        seed = sequential_incumbent(model, seed_limits, config.engine)
        if limits.time_limit is not None:
            spent = time.monotonic() - started
            limits = limits._replace(time_limit=max(0.0, limits.time_limit - spent))
    report = solve_milp(model, limits, config.engine, incumbent=seed)
    if not report.status.has_incumbent:
        return CoordinationResult(scenario, conflicts, model, report)
    solution = report.solution(model)
    trajectories, priorities = extract(model, solution)
    safety = verify_safety(trajectories, conflicts, config.verify_dt, robots=scenario.robots)
    return CoordinationResult(
        scenario,
        conflicts,
        model,
        report,
        solution,
        trajectories,
        priorities,
        safety,
        metrics(trajectories, scenario.robots, safety),
    )


def diagnose_infeasibility(
    scenario: Scenario,
    config: SolverConfig = SolverConfig(),
    conflicts: Optional[Sequence[Conflict]] = None,
) -> str:
    """
    Re-solves with the horizon doubled to tell a short horizon from an unavoidable collision
    """
    horizon = 2 * (config.horizon or scenario.horizon)
    result = solve_scenario(scenario, config._replace(horizon=horizon), conflicts)
    if result.report.status.has_incumbent:
        logger.info("Feasible with horizon %s", horizon)
        return HORIZON_TOO_SHORT
    return UNSAFE_INITIAL_STATE
