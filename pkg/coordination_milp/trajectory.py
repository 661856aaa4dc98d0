import csv
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from graphlib import CycleError, TopologicalSorter
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import shapely

from coordination_milp.milp import (
    INTEGRALITY_TOLERANCE,
    SolveLimits,
    SolveStatus,
    solve_milp,
)
from coordination_milp.model import (
    Discretization,
    MilpModel,
    ModelOptions,
    Solution,
    VarKind,
    build_model,
    pi_index,
    state_index,
)
from coordination_milp.support.geometry import (
    CollisionSamples,
    Conflict,
    RobotSpec,
    arc_pose,
    contains,
)

logger = logging.getLogger(__name__)

EXIT_TOLERANCE = 1e-6
MAX_ORACLE_ZONES = 6
FOOTPRINT_AREA_TOLERANCE = 1e-9


class ExtractionError(Exception):
    pass


class LivenessError(Exception):
    def __init__(self, robot_id):
        super(LivenessError, self).__init__("Robot {} never reaches s_out".format(robot_id))
        self.robot_id = robot_id


class Trajectory(NamedTuple):
    robot: str
    tau: float
    times: np.ndarray
    s: np.ndarray
    v: np.ndarray
    # one entry per step, constant within it
    accel: np.ndarray

    @property
    def knots(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.times.tolist(), self.s.tolist(), self.v.tolist()))

    @property
    def steps(self) -> int:
        return len(self.accel)

    def position(self, t) -> np.ndarray:
        """
        s(t) under constant acceleration per step, extended linearly past the last knot
        """
        t = np.asarray(t, dtype=float)
        k = np.clip(np.floor(t / self.tau + 1e-12).astype(int), 0, self.steps - 1)
        u = t - k * self.tau
        return self.s[k] + self.v[k] * u + 0.5 * self.accel[k] * u ** 2

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.clip(np.floor(t / self.tau + 1e-12).astype(int), 0, self.steps - 1)
        return self.v[k] + self.accel[k] * (t - k * self.tau)


class PriorityGraph:
    """
    Directed edges holder > other, one per conflict zone
    """

    def __init__(self, edges: Iterable[Tuple[str, str]] = ()):
        self.edges = tuple(edges)

    @staticmethod
    def from_solution(solution: Solution) -> "PriorityGraph":
        return PriorityGraph((holder, other) for _, holder, other in solution.priorities())

    @property
    def pairs(self) -> frozenset:
        return frozenset(self.edges)

    def union(self, other: "PriorityGraph") -> "PriorityGraph":
        return PriorityGraph(self.edges + tuple(e for e in other.edges if e not in self.pairs))

    def _sorter(self):
        graph = {}
        for holder, other in self.edges:
            graph.setdefault(other, set()).add(holder)
            graph.setdefault(holder, set())
        return TopologicalSorter(graph)

    def is_acyclic(self) -> bool:
        try:
            self._sorter().prepare()
        except CycleError:
            return False
        return True

    def order(self) -> Tuple[str, ...]:
        """
        Robots from highest to lowest priority
        """
        return tuple(self._sorter().static_order())

    def __contains__(self, edge):
        return tuple(edge) in self.pairs

    def __eq__(self, other):
        return isinstance(other, PriorityGraph) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __len__(self):
        return len(self.edges)

    def __str__(self):
        return ", ".join("{}>{}".format(h, o) for h, o in self.edges)

    def __repr__(self):
        return "PriorityGraph<{}>".format(self)


def _check_binaries(solution: Solution):
    for index, value in solution.binaries().items():
        if abs(value - round(value)) > INTEGRALITY_TOLERANCE:
            raise ExtractionError("Binary {} is fractional: {}".format(index.name, value))


def extract(model: MilpModel, solution: Solution) -> Tuple[List[Trajectory], PriorityGraph]:
    """
    Knots up to the first exited step follow the solved speeds through the trapezoid rule.
    After it the robot keeps its speed.
    """
    _check_binaries(solution)
    tau = model.disc.tau
    K = model.disc.K
    trajectories = []
    for robot in model.robots:
        s_solved, v_solved = solution.states(robot.id)
        exited = [
            k
            for k in range(K + 1)
            if solution.value(state_index(VarKind.SIGMA, robot.id, k)) >= 0.5
        ]
        k_exit = exited[0] if exited else K
        s = np.empty(K + 1)
        v = np.empty(K + 1)
        s[0] = s_solved[0]
        v[0] = max(0.0, v_solved[0])
        for k in range(K):
            if k < k_exit:
                v[k + 1] = max(0.0, v_solved[k + 1])
            else:
                v[k + 1] = v[k]
            s[k + 1] = s[k] + tau / 2 * (v[k] + v[k + 1])
        trajectories.append(
            Trajectory(robot.id, tau, model.disc.times, s, v, np.diff(v) / tau)
        )
    return trajectories, PriorityGraph.from_solution(solution)


def _grid(tau: float, steps: int, dt: float) -> np.ndarray:
    if not 0 < dt <= tau + 1e-12:
        raise ValueError("Sampling step must be in (0, tau], got {}".format(dt))
    per_step = int(np.ceil(tau / dt - 1e-9))
    local = np.linspace(0.0, tau, per_step + 1)[:-1]
    times = (np.arange(steps)[:, None] * tau + local[None, :]).ravel()
    return np.append(times, steps * tau)


def sample(traj: Trajectory, dt: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Dense (t, s, v) samples. Every knot is included exactly.
    """
    t = _grid(traj.tau, traj.steps, dt)
    s = traj.position(t)
    v = traj.velocity(t)
    knots = np.arange(0, len(t), (len(t) - 1) // traj.steps)
    s[knots] = traj.s
    v[knots] = traj.v
    return t, s, v


class Violation(NamedTuple):
    robot_i: str
    robot_j: str
    zone: int
    t: float
    s_i: float
    s_j: float
    kind: str


class SafetyReport(NamedTuple):
    violations: Tuple[Violation, ...]
    min_clearance: float
    pairs: Dict[Tuple[str, str], float]
    samples: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            "ok": self.ok,
            "violations": [v._asdict() for v in self.violations],
            "min_clearance": self.min_clearance if np.isfinite(self.min_clearance) else None,
            "samples": self.samples,
        }


def _first_per_run(mask: np.ndarray) -> np.ndarray:
    """
    Indices starting each run of True values
    """
    starts = mask & ~np.concatenate(([False], mask[:-1]))
    return np.flatnonzero(starts)


def verify_safety(
    trajectories: Sequence[Trajectory],
    conflicts: Sequence[Conflict] = (),
    dt: Optional[float] = None,
    robots: Sequence[RobotSpec] = (),
    samples: Optional[Dict[Tuple[str, str], CollisionSamples]] = None,
) -> SafetyReport:
    """
    Samples every pair of trajectories and looks for configurations inside a collision
    zone, inside a raw collision sample cell, or overlapping footprints.

    :param dt: sampling step, tau/20 by default
    :param robots: specs enabling the footprint check for robots with geometry
    :param samples: raw collision samples keyed by robot pair
    """
    if not trajectories:
        return SafetyReport((), np.inf, {}, 0)
    tau = trajectories[0].tau
    steps = trajectories[0].steps
    for traj in trajectories:
        if traj.tau != tau or traj.steps != steps:
            raise ValueError("Trajectories must share the time grid")
    t = _grid(tau, steps, dt or tau / 20)
    positions = {traj.robot: traj.position(t) for traj in trajectories}
    violations = []
    clearance = {}

    for z, conflict in enumerate(conflicts):
        i, j = conflict.robot_i, conflict.robot_j
        if i not in positions or j not in positions:
            continue
        s_i, s_j = positions[i], positions[j]
        inside = contains(conflict.polygon, s_i, s_j)
        for n in _first_per_run(inside):
            violations.append(Violation(i, j, z, float(t[n]), float(s_i[n]), float(s_j[n]), "zone"))
        distance = shapely.distance(conflict.polygon.shape, shapely.points(s_i, s_j))
        pair = (i, j)
        clearance[pair] = min(clearance.get(pair, np.inf), float(np.min(distance)))

    for (i, j), raw in (samples or {}).items():
        if i not in positions or j not in positions or not raw.count:
            continue
        s_i, s_j = positions[i], positions[j]
        cells = np.column_stack(
            [np.round(s_i / raw.resolution), np.round(s_j / raw.resolution)]
        ).astype(int)
        hit = (s_i >= 0) & (s_j >= 0) & (s_i <= raw.s_out_i) & (s_j <= raw.s_out_j)
        known = {tuple(c) for c in raw.indices.tolist()}
        inside = hit & np.array([tuple(c) in known for c in cells.tolist()])
        for n in _first_per_run(inside):
            violations.append(
                Violation(i, j, -1, float(t[n]), float(s_i[n]), float(s_j[n]), "sample")
            )

    geometric = [r for r in robots if r.is_geometric and r.id in positions]
    for a, b in itertools.combinations(geometric, 2):
        s_a, s_b = positions[a.id], positions[b.id]
        active = np.flatnonzero((s_a >= 0) & (s_a <= a.s_out) & (s_b >= 0) & (s_b <= b.s_out))
        if not active.size:
            continue
        poses_a = [arc_pose(a.geometry, float(s_a[n])) for n in active]
        poses_b = [arc_pose(b.geometry, float(s_b[n])) for n in active]
        overlap = shapely.area(shapely.intersection(poses_a, poses_b)) > FOOTPRINT_AREA_TOLERANCE
        mask = np.zeros(len(t), dtype=bool)
        mask[active[overlap]] = True
        for n in _first_per_run(mask):
            violations.append(
                Violation(a.id, b.id, -1, float(t[n]), float(s_a[n]), float(s_b[n]), "footprint")
            )

    violations.sort(key=lambda v: (v.t, v.robot_i, v.robot_j, v.kind))
    if violations:
        logger.warning("Found %d safety violations", len(violations))
    return SafetyReport(
        tuple(violations),
        min(clearance.values(), default=np.inf),
        clearance,
        len(t),
    )


class Metrics(NamedTuple):
    t_out: Dict[str, float]
    sojourn: Dict[str, float]
    mean_sojourn: float
    min_clearance: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "t_out": self.t_out,
            "sojourn": self.sojourn,
            "mean_sojourn": self.mean_sojourn,
            "min_clearance": self.min_clearance,
        }


def exit_time(traj: Trajectory, s_out: float) -> float:
    """
    Time the front reaches s_out, from the quadratic of the crossing step
    """
    for k in range(traj.steps):
        if traj.s[k + 1] >= s_out - EXIT_TOLERANCE:
            remaining = s_out - traj.s[k]
            if remaining <= 0:
                return float(traj.times[k])
            v = traj.v[k]
            a = traj.accel[k]
            root = np.sqrt(max(0.0, v * v + 2 * a * remaining))
            u = 2 * remaining / (v + root) if v + root > 0 else traj.tau
            return float(traj.times[k] + min(max(u, 0.0), traj.tau))
    raise LivenessError(traj.robot)


def metrics(
    trajectories: Sequence[Trajectory],
    robots: Sequence[RobotSpec],
    safety: Optional[SafetyReport] = None,
) -> Metrics:
    specs = {r.id: r for r in robots}
    t_out = {}
    sojourn = {}
    for traj in trajectories:
        robot = specs[traj.robot]
        t_out[traj.robot] = exit_time(traj, robot.s_out)
        sojourn[traj.robot] = t_out[traj.robot] - robot.t_in
    clearance = None
    if safety is not None and np.isfinite(safety.min_clearance):
        clearance = safety.min_clearance
    return Metrics(t_out, sojourn, float(np.mean(list(sojourn.values()))), clearance)


def write_trajectory_csv(trajectories: Sequence[Trajectory], file):
    writer = csv.writer(file)
    writer.writerow(["robot", "t", "s", "v", "a"])
    for traj in trajectories:
        accel = np.append(traj.accel, 0.0)
        for t, s, v, a in zip(traj.times, traj.s, traj.v, accel):
            writer.writerow([traj.robot, repr(float(t)), repr(float(s)), repr(float(v)), repr(float(a))])


def read_trajectory_csv(file) -> List[Trajectory]:
    rows = {}
    reader = csv.DictReader(file)
    if reader.fieldnames != ["robot", "t", "s", "v", "a"]:
        raise ValueError("Unexpected trajectory header: {}".format(reader.fieldnames))
    for row in reader:
        rows.setdefault(row["robot"], []).append(
            (float(row["t"]), float(row["s"]), float(row["v"]), float(row["a"]))
        )
    trajectories = []
    for robot, knots in rows.items():
        data = np.array(knots)
        if len(data) < 2:
            raise ValueError("Trajectory of {} has fewer than two knots".format(robot))
        tau = float(data[1, 0] - data[0, 0])
        trajectories.append(
            Trajectory(robot, tau, data[:, 0], data[:, 1], data[:, 2], data[:-1, 3])
        )
    return trajectories


class OracleResult(NamedTuple):
    status: SolveStatus
    objective: Optional[float]
    # bit z = 1 when robot_i of conflict z holds priority
    assignment: Optional[Tuple[int, ...]]
    graph: Optional[PriorityGraph]
    objectives: Dict[Tuple[int, ...], Optional[float]]
    solution: Optional[Solution] = None

    @property
    def solves(self) -> int:
        return len(self.objectives)


def enumerate_priorities_oracle(
    robots: Sequence[RobotSpec],
    conflicts: Sequence[Conflict],
    disc: Discretization,
    options: ModelOptions = ModelOptions(),
    limits: SolveLimits = SolveLimits(),
    engine: str = "highs",
    threads: int = 1,
) -> OracleResult:
    """
    Solves the model once per priority assignment and keeps the best.

    Ties go to the lexicographically smallest assignment.
    """
    if len(conflicts) > MAX_ORACLE_ZONES:
        raise ValueError(
            "Oracle enumerates at most {} zones, got {}".format(MAX_ORACLE_ZONES, len(conflicts))
        )
    model = build_model(robots, conflicts, disc, options._replace(forced_priorities=()))
    base_lower, base_upper = model.column_bounds()
    assignments = list(itertools.product((0, 1), repeat=len(conflicts)))

    def run(bits):
        lower = base_lower.copy()
        upper = base_upper.copy()
        for z, (conflict, bit) in enumerate(zip(conflicts, bits)):
            for index, value in ((pi_index(z, conflict, True), bit), (pi_index(z, conflict, False), 1 - bit)):
                col = model.column(index)
                lower[col] = upper[col] = value
        return solve_milp(model, limits, engine, lower=lower, upper=upper)

    if threads > 1:
        with ThreadPoolExecutor(threads) as executor:
            reports = list(executor.map(run, assignments))
    else:
        reports = [run(bits) for bits in assignments]

    best = None
    objectives = {}
    timed_out = False
    for bits, report in zip(assignments, reports):
        objectives[bits] = report.objective
        if report.status in (SolveStatus.TIMEOUT_WITH_INCUMBENT, SolveStatus.TIMEOUT_NO_INCUMBENT):
            timed_out = True
        if report.incumbent is None:
            continue
        if best is None or report.objective > best[1].objective + 1e-9:
            best = (bits, report)
    logger.debug("Oracle solved %d assignments", len(assignments))

    if best is None:
        status = SolveStatus.TIMEOUT_NO_INCUMBENT if timed_out else SolveStatus.INFEASIBLE
        return OracleResult(status, None, None, None, objectives)
    bits, report = best
    solution = report.solution(model)
    status = SolveStatus.TIMEOUT_WITH_INCUMBENT if timed_out else SolveStatus.OPTIMAL
    return OracleResult(
        status,
        report.objective,
        bits,
        PriorityGraph.from_solution(solution),
        objectives,
        solution,
    )
