import copy
import hashlib
import logging
import math
from collections import Counter
from enum import Enum
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from coordination_milp.support.geometry import Conflict, ConflictZone, RobotSpec

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 30.0
BOUND_TOLERANCE = 1e-6
# Reachability pins pre-entry speed only when the robot is surely upstream
_ENTRY_TOLERANCE = 1e-9


class ModelConstructionError(Exception):
    pass


class ConsistencyError(Exception):
    pass


class Discretization(NamedTuple):
    tau: float
    K: int

    @staticmethod
    def for_horizon(
        robots: Iterable[RobotSpec], tau: float, horizon: float = DEFAULT_HORIZON
    ) -> "Discretization":
        """
        Enough steps for the latest robot to enter and then spend horizon seconds
        """
        if tau <= 0:
            raise ModelConstructionError("Time step must be positive, got {}".format(tau))
        latest = max((r.t_in for r in robots), default=0.0)
        return Discretization(tau, max(1, int(math.ceil((latest + horizon) / tau - 1e-9))))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.K + 1) * self.tau


class VarKind(Enum):
    # prefix, binary, branching class
    S = ("s", False, None)
    V = ("v", False, None)
    PI = ("pi", True, 0)
    EPS_PAR_IN = ("eps_par_in", True, 1)
    EPS_PAR_OUT = ("eps_par_out", True, 1)
    EPS_PERP_IN = ("eps_perp_in", True, 1)
    EPS_PERP_OUT = ("eps_perp_out", True, 1)
    MU = ("mu", True, 2)
    SIGMA = ("sigma", True, 2)

    @property
    def prefix(self):
        return self.value[0]

    @property
    def is_binary(self):
        return self.value[1]

    @property
    def branch_class(self):
        return self.value[2]


EPS_KINDS = (
    VarKind.EPS_PAR_IN,
    VarKind.EPS_PAR_OUT,
    VarKind.EPS_PERP_IN,
    VarKind.EPS_PERP_OUT,
)


class Side(Enum):
    I = "i"
    J = "j"


class VariableIndex(NamedTuple):
    kind: VarKind
    # robot id for s/v/mu/sigma, (holder, other) for pi, conflict pair for eps
    owner: Tuple[str, ...]
    zone: Optional[int] = None
    side: Optional[Side] = None
    k: Optional[int] = None

    @property
    def robot(self) -> str:
        if self.side is Side.J:
            return self.owner[1]
        return self.owner[0]

    @property
    def name(self) -> str:
        if self.kind is VarKind.PI:
            return "pi_{}_{}_{}".format(self.owner[0], self.owner[1], self.zone)
        if self.kind in EPS_KINDS:
            return "{}_{}_{}_{}".format(self.kind.prefix, self.robot, self.zone, self.k)
        return "{}_{}_{}".format(self.kind.prefix, self.owner[0], self.k)


def column_label(index) -> str:
    return index.name if isinstance(index, VariableIndex) else str(index)


def state_index(kind: VarKind, robot_id: str, k: int) -> VariableIndex:
    return VariableIndex(kind, (robot_id,), k=k)


def pi_index(zone: int, conflict: Conflict, forward: bool = True) -> VariableIndex:
    owner = (conflict.robot_i, conflict.robot_j)
    return VariableIndex(VarKind.PI, owner if forward else owner[::-1], zone=zone)


def eps_index(kind: VarKind, side: Side, zone: int, conflict: Conflict, k: int):
    return VariableIndex(kind, (conflict.robot_i, conflict.robot_j), zone, side, k)


class Column(NamedTuple):
    index: VariableIndex
    lower: float
    upper: float
    is_binary: bool


class Sense(Enum):
    LE = ("<=", "L")
    EQ = ("=", "E")
    GE = (">=", "G")

    @property
    def symbol(self):
        return self.value[0]

    @property
    def mps_code(self):
        return self.value[1]

    @staticmethod
    def from_code(code: str) -> "Sense":
        for s in Sense:
            if code in s.value:
                return s
        raise ValueError("Unknown row sense: {}".format(code))


class LinearConstraint(NamedTuple):
    coefficients: Dict[int, float]
    sense: Sense
    rhs: float
    tag: str
    # antecedent literals (column, active value) of an implication row
    literals: Tuple[Tuple[int, int], ...] = ()


class Indicator(NamedTuple):
    binary: int
    column: int
    threshold: float


class ModelOptions(NamedTuple):
    tie_break: bool = True
    tie_break_weight: float = 1.0
    cuts: bool = True
    tighten_bounds: bool = True
    strict_following: bool = True
    forced_priorities: Tuple[Tuple[str, str], ...] = ()


class ModelArrays(NamedTuple):
    c: np.ndarray
    A: sparse.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    binary: np.ndarray
    branch_class: np.ndarray


class MilpModel:
    """
    Columns, rows and a maximization objective over them.

    A model is filled in by build_model and treated as immutable afterwards. Bound
    changes produce a copy through with_bounds.
    """

    def __init__(
        self,
        robots: Sequence[RobotSpec] = (),
        conflicts: Sequence[Conflict] = (),
        disc: Optional[Discretization] = None,
        options: ModelOptions = ModelOptions(),
        zone_ids: Optional[Sequence[int]] = None,
    ):
        self.robots = tuple(robots)
        self.conflicts = tuple(conflicts)
        # zone numbers used in pi/eps indices, stable when a model holds a subset of zones
        self.zone_ids = tuple(range(len(self.conflicts))) if zone_ids is None else tuple(zone_ids)
        self.disc = disc
        self.options = options
        self.columns: List[Column] = []
        self.constraints: List[LinearConstraint] = []
        self.objective: Dict[int, float] = {}
        self.indicators: List[Indicator] = []
        self.chains: List[Tuple[int, ...]] = []
        self.metadata: Dict = {}
        self._lookup: Dict[VariableIndex, int] = {}
        self._arrays: Optional[ModelArrays] = None

    def zones(self) -> Iterator[Tuple[int, Conflict]]:
        return zip(self.zone_ids, self.conflicts)

    def add_column(self, index, lower: float, upper: float, is_binary: bool = False) -> int:
        if index in self._lookup:
            raise ModelConstructionError("Duplicate column {}".format(index))
        self._lookup[index] = len(self.columns)
        self.columns.append(Column(index, float(lower), float(upper), is_binary))
        self._arrays = None
        return self._lookup[index]

    def column(self, index) -> int:
        return self._lookup[index]

    def has_column(self, index) -> bool:
        return index in self._lookup

    def add_constraint(
        self, coefficients: Dict[int, float], sense: Sense, rhs: float, tag: str, literals=()
    ) -> int:
        coefficients = {c: float(v) for c, v in coefficients.items() if v != 0}
        if not coefficients:
            raise ModelConstructionError("Row {} has no nonzero coefficient".format(tag))
        if not math.isfinite(rhs):
            raise ModelConstructionError("Row {} has a non-finite rhs".format(tag))
        for c in coefficients:
            if not 0 <= c < len(self.columns):
                raise ModelConstructionError("Row {} references unknown column {}".format(tag, c))
        self.constraints.append(
            LinearConstraint(coefficients, sense, float(rhs), tag, tuple(literals))
        )
        self._arrays = None
        return len(self.constraints) - 1

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    @property
    def num_rows(self) -> int:
        return len(self.constraints)

    def robot(self, robot_id: str) -> RobotSpec:
        for r in self.robots:
            if r.id == robot_id:
                return r
        raise KeyError(robot_id)

    def column_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.array([c.lower for c in self.columns], dtype=float)
        upper = np.array([c.upper for c in self.columns], dtype=float)
        return lower, upper

    def binary_columns(self) -> List[int]:
        return [n for n, c in enumerate(self.columns) if c.is_binary]

    def arrays(self) -> ModelArrays:
        if self._arrays is None:
            rows, cols, vals = [], [], []
            for r, con in enumerate(self.constraints):
                for c, v in con.coefficients.items():
                    rows.append(r)
                    cols.append(c)
                    vals.append(v)
            A = sparse.csr_matrix(
                (vals, (rows, cols)), shape=(self.num_rows, self.num_columns)
            )
            c = np.zeros(self.num_columns)
            for col, coef in self.objective.items():
                c[col] = coef
            lower, upper = self.column_bounds()
            self._arrays = ModelArrays(
                c=c,
                A=A,
                sense=np.array([con.sense.mps_code for con in self.constraints], dtype="<U1"),
                rhs=np.array([con.rhs for con in self.constraints], dtype=float),
                lower=lower,
                upper=upper,
                binary=np.array([col.is_binary for col in self.columns], dtype=bool),
                branch_class=np.array(
                    [
                        col.index.kind.branch_class
                        if col.is_binary and isinstance(col.index, VariableIndex)
                        else 3
                        for col in self.columns
                    ],
                    dtype=int,
                ),
            )
        return self._arrays

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "MilpModel":
        clone = copy.copy(self)
        clone.columns = [
            col._replace(lower=float(lo), upper=float(hi))
            for col, lo, hi in zip(self.columns, lower, upper)
        ]
        clone.metadata = dict(self.metadata)
        clone._arrays = None
        return clone

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """
        Violation of every row at x, zero when satisfied
        """
        arr = self.arrays()
        activity = arr.A @ x
        viol = np.zeros(self.num_rows)
        le = arr.sense == "L"
        ge = arr.sense == "G"
        eq = arr.sense == "E"
        viol[le] = np.maximum(0, activity[le] - arr.rhs[le])
        viol[ge] = np.maximum(0, arr.rhs[ge] - activity[ge])
        viol[eq] = np.abs(activity[eq] - arr.rhs[eq])
        return viol

    def counts(self) -> Dict[str, int]:
        result = Counter(col.index.kind.prefix for col in self.columns)
        result.update(con.tag for con in self.constraints)
        return dict(result)


def _interval(model: MilpModel, coefficients: Dict[int, float]) -> Tuple[float, float]:
    lo = hi = 0.0
    for c, v in coefficients.items():
        col = model.columns[c]
        if v > 0:
            lo += v * col.lower
            hi += v * col.upper
        else:
            lo += v * col.upper
            hi += v * col.lower
    return lo, hi


def add_implication(
    model: MilpModel,
    literals: Sequence[Tuple[int, int]],
    coefficients: Dict[int, float],
    sense: Sense,
    rhs: float,
    tag: str,
):
    """
    Lowers "all literals at their active value => expression (sense) rhs" to big-M rows.

    Each literal away from its active value relaxes the row by M, with M the smallest
    value making the row hold everywhere within the column bounds.
    """
    lo, hi = _interval(model, coefficients)
    senses = [Sense.GE, Sense.LE] if sense is Sense.EQ else [sense]
    for row_sense in senses:
        if row_sense is Sense.GE:
            big_m = max(0.0, rhs - lo)
            sign = 1.0
        else:
            big_m = max(0.0, hi - rhs)
            sign = -1.0
        coefs = dict(coefficients)
        row_rhs = rhs
        for col, active in literals:
            if active:
                coefs[col] = coefs.get(col, 0.0) - sign * big_m
                row_rhs -= sign * big_m
            else:
                coefs[col] = coefs.get(col, 0.0) + sign * big_m
        model.add_constraint(coefs, row_sense, row_rhs, tag, literals)


def _add_indicator(model: MilpModel, binary: int, column: int, threshold: float, tags):
    add_implication(model, [(binary, 0)], {column: 1.0}, Sense.LE, threshold, tags[0])
    add_implication(model, [(binary, 1)], {column: 1.0}, Sense.GE, threshold, tags[1])
    model.indicators.append(Indicator(binary, column, threshold))


class EpsThreshold(NamedTuple):
    kind: VarKind
    side: Side
    threshold: float
    active: bool


def eps_thresholds(conflict: Conflict) -> List[EpsThreshold]:
    """
    The eight indicator thresholds of a conflict. The forward zone is seen from robot_i,
    the backward zone from robot_j, so its "i" bounds belong to side J.
    """
    fwd = conflict.forward
    bwd = conflict.backward
    return [
        EpsThreshold(VarKind.EPS_PERP_OUT, Side.I, fwd.s_perp_hi_i, fwd.has_perp),
        EpsThreshold(VarKind.EPS_PERP_IN, Side.J, fwd.s_perp_lo_j, fwd.has_perp),
        EpsThreshold(VarKind.EPS_PAR_OUT, Side.I, fwd.s_par_hi_i, fwd.has_par),
        EpsThreshold(VarKind.EPS_PAR_IN, Side.J, fwd.s_par_lo_j, fwd.has_par),
        EpsThreshold(VarKind.EPS_PERP_OUT, Side.J, bwd.s_perp_hi_i, bwd.has_perp),
        EpsThreshold(VarKind.EPS_PERP_IN, Side.I, bwd.s_perp_lo_j, bwd.has_perp),
        EpsThreshold(VarKind.EPS_PAR_OUT, Side.J, bwd.s_par_hi_i, bwd.has_par),
        EpsThreshold(VarKind.EPS_PAR_IN, Side.I, bwd.s_par_lo_j, bwd.has_par),
    ]


def state_bounds(robot: RobotSpec, disc: Discretization, tighten: bool = True):
    """
    Position and speed bounds per step.

    The loose bounds are s in [s_start, s_out + v_max*K*tau] and v in [0, v_max]. Tightened
    bounds intersect them with what bang-bang acceleration can reach from the initial
    state and with the positions from which s_out is still reachable at step K.
    :return: s_lo, s_hi, v_lo, v_hi arrays of length K + 1
    """
    K, tau = disc.K, disc.tau
    s0 = robot.s_start
    s_lo = np.full(K + 1, s0)
    s_hi = np.full(K + 1, robot.s_out + robot.v_max * K * tau)
    v_lo = np.zeros(K + 1)
    v_hi = np.full(K + 1, robot.v_max)
    if not tighten:
        return s_lo, s_hi, v_lo, v_hi

    fs_lo = np.empty(K + 1)
    fs_hi = np.empty(K + 1)
    fv_lo = np.empty(K + 1)
    fv_hi = np.empty(K + 1)
    fs_lo[0] = fs_hi[0] = s0
    fv_lo[0] = fv_hi[0] = robot.v_in
    for k in range(K):
        if fs_hi[k] < -_ENTRY_TOLERANCE:
            fv_lo[k + 1] = fv_hi[k + 1] = robot.v_in
        else:
            fv_hi[k + 1] = min(robot.v_max, fv_hi[k] + robot.a_max * tau)
            fv_lo[k + 1] = max(0.0, fv_lo[k] + robot.a_min * tau)
        fs_hi[k + 1] = fs_hi[k] + tau / 2 * (fv_hi[k] + fv_hi[k + 1])
        fs_lo[k + 1] = fs_lo[k] + tau / 2 * (fv_lo[k] + fv_lo[k + 1])

    live = robot.s_out - robot.v_max * tau * (K - np.arange(K + 1))
    s_lo = np.maximum(fs_lo, live)
    s_hi = np.minimum(fs_hi, s_hi)
    # once exited the speed is pinned to v_out by (b2), outside the kinematic rows
    v_lo = np.minimum(fv_lo, robot.v_out)
    v_hi = fv_hi
    return s_lo, s_hi, v_lo, v_hi


def _validate(robots: Sequence[RobotSpec], conflicts: Sequence[Conflict], disc: Discretization):
    if disc.tau <= 0:
        raise ModelConstructionError("Time step must be positive, got {}".format(disc.tau))
    if disc.K < 1:
        raise ModelConstructionError("Need at least one time step")
    ids = [r.id for r in robots]
    duplicates = sorted(i for i, n in Counter(ids).items() if n > 1)
    if duplicates:
        raise ModelConstructionError("Duplicate robot ids: {}".format(duplicates))
    known = set(ids)
    for z, conflict in enumerate(conflicts):
        pair = (conflict.robot_i, conflict.robot_j)
        if pair[0] == pair[1]:
            raise ModelConstructionError("Zone {} pairs robot {} with itself".format(z, pair[0]))
        for robot_id in pair:
            if robot_id not in known:
                raise ModelConstructionError(
                    "Zone {} references unknown robot {}".format(z, robot_id)
                )
        if conflict.backward.robot_i != pair[1] or conflict.backward.robot_j != pair[0]:
            raise ModelConstructionError("Zone {} has mismatched directions".format(z))
        for zone in (conflict.forward, conflict.backward):
            if not zone.has_par and not zone.has_perp:
                raise ModelConstructionError(
                    "Zone {} ({} over {}) has neither part".format(
                        z, zone.robot_i, zone.robot_j
                    )
                )


def _add_columns(model: MilpModel):
    disc = model.disc
    for robot in model.robots:
        s_lo, s_hi, v_lo, v_hi = state_bounds(robot, disc, model.options.tighten_bounds)
        if np.any(s_lo > s_hi + BOUND_TOLERANCE) or np.any(v_lo > v_hi + BOUND_TOLERANCE):
            logger.info("Robot %s cannot reach s_out within %d steps", robot.id, disc.K)
        for k in range(disc.K + 1):
            model.add_column(state_index(VarKind.S, robot.id, k), s_lo[k], s_hi[k])
        for k in range(disc.K + 1):
            model.add_column(state_index(VarKind.V, robot.id, k), v_lo[k], v_hi[k])
        for kind in (VarKind.MU, VarKind.SIGMA):
            for k in range(disc.K + 1):
                model.add_column(state_index(kind, robot.id, k), 0, 1, True)
    for z, conflict in model.zones():
        model.add_column(pi_index(z, conflict, True), 0, 1, True)
        model.add_column(pi_index(z, conflict, False), 0, 1, True)
        thresholds = eps_thresholds(conflict)
        for k in range(disc.K + 1):
            for eps in thresholds:
                # empty parts keep their columns, fixed to 0
                model.add_column(
                    eps_index(eps.kind, eps.side, z, conflict, k),
                    0,
                    1 if eps.active else 0,
                    True,
                )


def _s(model: MilpModel, robot_id: str, k: int) -> int:
    return model.column(state_index(VarKind.S, robot_id, k))


def _v(model: MilpModel, robot_id: str, k: int) -> int:
    return model.column(state_index(VarKind.V, robot_id, k))


def generate_indicator_constraints(model: MilpModel):
    for robot in model.robots:
        for k in range(model.disc.K + 1):
            s = _s(model, robot.id, k)
            _add_indicator(
                model, model.column(state_index(VarKind.MU, robot.id, k)), s, 0.0, ("h1", "h2")
            )
            _add_indicator(
                model,
                model.column(state_index(VarKind.SIGMA, robot.id, k)),
                s,
                robot.s_out,
                ("h3", "h4"),
            )
    for z, conflict in model.zones():
        for k in range(model.disc.K + 1):
            for eps in eps_thresholds(conflict):
                if not eps.active:
                    continue
                robot_id = conflict.robot_i if eps.side is Side.I else conflict.robot_j
                _add_indicator(
                    model,
                    model.column(eps_index(eps.kind, eps.side, z, conflict, k)),
                    _s(model, robot_id, k),
                    eps.threshold,
                    ("h1e", "h2e"),
                )
        model.add_constraint(
            {
                model.column(pi_index(z, conflict, True)): 1.0,
                model.column(pi_index(z, conflict, False)): 1.0,
            },
            Sense.EQ,
            1.0,
            "h5",
        )


def generate_boundary_constraints(model: MilpModel):
    K = model.disc.K
    for robot in model.robots:
        for k in range(K):
            mu = model.column(state_index(VarKind.MU, robot.id, k))
            add_implication(
                model, [(mu, 0)], {_v(model, robot.id, k + 1): 1.0}, Sense.EQ, robot.v_in, "b1"
            )
            sigma = model.column(state_index(VarKind.SIGMA, robot.id, k + 1))
            add_implication(
                model, [(sigma, 1)], {_v(model, robot.id, k): 1.0}, Sense.EQ, robot.v_out, "b2"
            )
        model.add_constraint({_s(model, robot.id, 0): 1.0}, Sense.EQ, robot.s_start, "b3")
        model.add_constraint({_s(model, robot.id, K): 1.0}, Sense.GE, robot.s_out, "b4")
        model.add_constraint({_v(model, robot.id, 0): 1.0}, Sense.EQ, robot.v_in, "b5")


def generate_kinodynamic_constraints(model: MilpModel):
    tau = model.disc.tau
    for robot in model.robots:
        for k in range(model.disc.K):
            sigma = [(model.column(state_index(VarKind.SIGMA, robot.id, k)), 0)]
            s0, s1 = _s(model, robot.id, k), _s(model, robot.id, k + 1)
            v0, v1 = _v(model, robot.id, k), _v(model, robot.id, k + 1)
            add_implication(
                model,
                sigma,
                {s1: 1.0, s0: -1.0, v1: -tau / 2, v0: -tau / 2},
                Sense.EQ,
                0.0,
                "k1",
            )
            add_implication(
                model, sigma, {v1: 1.0, v0: -1.0}, Sense.LE, robot.a_max * tau, "k2"
            )
            add_implication(
                model, sigma, {v1: 1.0, v0: -1.0}, Sense.GE, robot.a_min * tau, "k3"
            )


def generate_safety_constraints(model: MilpModel):
    tau = model.disc.tau
    strict = model.options.strict_following
    for z, conflict in model.zones():
        directions = (
            (conflict.forward, Side.I, Side.J, pi_index(z, conflict, True)),
            (conflict.backward, Side.J, Side.I, pi_index(z, conflict, False)),
        )
        for zone, holder_side, other_side, pi in directions:
            pi = model.column(pi)
            holder, other = zone.robot_i, zone.robot_j

            def eps(kind, side, k):
                return model.column(eps_index(kind, side, z, conflict, k))

            for k in range(model.disc.K):
                if zone.has_perp:
                    add_implication(
                        model,
                        [(pi, 1), (eps(VarKind.EPS_PERP_OUT, holder_side, k), 0)],
                        {eps(VarKind.EPS_PERP_IN, other_side, k + 1): 1.0},
                        Sense.LE,
                        0.0,
                        "s1",
                    )
                if zone.has_par:
                    literals = [
                        (pi, 1),
                        (eps(VarKind.EPS_PAR_IN, other_side, k + 1 if strict else k), 1),
                        (eps(VarKind.EPS_PAR_OUT, holder_side, k), 0),
                    ]
                    gap = {_s(model, holder, k + 1): 1.0, _s(model, other, k + 1): -1.0}
                    add_implication(model, literals, gap, Sense.GE, zone.offset_aij, "s2")
                    gap[_v(model, holder, k + 1)] = tau / 2
                    gap[_v(model, other, k + 1)] = -tau / 2
                    add_implication(model, literals, gap, Sense.GE, zone.offset_aij, "s3")


def set_objective(model: MilpModel, tie_break: bool = True, weight: float = 1.0):
    """
    Maximizes the mean number of exited steps, which is K + 1 minus the mean exit step.

    The tie-break adds the averaged normalized speed, scaled by 1/(N K).
    """
    n = len(model.robots)
    K = model.disc.K
    objective = {}
    for robot in model.robots:
        for k in range(K + 1):
            objective[model.column(state_index(VarKind.SIGMA, robot.id, k))] = 1.0 / n
            if tie_break:
                objective[_v(model, robot.id, k)] = weight / (n * K * robot.v_max)
    model.objective = objective
    model._arrays = None


def add_monotonicity_cuts(model: MilpModel):
    """
    Entering, exiting and passing a threshold are absorbing: s never decreases while
    the robot is inside and exit is final.
    """
    K = model.disc.K
    chains = []
    for robot in model.robots:
        for kind in (VarKind.MU, VarKind.SIGMA):
            chains.append([model.column(state_index(kind, robot.id, k)) for k in range(K + 1)])
    for z, conflict in model.zones():
        for eps in eps_thresholds(conflict):
            if eps.active:
                chains.append(
                    [
                        model.column(eps_index(eps.kind, eps.side, z, conflict, k))
                        for k in range(K + 1)
                    ]
                )
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            model.add_constraint({a: 1.0, b: -1.0}, Sense.LE, 0.0, "cut")
        model.chains.append(tuple(chain))


def _force_priorities(model: MilpModel, forced: Sequence[Tuple[str, str]]):
    pairs = set(forced)
    for holder, other in pairs:
        if (other, holder) in pairs:
            raise ModelConstructionError(
                "Contradictory priorities {0}>{1} and {1}>{0}".format(holder, other)
            )
    for holder, other in forced:
        matched = False
        for z, conflict in model.zones():
            if {conflict.robot_i, conflict.robot_j} != {holder, other}:
                continue
            matched = True
            forward = conflict.robot_i == holder
            for index, value in (
                (pi_index(z, conflict, forward), 1.0),
                (pi_index(z, conflict, not forward), 0.0),
            ):
                col = model.column(index)
                model.columns[col] = model.columns[col]._replace(lower=value, upper=value)
        if not matched:
            logger.warning("No conflict between %s and %s, priority ignored", holder, other)
    model._arrays = None


def build_model(
    robots: Sequence[RobotSpec],
    conflicts: Sequence[Conflict],
    disc: Discretization,
    options: ModelOptions = ModelOptions(),
    zone_ids: Optional[Sequence[int]] = None,
) -> MilpModel:
    """
    :param zone_ids: number of each conflict in variable names, defaults to its position.
        Models over a subset of a scenario pass the scenario positions so that indices match
        across models.
    """
    _validate(robots, conflicts, disc)
    if zone_ids is not None and (
        len(zone_ids) != len(conflicts) or len(set(zone_ids)) != len(zone_ids)
    ):
        raise ModelConstructionError(
            "Need one distinct zone id per conflict, got {} for {} conflicts".format(
                list(zone_ids), len(conflicts)
            )
        )
    model = MilpModel(robots, conflicts, disc, options, zone_ids)
    model.metadata = {
        "tau": disc.tau,
        "K": disc.K,
        "robots": len(robots),
        "zones": len(conflicts),
        "scenario_hash": hashlib.sha256(
            repr((tuple(robots), tuple(conflicts), disc, options)).encode()
        ).hexdigest(),
    }
    _add_columns(model)
    generate_indicator_constraints(model)
    generate_boundary_constraints(model)
    generate_kinodynamic_constraints(model)
    generate_safety_constraints(model)
    set_objective(model, options.tie_break, options.tie_break_weight)
    if options.cuts:
        add_monotonicity_cuts(model)
    if options.forced_priorities:
        _force_priorities(model, options.forced_priorities)
    logger.debug(
        "Built model with %d columns and %d rows (tau=%s, K=%d)",
        model.num_columns,
        model.num_rows,
        disc.tau,
        disc.K,
    )
    return model


class Solution:
    """
    Column values of a solved model with accessors by variable
    """

    def __init__(self, model: MilpModel, values: np.ndarray, objective: float):
        self.model = model
        self.values = np.asarray(values, dtype=float)
        self.objective = float(objective)

    def value(self, index: VariableIndex) -> float:
        return float(self.values[self.model.column(index)])

    def states(self, robot_id: str) -> Tuple[np.ndarray, np.ndarray]:
        K = self.model.disc.K
        s = np.array([self.value(state_index(VarKind.S, robot_id, k)) for k in range(K + 1)])
        v = np.array([self.value(state_index(VarKind.V, robot_id, k)) for k in range(K + 1)])
        return s, v

    def binaries(self) -> Dict[VariableIndex, float]:
        return {
            col.index: float(self.values[n])
            for n, col in enumerate(self.model.columns)
            if col.is_binary
        }

    def priorities(self) -> List[Tuple[int, str, str]]:
        """
        (zone, holder, other) per conflict, read from the pi columns
        """
        result = []
        for z, conflict in self.model.zones():
            if self.value(pi_index(z, conflict, True)) >= 0.5:
                result.append((z, conflict.robot_i, conflict.robot_j))
            else:
                result.append((z, conflict.robot_j, conflict.robot_i))
        return result

    @property
    def sigma_objective(self) -> float:
        """
        Objective without the tie-break term
        """
        n = len(self.model.robots)
        return sum(
            self.values[n_col] / n
            for n_col, col in enumerate(self.model.columns)
            if col.index.kind is VarKind.SIGMA
        )


def fix_receding_horizon(
    model: MilpModel, committed: Solution, new_robots: Iterable[str]
) -> MilpModel:
    """
    Pins every column that only involves committed robots to its solved value.

    :param model: the model over committed and new robots
    :param committed: solution of the previous batch
    :param new_robots: ids left free
    :return: a copy of model with pinched bounds
    """
    new = set(new_robots)
    committed_ids = {r.id for r in committed.model.robots}
    overlap = committed_ids & new
    if overlap:
        raise ConsistencyError("Robots {} are both committed and new".format(sorted(overlap)))
    lower, upper = model.column_bounds()
    pinned = 0
    for n, col in enumerate(model.columns):
        owners = set(col.index.owner)
        if owners & new or not owners <= committed_ids:
            continue
        if not committed.model.has_column(col.index):
            raise ConsistencyError(
                "Committed solution has no value for {}".format(column_label(col.index))
            )
        value = committed.value(col.index)
        if value < col.lower - BOUND_TOLERANCE or value > col.upper + BOUND_TOLERANCE:
            raise ConsistencyError(
                "Committed {} = {} violates bounds [{}, {}]".format(
                    column_label(col.index), value, col.lower, col.upper
                )
            )
        value = min(max(value, col.lower), col.upper)
        if col.is_binary:
            value = float(round(value))
        lower[n] = upper[n] = value
        pinned += 1
    logger.debug("Pinned %d columns of committed robots %s", pinned, sorted(committed_ids))
    return model.with_bounds(lower, upper)
