import itertools
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from coordination_milp.support.geometry import (
    DEFAULT_A_MAX,
    DEFAULT_A_MIN,
    DEFAULT_ROBOT_LENGTH,
    DEFAULT_ROBOT_WIDTH,
    DEFAULT_V_MAX,
    AbstractPath,
    RobotSpec,
    polygon_from_box,
    robot_on_path,
)
from coordination_milp.support.intersection import ROUTES, parse_route, route_polyline
from coordination_milp.support.scenario import (
    DEFAULT_TAU,
    Scenario,
    ScenarioMode,
    ZoneSpec,
)

logger = logging.getLogger(__name__)

DEFAULT_ARRIVAL_HORIZON = 30.0
ABSTRACT_HORIZON = 25.0


class ArrivalModel(NamedTuple):
    # vehicles per second on each route
    rate: float = 0.05
    speed_mean: float = 12.0
    speed_std: float = 3.0
    speed_lo: float = 10.0
    speed_hi: float = 15.0
    routes: Tuple[str, ...] = ROUTES
    min_headway: float = 2.0
    v_max: float = DEFAULT_V_MAX
    a_min: float = DEFAULT_A_MIN
    a_max: float = DEFAULT_A_MAX
    robot_length: float = DEFAULT_ROBOT_LENGTH
    robot_width: float = DEFAULT_ROBOT_WIDTH

    def validate(self):
        if self.rate <= 0:
            raise ValueError("Arrival rate must be positive, got {}".format(self.rate))
        if self.speed_lo > self.speed_hi:
            raise ValueError("Speed range [{}, {}] is empty".format(self.speed_lo, self.speed_hi))
        if self.speed_lo < 0 or self.speed_hi > self.v_max:
            raise ValueError(
                "Speed range [{}, {}] must lie within [0, {}]".format(
                    self.speed_lo, self.speed_hi, self.v_max
                )
            )
        if not self.routes:
            raise ValueError("At least one route is needed")
        for route in self.routes:
            parse_route(route)


def truncated_normal(rng: np.random.Generator, mean, std, lo, hi) -> float:
    if lo == hi or std == 0:
        return float(min(max(mean, lo), hi))
    while True:
        value = rng.normal(mean, std)
        if lo <= value <= hi:
            return float(value)


def _arrival_times(arrivals: ArrivalModel, duration: float, rng, vehicles: Optional[int]):
    if vehicles is None:
        stream = []
        for route in arrivals.routes:
            t = rng.exponential(1 / arrivals.rate)
            while t <= duration:
                stream.append((float(t), route))
                t += rng.exponential(1 / arrivals.rate)
        return stream
    total = arrivals.rate * len(arrivals.routes)
    times = np.cumsum(rng.exponential(1 / total, size=vehicles))
    routes = rng.choice(len(arrivals.routes), size=vehicles)
    times -= times[0] if vehicles else 0
    return [(float(t), arrivals.routes[r]) for t, r in zip(times, routes)]


def gen_scenario(
    arrivals: ArrivalModel,
    duration: float,
    seed: Optional[int] = None,
    vehicles: Optional[int] = None,
    tau: float = DEFAULT_TAU,
    horizon: float = DEFAULT_ARRIVAL_HORIZON,
) -> Scenario:
    """
    A Poisson vehicle stream on the intersection template.

    :param duration: arrivals are drawn in [0, duration]
    :param vehicles: draw exactly this many vehicles instead, the first entering at 0
    """
    if duration <= 0:
        raise ValueError("Duration must be positive, got {}".format(duration))
    arrivals.validate()
    rng = np.random.default_rng(seed)
    stream = sorted(_arrival_times(arrivals, duration, rng, vehicles))

    last_entry = {}
    spaced = []
    for t, route in stream:
        approach, _ = parse_route(route)
        if approach in last_entry:
            t = max(t, last_entry[approach] + arrivals.min_headway)
        last_entry[approach] = t
        spaced.append((t, route))
    spaced.sort()

    robots = []
    for n, (t, route) in enumerate(spaced):
        approach, movement = parse_route(route)
        speed = truncated_normal(
            rng, arrivals.speed_mean, arrivals.speed_std, arrivals.speed_lo, arrivals.speed_hi
        )
        robots.append(
            robot_on_path(
                str(n + 1),
                route_polyline(approach, movement),
                arrivals.robot_length,
                arrivals.robot_width,
                t_in=round(t, 9),
                v_in=round(speed, 9),
                v_out=arrivals.v_max,
                v_max=arrivals.v_max,
                a_min=arrivals.a_min,
                a_max=arrivals.a_max,
            )
        )
    logger.debug("Generated %d vehicles over %ss", len(robots), duration)
    return Scenario(
        mode=ScenarioMode.GEOMETRIC,
        robots=tuple(robots),
        tau=tau,
        horizon=horizon,
        seed=seed,
    )


def gen_abstract_scenario(
    n: int,
    zones: int,
    seed: Optional[int] = None,
    tau: float = DEFAULT_TAU,
    horizon: float = ABSTRACT_HORIZON,
    v_max: float = DEFAULT_V_MAX,
    a_min: float = DEFAULT_A_MIN,
    a_max: float = DEFAULT_A_MAX,
) -> Scenario:
    """
    Random robots on abstract paths with crossing boxes between random pairs.

    Boxes start at 38 m or later, past the stopping distance from 15 m/s at -3 m/s^2.
    """
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    if zones > len(pairs):
        raise ValueError("{} robots allow at most {} zones, got {}".format(n, len(pairs), zones))
    rng = np.random.default_rng(seed)
    robots = []
    for k in range(1, n + 1):
        s_out = round(float(rng.uniform(75, 85)), 6)
        robots.append(
            RobotSpec(
                id=str(k),
                geometry=AbstractPath(s_out),
                s_out=s_out,
                t_in=round(float(rng.uniform(0, 2)), 6),
                v_in=round(float(min(rng.uniform(10, 15), v_max)), 6),
                v_out=v_max,
                v_max=v_max,
                a_min=a_min,
                a_max=a_max,
            )
        )
    specs = []
    for p in sorted(rng.choice(len(pairs), size=zones, replace=False).tolist()):
        i, j = pairs[p]
        lo_i, lo_j = (round(float(x), 6) for x in rng.uniform(38, 55, size=2))
        w_i, w_j = (round(float(x), 6) for x in rng.uniform(7, 12, size=2))
        specs.append(
            ZoneSpec((str(i), str(j)), polygon_from_box(lo_i, lo_i + w_i, lo_j, lo_j + w_j))
        )
    return Scenario(
        mode=ScenarioMode.ABSTRACT,
        robots=tuple(robots),
        zones=tuple(specs),
        tau=tau,
        horizon=horizon,
        seed=seed,
    )
