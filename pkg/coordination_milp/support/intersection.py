from enum import Enum
from typing import List, Tuple

import numpy as np

LANE_OFFSET = 1.75
REGION_RADIUS = 30.0
RIGHT_TURN_RADIUS = 8.0
LEFT_TURN_RADIUS = 12.0
ARC_SEGMENTS = 16


class Approach(Enum):
    # rotation of the southern approach, degrees counterclockwise
    S = ("S", 0)
    E = ("E", 90)
    N = ("N", 180)
    W = ("W", 270)

    @property
    def code(self):
        return self.value[0]

    @property
    def rotation(self):
        return self.value[1]


class Movement(Enum):
    LEFT = "L"
    STRAIGHT = "S"
    RIGHT = "R"


def _arc(center, radius, start, end) -> List[Tuple[float, float]]:
    angles = np.linspace(start, end, ARC_SEGMENTS + 1)
    return [(center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)) for a in angles]


def _northbound(movement: Movement) -> List[Tuple[float, float]]:
    """
    Route of a vehicle entering from the south, driving north in the right-hand lane
    """
    x = LANE_OFFSET
    if movement is Movement.STRAIGHT:
        return [(x, -REGION_RADIUS), (x, REGION_RADIUS)]
    if movement is Movement.RIGHT:
        r = RIGHT_TURN_RADIUS
        center = (x + r, -LANE_OFFSET - r)
        arc = _arc(center, r, np.pi, np.pi / 2)
        return [(x, -REGION_RADIUS)] + arc + [(REGION_RADIUS, -LANE_OFFSET)]
    r = LEFT_TURN_RADIUS
    center = (x - r, LANE_OFFSET - r)
    arc = _arc(center, r, 0.0, np.pi / 2)
    return [(x, -REGION_RADIUS)] + arc + [(-REGION_RADIUS, LANE_OFFSET)]


def route_polyline(approach: Approach, movement: Movement) -> Tuple[Tuple[float, float], ...]:
    angle = np.radians(approach.rotation)
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    points = np.array(_northbound(movement)) @ rotation.T
    return tuple((round(float(px), 9), round(float(py), 9)) for px, py in points)


def route_name(approach: Approach, movement: Movement) -> str:
    return "{}_{}".format(approach.code, movement.value)


ROUTES = tuple(route_name(a, m) for a in Approach for m in Movement)


def parse_route(name: str) -> Tuple[Approach, Movement]:
    code, _, movement = name.partition("_")
    for approach in Approach:
        if approach.code == code:
            return approach, Movement(movement)
    raise ValueError("Unknown route: {}".format(name))
