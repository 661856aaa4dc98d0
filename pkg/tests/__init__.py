import os
from typing import Optional

from coordination_milp.support.geometry import (
    AbstractPath,
    RobotSpec,
    make_conflict,
    polygon_from_box,
)

LOG_FILE = os.path.join(os.path.dirname(__file__), "test_logging.yaml")

SLOW_TESTS = bool(os.environ.get("COORDINATION_SLOW_TESTS"))


def abstract_robot(robot_id, s_out=30.0, t_in=0.0, v_in=15.0, **kinodynamics) -> RobotSpec:
    kinodynamics.setdefault("v_out", 15.0)
    kinodynamics.setdefault("v_max", 15.0)
    return RobotSpec(
        id=str(robot_id),
        geometry=AbstractPath(s_out),
        s_out=s_out,
        t_in=t_in,
        v_in=v_in,
        **kinodynamics
    )


def crossing(robot_i, robot_j, box_i, box_j, d_par=2.0, s_out=None, component=0):
    """
    Conflict for a crossing box given as (lo, hi) along each path
    """
    polygon = polygon_from_box(box_i[0], box_i[1], box_j[0], box_j[1])
    return make_conflict(polygon, (str(robot_i), str(robot_j)), d_par, s_out, component)


def assertWithin(expected: float, actual: Optional[float], tolerance: float):
    """
    Checks the actual value is within tolerance of the expected one
    :param expected:
    :param actual:
    :param tolerance: absolute
    :return:
    """
    if actual is None:
        raise AssertionError("Actual is None")
    if not abs(expected - actual) <= tolerance:
        raise AssertionError(
            "{} != {} (tolerance {})".format(expected, actual, tolerance)
        )
