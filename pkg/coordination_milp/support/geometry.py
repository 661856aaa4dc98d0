import csv
import logging
import math
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import shapely
from scipy import ndimage
from shapely.geometry import LineString, Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union
from shapely.strtree import STRtree

logger = logging.getLogger(__name__)

DEFAULT_ROBOT_LENGTH = 5.0
DEFAULT_ROBOT_WIDTH = 2.0
DEFAULT_RESOLUTION = 0.1
DEFAULT_D_PAR = 2.0
DEFAULT_V_MAX = 15.0
DEFAULT_A_MIN = -3.0
DEFAULT_A_MAX = 4.0

TOLERANCE = 1e-9

Point = Tuple[float, float]


class GeometryError(Exception):
    pass


class UnsupportedOperationError(Exception):
    pass


class PathGeometry(NamedTuple):
    polyline: Tuple[Point, ...]
    robot_length: float = DEFAULT_ROBOT_LENGTH
    robot_width: float = DEFAULT_ROBOT_WIDTH

    @property
    def arc_length(self) -> float:
        return float(LineString(self.polyline).length)

    @property
    def s_out(self) -> float:
        """
        Curvilinear length of the region: the robot has left once its rear clears the last point
        """
        return self.arc_length + self.robot_length

    def validate(self):
        if len(self.polyline) < 2:
            raise GeometryError("A path needs at least 2 points")
        for a, b in zip(self.polyline, self.polyline[1:]):
            if math.hypot(b[0] - a[0], b[1] - a[1]) <= TOLERANCE:
                raise GeometryError("Consecutive path points must be distinct: {}".format(a))
        if self.robot_length <= 0 or self.robot_width <= 0:
            raise GeometryError(
                "Robot footprint must be positive, got {}x{}".format(
                    self.robot_length, self.robot_width
                )
            )
        if self.arc_length < self.robot_length:
            raise GeometryError(
                "Path of length {:.3f} is shorter than the robot".format(self.arc_length)
            )


class AbstractPath(NamedTuple):
    s_out: float

    def validate(self):
        if self.s_out <= 0:
            raise GeometryError("s_out must be positive, got {}".format(self.s_out))


class RobotSpec(NamedTuple):
    id: str
    geometry: Union[PathGeometry, AbstractPath]
    s_out: float
    t_in: float = 0.0
    v_in: float = DEFAULT_V_MAX
    v_out: float = DEFAULT_V_MAX
    v_max: float = DEFAULT_V_MAX
    a_min: float = DEFAULT_A_MIN
    a_max: float = DEFAULT_A_MAX
    s_init: float = 0.0

    @property
    def s_start(self) -> float:
        """
        Position at t = 0. Robots entering later start upstream at uniform speed.
        """
        return self.s_init - self.v_in * self.t_in

    @property
    def is_geometric(self) -> bool:
        return isinstance(self.geometry, PathGeometry)

    def validate(self):
        self.geometry.validate()
        if self.s_out <= 0:
            raise GeometryError("Robot {}: s_out must be positive".format(self.id))
        if self.is_geometric and abs(self.geometry.s_out - self.s_out) > 1e-6:
            raise GeometryError(
                "Robot {}: s_out {} does not match its path ({})".format(
                    self.id, self.s_out, self.geometry.s_out
                )
            )
        if not 0 <= self.v_in <= self.v_max:
            raise GeometryError("Robot {}: v_in must lie in [0, v_max]".format(self.id))
        if not 0 <= self.v_out <= self.v_max:
            raise GeometryError("Robot {}: v_out must lie in [0, v_max]".format(self.id))
        if not self.a_min < 0 < self.a_max:
            raise GeometryError("Robot {}: need a_min < 0 < a_max".format(self.id))
        if self.t_in < 0:
            raise GeometryError("Robot {}: t_in must be nonnegative".format(self.id))
        if not 0 <= self.s_init < self.s_out:
            raise GeometryError("Robot {}: s_init must lie in [0, s_out)".format(self.id))


def robot_on_path(
    robot_id: str,
    polyline: Iterable[Point],
    robot_length: float = DEFAULT_ROBOT_LENGTH,
    robot_width: float = DEFAULT_ROBOT_WIDTH,
    **kinodynamics
) -> RobotSpec:
    path = PathGeometry(
        tuple((float(x), float(y)) for x, y in polyline), robot_length, robot_width
    )
    return RobotSpec(id=str(robot_id), geometry=path, s_out=path.s_out, **kinodynamics)


def _point_and_heading(path: PathGeometry, c: float) -> Tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(path.polyline, dtype=float)
    seg = np.diff(pts, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    # At a vertex the next segment wins; outside the path the end segments extend
    idx = int(np.searchsorted(cum, c, side="right")) - 1
    idx = min(max(idx, 0), len(lengths) - 1)
    u = seg[idx] / lengths[idx]
    return pts[idx] + u * (c - cum[idx]), u


def _pose(path: PathGeometry, s: float) -> Polygon:
    center, u = _point_and_heading(path, s - path.robot_length / 2)
    n = np.array([-u[1], u[0]])
    hl = u * (path.robot_length / 2)
    hw = n * (path.robot_width / 2)
    return Polygon(
        [
            tuple(center - hl - hw),
            tuple(center + hl - hw),
            tuple(center + hl + hw),
            tuple(center - hl + hw),
        ]
    )


def arc_pose(path: PathGeometry, s: float) -> Polygon:
    """
    Footprint of the robot when its front is at curvilinear position s.

    Corners are ordered rear-right, front-right, front-left, rear-left.
    :param path:
    :param s: position of the front, in [0, arc length + robot length]
    :return: the oriented rectangle
    """
    if not -TOLERANCE <= s <= path.s_out + TOLERANCE:
        raise GeometryError(
            "Arc position {} outside [0, {:.6f}]".format(s, path.s_out)
        )
    return _pose(path, s)


def swept_footprint(path: PathGeometry, s: float, resolution: float):
    half = resolution / 2
    return unary_union([_pose(path, s - half), _pose(path, s), _pose(path, s + half)])


def _grid(s_out: float, resolution: float) -> np.ndarray:
    n = int(math.floor(s_out / resolution + TOLERANCE)) + 1
    return np.arange(n) * resolution


def _sort_indices(indices: np.ndarray) -> np.ndarray:
    order = np.lexsort((indices[:, 1], indices[:, 0]))
    return indices[order]


class CollisionSamples(NamedTuple):
    resolution: float
    s_out_i: float
    s_out_j: float
    # (n, 2) integer grid indices, sorted
    indices: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.indices * self.resolution

    @property
    def count(self) -> int:
        return int(self.indices.shape[0])

    @property
    def grid_shape(self) -> Tuple[int, int]:
        return (
            len(_grid(self.s_out_i, self.resolution)),
            len(_grid(self.s_out_j, self.resolution)),
        )

    def transpose(self) -> "CollisionSamples":
        return CollisionSamples(
            self.resolution,
            self.s_out_j,
            self.s_out_i,
            _sort_indices(self.indices[:, ::-1].copy()),
        )


def compute_collision_set(
    spec_i: RobotSpec, spec_j: RobotSpec, resolution: float = DEFAULT_RESOLUTION
) -> CollisionSamples:
    for spec in (spec_i, spec_j):
        if not spec.is_geometric:
            raise UnsupportedOperationError(
                "Robot {} has an abstract path, collision sets need path geometry".format(
                    spec.id
                )
            )
    if resolution <= 0:
        raise GeometryError("Resolution must be positive, got {}".format(resolution))

    def footprints(spec):
        shapes = [
            swept_footprint(spec.geometry, s, resolution)
            for s in _grid(spec.s_out, resolution)
        ]
        arr = np.empty(len(shapes), dtype=object)
        arr[:] = shapes
        return arr

    tree = STRtree(footprints(spec_j))
    pairs = tree.query(footprints(spec_i), predicate="intersects")
    indices = np.asarray(pairs, dtype=np.int64).reshape(2, -1).T
    logger.debug(
        "Robots %s/%s: %d colliding samples", spec_i.id, spec_j.id, indices.shape[0]
    )
    return CollisionSamples(
        resolution, spec_i.s_out, spec_j.s_out, _sort_indices(indices)
    )


def split_components(samples: CollisionSamples) -> List[CollisionSamples]:
    if samples.count == 0:
        return []
    idx = samples.indices
    grid = np.zeros(samples.grid_shape, dtype=bool)
    grid[idx[:, 0], idx[:, 1]] = True
    labels, count = ndimage.label(grid, structure=np.ones((3, 3), dtype=int))
    member = labels[idx[:, 0], idx[:, 1]]
    return [samples._replace(indices=idx[member == n]) for n in range(1, count + 1)]


class Extents(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    # d = s_i - s_j
    dmin: float
    dmax: float


def _clean(value: float) -> float:
    return round(float(value), 9) + 0.0


def _normalize(shape) -> "CollisionPolygon":
    if shape.is_empty or not isinstance(shape, Polygon) or shape.area <= 0:
        raise GeometryError("Collision polygon is empty or degenerate")
    shape = orient(shape.simplify(0), sign=1.0)
    coords = [(_clean(x), _clean(y)) for x, y in shape.exterior.coords[:-1]]
    start = min(range(len(coords)), key=lambda k: (coords[k][1], coords[k][0]))
    return CollisionPolygon(tuple(coords[start:] + coords[:start]))


class CollisionPolygon(NamedTuple):
    vertices: Tuple[Point, ...]

    @property
    def shape(self) -> Polygon:
        return Polygon(self.vertices)

    @property
    def extents(self) -> Extents:
        pts = np.asarray(self.vertices, dtype=float)
        d = pts[:, 0] - pts[:, 1]
        return Extents(
            pts[:, 0].min(),
            pts[:, 0].max(),
            pts[:, 1].min(),
            pts[:, 1].max(),
            d.min(),
            d.max(),
        )

    def transpose(self) -> "CollisionPolygon":
        return _normalize(Polygon([(y, x) for x, y in self.vertices]))

    def shifted(self, offset: float) -> "CollisionPolygon":
        return _normalize(Polygon([(x + offset, y + offset) for x, y in self.vertices]))

    def validate(self):
        if len(self.vertices) < 3:
            raise GeometryError("A collision polygon needs at least 3 vertices")
        shape = self.shape
        if not shape.is_valid or shape.area <= 0:
            raise GeometryError("Collision polygon is not simple")
        if shape.convex_hull.area - shape.area > 1e-6:
            raise GeometryError("Collision polygon is not convex")
        for a, b in zip(self.vertices, self.vertices[1:] + self.vertices[:1]):
            dx = b[0] - a[0]
            dy = b[1] - a[1]
            if abs(dx) > 1e-6 and abs(dy) > 1e-6 and abs(dx - dy) > 1e-6:
                raise GeometryError(
                    "Edge {}->{} is not horizontal, vertical or diagonal".format(a, b)
                )


def polygon_from_extents(
    xmin: float, xmax: float, ymin: float, ymax: float, dmin: float, dmax: float
) -> CollisionPolygon:
    lo = ymin - 1.0
    hi = ymax + 1.0
    band = Polygon([(lo + dmin, lo), (lo + dmax, lo), (hi + dmax, hi), (hi + dmin, hi)])
    return _normalize(box(xmin, ymin, xmax, ymax).intersection(band))


def polygon_from_box(lo_i: float, hi_i: float, lo_j: float, hi_j: float) -> CollisionPolygon:
    return _normalize(box(lo_i, lo_j, hi_i, hi_j))


def bounding_polygon(
    samples: CollisionSamples, margin: Optional[float] = None
) -> CollisionPolygon:
    """
    Smallest polygon with horizontal, vertical and diagonal edges containing every sample.

    The support in each of the three edge directions is pushed out by margin (one
    resolution by default) and clipped to the coordination domain. Moving both
    coordinates by margin moves their difference by twice that.
    :param samples: one connected component
    :param margin:
    :return:
    """
    if samples.count == 0:
        raise GeometryError("Cannot bound an empty sample set")
    if margin is None:
        margin = samples.resolution
    pts = samples.points
    x = pts[:, 0]
    y = pts[:, 1]
    d = x - y
    return polygon_from_extents(
        max(0.0, x.min() - margin),
        min(samples.s_out_i, x.max() + margin),
        max(0.0, y.min() - margin),
        min(samples.s_out_j, y.max() + margin),
        d.min() - 2 * margin,
        d.max() + 2 * margin,
    )


class Direction(Enum):
    I_OVER_J = "i>j"
    J_OVER_I = "j>i"


class ConflictKind(Enum):
    FOLLOWING = "following"
    CROSSING = "crossing"
    MERGING = "merging"
    DIVERGING = "diverging"
    MERGE_DIVERGE = "merge_diverge"


PAR_FIELDS = ("s_par_lo_i", "s_par_hi_i", "s_par_lo_j", "s_par_hi_j")
PERP_FIELDS = ("s_perp_lo_i", "s_perp_hi_i", "s_perp_lo_j", "s_perp_hi_j")


class ConflictZone(NamedTuple):
    # robot_i holds priority over robot_j in this zone
    robot_i: str
    robot_j: str
    polygon: CollisionPolygon
    s_par_lo_i: float = 0.0
    s_par_hi_i: float = 0.0
    s_par_lo_j: float = 0.0
    s_par_hi_j: float = 0.0
    s_perp_lo_i: float = 0.0
    s_perp_hi_i: float = 0.0
    s_perp_lo_j: float = 0.0
    s_perp_hi_j: float = 0.0
    offset_aij: float = 0.0
    conflict_kind: ConflictKind = ConflictKind.CROSSING

    @property
    def has_par(self) -> bool:
        return any(getattr(self, f) != 0 for f in PAR_FIELDS)

    @property
    def has_perp(self) -> bool:
        return any(getattr(self, f) != 0 for f in PERP_FIELDS)

    def to_dict(self) -> Dict:
        d = {f: getattr(self, f) for f in PAR_FIELDS + PERP_FIELDS}
        d["offset_aij"] = self.offset_aij
        d["conflict_kind"] = self.conflict_kind.value
        return d


def decompose(
    polygon: CollisionPolygon,
    d_par: float = DEFAULT_D_PAR,
    direction: Direction = Direction.I_OVER_J,
    robots: Tuple[str, str] = ("i", "j"),
    s_out: Optional[Tuple[float, float]] = None,
) -> ConflictZone:
    """
    Splits the completed collision set of the priority holder into its wait-to-enter (⊥)
    and following (∥) parts.

    The completed set is {s_i <= xmax, s_j >= max(ymin, s_i - dmax)}. Its lower-right
    boundary is horizontal up to x_a = ymin + dmax and diagonal beyond, which gives
    the ⊥ and ∥ parts. When the set touches s_j = 0 the ⊥ head is folded into the ∥ part.
    """
    if d_par < 0:
        raise GeometryError("Following distance must be nonnegative, got {}".format(d_par))
    polygon.validate()
    if direction is Direction.J_OVER_I:
        polygon = polygon.transpose()
        robots = (robots[1], robots[0])
        if s_out is not None:
            s_out = (s_out[1], s_out[0])

    e = polygon.extents
    x_a = min(e.xmax, e.ymin + e.dmax)
    has_par = x_a < e.xmax - TOLERANCE
    folded = has_par and e.ymin <= TOLERANCE
    has_perp = not folded and x_a > e.xmin + TOLERANCE
    if not has_par and not has_perp:
        raise GeometryError("Collision polygon {} is degenerate".format(polygon.vertices))

    zone = ConflictZone(robots[0], robots[1], polygon)
    if has_perp:
        zone = zone._replace(
            s_perp_lo_i=e.xmin, s_perp_hi_i=x_a, s_perp_lo_j=e.ymin, s_perp_hi_j=e.ymax
        )
    if has_par:
        zone = zone._replace(
            s_par_lo_i=e.xmin if folded else x_a,
            s_par_hi_i=e.xmax,
            s_par_lo_j=e.ymin,
            s_par_hi_j=e.ymax,
            offset_aij=d_par + e.dmax,
        )

    reaches_exit = s_out is None or e.xmax >= s_out[0] - 1e-6
    if not has_par:
        kind = ConflictKind.CROSSING
    elif folded:
        kind = ConflictKind.FOLLOWING if reaches_exit else ConflictKind.DIVERGING
    else:
        kind = ConflictKind.MERGING if reaches_exit else ConflictKind.MERGE_DIVERGE
    return zone._replace(conflict_kind=kind)


class Conflict(NamedTuple):
    forward: ConflictZone
    backward: ConflictZone
    polygon: CollisionPolygon
    component: int = 0

    @property
    def robot_i(self) -> str:
        return self.forward.robot_i

    @property
    def robot_j(self) -> str:
        return self.forward.robot_j


def make_conflict(
    polygon: CollisionPolygon,
    robots: Tuple[str, str],
    d_par: float = DEFAULT_D_PAR,
    s_out: Optional[Tuple[float, float]] = None,
    component: int = 0,
    forward_overrides: Optional[Dict[str, float]] = None,
    backward_overrides: Optional[Dict[str, float]] = None,
) -> Conflict:
    forward = decompose(polygon, d_par, Direction.I_OVER_J, robots, s_out)
    backward = decompose(polygon, d_par, Direction.J_OVER_I, robots, s_out)
    if forward_overrides:
        forward = forward._replace(**forward_overrides)
    if backward_overrides:
        backward = backward._replace(**backward_overrides)
    return Conflict(forward, backward, polygon, component)


def conflicts_between(
    spec_i: RobotSpec,
    spec_j: RobotSpec,
    resolution: float = DEFAULT_RESOLUTION,
    d_par: float = DEFAULT_D_PAR,
) -> List[Conflict]:
    samples = compute_collision_set(spec_i, spec_j, resolution)
    conflicts = []
    for n, component in enumerate(split_components(samples)):
        conflicts.append(
            make_conflict(
                bounding_polygon(component),
                (spec_i.id, spec_j.id),
                d_par,
                (spec_i.s_out, spec_j.s_out),
                component=n,
            )
        )
    return conflicts


def write_samples_csv(samples: CollisionSamples, file):
    writer = csv.writer(file)
    writer.writerow(["s_i", "s_j"])
    for s_i, s_j in samples.points:
        writer.writerow(["{:.6f}".format(s_i), "{:.6f}".format(s_j)])


def contains(polygon: CollisionPolygon, s_i, s_j, shrink: float = 1e-6) -> np.ndarray:
    """
    Vectorized strict membership test. Points on the boundary are outside.
    """
    return shapely.contains_xy(polygon.shape.buffer(-shrink), s_i, s_j)
