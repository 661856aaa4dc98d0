import logging
import re
from enum import Enum
from importlib.resources import files
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import yaml

from coordination_milp.support.geometry import (
    DEFAULT_A_MAX,
    DEFAULT_A_MIN,
    DEFAULT_D_PAR,
    DEFAULT_RESOLUTION,
    DEFAULT_ROBOT_LENGTH,
    DEFAULT_ROBOT_WIDTH,
    DEFAULT_V_MAX,
    PAR_FIELDS,
    PERP_FIELDS,
    AbstractPath,
    CollisionPolygon,
    GeometryError,
    RobotSpec,
    polygon_from_box,
    robot_on_path,
)

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.25
DEFAULT_HORIZON = 30.0

LINE_KEY = "__line__"
ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")
OVERRIDE_FIELDS = PAR_FIELDS + PERP_FIELDS + ("offset_aij",)
KINODYNAMIC_FIELDS = ("t_in", "v_in", "v_out", "v_max", "a_min", "a_max", "s_init")


class ScenarioError(Exception):
    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        super(ScenarioError, self).__init__(str(self))

    def __str__(self):
        location = self.path or "scenario"
        if self.line is not None:
            location = "{} (line {})".format(location, self.line)
        return "{}: {}".format(location, self.message)


class ScenarioMode(Enum):
    GEOMETRIC = "geometric"
    ABSTRACT = "abstract"


class ZoneSpec(NamedTuple):
    robots: Tuple[str, str]
    polygon: CollisionPolygon
    forward: Optional[Dict[str, float]] = None
    backward: Optional[Dict[str, float]] = None


class Scenario(NamedTuple):
    mode: ScenarioMode
    robots: Tuple[RobotSpec, ...]
    zones: Tuple[ZoneSpec, ...] = ()
    d_par: float = DEFAULT_D_PAR
    tau: float = DEFAULT_TAU
    horizon: float = DEFAULT_HORIZON
    seed: Optional[int] = None
    resolution: float = DEFAULT_RESOLUTION

    def robot(self, robot_id: str) -> RobotSpec:
        for r in self.robots:
            if r.id == robot_id:
                return r
        raise KeyError(robot_id)

    def subset(self, robot_ids) -> "Scenario":
        keep = set(robot_ids)
        return self._replace(
            robots=tuple(r for r in self.robots if r.id in keep),
            zones=tuple(z for z in self.zones if set(z.robots) <= keep),
        )


class _LineLoader(yaml.SafeLoader):
    def construct_mapping(self, node, deep=False):
        mapping = super(_LineLoader, self).construct_mapping(node, deep=deep)
        mapping[LINE_KEY] = node.start_mark.line + 1
        return mapping


_REQUIRED = object()


def _join(path, key):
    if isinstance(key, int):
        return "{}[{}]".format(path, key)
    return "{}.{}".format(path, key) if path else key


def _number(mapping: Dict, key: str, path: str, default: Any = _REQUIRED) -> float:
    line = mapping.get(LINE_KEY)
    if key not in mapping:
        if default is _REQUIRED:
            raise ScenarioError("missing required field", _join(path, key), line)
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(
            "expected a number but got {!r}".format(value), _join(path, key), line
        )
    return float(value)


def _list(value, path, line, length=None) -> List:
    if not isinstance(value, list):
        raise ScenarioError("expected a list", path, line)
    if length is not None and len(value) != length:
        raise ScenarioError("expected {} entries".format(length), path, line)
    return value


def _point(value, path, line) -> Tuple[float, float]:
    pair = _list(value, path, line, 2)
    for n, v in enumerate(pair):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError("expected a number", _join(path, n), line)
    return float(pair[0]), float(pair[1])


def _robot(raw: Dict, defaults: Dict, mode: ScenarioMode, path: str) -> RobotSpec:
    line = raw.get(LINE_KEY)
    merged = dict(defaults)
    merged.update(raw)
    if "id" not in raw:
        raise ScenarioError("missing required field", _join(path, "id"), line)
    robot_id = str(raw["id"])
    if not ID_PATTERN.match(robot_id):
        raise ScenarioError(
            "robot ids may only use letters, digits, '_' and '-'", _join(path, "id"), line
        )
    kinodynamics = {
        "t_in": _number(merged, "t_in", path, 0.0),
        "v_max": _number(merged, "v_max", path, DEFAULT_V_MAX),
        "a_min": _number(merged, "a_min", path, DEFAULT_A_MIN),
        "a_max": _number(merged, "a_max", path, DEFAULT_A_MAX),
        "s_init": _number(merged, "s_init", path, 0.0),
    }
    kinodynamics["v_in"] = _number(merged, "v_in", path, kinodynamics["v_max"])
    kinodynamics["v_out"] = _number(merged, "v_out", path, kinodynamics["v_max"])

    if mode is ScenarioMode.GEOMETRIC:
        if "path" not in raw:
            raise ScenarioError("geometric robots need a path", _join(path, "path"), line)
        points = [
            _point(p, _join(_join(path, "path"), n), line)
            for n, p in enumerate(_list(raw["path"], _join(path, "path"), line))
        ]
        try:
            spec = robot_on_path(
                robot_id,
                points,
                _number(merged, "length", path, DEFAULT_ROBOT_LENGTH),
                _number(merged, "width", path, DEFAULT_ROBOT_WIDTH),
                **kinodynamics
            )
        except GeometryError as e:
            raise ScenarioError(str(e), _join(path, "path"), line)
    else:
        if "path" in raw:
            raise ScenarioError(
                "abstract robots cannot carry a path", _join(path, "path"), line
            )
        s_out = _number(merged, "s_out", path)
        spec = RobotSpec(
            id=robot_id, geometry=AbstractPath(s_out), s_out=s_out, **kinodynamics
        )
    try:
        spec.validate()
    except GeometryError as e:
        raise ScenarioError(str(e), path, line)
    return spec


def _overrides(raw, path, line) -> Optional[Dict[str, float]]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ScenarioError("expected a mapping", path, line)
    line = raw.get(LINE_KEY, line)
    result = {}
    for key in raw:
        if key == LINE_KEY:
            continue
        if key not in OVERRIDE_FIELDS:
            raise ScenarioError("unknown zone bound", _join(path, key), line)
        value = _number(raw, key, path)
        if key != "offset_aij" and value < 0:
            raise ScenarioError("bounds must be nonnegative", _join(path, key), line)
        result[key] = value
    return result


def _zone(raw: Dict, robots: Dict[str, RobotSpec], path: str) -> ZoneSpec:
    line = raw.get(LINE_KEY)
    pair = _list(raw.get("robots"), _join(path, "robots"), line, 2)
    ids = (str(pair[0]), str(pair[1]))
    for n, robot_id in enumerate(ids):
        if robot_id not in robots:
            raise ScenarioError(
                "unknown robot '{}'".format(robot_id), _join(_join(path, "robots"), n), line
            )
    if ids[0] == ids[1]:
        raise ScenarioError("a zone needs two distinct robots", _join(path, "robots"), line)
    s_out = (robots[ids[0]].s_out, robots[ids[1]].s_out)

    def check(value, field, axis):
        if value < 0:
            raise ScenarioError("bounds must be nonnegative", field, line)
        if value > s_out[axis] + 1e-9:
            raise ScenarioError(
                "bound exceeds s_out of robot {}".format(ids[axis]), field, line
            )

    try:
        if "box" in raw:
            box_path = _join(path, "box")
            intervals = _list(raw["box"], box_path, line, 2)
            bounds = []
            for axis, interval in enumerate(intervals):
                lo, hi = _point(interval, _join(box_path, axis), line)
                check(lo, _join(_join(box_path, axis), 0), axis)
                check(hi, _join(_join(box_path, axis), 1), axis)
                if hi <= lo:
                    raise ScenarioError("empty interval", _join(box_path, axis), line)
                bounds.extend([lo, hi])
            polygon = polygon_from_box(*bounds)
        elif "polygon" in raw:
            poly_path = _join(path, "polygon")
            vertices = []
            for n, v in enumerate(_list(raw["polygon"], poly_path, line)):
                x, y = _point(v, _join(poly_path, n), line)
                check(x, _join(_join(poly_path, n), 0), 0)
                check(y, _join(_join(poly_path, n), 1), 1)
                vertices.append((x, y))
            polygon = CollisionPolygon(tuple(vertices))
            polygon.validate()
        else:
            raise ScenarioError("a zone needs a box or a polygon", path, line)
    except GeometryError as e:
        raise ScenarioError(str(e), path, line)
    return ZoneSpec(
        ids,
        polygon,
        _overrides(raw.get("forward"), _join(path, "forward"), line),
        _overrides(raw.get("backward"), _join(path, "backward"), line),
    )


def load_scenario(content: str) -> Scenario:
    """
    Parses and validates a scenario document.

    Every error is a ScenarioError naming the offending field and its source line.
    :param content: YAML text
    :return:
    """
    try:
        doc = yaml.load(content, Loader=_LineLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ScenarioError(
            "malformed document: {}".format(getattr(e, "problem", e)),
            line=mark.line + 1 if mark else None,
        )
    if not isinstance(doc, dict):
        raise ScenarioError("a scenario must be a mapping")
    line = doc.get(LINE_KEY)

    mode_name = doc.get("mode")
    try:
        mode = ScenarioMode(mode_name)
    except ValueError:
        raise ScenarioError(
            "mode must be one of {}".format([m.value for m in ScenarioMode]), "mode", line
        )

    tau = _number(doc, "tau", "", DEFAULT_TAU)
    horizon = _number(doc, "horizon", "", DEFAULT_HORIZON)
    d_par = _number(doc, "d_par", "", DEFAULT_D_PAR)
    resolution = _number(doc, "resolution", "", DEFAULT_RESOLUTION)
    for name, value in (("tau", tau), ("horizon", horizon), ("resolution", resolution)):
        if value <= 0:
            raise ScenarioError("must be positive", name, line)
    if d_par < 0:
        raise ScenarioError("must be nonnegative", "d_par", line)
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ScenarioError("expected an integer", "seed", line)

    defaults = doc.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise ScenarioError("expected a mapping", "defaults", line)
    defaults = {k: v for k, v in defaults.items() if k != LINE_KEY}

    raw_robots = doc.get("robots")
    if not raw_robots:
        raise ScenarioError("a scenario needs at least one robot", "robots", line)
    robots = []
    seen = {}
    for n, raw in enumerate(_list(raw_robots, "robots", line)):
        path = _join("robots", n)
        if not isinstance(raw, dict):
            raise ScenarioError("expected a mapping", path, line)
        spec = _robot(raw, defaults, mode, path)
        if spec.id in seen:
            raise ScenarioError(
                "duplicate robot id '{}'".format(spec.id), _join(path, "id"), raw.get(LINE_KEY)
            )
        seen[spec.id] = spec
        robots.append(spec)

    zones = []
    raw_zones = doc.get("zones") or []
    if raw_zones and mode is ScenarioMode.GEOMETRIC:
        raise ScenarioError("geometric scenarios derive their zones", "zones", line)
    for n, raw in enumerate(_list(raw_zones, "zones", line)):
        if not isinstance(raw, dict):
            raise ScenarioError("expected a mapping", _join("zones", n), line)
        zones.append(_zone(raw, seen, _join("zones", n)))

    scenario = Scenario(
        mode=mode,
        robots=tuple(robots),
        zones=tuple(zones),
        d_par=d_par,
        tau=tau,
        horizon=horizon,
        seed=seed,
        resolution=resolution,
    )
    logger.debug(
        "Loaded %s scenario with %d robots and %d zones", mode.value, len(robots), len(zones)
    )
    return scenario


def read_scenario(file: str) -> Scenario:
    with open(file) as f:
        return load_scenario(f.read())


def bundled_scenario(name: str) -> Scenario:
    return load_scenario((files("coordination_milp") / "scenarios" / name).read_text())


def dump_scenario(scenario: Scenario) -> str:
    doc = {
        "mode": scenario.mode.value,
        "tau": float(scenario.tau),
        "horizon": float(scenario.horizon),
        "d_par": float(scenario.d_par),
        "resolution": float(scenario.resolution),
    }
    if scenario.seed is not None:
        doc["seed"] = int(scenario.seed)
    robots = []
    for r in scenario.robots:
        entry = {"id": r.id}
        if r.is_geometric:
            entry["path"] = [[float(x), float(y)] for x, y in r.geometry.polyline]
            entry["length"] = float(r.geometry.robot_length)
            entry["width"] = float(r.geometry.robot_width)
        else:
            entry["s_out"] = float(r.s_out)
        for field in KINODYNAMIC_FIELDS:
            value = float(getattr(r, field))
            if field == "s_init" and value == 0:
                continue
            entry[field] = value
        robots.append(entry)
    doc["robots"] = robots
    if scenario.zones:
        zones = []
        for z in scenario.zones:
            entry = {
                "robots": list(z.robots),
                "polygon": [[float(x), float(y)] for x, y in z.polygon.vertices],
            }
            if z.forward:
                entry["forward"] = {k: float(v) for k, v in z.forward.items()}
            if z.backward:
                entry["backward"] = {k: float(v) for k, v in z.backward.items()}
            zones.append(entry)
        doc["zones"] = zones
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
