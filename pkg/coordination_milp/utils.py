import logging
import logging.config
from configparser import ConfigParser
from typing import NamedTuple, Optional, Tuple

from coordination_milp.milp import OPTIMALITY_GAP, SolveLimits
from coordination_milp.model import ModelOptions
from coordination_milp.support.priorities import parse_priorities


def to_int(maybe_int) -> Optional[int]:
    if maybe_int is None:
        return None
    try:
        return int(maybe_int)
    except ValueError:
        return None


def to_float(maybe_float) -> Optional[float]:
    if maybe_float is None or maybe_float == "":
        return None
    try:
        return float(maybe_float)
    except ValueError:
        return None


class SolverConfig(NamedTuple):
    # None defers to the scenario file
    tau: Optional[float] = None
    horizon: Optional[float] = None
    tie_break: bool = True
    tie_break_weight: float = 1.0
    cuts: bool = True
    heuristic: bool = True
    tighten_bounds: bool = True
    strict_following: bool = True
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    gap: float = OPTIMALITY_GAP
    threads: int = 1
    engine: str = "highs"
    resolution: Optional[float] = None
    forced_priorities: Tuple[Tuple[str, str], ...] = ()
    verify_dt: Optional[float] = None

    def model_options(self) -> ModelOptions:
        return ModelOptions(
            tie_break=self.tie_break,
            tie_break_weight=self.tie_break_weight,
            cuts=self.cuts,
            tighten_bounds=self.tighten_bounds,
            strict_following=self.strict_following,
            forced_priorities=tuple(self.forced_priorities),
        )

    def solve_limits(self) -> SolveLimits:
        return SolveLimits(
            time_limit=self.time_limit,
            node_limit=self.node_limit,
            gap=self.gap,
            threads=self.threads,
        )


def config_from_config_section(config: ConfigParser, section: str = "solver") -> SolverConfig:
    """
    Creates a SolverConfig from a configparser section.

    All options are optional:
      [solver]
      tau = 0.25
      horizon = 30
      tie_break = True
      tie_break_weight = 1.0
      cuts = True
      heuristic = True
      tighten_bounds = True
      strict_following = True
      time_limit = 60
      node_limit = 100000
      gap = 1e-6
      threads = 1
      engine = highs # (highs|simplex)
      resolution = 0.1
      forced_priorities = 1>3,3>2
      verify_dt = 0.0125

    :param config:
    :param section:
    :return:
    """
    if not config.has_section(section):
        return SolverConfig()
    get = lambda key: config.get(section, key, fallback=None)
    engine = config.get(section, "engine", fallback="highs")
    if engine not in ("highs", "simplex"):
        raise Exception("Engine in [{}] must be 'highs' or 'simplex'".format(section))
    return SolverConfig(
        tau=to_float(get("tau")),
        horizon=to_float(get("horizon")),
        tie_break=config.getboolean(section, "tie_break", fallback=True),
        tie_break_weight=config.getfloat(section, "tie_break_weight", fallback=1.0),
        cuts=config.getboolean(section, "cuts", fallback=True),
        heuristic=config.getboolean(section, "heuristic", fallback=True),
        tighten_bounds=config.getboolean(section, "tighten_bounds", fallback=True),
        strict_following=config.getboolean(section, "strict_following", fallback=True),
        time_limit=to_float(get("time_limit")),
        node_limit=to_int(get("node_limit")),
        gap=config.getfloat(section, "gap", fallback=OPTIMALITY_GAP),
        threads=config.getint(section, "threads", fallback=1),
        engine=engine,
        resolution=to_float(get("resolution")),
        forced_priorities=parse_priorities(get("forced_priorities") or ""),
        verify_dt=to_float(get("verify_dt")),
    )


def config_from_ns(ns, base: SolverConfig = SolverConfig()) -> SolverConfig:
    """
    Overlays command line values that were given on top of base
    """
    vars = {}
    for field in SolverConfig._fields:
        value = ns.get(field, None)
        vars[field] = getattr(base, field) if value is None else value
    if isinstance(vars["forced_priorities"], str):
        vars["forced_priorities"] = parse_priorities(vars["forced_priorities"])
    return SolverConfig(**vars)


def read_config(file: Optional[str]) -> ConfigParser:
    config = ConfigParser()
    if file:
        with open(file) as f:
            config.read_file(f)
    return config


def setup_logging(config: Optional[ConfigParser] = None, verbose: bool = False):
    """
    Applies the [logging] section: config names a YAML dictConfig file, level a root level
    """
    file = config.get("logging", "config", fallback=None) if config else None
    if file:
        import yaml

        with open(file) as f:
            log_config = yaml.safe_load(f)
            logging.config.dictConfig(log_config)
    else:
        level = config.get("logging", "level", fallback="WARNING") if config else "WARNING"
        logging.basicConfig(level=level)
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
