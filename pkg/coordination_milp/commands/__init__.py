from abc import ABCMeta, abstractmethod
import json
import logging
import os
import sys
from typing import List, Sequence

from coordination_milp.model import ConsistencyError, ModelConstructionError
from coordination_milp.support.lp import SolverError
from coordination_milp.support.priorities import PriorityParseError
from coordination_milp.support.scenario import ScenarioError
from coordination_milp.trajectory import ExtractionError
from coordination_milp.utils import (
    SolverConfig,
    config_from_config_section,
    config_from_ns,
    read_config,
    setup_logging,
    to_int,
)

logger = logging.getLogger(__name__)

USAGE_ERROR = 1
SAFETY_VIOLATION = 5
SOLVER_FAILURE = 6


class SubCommand(metaclass=ABCMeta):
    def __init__(self):
        self.dry_run = False
        self.ns = None
        self.config = SolverConfig()

    @property
    @abstractmethod
    def name(self):
        pass

    @abstractmethod
    def build_argparse(self, subparser):
        raise Exception("Not implemented")

    @abstractmethod
    def subexecute(self, ns):
        raise Exception("Not implemented")

    def execute(self, ns) -> int:
        """
        Runs the subcommand and returns its exit status
        """
        self.dry_run = ns.get("dry_run", False)
        self.ns = ns
        try:
            ini = read_config(ns.get("config"))
            setup_logging(ini, ns.get("verbose", False))
            self.config = config_from_ns(ns, config_from_config_section(ini))
            result = self.subexecute(ns)
        except (ScenarioError, PriorityParseError, ModelConstructionError) as e:
            print(str(e), file=sys.stderr)
            result = USAGE_ERROR
        except (ConsistencyError, SolverError, ExtractionError) as e:
            logger.debug("%s failed", self.name, exc_info=True)
            print("Solver failure: {}".format(e), file=sys.stderr)
            result = SOLVER_FAILURE
        result = to_int(result)
        if result:
            logger.debug("%s finished with status %d", self.name, result)
        return result or 0

    def _load_scenario(self, name: str):
        from coordination_milp.support.scenario import bundled_scenario, read_scenario

        if os.path.exists(name):
            return read_scenario(name)
        try:
            return bundled_scenario(os.path.basename(name))
        except FileNotFoundError:
            raise ScenarioError("no such scenario file or bundled fixture", path=name)

    def _output_path(self, filename: str) -> str:
        return os.path.join(self.ns.get("output") or ".", filename)

    def _check_output(self, paths: Sequence[str]) -> bool:
        """
        False when a target exists and --overwrite was not given
        """
        if self.ns.get("overwrite"):
            return True
        existing = [p for p in paths if os.path.exists(p)]
        for p in existing:
            print("Output exists, use -y to overwrite: {}".format(p), file=sys.stderr)
        return not existing

    def _write(self, path: str, content: str):
        if self.dry_run:
            print("Would write: {}".format(path))
            return
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(content)
        print("Wrote {}".format(path))

    def _write_json(self, path: str, data):
        self._write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def _print_table(self, rows: List[Sequence], column_descriptions: Sequence[str]):
        from texttable import Texttable

        table = [list(column_descriptions)]
        table.extend(rows)
        t = Texttable(max_width=0)
        t.set_deco(Texttable.VLINES | Texttable.HEADER | Texttable.BORDER)
        t.add_rows(table)
        print(t.draw())


__all__ = [
    "SubCommand",
    "experiment",
    "export",
    "gen",
    "receding",
    "solve",
    "verify",
]
