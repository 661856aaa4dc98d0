from . import SAFETY_VIOLATION, SubCommand
from .common import *


class VerifyCommand(SubCommand):
    @property
    def name(self):
        return "verify"

    def build_argparse(self, subparser):
        verify_parser = subparser.add_parser(
            self.name,
            help="Re-check a trajectory file against the collision zones of a scenario",
            parents=[parent_parser, input_parser],
        )
        verify_parser.add_argument("trajectory", help="Trajectory CSV written by solve")
        verify_parser.add_argument(
            "--dt",
            dest="verify_dt",
            type=float,
            default=None,
            help="Sampling step in seconds. Default=tau/20",
        )
        verify_parser.add_argument("--resolution", type=float, default=None)
        verify_parser.add_argument("--json", "-j", action="store_const", const=True, default=False)

    def subexecute(self, ns):
        scenario = self._load_scenario(ns["scenario"])
        with open(ns["trajectory"], newline="") as f:
            trajectories = read_trajectory_csv(f)
        return verify(scenario, trajectories, self.config, ns["json"])


SubCommand.register(VerifyCommand)

import json

from coordination_milp.coordinate import scenario_conflicts
from coordination_milp.trajectory import read_trajectory_csv, verify_safety
from coordination_milp.support.formatting import number_to_str


def verify(scenario, trajectories, config, as_json=False) -> int:
    known = {r.id for r in scenario.robots}
    unknown = sorted({t.robot for t in trajectories} - known)
    if unknown:
        print("Trajectories for robots not in the scenario: {}".format(", ".join(unknown)))
        return 1
    conflicts = scenario_conflicts(scenario, config.resolution)
    safety = verify_safety(trajectories, conflicts, config.verify_dt, robots=scenario.robots)
    if as_json:
        print(json.dumps(safety.to_dict(), indent=2, sort_keys=True))
    else:
        print(
            "Samples: {}  Violations: {}  Min clearance: {}".format(
                safety.samples,
                len(safety.violations),
                number_to_str(safety.min_clearance if safety.pairs else None),
            )
        )
        for v in safety.violations:
            print(
                "   {} {}/{} zone {} at t={}s (s={}, {})".format(
                    v.kind,
                    v.robot_i,
                    v.robot_j,
                    v.zone,
                    number_to_str(v.t),
                    number_to_str(v.s_i),
                    number_to_str(v.s_j),
                )
            )
    return 0 if safety.ok else SAFETY_VIOLATION
