from . import SAFETY_VIOLATION, SubCommand
from .common import *


class SolveCommand(SubCommand):
    @property
    def name(self):
        return "solve"

    def build_argparse(self, subparser):
        solve_parser = subparser.add_parser(
            self.name,
            help="Compute time-optimal collision-free trajectories for a scenario",
            parents=[parent_parser, input_parser, output_parser, solver_parser],
        )
        solve_parser.add_argument(
            "--solver",
            choices=["builtin", "export-only"],
            default="builtin",
            help="export-only writes model.mps without solving. Default=builtin",
        )

    def subexecute(self, ns):
        scenario = self._load_scenario(ns["scenario"])
        if ns["solver"] == "export-only":
            return self._export_only(scenario)
        trajectory_file = self._output_path("trajectory.csv")
        metrics_file = self._output_path("metrics.json")
        report_file = self._output_path("report.json")
        if not self._check_output([trajectory_file, metrics_file, report_file]):
            return 1
        return solve(self, scenario, trajectory_file, metrics_file, report_file)

    def _export_only(self, scenario):
        from coordination_milp.coordinate import scenario_conflicts, scenario_discretization
        from coordination_milp.milp import export_model
        from coordination_milp.model import build_model

        target = self._output_path("model.mps")
        if not self._check_output([target]):
            return 1
        conflicts = scenario_conflicts(scenario, self.config.resolution)
        model = build_model(
            scenario.robots,
            conflicts,
            scenario_discretization(scenario, self.config),
            self.config.model_options(),
        )
        self._write(target, export_model(model, "mps"))
        return 0


SubCommand.register(SolveCommand)

import io

from coordination_milp.coordinate import diagnose_infeasibility, solve_scenario
from coordination_milp.milp import SolveStatus
from coordination_milp.support.formatting import duration_to_str, number_to_str
from coordination_milp.trajectory import write_trajectory_csv


def report_dict(result, diagnosis=None):
    report = result.report.to_dict()
    report["robots"] = len(result.scenario.robots)
    report["zones"] = len(result.conflicts)
    report["tau"] = result.disc.tau
    report["K"] = result.disc.K
    report["counts"] = result.model.counts()
    if result.priorities is not None:
        report["priorities"] = str(result.priorities)
    if result.safety is not None:
        report["safety"] = result.safety.to_dict()
    if diagnosis:
        report["diagnosis"] = diagnosis
    return report


def print_summary(cmd: SubCommand, scenario, status, objective, metrics, wall_time):
    print("Status: {}  Objective: {}  Time: {}".format(
        status.label, number_to_str(objective, 8), duration_to_str(wall_time)
    ))
    if metrics is None:
        return
    rows = []
    for robot in scenario.robots:
        rows.append(
            (
                robot.id,
                number_to_str(robot.t_in),
                number_to_str(metrics.t_out[robot.id]),
                number_to_str(metrics.sojourn[robot.id]),
            )
        )
    cmd._print_table(rows, ["Robot", "Entry (s)", "Exit (s)", "Sojourn (s)"])
    print("Mean sojourn: {}s".format(number_to_str(metrics.mean_sojourn)))


def solve(cmd: SubCommand, scenario, trajectory_file, metrics_file, report_file) -> int:
    result = solve_scenario(scenario, cmd.config)
    report = result.report
    diagnosis = None
    if report.status is SolveStatus.INFEASIBLE:
        diagnosis = diagnose_infeasibility(scenario, cmd.config, result.conflicts)
        print("Infeasible: {}".format(diagnosis))
    print_summary(cmd, scenario, report.status, report.objective, result.metrics, report.wall_time)
    cmd._write_json(report_file, report_dict(result, diagnosis))
    if result.trajectories is not None:
        buffer = io.StringIO()
        write_trajectory_csv(result.trajectories, buffer)
        cmd._write(trajectory_file, buffer.getvalue())
        cmd._write_json(metrics_file, result.metrics.to_dict())
        if not result.safety.ok:
            print("Safety check found {} violations".format(len(result.safety.violations)))
            return SAFETY_VIOLATION
    return report.status.exit_code
