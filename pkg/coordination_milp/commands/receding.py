from . import SAFETY_VIOLATION, SubCommand
from .common import *


class RecedingCommand(SubCommand):
    @property
    def name(self):
        return "receding"

    def build_argparse(self, subparser):
        receding_parser = subparser.add_parser(
            self.name,
            help="Solve robots in batches of entry time, keeping earlier batches fixed",
            parents=[parent_parser, input_parser, output_parser, solver_parser],
        )
        receding_parser.add_argument(
            "--window",
            type=DurationType(),
            required=True,
            help="Length of each entry-time batch, e.g. 5 or 5s",
        )

    def subexecute(self, ns):
        scenario = self._load_scenario(ns["scenario"])
        trajectory_file = self._output_path("trajectory.csv")
        metrics_file = self._output_path("metrics.json")
        report_file = self._output_path("report.json")
        if not self._check_output([trajectory_file, metrics_file, report_file]):
            return 1
        return receding(self, scenario, ns["window"], trajectory_file, metrics_file, report_file)


SubCommand.register(RecedingCommand)

import io

from coordination_milp.receding import solve_receding
from coordination_milp.support.formatting import duration_to_str, number_to_str
from coordination_milp.trajectory import write_trajectory_csv


def receding(cmd: SubCommand, scenario, window, trajectory_file, metrics_file, report_file) -> int:
    result = solve_receding(scenario, window, cmd.config)
    rows = []
    for batch in result.batches:
        rows.append(
            (
                batch.index,
                "{}-{}".format(number_to_str(batch.window[0]), number_to_str(batch.window[1])),
                ",".join(batch.robots),
                batch.report.status.label,
                duration_to_str(batch.report.wall_time),
            )
        )
    cmd._print_table(rows, ["Batch", "Window (s)", "Robots", "Status", "Time"])
    report = {
        "status": result.status.label,
        "objective": result.objective,
        "batches": [
            dict(index=b.index, window=list(b.window), robots=list(b.robots), **b.report.to_dict())
            for b in result.batches
        ],
    }
    if result.failed_batch is not None:
        print("Batch {} has no solution".format(result.failed_batch))
        report["failed_batch"] = result.failed_batch
    if result.priorities is not None:
        report["priorities"] = str(result.priorities)
        report["acyclic"] = result.priorities.is_acyclic()
    if result.safety is not None:
        report["safety"] = result.safety.to_dict()
    cmd._write_json(report_file, report)
    if result.trajectories is None:
        return result.status.exit_code
    buffer = io.StringIO()
    write_trajectory_csv(result.trajectories, buffer)
    cmd._write(trajectory_file, buffer.getvalue())
    cmd._write_json(metrics_file, result.metrics.to_dict())
    print("Mean sojourn: {}s".format(number_to_str(result.metrics.mean_sojourn)))
    if not result.safety.ok:
        return SAFETY_VIOLATION
    return result.status.exit_code
