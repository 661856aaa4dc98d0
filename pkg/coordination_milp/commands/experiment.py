from . import SubCommand
from .common import *


def _add_experiment_arguments(parser, instances):
    parser.add_argument(
        "--instances",
        type=int,
        default=instances,
        help="Number of random instances. Default={}".format(instances),
    )
    parser.add_argument("--seed", type=int, default=0, help="Instance i uses seed + i. Default=0")
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Instances solved in parallel. Default=1",
    )


class TimestepExperimentCommand(SubCommand):
    @property
    def name(self):
        return "exp-timestep"

    def build_argparse(self, subparser):
        from coordination_milp.experiments import DEFAULT_TAUS, TIMESTEP_INSTANCES, TIMESTEP_ROBOTS

        parser = subparser.add_parser(
            self.name,
            help="Relative optimality loss as the step duration grows",
            parents=[parent_parser, output_parser],
        )
        _add_experiment_arguments(parser, TIMESTEP_INSTANCES)
        parser.add_argument(
            "--taus",
            type=FloatListType(),
            default=list(DEFAULT_TAUS),
            help="Ascending step durations, the first is the baseline. Default={}".format(
                ",".join(str(t) for t in DEFAULT_TAUS)
            ),
        )
        parser.add_argument("--robots", type=int, default=TIMESTEP_ROBOTS)
        parser.add_argument("--zones", type=int, default=None)
        parser.add_argument("--time-limit", type=DurationType(), default=None)

    def subexecute(self, ns):
        from coordination_milp.experiments import run_timestep_experiment

        if not self._check_output(outputs(self, "timestep")):
            return 1
        try:
            result = run_timestep_experiment(
                instances=ns["instances"],
                taus=ns["taus"],
                seed=ns["seed"],
                robots=ns["robots"],
                zones=ns["zones"],
                config=self.config,
                threads=ns["workers"],
            )
        except ValueError as e:
            print(str(e))
            return 1
        summary = result.summary
        rows = [
            (tau, number_to_str(mean), number_to_str(std))
            for tau, mean, std in zip(summary["taus"], summary["mean_loss"], summary["std_loss"])
        ]
        self._print_table(rows, ["Tau (s)", "Mean loss", "Std"])
        print(
            "Slope: {}/s  Spearman: {}  Dropped: {}".format(
                number_to_str(summary["slope"]),
                number_to_str(summary["spearman"]),
                len(summary["dropped"]),
            )
        )
        write_result(self, result, "timestep")
        return 0


class RuntimeExperimentCommand(SubCommand):
    @property
    def name(self):
        return "exp-runtime"

    def build_argparse(self, subparser):
        from coordination_milp.experiments import (
            DEFAULT_COUNTS,
            RUNTIME_HORIZON,
            RUNTIME_INSTANCES,
            RUNTIME_TAU,
        )

        parser = subparser.add_parser(
            self.name,
            help="Computation time as the number of robots grows",
            parents=[parent_parser, output_parser],
        )
        _add_experiment_arguments(parser, RUNTIME_INSTANCES)
        parser.add_argument(
            "--counts",
            type=IntListType(),
            default=list(DEFAULT_COUNTS),
            help="Ascending robot counts. Default={}".format(",".join(str(n) for n in DEFAULT_COUNTS)),
        )
        parser.add_argument("--tau", type=float, default=RUNTIME_TAU, help="Default={}".format(RUNTIME_TAU))
        parser.add_argument(
            "--horizon", type=DurationType(), default=RUNTIME_HORIZON, help="Default={}".format(RUNTIME_HORIZON)
        )
        parser.add_argument("--time-limit", type=DurationType(), default=None)

    def subexecute(self, ns):
        from coordination_milp.experiments import run_runtime_experiment

        if not self._check_output(outputs(self, "runtime")):
            return 1
        try:
            result = run_runtime_experiment(
                counts=ns["counts"],
                tau=ns["tau"],
                instances=ns["instances"],
                seed=ns["seed"],
                horizon=ns["horizon"],
                config=self.config,
                threads=ns["workers"],
            )
        except ValueError as e:
            print(str(e))
            return 1
        summary = result.summary
        rows = [
            (n, duration_to_str(solve), duration_to_str(build), censored)
            for n, solve, build, censored in zip(
                summary["counts"],
                summary["mean_solve_time"],
                summary["mean_build_export_time"],
                summary["censored"],
            )
        ]
        self._print_table(rows, ["Robots", "Solve", "Build + export", "Censored"])
        write_result(self, result, "runtime")
        return 0


SubCommand.register(TimestepExperimentCommand)
SubCommand.register(RuntimeExperimentCommand)

from coordination_milp.support.formatting import duration_to_str, number_to_str


def outputs(cmd: SubCommand, name: str):
    return [
        cmd._output_path("{}.csv".format(name)),
        cmd._output_path("{}.svg".format(name)),
        cmd._output_path("summary.json"),
    ]


def write_result(cmd: SubCommand, result, name: str):
    if cmd.dry_run:
        for path in outputs(cmd, name):
            print("Would write: {}".format(path))
        return
    directory = cmd.ns.get("output") or "."
    result.write(directory, name)
    for path in outputs(cmd, name):
        print("Wrote {}".format(path))
